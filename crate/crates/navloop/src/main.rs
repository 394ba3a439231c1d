use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use models::ModelSet;
use navloop::{
    export_action_hist, export_latents, load_models, parse_suite, run_benchmark, worker_count,
    write_episodes_csv, write_manifest, write_metrics_csv, ControllerKind,
};
use simworld::SimParams;
use training::{run_stage1, run_stage2, Stage2Options, TrainConfig};

#[derive(Parser)]
#[command(
    name = "navloop",
    version,
    about = "Closed-loop navigation learning: demonstrations, training, benchmarks"
)]
struct Cli {
    /// JSON file overriding training hyperparameters (defaults otherwise).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; every random choice in a run derives from it.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Output directory, created if needed.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a demonstration dataset with the scripted planner.
    GenData {
        /// Successful trajectories to keep.
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Scene suite or comma-separated scene names (default: demo suite).
        #[arg(long)]
        scenes: Option<String>,
    },
    /// Train the perception/reasoning/decision networks on demonstrations.
    TrainDemo {
        /// Dataset written by gen-data.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
    },
    /// Fine-tune with on-policy reinforcement learning.
    TrainRl {
        /// Checkpoint directory to start from (omit with --no-stage1).
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = 150)]
        iters: usize,
        /// Scene suite or comma-separated scene names (default: training suite).
        #[arg(long)]
        scenes: Option<String>,
        /// Disable the reasoning model: no similarity reward, no reasoning updates.
        #[arg(long)]
        no_reasoning: bool,
        /// Run reasoning updates with all weights fixed to one.
        #[arg(long)]
        no_drw: bool,
        /// Start from a fresh random initialization instead of --init.
        #[arg(long)]
        no_stage1: bool,
        #[arg(long, default_value_t = 25)]
        checkpoint_every: usize,
    },
    /// Run the outcome benchmark and write metrics CSVs.
    Eval {
        /// Checkpoint directory (needed for the policy controller).
        #[arg(long)]
        ckpt: Option<PathBuf>,
        /// demo | training | few-shot | zero-shot | comma-separated names.
        #[arg(long, default_value = "few-shot")]
        suite: String,
        /// Episodes per scenario.
        #[arg(long, default_value_t = 400)]
        episodes: usize,
        /// policy | random | never-move | straight.
        #[arg(long, default_value = "policy")]
        controller: String,
    },
    /// Write per-step reasoning latent means for analysis.
    ExportLatents {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, default_value = "few-shot")]
        suite: String,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
    },
    /// Write a histogram of executed linear velocities.
    ExportHist {
        #[arg(long)]
        ckpt: Option<PathBuf>,
        #[arg(long, default_value = "few-shot")]
        suite: String,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value = "policy")]
        controller: String,
    },
    /// Summarize a demonstration dataset.
    InspectData {
        #[arg(long)]
        data: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<TrainConfig> {
    match path {
        None => Ok(TrainConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            Ok(training::parse_config(&text)?)
        }
    }
}

fn csv_writer(path: &PathBuf) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli.config)?;
    cfg.validate()?;
    let sim = SimParams::default();
    let out = &cli.out;
    std::fs::create_dir_all(out)?;

    match cli.cmd {
        Cmd::GenData { count, scenes } => {
            let specs = match scenes {
                Some(s) => parse_suite(&s)?,
                None => scenes::demo_scenes(),
            };
            let (trajs, report) = demogen::generate_demo_corpus(&specs, count, sim, cli.seed)?;
            let (clean, dropped) = demogen::clean_dataset(trajs);
            let path = out.join("demos.navd");
            demogen::save_trajectories(&path, &clean)?;
            println!(
                "kept {} of {} attempts (no_path={} not_reached={} too_short={} dropped={})",
                clean.len(),
                report.attempts,
                report.no_path,
                report.not_reached,
                report.too_short,
                dropped
            );
            println!("wrote {}", path.display());
            write_manifest(out, "gen-data", &cfg, cli.seed)?;
        }

        Cmd::TrainDemo { data, iters } => {
            let trajs = demogen::load_trajectories(&data)?;
            let mut csv = csv_writer(&out.join("stage1_log.csv"))?;
            let (models, report) = run_stage1(&trajs, &cfg, &sim, cli.seed, iters, &mut csv)?;
            csv.flush()?;
            let ckpt_dir = out.join("stage1");
            models.save(&ckpt_dir)?;
            println!(
                "stage1: {} iters, held-out action mse {:.6} -> {:.6}",
                report.iters, report.initial_heldout_mse, report.final_heldout_mse
            );
            println!(
                "loss window mean {:.4} -> {:.4}",
                report.first_window_total, report.last_window_total
            );
            println!("checkpoints in {}", ckpt_dir.display());
            write_manifest(out, "train-demo", &cfg, cli.seed)?;
        }

        Cmd::TrainRl {
            init,
            iters,
            scenes,
            no_reasoning,
            no_drw,
            no_stage1,
            checkpoint_every,
        } => {
            let mcfg = cfg.model_config();
            let mut models = if no_stage1 {
                ModelSet::init(mcfg, cli.seed)
            } else {
                let dir = init.ok_or_else(|| {
                    anyhow::anyhow!("--init <dir> is required unless --no-stage1 is set")
                })?;
                load_models(&dir, mcfg)?
            };
            let specs = match scenes {
                Some(s) => parse_suite(&s)?,
                None => scenes::training_scenes(),
            };
            let ckpt_dir = out.join("rl");
            let opts = Stage2Options {
                iters,
                no_reasoning,
                no_drw,
                checkpoint_every,
                out_dir: Some(ckpt_dir.clone()),
            };
            let mut csv = csv_writer(&out.join("train_log.csv"))?;
            let report = run_stage2(&mut models, &cfg, &sim, &specs, cli.seed, &opts, &mut csv)?;
            csv.flush()?;
            println!(
                "stage2: {} iters, {} episodes, success rate {:.1}%, mean return {:.2}",
                report.iters_run,
                report.episodes_completed,
                100.0 * report.final_success_rate,
                report.final_mean_return
            );
            println!(
                "reasoning updates {}/{} (guard trips {})",
                report.drw_applied, report.drw_invocations, report.guard_trips
            );
            println!("checkpoints in {}", ckpt_dir.display());
            write_manifest(out, "train-rl", &cfg, cli.seed)?;
        }

        Cmd::Eval { ckpt, suite, episodes, controller } => {
            let kind = ControllerKind::parse(&controller)?;
            let models = maybe_load(kind, ckpt, &cfg)?;
            let specs = parse_suite(&suite)?;
            let threads = worker_count(specs.len() * episodes);
            let (report, results) =
                run_benchmark(&specs, kind, models.as_ref(), sim, episodes, cli.seed, threads)?;
            let metrics_path = out.join("metrics.csv");
            let mut metrics = csv_writer(&metrics_path)?;
            write_metrics_csv(&report, &mut metrics)?;
            metrics.flush()?;
            let episodes_path = out.join("episodes.csv");
            let mut eps = csv_writer(&episodes_path)?;
            write_episodes_csv(&results, &mut eps)?;
            eps.flush()?;
            let o = &report.overall;
            println!(
                "overall: success {:.1}% | arriving steps {:.1} | collision {:.1}% | timeout {:.1}%",
                o.success_rate, o.arriving_step_mean, o.collision_rate, o.timeout_rate
            );
            println!("wrote {} and {}", metrics_path.display(), episodes_path.display());
            write_manifest(out, "eval", &cfg, cli.seed)?;
        }

        Cmd::ExportLatents { ckpt, suite, episodes } => {
            let models = load_models(&ckpt, cfg.model_config())?;
            let specs = parse_suite(&suite)?;
            let path = out.join("latents.csv");
            let mut w = csv_writer(&path)?;
            export_latents(&models, &specs, sim, episodes, cli.seed, &mut w)?;
            w.flush()?;
            println!("wrote {}", path.display());
            write_manifest(out, "export-latents", &cfg, cli.seed)?;
        }

        Cmd::ExportHist { ckpt, suite, episodes, bins, controller } => {
            let kind = ControllerKind::parse(&controller)?;
            let models = maybe_load(kind, ckpt, &cfg)?;
            let specs = parse_suite(&suite)?;
            let path = out.join("action_hist.csv");
            let mut w = csv_writer(&path)?;
            export_action_hist(&specs, kind, models.as_ref(), sim, episodes, bins, cli.seed, &mut w)?;
            w.flush()?;
            println!("wrote {}", path.display());
            write_manifest(out, "export-hist", &cfg, cli.seed)?;
        }

        Cmd::InspectData { data } => {
            let trajs = demogen::load_trajectories(&data)?;
            println!("trajectories: {}", trajs.len());
            let mut by_scene = std::collections::BTreeMap::new();
            let mut steps = 0usize;
            for t in &trajs {
                *by_scene.entry(t.scene.clone()).or_insert(0usize) += 1;
                steps += t.steps.len();
            }
            for (scene, n) in by_scene {
                println!("scene {scene}: {n}");
            }
            if !trajs.is_empty() {
                println!("mean_steps: {:.1}", steps as f64 / trajs.len() as f64);
            }
        }
    }
    Ok(())
}

fn maybe_load(
    kind: ControllerKind,
    ckpt: Option<PathBuf>,
    cfg: &TrainConfig,
) -> anyhow::Result<Option<ModelSet>> {
    if !kind.needs_checkpoint() {
        return Ok(None);
    }
    let dir = ckpt.ok_or_else(|| {
        anyhow::anyhow!("--ckpt <dir> is required for --controller policy")
    })?;
    Ok(Some(load_models(&dir, cfg.model_config())?))
}
