//! Demonstration corpus generation: plan a grid path, drive it with pure
//! pursuit, and keep episodes that reach the goal.

use scenes::{build_scene, SceneSpec};
use simworld::{Event, SimParams};

use crate::astar::plan_astar;
use crate::error::DemoError;
use crate::grid::{OccupancyGrid, GRID_RES};
use crate::navd::{DemoStep, Trajectory};
use crate::track::track_path;

/// Demonstrations shorter than one model context window teach nothing.
pub const MIN_DEMO_STEPS: usize = 20;
/// Extra clearance added to the robot radius when rasterizing the grid.
pub const PLAN_INFLATION: f64 = 0.05;
/// Attempt budget as a multiple of the requested corpus size.
const RETRY_FACTOR: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GenReport {
    pub kept: usize,
    pub attempts: usize,
    pub no_path: usize,
    pub not_reached: usize,
    pub too_short: usize,
    pub build_failures: usize,
}

/// Drops trajectories unusable for demonstration learning; returns the
/// survivors and the number removed.
pub fn clean_dataset(trajectories: Vec<Trajectory>) -> (Vec<Trajectory>, usize) {
    let before = trajectories.len();
    let kept: Vec<Trajectory> = trajectories
        .into_iter()
        .filter(|t| t.event == Event::Reached && t.steps.len() >= MIN_DEMO_STEPS)
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Generates `count` successful demonstrations, cycling through `specs`
/// round-robin with one world seed per attempt. Fails once the attempt
/// budget (5x the request) is spent.
pub fn generate_demo_corpus(
    specs: &[SceneSpec],
    count: usize,
    params: SimParams,
    base_seed: u64,
) -> Result<(Vec<Trajectory>, GenReport), DemoError> {
    assert!(!specs.is_empty(), "need at least one scene");
    let mut kept: Vec<Trajectory> = Vec::with_capacity(count);
    let mut report = GenReport::default();
    let budget = count.saturating_mul(RETRY_FACTOR);

    while kept.len() < count && report.attempts < budget {
        let spec = &specs[report.attempts % specs.len()];
        let seed = base_seed.wrapping_add(report.attempts as u64);
        report.attempts += 1;

        let mut world = match build_scene(spec, params, seed) {
            Ok(w) => w,
            Err(_) => {
                report.build_failures += 1;
                continue;
            }
        };
        let grid = OccupancyGrid::from_statics(
            world.statics(),
            GRID_RES,
            params.robot_radius + PLAN_INFLATION,
        );
        let Some(path) = plan_astar(&grid, world.robot_pose().position(), world.goal()) else {
            report.no_path += 1;
            continue;
        };
        let episode = track_path(&mut world, &path).expect("fresh worlds accept steps");
        if episode.event != Event::Reached {
            report.not_reached += 1;
            continue;
        }
        if episode.steps.len() < MIN_DEMO_STEPS {
            report.too_short += 1;
            continue;
        }
        kept.push(Trajectory {
            scene: spec.name.clone(),
            seed,
            event: episode.event,
            steps: episode
                .steps
                .into_iter()
                .map(|(obs, act)| DemoStep {
                    obs: obs.as_slice().iter().map(|&v| v as f32).collect(),
                    act: [act[0] as f32, act[1] as f32],
                })
                .collect(),
        });
    }

    report.kept = kept.len();
    if kept.len() < count {
        return Err(DemoError::Exhausted {
            got: kept.len(),
            want: count,
            attempts: report.attempts,
        });
    }
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy(event: Event, n: usize) -> Trajectory {
        Trajectory {
            scene: "s".to_string(),
            seed: 0,
            event,
            steps: (0..n)
                .map(|_| DemoStep {
                    obs: vec![0.0; simworld::OBS_LEN],
                    act: [0.0, 0.0],
                })
                .collect(),
        }
    }

    #[test]
    fn cleaning_drops_failures_and_stubs() {
        let (kept, dropped) = clean_dataset(vec![
            dummy(Event::Reached, 25),
            dummy(Event::Collided, 25),
            dummy(Event::Reached, 19),
            dummy(Event::Timeout, 400),
            dummy(Event::Reached, 20),
        ]);
        assert_eq!(kept.len(), 2);
        assert_eq!(dropped, 3);
        assert!(kept.iter().all(|t| t.event == Event::Reached));
    }

    #[test]
    fn corpus_generation_yields_clean_reached_episodes() {
        let specs = scenes::demo_scenes();
        let (trajs, report) = generate_demo_corpus(&specs, 9, SimParams::default(), 100).unwrap();
        assert_eq!(trajs.len(), 9);
        assert_eq!(report.kept, 9);
        assert!(report.attempts >= 9);
        for t in &trajs {
            assert_eq!(t.event, Event::Reached);
            assert!(t.steps.len() >= MIN_DEMO_STEPS);
            assert!(t.steps.iter().all(|s| s.obs.len() == simworld::OBS_LEN));
        }
        // Round-robin across the three demo scenes.
        for spec in &specs {
            assert!(trajs.iter().any(|t| t.scene == spec.name));
        }
    }

    #[test]
    fn corpus_generation_is_deterministic() {
        let specs = scenes::demo_scenes();
        let (a, _) = generate_demo_corpus(&specs, 4, SimParams::default(), 9).unwrap();
        let (b, _) = generate_demo_corpus(&specs, 4, SimParams::default(), 9).unwrap();
        assert_eq!(a, b);
    }
}
