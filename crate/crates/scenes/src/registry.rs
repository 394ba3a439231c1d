//! Built-in scene corpus. Scenes come in four suites: training scenes for
//! learning, demonstration scenes (static only, so a grid planner can
//! drive them), few-shot scenes for fine-tuning experiments, and
//! zero-shot scenes derived from few-shot ones by perturbation.

use crate::perturb::{perturb_scene, Perturbation};
use crate::spec::{parse_scene, Region, SceneSpec};
use crate::SceneError;

const BUNDLED: &[&str] = &[
    include_str!("../data/train_open.json"),
    include_str!("../data/train_sparse.json"),
    include_str!("../data/train_dense.json"),
    include_str!("../data/train_dynamic.json"),
    include_str!("../data/dyn_open4.json"),
    include_str!("../data/fs_maze_small.json"),
    include_str!("../data/fs_maze_large.json"),
    include_str!("../data/fs_roadblock.json"),
    include_str!("../data/fs_narrow_passage.json"),
    include_str!("../data/fs_intersection.json"),
    include_str!("../data/fs_obstacle_field.json"),
    include_str!("../data/fs_corridor_crowd.json"),
    include_str!("../data/fs_roundabout.json"),
];

const TRAINING: &[&str] = &[
    "train_open",
    "train_sparse",
    "train_dense",
    "train_dynamic",
    "dyn_open4",
];

const DEMO: &[&str] = &["train_open", "train_sparse", "train_dense"];

const FEW_SHOT: &[&str] = &[
    "fs_maze_small",
    "fs_maze_large",
    "fs_roadblock",
    "fs_narrow_passage",
    "fs_intersection",
    "fs_obstacle_field",
    "fs_corridor_crowd",
    "fs_roundabout",
];

/// Zero-shot variants: (name, base scene, perturbation).
fn zero_shot_table() -> Vec<(&'static str, &'static str, Perturbation)> {
    let base = Perturbation::default;
    vec![
        ("zs_maze_small", "fs_maze_small", Perturbation { noise_std: 0.02, ..base() }),
        (
            "zs_maze_large",
            "fs_maze_large",
            Perturbation {
                goal_shift: Some(Region { min: [-6.0, 1.0], max: [-3.0, 3.0] }),
                noise_std: 0.02,
                ..base()
            },
        ),
        ("zs_roadblock", "fs_roadblock", Perturbation { noise_std: 0.03, ..base() }),
        (
            "zs_narrow_passage",
            "fs_narrow_passage",
            Perturbation {
                goal_shift: Some(Region { min: [3.0, 3.5], max: [6.3, 6.3] }),
                noise_std: 0.02,
                ..base()
            },
        ),
        (
            "zs_intersection",
            "fs_intersection",
            Perturbation { density_scale: 2.0, noise_std: 0.02, ..base() },
        ),
        (
            "zs_obstacle_field",
            "fs_obstacle_field",
            Perturbation { density_scale: 1.5, speed_scale: 1.5, noise_std: 0.02, ..base() },
        ),
        (
            "zs_corridor_crowd",
            "fs_corridor_crowd",
            Perturbation { speed_scale: 2.0, noise_std: 0.02, ..base() },
        ),
        (
            "zs_roundabout",
            "fs_roundabout",
            Perturbation { shape_swap: true, speed_scale: 1.5, noise_std: 0.02, ..base() },
        ),
    ]
}

fn bundled_by_name(name: &str) -> Option<SceneSpec> {
    BUNDLED
        .iter()
        .map(|json| parse_scene(json).expect("bundled scene is valid"))
        .find(|s| s.name == name)
}

/// Looks up any bundled or derived scene by name.
pub fn by_name(name: &str) -> Result<SceneSpec, SceneError> {
    if let Some(spec) = bundled_by_name(name) {
        return Ok(spec);
    }
    for (zs_name, base, p) in zero_shot_table() {
        if zs_name == name {
            let source = bundled_by_name(base).expect("zero-shot base scene is bundled");
            let mut spec = perturb_scene(&source, &p);
            spec.name = zs_name.to_string();
            return Ok(spec);
        }
    }
    Err(SceneError::UnknownScene(name.to_string()))
}

fn suite(names: &[&str]) -> Vec<SceneSpec> {
    names
        .iter()
        .map(|n| by_name(n).expect("suite scene is bundled"))
        .collect()
}

pub fn training_scenes() -> Vec<SceneSpec> {
    suite(TRAINING)
}

/// Static-only scenes suitable for grid-planner demonstrations.
pub fn demo_scenes() -> Vec<SceneSpec> {
    suite(DEMO)
}

pub fn few_shot_scenes() -> Vec<SceneSpec> {
    suite(FEW_SHOT)
}

pub fn zero_shot_scenes() -> Vec<SceneSpec> {
    zero_shot_table()
        .into_iter()
        .map(|(zs_name, _, _)| by_name(zs_name).expect("zero-shot scene derives from bundle"))
        .collect()
}

pub fn all_scene_names() -> Vec<String> {
    let mut names: Vec<String> = BUNDLED
        .iter()
        .map(|json| parse_scene(json).expect("bundled scene is valid").name)
        .collect();
    names.extend(zero_shot_table().into_iter().map(|(n, _, _)| n.to_string()));
    names
}
