//! Scene corpus for the navigation simulator: a JSON scene description
//! format, deterministic world instantiation, perturbation-derived
//! evaluation variants, and evaluation-time observation noise.

mod build;
mod error;
mod noise;
mod perturb;
mod registry;
mod spec;

pub use build::build_scene;
pub use error::SceneError;
pub use noise::apply_obs_noise;
pub use perturb::{perturb_scene, Perturbation};
pub use registry::{
    all_scene_names, by_name, demo_scenes, few_shot_scenes, training_scenes, zero_shot_scenes,
};
pub use spec::{
    parse_scene, validate_scene, DynTemplate, Region, SceneSpec, ShapeKind, SCENE_VERSION,
};
