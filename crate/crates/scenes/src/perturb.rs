//! Systematic scene modifications used to produce held-out evaluation
//! variants of known scenes.

use crate::spec::{Region, SceneSpec, ShapeKind};

/// Structural tweaks applied on top of a base scene description.
#[derive(Clone, Debug)]
pub struct Perturbation {
    /// Scales the dynamic obstacle count, rounded to nearest.
    pub density_scale: f64,
    /// Scales both ends of the obstacle speed range.
    pub speed_scale: f64,
    /// Swaps circles for rects and vice versa in the shape list.
    pub shape_swap: bool,
    /// Replaces the goal region.
    pub goal_shift: Option<Region>,
    /// Observation noise applied during evaluation.
    pub noise_std: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            density_scale: 1.0,
            speed_scale: 1.0,
            shape_swap: false,
            goal_shift: None,
            noise_std: 0.0,
        }
    }
}

pub fn perturb_scene(spec: &SceneSpec, p: &Perturbation) -> SceneSpec {
    let mut out = spec.clone();
    let t = &mut out.dynamic_obstacles;
    t.count = ((t.count as f64) * p.density_scale).round() as usize;
    t.speed_range = [
        t.speed_range[0] * p.speed_scale,
        t.speed_range[1] * p.speed_scale,
    ];
    if p.shape_swap {
        for s in &mut t.shapes {
            *s = match s {
                ShapeKind::Circle => ShapeKind::Rect,
                ShapeKind::Rect => ShapeKind::Circle,
            };
        }
    }
    if let Some(goal) = p.goal_shift {
        out.goal_region = goal;
    }
    out.obs_noise_std = p.noise_std;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::by_name;

    #[test]
    fn default_perturbation_is_identity_on_bundled_scenes() {
        let spec = by_name("dyn_open4").unwrap();
        assert_eq!(perturb_scene(&spec, &Perturbation::default()), spec);
    }

    #[test]
    fn scales_and_swaps_apply() {
        let spec = by_name("dyn_open4").unwrap();
        let p = Perturbation {
            density_scale: 1.5,
            speed_scale: 2.0,
            shape_swap: true,
            goal_shift: Some(Region {
                min: [0.0, 0.0],
                max: [1.0, 1.0],
            }),
            noise_std: 0.05,
        };
        let out = perturb_scene(&spec, &p);
        let base = &spec.dynamic_obstacles;
        let t = &out.dynamic_obstacles;
        assert_eq!(t.count, ((base.count as f64) * 1.5).round() as usize);
        assert_eq!(t.speed_range, [base.speed_range[0] * 2.0, base.speed_range[1] * 2.0]);
        for (a, b) in base.shapes.iter().zip(&t.shapes) {
            assert_ne!(a, b);
        }
        assert_eq!(out.goal_region.min, [0.0, 0.0]);
        assert_eq!(out.obs_noise_std, 0.05);
    }
}
