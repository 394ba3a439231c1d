//! Wandering dynamic obstacles.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geom::{Aabb, Vec2};
use crate::kinematics::wrap_angle;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObstacleShape {
    Circle { radius: f64 },
    Rect { half_w: f64, half_h: f64 },
}

impl ObstacleShape {
    /// Radius of the smallest circle containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            ObstacleShape::Circle { radius } => radius,
            ObstacleShape::Rect { half_w, half_h } => half_w.hypot(half_h),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DynObstacle {
    pub shape: ObstacleShape,
    pub pos: Vec2,
    pub heading: f64,
    pub speed: f64,
    pub wander_std: f64,
}

/// Moves every obstacle one tick: advance along the heading, reflect off
/// the world bounds (inset by the bounding radius), then perturb the
/// heading with Gaussian wander. Obstacles with zero speed are inert and
/// consume no randomness.
pub fn advance_obstacles(
    obstacles: &mut [DynObstacle],
    bounds: &Aabb,
    dt: f64,
    rng: &mut ChaCha8Rng,
) {
    for ob in obstacles.iter_mut() {
        if ob.speed == 0.0 {
            continue;
        }
        let br = ob.shape.bounding_radius();
        let lo = bounds.min.add(Vec2::new(br, br));
        let hi = bounds.max.sub(Vec2::new(br, br));
        debug_assert!(lo.x < hi.x && lo.y < hi.y, "obstacle larger than arena");

        let step = Vec2::from_angle(ob.heading).scale(ob.speed * dt);
        let mut p = ob.pos.add(step);
        if p.x < lo.x {
            p.x = lo.x + (lo.x - p.x);
            ob.heading = wrap_angle(std::f64::consts::PI - ob.heading);
        } else if p.x > hi.x {
            p.x = hi.x - (p.x - hi.x);
            ob.heading = wrap_angle(std::f64::consts::PI - ob.heading);
        }
        if p.y < lo.y {
            p.y = lo.y + (lo.y - p.y);
            ob.heading = wrap_angle(-ob.heading);
        } else if p.y > hi.y {
            p.y = hi.y - (p.y - hi.y);
            ob.heading = wrap_angle(-ob.heading);
        }
        // mirror reflection cannot overshoot for per-tick moves small
        // relative to the arena, but clamp to keep the invariant absolute
        p.x = p.x.clamp(lo.x, hi.x);
        p.y = p.y.clamp(lo.y, hi.y);
        ob.pos = p;

        if ob.wander_std > 0.0 {
            let noise = Normal::new(0.0, ob.wander_std)
                .expect("wander_std is finite and non-negative")
                .sample(rng);
            ob.heading = wrap_angle(ob.heading + noise);
        }
    }
}
