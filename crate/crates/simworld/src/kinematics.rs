//! Unicycle kinematics with exact arc integration.

use std::f64::consts::PI;

use crate::geom::Vec2;

/// Robot pose; `theta` is always in (−π, π].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Velocity command: forward speed and turn rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionCmd {
    pub v: f64,
    pub w: f64,
}

impl ActionCmd {
    pub fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    pub fn clamped(self, v_max: f64, w_max: f64) -> Self {
        Self {
            v: self.v.clamp(0.0, v_max),
            w: self.w.clamp(-w_max, w_max),
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Advances the pose by `dt` under constant (v, w). For |w| below 1e-9 the
/// motion is a straight line; otherwise the exact circular arc of radius
/// v/w is followed.
pub fn step_kinematics(pose: Pose, a: ActionCmd, dt: f64) -> Pose {
    debug_assert!(dt > 0.0);
    if a.w.abs() < 1e-9 {
        Pose {
            x: pose.x + a.v * dt * pose.theta.cos(),
            y: pose.y + a.v * dt * pose.theta.sin(),
            theta: pose.theta,
        }
    } else {
        let r = a.v / a.w;
        let t2 = pose.theta + a.w * dt;
        Pose {
            x: pose.x + r * (t2.sin() - pose.theta.sin()),
            y: pose.y - r * (t2.cos() - pose.theta.cos()),
            theta: wrap_angle(t2),
        }
    }
}
