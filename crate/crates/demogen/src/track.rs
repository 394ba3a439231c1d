//! Pure-pursuit path tracking: steer toward a lookahead point on the
//! planned path, slowing through sharp turns.

use simworld::geom::Vec2;
use simworld::{wrap_angle, ActionCmd, Event, ObsVector, SimError, World};

pub const LOOKAHEAD: f64 = 0.6;
pub const HEADING_GAIN: f64 = 2.0;

pub struct TrackedEpisode {
    /// Observation seen before each commanded (v, w).
    pub steps: Vec<(ObsVector, [f64; 2])>,
    pub event: Event,
}

fn lookahead_point(path: &[Vec2], progress: &mut usize, pos: Vec2) -> Vec2 {
    while *progress + 1 < path.len() && pos.dist(path[*progress]) < LOOKAHEAD {
        *progress += 1;
    }
    path[*progress..]
        .iter()
        .copied()
        .find(|p| pos.dist(*p) >= LOOKAHEAD)
        .unwrap_or(*path.last().expect("path is non-empty"))
}

/// Single pure-pursuit control step toward the current lookahead point.
pub fn pursuit_command(world: &World, path: &[Vec2], progress: &mut usize) -> ActionCmd {
    let pose = world.robot_pose();
    let pos = pose.position();
    let target = lookahead_point(path, progress, pos);
    let to_target = target.sub(pos);
    let bearing_err = wrap_angle(to_target.y.atan2(to_target.x) - pose.theta);
    let params = world.params();
    ActionCmd::new(
        params.v_max * bearing_err.cos().max(0.0),
        (HEADING_GAIN * bearing_err).clamp(-params.w_max, params.w_max),
    )
}

/// Drives the world along `path` until the episode terminates.
pub fn track_path(world: &mut World, path: &[Vec2]) -> Result<TrackedEpisode, SimError> {
    assert!(!path.is_empty(), "cannot track an empty path");
    let mut steps = Vec::new();
    let mut progress = 0usize;
    loop {
        let obs = world.observe();
        let act = pursuit_command(world, path, &mut progress);
        let out = world.step_episode(act)?;
        steps.push((obs, [act.v, act.w]));
        if out.event.is_terminal() {
            return Ok(TrackedEpisode {
                steps,
                event: out.event,
            });
        }
    }
}
