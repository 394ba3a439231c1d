//! World state and the episode step loop.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{
    disc_overlaps_circle, disc_overlaps_polygon, disc_overlaps_rect, disc_overlaps_segment, Aabb,
    ConvexPolygon, Segment, Vec2,
};
use crate::kinematics::{step_kinematics, wrap_angle, ActionCmd, Pose};
use crate::lidar::{cast_lidar, LIDAR_BEAMS};
use crate::obstacles::{advance_obstacles, DynObstacle, ObstacleShape};
use crate::reward::{compute_nav_reward, Event};

pub const OBS_LEN: usize = LIDAR_BEAMS + 4;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("episode already ended with {0:?}; reset the world before stepping")]
    EpisodeFinished(Event),
}

/// Immovable geometry. Perimeter walls are explicit segments; `bounds`
/// only constrains dynamic obstacle wandering.
#[derive(Clone, Debug)]
pub struct StaticGeom {
    pub bounds: Aabb,
    pub walls: Vec<Segment>,
    pub polygons: Vec<ConvexPolygon>,
}

/// Simulation constants. Defaults model a small indoor differential-drive
/// robot on a 10 Hz control loop.
#[derive(Clone, Copy, Debug)]
pub struct SimParams {
    pub dt: f64,
    pub max_steps: u32,
    pub robot_radius: f64,
    pub goal_radius: f64,
    pub v_max: f64,
    pub w_max: f64,
    pub lidar_max_range: f64,
    /// Goal distances are divided by this before entering the observation.
    pub dist_norm: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_steps: 1000,
            robot_radius: 0.2,
            goal_radius: 0.3,
            v_max: 1.0,
            w_max: 1.0,
            lidar_max_range: 6.0,
            dist_norm: 10.0,
        }
    }
}

/// 184-dimensional observation: 180 normalized lidar ranges, goal
/// (distance, bearing), and the executed (v, w), all in [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ObsVector {
    values: [f64; OBS_LEN],
}

impl ObsVector {
    pub const LEN: usize = OBS_LEN;

    pub fn from_array(values: [f64; OBS_LEN]) -> Self {
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn lidar(&self) -> &[f64] {
        &self.values[..LIDAR_BEAMS]
    }

    pub fn goal_rel(&self) -> (f64, f64) {
        (self.values[LIDAR_BEAMS], self.values[LIDAR_BEAMS + 1])
    }

    pub fn vel(&self) -> (f64, f64) {
        (self.values[LIDAR_BEAMS + 2], self.values[LIDAR_BEAMS + 3])
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub obs: ObsVector,
    pub nav_reward: f64,
    pub event: Event,
}

/// One navigation episode: robot, goal, geometry, and a private RNG
/// driving obstacle wander. All mutation happens through
/// [`World::step_episode`].
#[derive(Clone, Debug)]
pub struct World {
    statics: StaticGeom,
    dynamics: Vec<DynObstacle>,
    robot: Pose,
    goal: Vec2,
    params: SimParams,
    rng: ChaCha8Rng,
    steps: u32,
    terminal: Option<Event>,
    last_action: ActionCmd,
    prev_goal_dist: f64,
}

impl World {
    pub fn new(
        statics: StaticGeom,
        dynamics: Vec<DynObstacle>,
        robot: Pose,
        goal: Vec2,
        params: SimParams,
        seed: u64,
    ) -> Self {
        let prev_goal_dist = robot.position().dist(goal);
        Self {
            statics,
            dynamics,
            robot,
            goal,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            terminal: None,
            last_action: ActionCmd::new(0.0, 0.0),
            prev_goal_dist,
        }
    }

    pub fn robot_pose(&self) -> Pose {
        self.robot
    }

    pub fn goal(&self) -> Vec2 {
        self.goal
    }

    pub fn goal_dist(&self) -> f64 {
        self.robot.position().dist(self.goal)
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn terminal(&self) -> Option<Event> {
        self.terminal
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn statics(&self) -> &StaticGeom {
        &self.statics
    }

    pub fn dynamics(&self) -> &[DynObstacle] {
        &self.dynamics
    }

    pub fn cast_lidar(&self) -> Vec<f64> {
        cast_lidar(
            &self.statics,
            &self.dynamics,
            self.robot,
            self.params.lidar_max_range,
        )
    }

    pub fn robot_collides(&self) -> bool {
        let c = self.robot.position();
        let r = self.params.robot_radius;
        if self
            .statics
            .walls
            .iter()
            .any(|w| disc_overlaps_segment(c, r, w))
        {
            return true;
        }
        if self
            .statics
            .polygons
            .iter()
            .any(|p| disc_overlaps_polygon(c, r, p))
        {
            return true;
        }
        self.dynamics.iter().any(|ob| match ob.shape {
            ObstacleShape::Circle { radius } => disc_overlaps_circle(c, r, ob.pos, radius),
            ObstacleShape::Rect { half_w, half_h } => {
                disc_overlaps_rect(c, r, ob.pos, ob.heading, half_w, half_h)
            }
        })
    }

    /// Observation of the current state, including before the first step.
    pub fn observe(&self) -> ObsVector {
        let mut values = [0.0; OBS_LEN];
        let max_range = self.params.lidar_max_range;
        for (slot, range) in values.iter_mut().zip(self.cast_lidar()) {
            *slot = (range / max_range).clamp(0.0, 1.0);
        }
        let dist = self.goal_dist();
        values[LIDAR_BEAMS] = (dist / self.params.dist_norm).min(1.0);
        let to_goal = self.goal.sub(self.robot.position());
        let bearing = wrap_angle(to_goal.y.atan2(to_goal.x) - self.robot.theta);
        values[LIDAR_BEAMS + 1] = bearing / PI;
        values[LIDAR_BEAMS + 2] = self.last_action.v / self.params.v_max;
        values[LIDAR_BEAMS + 3] = self.last_action.w / self.params.w_max;
        ObsVector { values }
    }

    /// Advances one tick: clamp the command, move the robot along its arc,
    /// move the obstacles, then classify the step (collision beats goal
    /// beats timeout) and score it.
    pub fn step_episode(&mut self, a: ActionCmd) -> Result<StepOutcome, SimError> {
        if let Some(event) = self.terminal {
            return Err(SimError::EpisodeFinished(event));
        }
        let a = a.clamped(self.params.v_max, self.params.w_max);
        self.robot = step_kinematics(self.robot, a, self.params.dt);
        advance_obstacles(
            &mut self.dynamics,
            &self.statics.bounds,
            self.params.dt,
            &mut self.rng,
        );
        let cur_dist = self.goal_dist();
        self.steps += 1;
        let event = if self.robot_collides() {
            Event::Collided
        } else if cur_dist < self.params.goal_radius {
            Event::Reached
        } else if self.steps >= self.params.max_steps {
            Event::Timeout
        } else {
            Event::Alive
        };
        self.last_action = a;
        let obs = self.observe();
        let nav_reward = compute_nav_reward(self.prev_goal_dist, cur_dist, event);
        self.prev_goal_dist = cur_dist;
        if event.is_terminal() {
            self.terminal = Some(event);
        }
        Ok(StepOutcome {
            obs,
            nav_reward,
            event,
        })
    }
}
