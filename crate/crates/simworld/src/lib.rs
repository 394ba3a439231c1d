//! Deterministic 2D navigation simulator: differential-drive kinematics,
//! 180-beam ray-cast lidar, wandering obstacles, and the goal/collision/
//! time/progress reward. One `World` is one episode; everything derives
//! from its construction arguments and a single 64-bit seed.

pub mod geom;
mod kinematics;
mod lidar;
mod obstacles;
mod reward;
mod world;

pub use kinematics::{step_kinematics, wrap_angle, ActionCmd, Pose};
pub use lidar::{cast_lidar, LIDAR_BEAMS};
pub use obstacles::{advance_obstacles, DynObstacle, ObstacleShape};
pub use reward::{compute_nav_reward, Event, REWARD_COLLISION, REWARD_GOAL, REWARD_TIME};
pub use world::{ObsVector, SimError, SimParams, StaticGeom, StepOutcome, World, OBS_LEN};
