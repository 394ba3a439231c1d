//! Navigation reward terms.

/// Terminal status of a simulation step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Alive,
    Reached,
    Collided,
    Timeout,
}

impl Event {
    pub fn is_terminal(self) -> bool {
        self != Event::Alive
    }
}

pub const REWARD_GOAL: f64 = 30.0;
pub const REWARD_COLLISION: f64 = -20.0;
pub const REWARD_TIME: f64 = -0.01;

/// Per-step navigation reward. Alive steps earn the progress made toward
/// the goal (previous distance minus current) plus the time penalty; a
/// timeout's final step earns the time penalty alone.
pub fn compute_nav_reward(prev_dist: f64, cur_dist: f64, event: Event) -> f64 {
    debug_assert!(prev_dist >= 0.0 && cur_dist >= 0.0);
    match event {
        Event::Reached => REWARD_GOAL,
        Event::Collided => REWARD_COLLISION,
        Event::Alive => (prev_dist - cur_dist) + REWARD_TIME,
        Event::Timeout => REWARD_TIME,
    }
}
