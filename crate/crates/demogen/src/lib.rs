//! Demonstration generation for the navigation simulator: occupancy-grid
//! A* planning, pure-pursuit tracking, dataset cleaning, and a binary
//! trajectory file format.

mod astar;
mod error;
mod generate;
mod grid;
mod navd;
mod track;

pub use astar::{astar_cells, plan_astar, GridPath};
pub use error::DemoError;
pub use generate::{clean_dataset, generate_demo_corpus, GenReport, MIN_DEMO_STEPS, PLAN_INFLATION};
pub use grid::{OccupancyGrid, GRID_RES};
pub use navd::{load_trajectories, save_trajectories, DemoStep, Trajectory};
pub use track::{pursuit_command, track_path, TrackedEpisode, HEADING_GAIN, LOOKAHEAD};
