pub mod chmap;
pub mod dataset;
pub mod error;
pub mod follower;
pub mod gridworld;
pub mod harness;
pub mod io;
pub mod planner;
pub mod radio;
pub mod replanner;
pub mod svc;
pub mod trajectory;

pub use error::{Error, Result};
