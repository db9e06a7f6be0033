//! Monte Carlo engine for exit times of the walk families.

pub mod engine;
pub mod experiments;
pub mod io;
pub mod rng;

pub use engine::{replay_exit, run_batch, run_exit, run_paths, sample_step, step, BatchConfig, ExitSample};
pub use experiments::{boundary_scaling_experiment, rect_exit_experiment, RectEstimate, ScalingPoint};
pub use io::{read_exit_samples, write_exit_samples};
pub use rng::{path_rng, uniform, PathRng};
