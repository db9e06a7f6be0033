//! Non-homogeneous random walks on the square lattice with asymptotically
//! zero drift, exit times from planar wedges, and the Lyapunov-function
//! toolkit used to reason about their moments.
//!
//! The closed-form geometry and Lyapunov functions are generic over the
//! floating-point type ([`Scalar`], implemented for `f32` and `f64`); the
//! Monte Carlo engine and the statistics work in `f64`. Wedge angles are
//! exact rational multiples of pi ([`WedgeAngle`]).

pub mod error;
pub mod geometry;
pub mod lyapunov;
pub mod models;
pub mod scalar;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{Lattice, PolarPoint, RectFrame, RectRegion, WedgeAngle, WedgeSpec};
pub use lyapunov::{GFunctionParams, HarmonicParams, LyapunovReport};
pub use models::{DriftFamily, JumpKernel, ModelSpec};
pub use scalar::Scalar;
pub use simulate::{BatchConfig, ExitSample};
pub use stats::{SurvivalCurve, TailFit};

/// Polar coordinates in double precision.
pub type PolarPoint64 = PolarPoint<f64>;
/// Polar coordinates in single precision.
pub type PolarPoint32 = PolarPoint<f32>;
/// Circle-arc Lyapunov function parameters in double precision.
pub type GFunctionParams64 = GFunctionParams<f64>;
/// Circle-arc Lyapunov function parameters in single precision.
pub type GFunctionParams32 = GFunctionParams<f32>;
/// Harmonic Lyapunov function parameters in double precision.
pub type HarmonicParams64 = HarmonicParams<f64>;
