//! Lyapunov functions for wedge exit problems: the harmonic family
//! `f_w = r^w cos(w phi)`, its wedge restriction, and the circle-arc
//! function `g`. Increment moments are available both as asymptotic
//! expansions and exactly, by enumerating the finite jump support.

pub mod checks;
pub mod gfunc;
pub mod harmonic;
pub mod moments;
pub mod suites;

pub use checks::{
    all_hold, check_lamperti, check_submartingale_fhat, check_supermartingale_subcritical, lattice_point,
    least_margin, polar_grid, worst_margin, write_reports_csv, LampertiPoint, LampertiReport, LyapunovReport,
};
pub use gfunc::{g_eval, g_grad, GFunctionParams, GRegion};
pub use harmonic::{eps_lower, f_eval, f_grad, f_hat_eval, f_hessian, HarmonicParams, HarmonicRegime};
pub use moments::{exact_increment_moment, expansion_gamma, expansion_mean, expansion_second, local_moments};
pub use suites::SuiteOutcome;
