//! Numerical laboratory for the discrete two-dimensional Gaussian free field
//! on dyadic boxes `V_N = {0..N}²`, `N = 2^n`, with zero boundary values.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`]: boxes, sites and index conventions.
//! * [`solver`]: banded Cholesky factorization of `I - P` and discrete
//!   Dirichlet problems on rectangles.
//! * [`green`]: the killed-walk Green's function in dense and spectral form,
//!   harmonic extensions, variance profiles.
//! * [`rng`], [`sine`], [`sampler`]: reproducible counter-based streams, the
//!   fast sine transform and the exact field samplers.
//! * [`hierarchy`]: dyadic lines, conditioning on them, and the level
//!   decomposition of a field.
//! * [`extremes`]: Monte Carlo statistics of the maximum and the reports
//!   built on them.
//! * [`brw`]: the four-ary branching random walk analogue.
//! * [`io`]: CSV and binary formats shared with the command line tool.

pub mod brw;
pub mod error;
pub mod extremes;
pub mod green;
pub mod hierarchy;
pub mod io;
pub mod lattice;
pub mod rng;
pub mod sampler;
pub mod sine;
pub mod solver;
pub mod stats;

pub use brw::{brw_cdf_step, brw_run, brw_simulate, BrwRun, BrwSimStats, BrwSpec, CdfGrid};
pub use error::{Error, Result};
pub use extremes::{
    field_max, growth_fit, mc_max_stats, monotonicity_report, subsequence_detector,
    tightness_diagnostic, GrowthFit, MaxStats,
};
pub use green::{
    green_dense, green_spectral, harmonic_extension, variance_profile, GreenOperator,
    DEFAULT_DENSE_CAP,
};
pub use hierarchy::{
    condition_on_level, decompose, dyadic_set, exact_conditional_covariance, residual_subfields,
    Decomposition, DyadicSet,
};
pub use lattice::{BoxSpec, Rect, Site};
pub use rng::SeedSpec;
pub use sampler::{batch_sample, sample_dense, sample_spectral, Field};
