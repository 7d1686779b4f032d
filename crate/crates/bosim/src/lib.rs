//! Classical simulation, sampling, and statistical validation of boson
//! sampling with photon loss, at desk scale (m <= 20 modes, n <= 7 photons).
//!
//! The crate covers the full virtual-experiment loop:
//!
//! - [`matrix`] / [`permanent`]: dense complex matrices and exact permanents
//!   (a factorial-time oracle plus a Gray-coded Ryser kernel);
//! - [`interferometer`]: Haar-random unitaries and the square mesh of 2x2
//!   mixer cells with an exact compose/decompose round trip;
//! - [`patterns`] / [`loss`]: photon configurations and path-independent
//!   per-port efficiencies;
//! - [`distribution`]: exact output tables for the standard, lossy
//!   (source / detector / both), distinguishable and uniform models;
//! - [`sampler`]: reproducible inverse-CDF event generation;
//! - [`validation`]: the likelihood-ratio and row-norm counter tests that
//!   separate boson-sampler logs from distinguishable and uniform ones;
//! - [`rate`]: combinatorial speedup factors and projected count rates.
//!
//! Everything is deterministic given explicit seeds; no ambient entropy.

pub mod distribution;
pub mod error;
pub mod interferometer;
pub mod loss;
pub mod matrix;
pub mod patterns;
pub mod permanent;
pub mod rate;
pub mod sampler;
pub mod validation;

pub use distribution::{
    distinguishable_distribution, lossy_both_distribution, lossy_detector_distribution,
    lossy_source_distribution, standard_distribution, uniform_distribution, CollisionNorm,
    Distribution,
};
pub use error::{Error, Result};
pub use interferometer::{compose_mesh, decompose_mesh, haar_random, MeshCell, MeshSpec, UnitaryMatrix};
pub use loss::LossProfile;
pub use matrix::ComplexMatrix;
pub use patterns::{
    enumerate_multisets, enumerate_no_collision, lost_port_completions, InputPattern, OutputPattern,
};
pub use permanent::{perm_naive, perm_ryser, submatrix};
pub use rate::{projected_rate, speedup_factor, RateParams};
pub use sampler::{empirical_distribution, sample, EventLog, SourceLabel};
pub use validation::{lr_test, rne_test, CounterTrace, TestKind, Verdict};
