//! Path-integral machinery for the harmonic oscillator with a time-dependent
//! frequency: fundamental solutions, Green functions, generating
//! functionals, the Gaussian smearing formula, Wick combinatorics and an
//! independent lattice discretization used as a cross-check.

pub mod error;
pub mod frequency;
pub mod functional;
pub mod fundamental;
pub mod greens;
pub mod lattice;
pub mod quadrature;
pub mod smearing;
pub mod validation;
pub mod wick;

pub use error::{Error, Result};
pub use frequency::{FrequencyProfile, PhysicalParams, ProfileKind};
pub use functional::{AmplitudeValue, CurrentPair, Impulse};
pub use fundamental::{solve_fundamental, FundamentalPair};
pub use greens::{Channel, GreensEvaluator, Representation};
pub use lattice::{
    lattice_gaussian_moments, lattice_green, lattice_log_det_ratio, LatticeOperator,
};
pub use smearing::{build_distribution, LocalFunction, SmearingDistribution, SmearingMode};
pub use validation::{format_table, run_battery, CheckRow};
