//! Numerical laboratory for the semiclassical Dirichlet Stark operator
//! `-h^2 Δ + x_1` on smooth bounded planar domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Airy function, its zeros and the normalised half-line states.
//! * [`geometry`]: built-in domains, arc-length boundary charts and tubular coordinates.
//! * [`operators`]: symmetric finite-difference discretisations (1D model operators,
//!   the curved boundary window, the full Cartesian domain) and rescaled test potentials.
//! * [`eigensolve`]: certified spectrum slicing below a threshold, counting functions,
//!   Riesz means and spectral projector densities.
//! * [`predictions`]: closed-form limits and constants used as comparison targets.
//! * [`experiments`]: h-sweeps that compare solver output with the predictions.

pub mod eigensolve;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod operators;
pub mod predictions;
pub mod quadrature;
pub mod sparse;
pub mod specfun;

pub use eigensolve::{
    count_below, eigs_below, pair_density, projector_density, riesz_mean, CountResult,
    DensityField, EigenOptions, Pairing, Spectrum,
};
pub use error::{Error, Result};
pub use experiments::{
    fit_rate, perturbation_shift_series, run_bracketing_check, run_study, study_operator,
    BracketRecord, ConvergenceReport, OperatorMode, RegimeKind, ReportRow, SeriesRate,
    SolverSettings, StudyConfig, StudyKind, Verdict,
};
pub use geometry::{build_domain, BoundaryCurve, DomainKind, DomainSpec, TubularMap};
pub use operators::{
    BoundaryCondition, DiscreteOperator, EdgeCondition, Regime, RescaledPotential, TestPotential,
};
pub use predictions::LimitParams;
pub use sparse::SymmetricMatrix;
