//! Two-level model of a current-biased Josephson phase qubit with level
//! decay into a continuum.
//!
//! Amplitudes are ordered `(C₁, C₀)`; times are in ns, frequencies in rad/ns
//! and rates in ns⁻¹. Closed-form propagators (rotating frame, undriven,
//! weak cross-coupling) are checked against an adaptive Dormand–Prince
//! integrator in [`oracle`].
//!
//! Everything numeric is generic over [`Real`] (`f64` or `f32`); the aliases
//! below fix the usual double-precision choice.

pub mod fitting;
pub mod hamiltonians;
pub mod matrix;
pub mod oracle;
pub mod paramfile;
pub mod params;
pub mod propagators;
pub mod scalar;
pub mod series;
pub mod state;
pub mod units;

pub use fitting::{DataPoint, FitError, FitModel, FitParam, FitProblem, FitResult};
pub use hamiltonians::{build_lab_frame, build_rwa, build_zero_drive, TimeDependentGenerator};
pub use matrix::{Generator2, Mat2, Overflow};
pub use oracle::{IntegratorConfig, OracleError};
pub use params::{derive_rwa, ParamError, QubitParams, RwaParams};
pub use propagators::{deviation_f, escape_probability, propagate, Backend, PropagationError, PropagationRequest};
pub use scalar::Real;
pub use series::TimeSeries;
pub use state::{BlochState, QubitState};
pub use units::{convert, Unit};

pub type Params = QubitParams<f64>;
pub type State = QubitState<f64>;
pub type Bloch = BlochState<f64>;
pub type Matrix = Mat2<f64>;
pub type Series = TimeSeries<f64>;
pub type Fit = FitProblem<f64>;

pub type Params32 = QubitParams<f32>;
pub type State32 = QubitState<f32>;
