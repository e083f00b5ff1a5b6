//! Leggett-Garg temporal correlations of a dissipative two-level system whose
//! no-jump dynamics is generated by the PT-symmetric effective Hamiltonian
//!
//! ```text
//! H_eff = [[0, J], [J, -2iγ]],   H_PT = H_eff + iγ·I,   χ = sqrt(J² - γ²)
//! ```
//!
//! All routines work in dimensionless units: times are `J·t` and the
//! dissipation enters through the ratio `γ/J`. Physical values given as
//! `2π × kHz` are converted by [`PtParams::from_khz`].
//!
//! Modules:
//! - [`dynamics`]: exceptional-point-safe propagators, conditioned evolution,
//!   the piecewise protocol and Bloch trajectories.
//! - [`lgi`]: joint probabilities, correlation functions and `K_n` built from
//!   them, plus the closed-form expressions and their cross-validation.
//! - [`lindblad`]: the three-level master equation, its no-jump reduction and
//!   the normalized nonlinear generator.
//! - [`sweep`]: `K` surfaces, extremal bounds over `τ` and the bound table.
//! - [`target`]: target-state preparation and its optimization over `(θ, φ)`.
//! - [`shots`]: finite-shot Monte Carlo emulation of the correlation experiments.
//!
//! Grid evaluations run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise; results are identical either way.

// `!(x >= tol)` is deliberate: NaN must fail these checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
mod error;
pub mod lgi;
pub mod lindblad;
mod par;
pub mod shots;
pub mod sweep;
pub mod target;

pub use dynamics::{
    bloch_trajectory, evolve, piecewise_evolve, propagator, survival_norm, BlochSample, Phase,
    PtParams, QubitPropagator, QubitState,
};
pub use error::{Error, Result};
pub use lgi::{
    correlation, joint_probabilities, k_n, CorrelationSchedule, DichotomicObservable,
    JointDistribution, LgiValue, Outcome,
};
pub use num_complex::Complex64;
