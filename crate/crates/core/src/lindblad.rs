//! Three-level master equation over `(|0⟩, |1⟩, |a⟩)` and its no-jump
//! reduction to the qubit block.
//!
//! In units of `J`: `H_C = |1⟩⟨0| + |0⟩⟨1|` and `L₁ = sqrt(4g)|a⟩⟨1|` with
//! `g = γ/J`. Dropping the jump term `L₁ρL₁†` leaves the qubit block evolving
//! under `−i(H_eff ρ − ρ H_eff†)`; conditioning on no jump renormalizes it.
//! All integration is fixed-step RK4.

use std::ops::{Add, Mul};

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;

use crate::dynamics::{evolve, PtParams, QubitState, ANNIHILATION_NORM};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_DT: f64 = 1e-3;
pub const MAX_DT: f64 = 1e-2;

pub const TRACE_DISTANCE_TOL: f64 = 1e-6;
pub const TRACE_DRIFT_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-9;
pub const DECOUPLING_TOL: f64 = 1e-10;
pub const BLOCK_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// 3×3 density matrix over `(|0⟩, |1⟩, |a⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix3(Matrix3<Complex64>);

/// 2×2 density matrix over `(|0⟩, |1⟩)`. Trajectory samples of the
/// unconditioned no-jump block may have trace below one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(Matrix2<Complex64>);

fn max_norm<'a>(entries: impl Iterator<Item = &'a Complex64>) -> f64 {
    entries.map(|z| z.norm()).fold(0.0, f64::max)
}

impl DensityMatrix3 {
    /// Validates Hermiticity (1e-10), unit trace (1e-9) and positivity (−1e-9).
    pub fn from_matrix(m: Matrix3<Complex64>) -> Result<Self> {
        if max_norm((m - m.adjoint()).iter()) > 1e-10 {
            return Err(invalid("rho", "not Hermitian"));
        }
        let rho = Self(m);
        if (rho.trace() - 1.0).abs() > 1e-9 {
            return Err(invalid("rho", format!("trace {} != 1", rho.trace())));
        }
        if rho.min_eigenvalue() < -POSITIVITY_TOL {
            return Err(invalid("rho", "not positive semidefinite"));
        }
        Ok(rho)
    }

    /// Embed a qubit density matrix with empty `|a⟩` row and column.
    pub fn embed(q: &DensityMatrix2) -> Self {
        let mut m = Matrix3::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&q.0);
        Self(m)
    }

    pub fn pure(state: &QubitState) -> Self {
        Self::embed(&DensityMatrix2::pure(state))
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn qubit_block(&self) -> DensityMatrix2 {
        DensityMatrix2(self.0.fixed_view::<2, 2>(0, 0).into_owned())
    }

    /// Population of the auxiliary level.
    pub fn aux_population(&self) -> f64 {
        self.0[(2, 2)].re
    }

    /// `max(|⟨0|ρ|a⟩|, |⟨1|ρ|a⟩|)`.
    pub fn aux_coherence(&self) -> f64 {
        [self.0[(0, 2)], self.0[(1, 2)], self.0[(2, 0)], self.0[(2, 1)]]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.0 + self.0.adjoint()) * Complex64::from(0.5);
        h.symmetric_eigenvalues().min()
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_norm((self.0 - self.0.adjoint()).iter())
    }
}

impl DensityMatrix2 {
    pub fn from_matrix(m: Matrix2<Complex64>) -> Result<Self> {
        if max_norm((m - m.adjoint()).iter()) > 1e-10 {
            return Err(invalid("rho", "not Hermitian"));
        }
        let rho = Self(m);
        if (rho.trace() - 1.0).abs() > 1e-9 {
            return Err(invalid("rho", format!("trace {} != 1", rho.trace())));
        }
        if rho.min_eigenvalue() < -POSITIVITY_TOL {
            return Err(invalid("rho", "not positive semidefinite"));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` of the normalized state.
    pub fn pure(state: &QubitState) -> Self {
        let v = state.vector() / Complex64::from(state.norm());
        Self(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// `(Tr σx ρ, Tr σy ρ, Tr σz ρ)` with `σz = diag(1, −1)`.
    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0;
        [
            2.0 * m[(1, 0)].re,
            2.0 * m[(1, 0)].im,
            m[(0, 0)].re - m[(1, 1)].re,
        ]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.0 + self.0.adjoint()) * Complex64::from(0.5);
        h.symmetric_eigenvalues().min()
    }

    pub fn renormalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr >= ANNIHILATION_NORM) {
            return Err(Error::StateAnnihilated { norm: tr, jt: f64::NAN });
        }
        Ok(Self(self.0 / Complex64::from(tr)))
    }
}

/// `½ Σ σ_k(a − b)`.
pub fn trace_distance(a: &DensityMatrix2, b: &DensityMatrix2) -> f64 {
    0.5 * (a.0 - b.0).singular_values().sum()
}

pub fn trace_distance3(a: &DensityMatrix3, b: &DensityMatrix3) -> f64 {
    0.5 * (a.0 - b.0).singular_values().sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladConfig {
    pub params: PtParams,
    /// Dimensionless RK4 step `J·dt`.
    pub dt: f64,
    pub include_jump: bool,
    /// Dimensionless horizon `J·T`.
    pub horizon: f64,
}

impl LindbladConfig {
    pub fn new(params: PtParams, dt: f64, include_jump: bool, horizon: f64) -> Result<Self> {
        let cfg = Self {
            params,
            dt,
            include_jump,
            horizon,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_defaults(params: PtParams, include_jump: bool, horizon: f64) -> Result<Self> {
        Self::new(params, DEFAULT_DT, include_jump, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(invalid("dt", format!("must be in (0, {MAX_DT}], got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(invalid("T", format!("must be finite and >= 0, got {}", self.horizon)));
        }
        Ok(())
    }

    /// Step count and actual step so that the last sample lands on `T`.
    fn steps(&self) -> (usize, f64) {
        if self.horizon == 0.0 {
            return (0, self.dt);
        }
        let n = (self.horizon / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.horizon / n as f64)
    }
}

fn rk4_step<M, F>(y: &M, h: f64, f: F) -> M
where
    M: Copy + Add<Output = M> + Mul<Complex64, Output = M>,
    F: Fn(&M) -> M,
{
    let h2 = Complex64::from(h / 2.0);
    let k1 = f(y);
    let k2 = f(&(*y + k1 * h2));
    let k3 = f(&(*y + k2 * h2));
    let k4 = f(&(*y + k3 * Complex64::from(h)));
    *y + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
        * Complex64::from(h / 6.0)
}

fn integrate<M, F>(y0: M, cfg: &LindbladConfig, f: F) -> Vec<(f64, M)>
where
    M: Copy + Add<Output = M> + Mul<Complex64, Output = M>,
    F: Fn(&M) -> M,
{
    let (n, h) = cfg.steps();
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push((0.0, y));
    for k in 1..=n {
        y = rk4_step(&y, h, &f);
        let t = if k == n { cfg.horizon } else { k as f64 * h };
        out.push((t, y));
    }
    out
}

/// `−i[H_C, ρ] + L₁ρL₁† − ½{L₁†L₁, ρ}`; the jump term is dropped unless
/// `include_jump`.
pub fn lindblad_rhs(rho: &DensityMatrix3, p: &PtParams, include_jump: bool) -> Matrix3<Complex64> {
    master_rhs(&rho.0, p.ratio(), include_jump)
}

fn master_rhs(rho: &Matrix3<Complex64>, g: f64, include_jump: bool) -> Matrix3<Complex64> {
    let one = Complex64::from(1.0);
    let zero = Complex64::from(0.0);
    let hc = Matrix3::new(zero, one, zero, one, zero, zero, zero, zero, zero);
    let mut out = (hc * rho - rho * hc) * (-I);
    // L1†L1 = 4g |1><1|: the anticommutator touches row and column 1 only.
    let rate = 4.0 * g;
    for k in 0..3 {
        out[(1, k)] -= rho[(1, k)] * (0.5 * rate);
        out[(k, 1)] -= rho[(k, 1)] * (0.5 * rate);
    }
    if include_jump {
        out[(2, 2)] += rho[(1, 1)] * rate;
    }
    out
}

/// RK4 trajectory of the master equation sampled at every step.
pub fn integrate_master(
    rho0: &DensityMatrix3,
    cfg: &LindbladConfig,
) -> Result<Vec<(f64, DensityMatrix3)>> {
    cfg.validate()?;
    let g = cfg.params.ratio();
    Ok(integrate(rho0.0, cfg, |r| master_rhs(r, g, cfg.include_jump))
        .into_iter()
        .map(|(t, m)| (t, DensityMatrix3(m)))
        .collect())
}

/// Unnormalized no-jump generator on the qubit block, entry by entry:
///
/// ```text
/// ρ̇00 =  iJ(ρ01 − ρ10)
/// ρ̇01 =  iJ(ρ00 − ρ11) − 2γρ01
/// ρ̇10 = −iJ(ρ00 − ρ11) − 2γρ10
/// ρ̇11 = −iJ(ρ01 − ρ10) − 4γρ11
/// ```
pub fn no_jump_rhs(rho: &Matrix2<Complex64>, p: &PtParams) -> Matrix2<Complex64> {
    let g = p.ratio();
    let (r00, r01, r10, r11) = (rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]);
    Matrix2::new(
        I * (r01 - r10),
        I * (r00 - r11) - r01 * (2.0 * g),
        -I * (r00 - r11) - r10 * (2.0 * g),
        -I * (r01 - r10) - r11 * (4.0 * g),
    )
}

/// Conditioned no-jump qubit trajectory: linear RK4 integration of
/// [`no_jump_rhs`], with each sample divided by its trace.
pub fn no_jump_qubit_dynamics(
    rho0: &DensityMatrix2,
    cfg: &LindbladConfig,
) -> Result<Vec<(f64, DensityMatrix2)>> {
    cfg.validate()?;
    if (rho0.trace() - 1.0).abs() > 1e-9 {
        return Err(invalid("rho0", "trace must be 1"));
    }
    let p = cfg.params;
    integrate(rho0.0, cfg, |r| no_jump_rhs(r, &p))
        .into_iter()
        .map(|(t, m)| {
            let tr = m.trace().re;
            if !(tr >= ANNIHILATION_NORM) {
                return Err(Error::StateAnnihilated { norm: tr, jt: t });
            }
            Ok((t, DensityMatrix2(m / Complex64::from(tr))))
        })
        .collect()
}

/// Trace-preserving generator of the conditioned dynamics,
/// `−i(H_eff ρ − ρH_eff†) + 2γ(1 − ⟨z⟩)ρ`, equivalently
/// `−iJ[σx, ρ] + γ{σz, ρ} − 2γ⟨z⟩ρ`.
pub fn nonlinear_bloch_rhs(rho: &DensityMatrix2, p: &PtParams) -> Result<Matrix2<Complex64>> {
    if (rho.trace() - 1.0).abs() > 1e-9 {
        return Err(invalid("rho", format!("trace {} != 1", rho.trace())));
    }
    Ok(nonlinear_rhs(&rho.0, p))
}

fn nonlinear_rhs(rho: &Matrix2<Complex64>, p: &PtParams) -> Matrix2<Complex64> {
    let z = (rho[(0, 0)] - rho[(1, 1)]).re;
    no_jump_rhs(rho, p) + rho * Complex64::from(2.0 * p.ratio() * (1.0 - z))
}

/// RK4 integration of the nonlinear normalized flow itself.
pub fn integrate_nonlinear(
    rho0: &DensityMatrix2,
    cfg: &LindbladConfig,
) -> Result<Vec<(f64, DensityMatrix2)>> {
    cfg.validate()?;
    let p = cfg.params;
    nonlinear_bloch_rhs(rho0, &p)?;
    Ok(integrate(rho0.0, cfg, |r| nonlinear_rhs(r, &p))
        .into_iter()
        .map(|(t, m)| (t, DensityMatrix2(m)))
        .collect())
}

/// Worst-case figures from running both reductions against the qubit
/// propagator over a set of pure initial states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    pub ratio: f64,
    pub horizon: f64,
    /// Conditioned no-jump block vs conditioned state-vector evolution.
    pub max_trace_distance: f64,
    /// Unconditioned no-jump 3×3 block vs `U|ψ⟩⟨ψ|U†`, entrywise.
    pub max_block_deviation: f64,
    /// `max |Tr ρ − 1|` along the full master equation.
    pub trace_drift: f64,
    /// Smallest eigenvalue seen along the full master equation.
    pub positivity_margin: f64,
    /// Largest qubit/auxiliary coherence along the full master equation.
    pub max_aux_coherence: f64,
}

impl EquivalenceReport {
    /// Descriptions of every tolerance the run violated.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.max_trace_distance <= TRACE_DISTANCE_TOL) {
            v.push(format!(
                "trace distance {:.3e} > {TRACE_DISTANCE_TOL:e}",
                self.max_trace_distance
            ));
        }
        if !(self.max_block_deviation <= BLOCK_TOL) {
            v.push(format!(
                "no-jump block deviation {:.3e} > {BLOCK_TOL:e}",
                self.max_block_deviation
            ));
        }
        if !(self.trace_drift <= TRACE_DRIFT_TOL) {
            v.push(format!("trace drift {:.3e} > {TRACE_DRIFT_TOL:e}", self.trace_drift));
        }
        if !(self.positivity_margin >= -POSITIVITY_TOL) {
            v.push(format!(
                "min eigenvalue {:.3e} < -{POSITIVITY_TOL:e}",
                self.positivity_margin
            ));
        }
        if !(self.max_aux_coherence <= DECOUPLING_TOL) {
            v.push(format!(
                "aux coherence {:.3e} > {DECOUPLING_TOL:e}",
                self.max_aux_coherence
            ));
        }
        v
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Initial states used by [`equivalence_report`].
pub fn equivalence_states() -> [QubitState; 4] {
    [
        QubitState::plus(),
        QubitState::minus(),
        QubitState::zero(),
        QubitState::one(),
    ]
}

pub fn equivalence_report(p: &PtParams, horizon: f64, dt: f64) -> Result<EquivalenceReport> {
    let mut report = EquivalenceReport {
        ratio: p.ratio(),
        horizon,
        max_trace_distance: 0.0,
        max_block_deviation: 0.0,
        trace_drift: 0.0,
        positivity_margin: f64::INFINITY,
        max_aux_coherence: 0.0,
    };
    for psi in equivalence_states() {
        let no_jump = LindbladConfig::new(*p, dt, false, horizon)?;
        for (t, rho) in no_jump_qubit_dynamics(&DensityMatrix2::pure(&psi), &no_jump)? {
            let reference = DensityMatrix2::pure(&evolve(&psi, p, t, true)?);
            report.max_trace_distance = report.max_trace_distance.max(trace_distance(&rho, &reference));
        }
        for (t, rho) in integrate_master(&DensityMatrix3::pure(&psi), &no_jump)? {
            let v = *evolve(&psi, p, t, false)?.vector();
            let reference = v * v.adjoint();
            let dev = (rho.qubit_block().0 - reference)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            report.max_block_deviation = report.max_block_deviation.max(dev);
        }
        let full = LindbladConfig::new(*p, dt, true, horizon)?;
        for (_, rho) in integrate_master(&DensityMatrix3::pure(&psi), &full)? {
            report.trace_drift = report.trace_drift.max((rho.trace() - 1.0).abs());
            report.positivity_margin = report.positivity_margin.min(rho.min_eigenvalue());
            report.max_aux_coherence = report.max_aux_coherence.max(rho.aux_coherence());
        }
    }
    Ok(report)
}
