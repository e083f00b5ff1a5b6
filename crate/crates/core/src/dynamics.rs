//! Non-unitary evolution of the two-level system under `H_eff`.
//!
//! Basis ordering is `(|0⟩, |1⟩)` with the loss on the `|1⟩` diagonal. The
//! propagator is evaluated from the factorization
//!
//! ```text
//! exp(-i H_eff t) = e^{-γt} [cos(χt)·I - i sin(χt)/χ · H_PT]
//! ```
//!
//! which holds in every phase because `H_PT² = χ²·I`. Near the exceptional
//! point `sin(χt)/χ` is replaced by its Taylor series.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Relative tolerance on `|γ - J|` below which the parameters are classified
/// as sitting exactly on the exceptional point.
pub const EXCEPTIONAL_TOLERANCE: f64 = 1e-12;

/// Below this `|χt|` the factor `sin(χt)/χ` is evaluated by its series.
pub const SINC_SERIES_THRESHOLD: f64 = 1e-4;

/// Squared norm below which a state is considered annihilated.
pub const ANNIHILATION_NORM: f64 = 1e-300;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// `γ < J`: real spectrum `±χ`.
    Symmetric,
    /// `γ = J`: eigenvalues and eigenvectors coalesce.
    Exceptional,
    /// `γ > J`: imaginary `χ`. Computed for continuity only.
    Broken,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Symmetric => "symmetric",
            Phase::Exceptional => "exceptional",
            Phase::Broken => "broken (outside model scope)",
        })
    }
}

/// Coupling `J` and dissipation `γ` (both angular frequencies, rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtParams {
    coupling: f64,
    dissipation: f64,
}

impl PtParams {
    pub fn new(coupling: f64, dissipation: f64) -> Result<Self> {
        if !coupling.is_finite() || coupling <= 0.0 {
            return Err(invalid("J", format!("must be finite and > 0, got {coupling}")));
        }
        if !dissipation.is_finite() || dissipation < 0.0 {
            return Err(invalid(
                "gamma",
                format!("must be finite and >= 0, got {dissipation}"),
            ));
        }
        Ok(Self {
            coupling,
            dissipation,
        })
    }

    /// Unit coupling with `γ/J = ratio`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(1.0, ratio)
    }

    /// Both rates given as `2π × kHz`.
    pub fn from_khz(j_khz: f64, gamma_khz: f64) -> Result<Self> {
        Self::new(2.0 * PI * 1e3 * j_khz, 2.0 * PI * 1e3 * gamma_khz)
    }

    /// Same coupling, dissipation set to `ratio · J`.
    pub fn with_ratio(&self, ratio: f64) -> Result<Self> {
        Self::new(self.coupling, ratio * self.coupling)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn dissipation(&self) -> f64 {
        self.dissipation
    }

    /// `γ/J`.
    pub fn ratio(&self) -> f64 {
        self.dissipation / self.coupling
    }

    pub fn phase(&self) -> Phase {
        let diff = self.dissipation - self.coupling;
        if diff.abs() <= EXCEPTIONAL_TOLERANCE * self.coupling {
            Phase::Exceptional
        } else if diff < 0.0 {
            Phase::Symmetric
        } else {
            Phase::Broken
        }
    }

    /// Dimensionless `χ/J = sqrt(1 - (γ/J)²)` (principal branch).
    pub fn chi(&self) -> Complex64 {
        if self.phase() == Phase::Exceptional {
            return ZERO;
        }
        let g = self.ratio();
        Complex64::new((1.0 - g) * (1.0 + g), 0.0).sqrt()
    }

    /// `χ` in rad/s.
    pub fn chi_physical(&self) -> Complex64 {
        self.chi() * self.coupling
    }

    /// Convert a physical duration (seconds) to dimensionless `J·t`.
    pub fn to_dimensionless(&self, seconds: f64) -> f64 {
        self.coupling * seconds
    }

    /// `H_PT / J = [[i g, 1], [1, -i g]]`.
    pub fn h_pt(&self) -> Matrix2<Complex64> {
        let g = self.ratio();
        Matrix2::new(I * g, ONE, ONE, -I * g)
    }

    /// `H_eff / J = [[0, 1], [1, -2 i g]]`.
    pub fn h_eff(&self) -> Matrix2<Complex64> {
        let g = self.ratio();
        Matrix2::new(ZERO, ONE, ONE, -I * (2.0 * g))
    }
}

/// Pure qubit state over `(|0⟩, |1⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState(Vector2<Complex64>);

impl QubitState {
    pub fn new(a0: Complex64, a1: Complex64) -> Self {
        Self(Vector2::new(a0, a1))
    }

    pub fn from_vector(v: Vector2<Complex64>) -> Self {
        Self(v)
    }

    pub fn zero() -> Self {
        Self::new(ONE, ZERO)
    }

    pub fn one() -> Self {
        Self::new(ZERO, ONE)
    }

    /// `(i, 1)/√2`, the `+1` eigenvector of the default observable.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(I * s, ONE * s)
    }

    /// `(-i, 1)/√2`, the `-1` eigenvector of the default observable.
    pub fn minus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(-I * s, ONE * s)
    }

    pub fn vector(&self) -> &Vector2<Complex64> {
        &self.0
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QubitState) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn normalized(&self) -> Result<QubitState> {
        let n2 = self.norm_sqr();
        if !(n2 >= ANNIHILATION_NORM) {
            return Err(Error::StateAnnihilated { norm: n2, jt: 0.0 });
        }
        Ok(Self(self.0.unscale(n2.sqrt())))
    }

    /// Euclidean distance `‖a - b‖` (phase-sensitive).
    pub fn distance(&self, other: &QubitState) -> f64 {
        (self.0 - other.0).norm()
    }

    /// `sqrt(1 - |⟨a|b⟩|²)` for normalized states; zero iff equal up to phase.
    pub fn distance_up_to_phase(&self, other: &QubitState) -> f64 {
        (1.0 - self.inner(other).norm_sqr()).max(0.0).sqrt()
    }

    /// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` with textbook Paulis and `σz = diag(1, -1)`,
    /// evaluated on the normalized state.
    pub fn bloch(&self) -> [f64; 3] {
        let n2 = self.norm_sqr();
        let a = self.0[0];
        let b = self.0[1];
        let ab = a.conj() * b;
        [
            2.0 * ab.re / n2,
            2.0 * ab.im / n2,
            (a.norm_sqr() - b.norm_sqr()) / n2,
        ]
    }
}

/// `exp(-i H_eff t)` together with the dimensionless duration `J·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPropagator {
    matrix: Matrix2<Complex64>,
    jt: f64,
}

impl QubitPropagator {
    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }

    pub fn jt(&self) -> f64 {
        self.jt
    }

    pub fn apply(&self, state: &QubitState) -> QubitState {
        QubitState(self.matrix * state.0)
    }

    /// `other ∘ self`: evolve by `self` first, then by `other`.
    pub fn then(&self, other: &QubitPropagator) -> QubitPropagator {
        QubitPropagator {
            matrix: other.matrix * self.matrix,
            jt: self.jt + other.jt,
        }
    }
}

fn check_duration(jt: f64) -> Result<()> {
    if !jt.is_finite() || jt < 0.0 {
        return Err(invalid("t", format!("must be finite and >= 0, got {jt}")));
    }
    Ok(())
}

/// `sin(χs)/χ` with the series branch for small `|χs|`.
fn sinc_factor(chi: Complex64, s: f64) -> Complex64 {
    let x = chi * s;
    if x.norm() < SINC_SERIES_THRESHOLD {
        let x2 = x * x;
        (ONE - x2 / 6.0 + x2 * x2 / 120.0) * s
    } else {
        x.sin() / chi
    }
}

/// Propagator over dimensionless time `jt = J·t`.
pub fn propagator(p: &PtParams, jt: f64) -> Result<QubitPropagator> {
    check_duration(jt)?;
    let chi = p.chi();
    let decay = (-p.ratio() * jt).exp();
    let cos = (chi * jt).cos();
    let sinc = sinc_factor(chi, jt);
    let matrix = (Matrix2::identity() * cos - p.h_pt() * (I * sinc)).scale(decay);
    Ok(QubitPropagator { matrix, jt })
}

/// Apply the propagator; with `renormalize` the result is the conditioned
/// (no-jump post-selected) state, otherwise the raw decayed vector.
pub fn evolve(state: &QubitState, p: &PtParams, jt: f64, renormalize: bool) -> Result<QubitState> {
    if !(state.norm_sqr() > 0.0) {
        return Err(invalid("state", "must have nonzero norm"));
    }
    let out = propagator(p, jt)?.apply(state);
    if !renormalize {
        return Ok(out);
    }
    let n2 = out.norm_sqr();
    if !(n2 >= ANNIHILATION_NORM) {
        return Err(Error::StateAnnihilated { norm: n2, jt });
    }
    Ok(QubitState(out.0.unscale(n2.sqrt())))
}

/// Squared norm of the unconditioned evolved state (no-jump probability).
pub fn survival_norm(state: &QubitState, p: &PtParams, jt: f64) -> Result<f64> {
    Ok(evolve(state, p, jt, false)?.norm_sqr())
}

/// Segment-by-segment evolution: the state predicted at each boundary
/// `t_n = nT/N` is re-prepared and evolved over one segment `T/N`.
/// Returns the `N + 1` conditioned states, starting with `state0`.
pub fn piecewise_evolve(
    p: &PtParams,
    total_jt: f64,
    segments: usize,
    state0: &QubitState,
) -> Result<Vec<QubitState>> {
    if segments == 0 {
        return Err(invalid("N", "segment count must be >= 1"));
    }
    if !total_jt.is_finite() || total_jt <= 0.0 {
        return Err(invalid("T", format!("must be finite and > 0, got {total_jt}")));
    }
    let step = total_jt / segments as f64;
    let segment = propagator(p, step)?;
    let mut states = Vec::with_capacity(segments + 1);
    states.push(*state0);
    let mut current = *state0;
    for n in 1..=segments {
        let raw = segment.apply(&current);
        let n2 = raw.norm_sqr();
        if !(n2 >= ANNIHILATION_NORM) {
            return Err(Error::StateAnnihilated {
                norm: n2,
                jt: n as f64 * step,
            });
        }
        current = QubitState(raw.0.unscale(n2.sqrt()));
        states.push(current);
    }
    Ok(states)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    /// Dimensionless time `J·t`.
    pub jt: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Bloch components of the conditioned state at `samples` uniformly spaced
/// times in `[0, T]`.
pub fn bloch_trajectory(
    p: &PtParams,
    state0: &QubitState,
    total_jt: f64,
    samples: usize,
) -> Result<Vec<BlochSample>> {
    if samples < 2 {
        return Err(invalid("samples", "must be >= 2"));
    }
    check_duration(total_jt)?;
    let last = (samples - 1) as f64;
    (0..samples)
        .map(|k| {
            let jt = total_jt * k as f64 / last;
            let s = evolve(state0, p, jt, true)?;
            let [x, y, z] = s.bloch();
            Ok(BlochSample { jt, x, y, z })
        })
        .collect()
}
