//! Two-time joint probabilities and Leggett-Garg parameters.
//!
//! The joint distribution of two sequential dichotomic measurements is built
//! from conditioned (renormalized) no-jump evolution: the first outcome `a`
//! is read from the evolved target state, the second outcome `b` from the
//! evolved eigenstate `|a⟩`:
//!
//! ```text
//! P(a, b) = |⟨a|U(t_i)|ψ⟩|² / ‖U(t_i)ψ‖² · |⟨b|U(t_j - t_i)|a⟩|² / ‖U(t_j - t_i)|a⟩‖²
//! ```
//!
//! `K_n = Σ_{k=1}^{n-1} C_{k+1,k} - C_{n,1}` with equally spaced times
//! `t_k = (k - 1)τ`. This path is the reference; the closed forms in
//! [`closed`] are checked against it by [`crosscheck`].

pub mod closed;
pub mod crosscheck;

use std::fmt;

use crate::dynamics::{propagator, PtParams, QubitState, ANNIHILATION_NORM};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// A `±1`-valued observable given by its orthonormal eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomicObservable {
    plus: QubitState,
    minus: QubitState,
}

impl DichotomicObservable {
    pub fn new(plus: QubitState, minus: QubitState) -> Result<Self> {
        let ok = (plus.norm() - 1.0).abs() <= 1e-12
            && (minus.norm() - 1.0).abs() <= 1e-12
            && plus.inner(&minus).norm() <= 1e-12;
        if !ok {
            return Err(invalid("observable", "eigenvectors must be orthonormal"));
        }
        Ok(Self { plus, minus })
    }

    /// `Q = σ_y` with `|+⟩ = (i, 1)/√2` and `|−⟩ = (−i, 1)/√2`.
    pub fn sigma_y() -> Self {
        Self {
            plus: QubitState::plus(),
            minus: QubitState::minus(),
        }
    }

    pub fn eigenvector(&self, outcome: Outcome) -> &QubitState {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    /// Probability of `outcome` on the normalized version of `state`.
    pub fn probability(&self, state: &QubitState, outcome: Outcome) -> f64 {
        self.eigenvector(outcome).inner(state).norm_sqr() / state.norm_sqr()
    }
}

impl Default for DichotomicObservable {
    fn default() -> Self {
        Self::sigma_y()
    }
}

/// Joint probabilities indexed by (outcome at `t_i`, outcome at `t_j`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl JointDistribution {
    pub fn get(&self, first: Outcome, second: Outcome) -> f64 {
        match (first, second) {
            (Outcome::Plus, Outcome::Plus) => self.pp,
            (Outcome::Plus, Outcome::Minus) => self.pm,
            (Outcome::Minus, Outcome::Plus) => self.mp,
            (Outcome::Minus, Outcome::Minus) => self.mm,
        }
    }

    /// Marginal of the first measurement.
    pub fn first(&self, outcome: Outcome) -> f64 {
        self.get(outcome, Outcome::Plus) + self.get(outcome, Outcome::Minus)
    }

    pub fn total(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }

    /// Cells in `[0, 1]` within `1e-12` and total within `1e-10` of one.
    pub fn is_valid(&self) -> bool {
        let cells_ok = [self.pp, self.pm, self.mp, self.mm]
            .iter()
            .all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p));
        cells_ok && (self.total() - 1.0).abs() <= 1e-10
    }

    pub fn correlation(&self) -> f64 {
        correlation(self)
    }
}

/// `C = P(+,+) − P(+,−) − P(−,+) + P(−,−)`.
pub fn correlation(j: &JointDistribution) -> f64 {
    j.pp - j.pm - j.mp + j.mm
}

/// Conditional probabilities of the second outcome given the first, for a
/// measurement separation of `t_ji`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SecondLeg {
    /// `[P(+|+), P(−|+), P(+|−), P(−|−)]`
    cond: [f64; 4],
}

impl SecondLeg {
    pub(crate) fn new(p: &PtParams, t_ji: f64, obs: &DichotomicObservable) -> Result<Self> {
        let u = propagator(p, t_ji)?;
        let mut cond = [0.0; 4];
        for (ia, a) in Outcome::BOTH.into_iter().enumerate() {
            let evolved = u.apply(obs.eigenvector(a));
            let n2 = evolved.norm_sqr();
            if !(n2 >= ANNIHILATION_NORM) {
                return Err(Error::StateAnnihilated { norm: n2, jt: t_ji });
            }
            for (ib, b) in Outcome::BOTH.into_iter().enumerate() {
                cond[2 * ia + ib] = obs.eigenvector(b).inner(&evolved).norm_sqr() / n2;
            }
        }
        Ok(Self { cond })
    }

    pub(crate) fn given(&self, first: Outcome, second: Outcome) -> f64 {
        let ia = usize::from(first == Outcome::Minus);
        let ib = usize::from(second == Outcome::Minus);
        self.cond[2 * ia + ib]
    }

    /// `Σ_b b·P(b|a)`: conditional mean of the second outcome.
    pub(crate) fn mean_given(&self, first: Outcome) -> f64 {
        self.given(first, Outcome::Plus) - self.given(first, Outcome::Minus)
    }
}

/// First-measurement probabilities on the target evolved for `t_i`.
pub(crate) fn first_leg(
    target: &QubitState,
    p: &PtParams,
    t_i: f64,
    obs: &DichotomicObservable,
) -> Result<[f64; 2]> {
    let evolved = propagator(p, t_i)?.apply(target);
    let n2 = evolved.norm_sqr();
    if !(n2 >= ANNIHILATION_NORM) {
        return Err(Error::StateAnnihilated { norm: n2, jt: t_i });
    }
    Ok([
        obs.eigenvector(Outcome::Plus).inner(&evolved).norm_sqr() / n2,
        obs.eigenvector(Outcome::Minus).inner(&evolved).norm_sqr() / n2,
    ])
}

/// Joint distribution of measuring `obs` at `t_i` and again at `t_i + t_ji`
/// (dimensionless times), starting from `target` at time zero.
pub fn joint_probabilities(
    target: &QubitState,
    p: &PtParams,
    t_i: f64,
    t_ji: f64,
    obs: &DichotomicObservable,
) -> Result<JointDistribution> {
    if !target.is_normalized() {
        return Err(invalid("target", "state must be normalized"));
    }
    let first = first_leg(target, p, t_i, obs)?;
    let second = SecondLeg::new(p, t_ji, obs)?;
    let cell = |a: Outcome, b: Outcome| {
        let pa = if a == Outcome::Plus { first[0] } else { first[1] };
        pa * second.given(a, b)
    };
    Ok(JointDistribution {
        pp: cell(Outcome::Plus, Outcome::Plus),
        pm: cell(Outcome::Plus, Outcome::Minus),
        mp: cell(Outcome::Minus, Outcome::Plus),
        mm: cell(Outcome::Minus, Outcome::Minus),
    })
}

/// Order `n ≥ 3` and equal spacing `τ` (dimensionless `J·τ`), with `t_1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSchedule {
    order: usize,
    tau: f64,
}

impl CorrelationSchedule {
    pub fn new(order: usize, tau: f64) -> Result<Self> {
        if order < 3 {
            return Err(invalid("n", format!("order must be >= 3, got {order}")));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(invalid("tau", format!("must be finite and > 0, got {tau}")));
        }
        Ok(Self { order, tau })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `t_k = (k − 1)τ` for `k = 1..=n`.
    pub fn times(&self) -> Vec<f64> {
        (0..self.order).map(|k| k as f64 * self.tau).collect()
    }
}

/// A correlation `C_{later, earlier}` (1-based time labels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTerm {
    pub later: usize,
    pub earlier: usize,
    pub value: f64,
}

impl fmt::Display for CorrelationTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}{}", self.later, self.earlier)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LgiValue {
    pub order: usize,
    pub value: f64,
    /// `C_21, C_32, …, C_{n,n−1}` followed by `C_{n,1}`.
    pub components: Vec<CorrelationTerm>,
}

impl LgiValue {
    pub(crate) fn assemble(order: usize, components: Vec<CorrelationTerm>) -> Self {
        let value = Self::sum(&components);
        Self {
            order,
            value,
            components,
        }
    }

    fn sum(components: &[CorrelationTerm]) -> f64 {
        components
            .iter()
            .map(|c| if c.earlier == 1 && c.later > 2 { -c.value } else { c.value })
            .sum()
    }

    /// Value re-summed from the stored components.
    pub fn recompute(&self) -> f64 {
        Self::sum(&self.components)
    }

    pub fn component(&self, later: usize, earlier: usize) -> Option<f64> {
        self.components
            .iter()
            .find(|c| c.later == later && c.earlier == earlier)
            .map(|c| c.value)
    }
}

/// `K_n` from the joint-probability oracle.
pub fn k_n(
    p: &PtParams,
    sched: &CorrelationSchedule,
    target: &QubitState,
    obs: &DichotomicObservable,
) -> Result<LgiValue> {
    let n = sched.order();
    let tau = sched.tau();
    let mut components = Vec::with_capacity(n);
    for k in 1..n {
        let j = joint_probabilities(target, p, (k - 1) as f64 * tau, tau, obs)?;
        components.push(CorrelationTerm {
            later: k + 1,
            earlier: k,
            value: correlation(&j),
        });
    }
    let j = joint_probabilities(target, p, 0.0, (n - 1) as f64 * tau, obs)?;
    components.push(CorrelationTerm {
        later: n,
        earlier: 1,
        value: correlation(&j),
    });
    Ok(LgiValue::assemble(n, components))
}

/// `K_n` value for the default target `|+⟩` and observable `σ_y`.
pub fn k_n_default(p: &PtParams, order: usize, tau: f64) -> Result<f64> {
    let sched = CorrelationSchedule::new(order, tau)?;
    Ok(k_n(p, &sched, &QubitState::plus(), &DichotomicObservable::sigma_y())?.value)
}

/// The oracle `K_n` at a fixed spacing, with every target-independent piece
/// precomputed: first-leg propagators `U((k − 1)τ)` and the conditional
/// second-outcome means for separations `τ` and `(n − 1)τ`. Evaluating many
/// target states against one kernel gives the same values as [`k_n`].
#[derive(Debug, Clone)]
pub struct KnKernel {
    order: usize,
    tau: f64,
    obs: DichotomicObservable,
    first_legs: Vec<crate::dynamics::QubitPropagator>,
    adjacent: SecondLeg,
    closing: SecondLeg,
}

impl KnKernel {
    pub fn new(p: &PtParams, sched: &CorrelationSchedule, obs: &DichotomicObservable) -> Result<Self> {
        let n = sched.order();
        let tau = sched.tau();
        let first_legs = (0..n - 1)
            .map(|k| propagator(p, k as f64 * tau))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            order: n,
            tau,
            obs: *obs,
            first_legs,
            adjacent: SecondLeg::new(p, tau, obs)?,
            closing: SecondLeg::new(p, (n - 1) as f64 * tau, obs)?,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn correlation_from(&self, evolved: &QubitState, leg: &SecondLeg, jt: f64) -> Result<f64> {
        let n2 = evolved.norm_sqr();
        if !(n2 >= ANNIHILATION_NORM) {
            return Err(Error::StateAnnihilated { norm: n2, jt });
        }
        let plus = self.obs.eigenvector(Outcome::Plus).inner(evolved).norm_sqr() / n2;
        let minus = self.obs.eigenvector(Outcome::Minus).inner(evolved).norm_sqr() / n2;
        Ok(plus * leg.mean_given(Outcome::Plus) - minus * leg.mean_given(Outcome::Minus))
    }

    /// `K_n` for a normalized `target`.
    pub fn eval(&self, target: &QubitState) -> Result<f64> {
        let mut sum = 0.0;
        for u in &self.first_legs {
            sum += self.correlation_from(&u.apply(target), &self.adjacent, u.jt())?;
        }
        Ok(sum - self.correlation_from(target, &self.closing, 0.0)?)
    }
}
