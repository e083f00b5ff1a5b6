//! Finite-shot emulation of the two-measurement correlation experiments.
//!
//! Each shot draws the first outcome from the marginal of the exact joint
//! distribution and the second from the conditional given the first. A round
//! estimates every required `C_ij` from `shots` shots and assembles `K_n`;
//! estimates are the mean over rounds with the 1σ spread between rounds.
//!
//! Only shot noise is modelled: no drift, preparation or readout error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{PtParams, QubitState};
use crate::error::{invalid, Result};
use crate::lgi::{correlation, joint_probabilities, CorrelationSchedule, DichotomicObservable, JointDistribution};
use crate::par;

pub const DEFAULT_SHOTS: u64 = 500;
pub const DEFAULT_ROUNDS: usize = 10;

/// Generator used for every draw; point `k` of a sweep uses stream `k`.
pub const RNG_ID: &str = "ChaCha8Rng (rand_chacha 0.9) seed_from_u64(seed), set_stream(point index)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotConfig {
    pub shots: u64,
    pub rounds: usize,
    pub seed: u64,
}

impl ShotConfig {
    pub fn new(shots: u64, rounds: usize, seed: u64) -> Result<Self> {
        if shots < 1 {
            return Err(invalid("shots", "must be >= 1"));
        }
        if rounds < 2 {
            return Err(invalid("rounds", "must be >= 2"));
        }
        Ok(Self { shots, rounds, seed })
    }

    /// Independent stream for sweep point `index`.
    pub fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

impl Default for ShotConfig {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            rounds: DEFAULT_ROUNDS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotEstimate {
    /// `C21`, `C32`, …, or `K3`, `K4`, ….
    pub label: String,
    pub jtau: f64,
    /// Mean over rounds.
    pub estimate: f64,
    /// Sample standard deviation between rounds (1σ error bar).
    pub sigma: f64,
    /// `sigma / sqrt(rounds)`.
    pub std_error: f64,
    pub shots: u64,
    pub rounds: usize,
    /// Exact value from the oracle.
    pub exact: f64,
    /// Shot-noise 1σ of a single round predicted from the exact distributions.
    pub binomial_sigma: f64,
}

/// Empirical correlation from `shots` sequential two-outcome draws.
pub fn sample_correlation<R: Rng + ?Sized>(dist: &JointDistribution, shots: u64, rng: &mut R) -> f64 {
    let p_first_plus = dist.pp + dist.pm;
    let cond_plus = if p_first_plus > 0.0 { dist.pp / p_first_plus } else { 0.0 };
    let p_first_minus = dist.mp + dist.mm;
    let cond_minus = if p_first_minus > 0.0 { dist.mp / p_first_minus } else { 0.0 };
    let mut sum: i64 = 0;
    for _ in 0..shots {
        let first_plus = rng.random::<f64>() < p_first_plus;
        let p_second_plus = if first_plus { cond_plus } else { cond_minus };
        let second_plus = rng.random::<f64>() < p_second_plus;
        sum += if first_plus == second_plus { 1 } else { -1 };
    }
    sum as f64 / shots as f64
}

fn mean_and_sigma(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Shot estimates for each `C_ij` of the schedule followed by `K_n`, all
/// drawn from stream `point_index`.
pub fn estimate_kn(
    p: &PtParams,
    sched: &CorrelationSchedule,
    target: &QubitState,
    obs: &DichotomicObservable,
    cfg: &ShotConfig,
    point_index: u64,
) -> Result<Vec<ShotEstimate>> {
    let n = sched.order();
    let tau = sched.tau();
    // (label, sign in K_n, exact distribution)
    let mut terms: Vec<(String, f64, JointDistribution)> = Vec::with_capacity(n);
    for k in 1..n {
        let d = joint_probabilities(target, p, (k - 1) as f64 * tau, tau, obs)?;
        terms.push((format!("C{}{}", k + 1, k), 1.0, d));
    }
    let d = joint_probabilities(target, p, 0.0, (n - 1) as f64 * tau, obs)?;
    terms.push((format!("C{n}1"), -1.0, d));

    let mut rng = cfg.rng_for(point_index);
    let mut per_term = vec![Vec::with_capacity(cfg.rounds); terms.len()];
    let mut per_round_k = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let mut k_round = 0.0;
        for (i, (_, sign, dist)) in terms.iter().enumerate() {
            let c = sample_correlation(dist, cfg.shots, &mut rng);
            per_term[i].push(c);
            k_round += sign * c;
        }
        per_round_k.push(k_round);
    }

    let shots = cfg.shots as f64;
    let sqrt_rounds = (cfg.rounds as f64).sqrt();
    let mut out = Vec::with_capacity(terms.len() + 1);
    let mut k_exact = 0.0;
    let mut k_var = 0.0;
    for ((label, sign, dist), samples) in terms.iter().zip(&per_term) {
        let exact = correlation(dist);
        let var = (1.0 - exact * exact).max(0.0) / shots;
        k_exact += sign * exact;
        k_var += var;
        let (estimate, sigma) = mean_and_sigma(samples);
        out.push(ShotEstimate {
            label: label.clone(),
            jtau: tau,
            estimate,
            sigma,
            std_error: sigma / sqrt_rounds,
            shots: cfg.shots,
            rounds: cfg.rounds,
            exact,
            binomial_sigma: var.sqrt(),
        });
    }
    let (estimate, sigma) = mean_and_sigma(&per_round_k);
    out.push(ShotEstimate {
        label: format!("K{n}"),
        jtau: tau,
        estimate,
        sigma,
        std_error: sigma / sqrt_rounds,
        shots: cfg.shots,
        rounds: cfg.rounds,
        exact: k_exact,
        binomial_sigma: k_var.sqrt(),
    });
    Ok(out)
}

/// [`estimate_kn`] at every `τ` for the default target and observable;
/// point `k` uses stream `k`, so the output does not depend on scheduling.
pub fn shot_sweep(p: &PtParams, order: usize, taus: &[f64], cfg: &ShotConfig) -> Result<Vec<ShotEstimate>> {
    let target = QubitState::plus();
    let obs = DichotomicObservable::sigma_y();
    let rows = par::try_map(taus, |i, &t| {
        estimate_kn(p, &CorrelationSchedule::new(order, t)?, &target, &obs, cfg, i as u64)
    })?;
    Ok(rows.into_iter().flatten().collect())
}
