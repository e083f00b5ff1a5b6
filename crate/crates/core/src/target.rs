//! Target-state preparation `|ψ_t⟩ = U(θ, φ)|1⟩` and the search for the
//! `(θ, φ)` that extremizes `K_n`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::{PtParams, QubitState};
use crate::error::{invalid, Result};
use crate::lgi::{CorrelationSchedule, DichotomicObservable, KnKernel};
use crate::par;
use crate::sweep::{grid_best, refine_extremum, Objective, ScanDomain, SCAN_POINTS};

/// Smallest accepted grid size per axis.
pub const MIN_GRID: usize = 41;
pub const DEFAULT_GRID: usize = 201;
/// Local refinement subdivides one coarse cell this many times per axis.
pub const REFINE_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetStateParams {
    theta: f64,
    phi: f64,
}

impl TargetStateParams {
    /// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(invalid("theta", format!("must lie in [0, pi], got {theta}")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(invalid("phi", format!("must lie in [0, 2pi), got {phi}")));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `(−i e^{−iφ} sin(θ/2), cos(θ/2))`.
pub fn target_state(tsp: &TargetStateParams) -> QubitState {
    let (s, c) = (0.5 * tsp.theta).sin_cos();
    let phase = Complex64::from_polar(1.0, -tsp.phi);
    QubitState::new(Complex64::new(0.0, -1.0) * phase * s, Complex64::from(c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauStrategy {
    /// Extremize over `Jτ` with the same scan as the bound curves.
    Extremize,
    /// Evaluate at one fixed `Jτ`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridResolution {
    pub theta_points: usize,
    pub phi_points: usize,
}

impl GridResolution {
    pub fn square(points: usize) -> Self {
        Self {
            theta_points: points,
            phi_points: points,
        }
    }

    /// `θ_i = iπ/(N − 1)` including both poles.
    pub fn thetas(&self) -> Vec<f64> {
        let n = self.theta_points;
        (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
    }

    /// `φ_j = 2πj/N`.
    pub fn phis(&self) -> Vec<f64> {
        let n = self.phi_points;
        (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
    }

    pub fn theta_step(&self) -> f64 {
        PI / (self.theta_points - 1) as f64
    }

    pub fn phi_step(&self) -> f64 {
        2.0 * PI / self.phi_points as f64
    }
}

impl Default for GridResolution {
    fn default() -> Self {
        Self::square(DEFAULT_GRID)
    }
}

/// Value of the objective for one target, with the `Jτ` where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub jtau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: TargetStateParams,
    pub best_value: f64,
    pub best_jtau: f64,
    pub objective: Objective,
    pub order: usize,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// `values[i][j]` at `(thetas[i], phis[j])`.
    pub values: Vec<Vec<f64>>,
    /// Cell size `(Δθ, Δφ)` of the local refinement grid.
    pub refined_step: (f64, f64),
}

/// Everything shared between target evaluations at fixed parameters.
pub struct ObjectiveEvaluator {
    params: PtParams,
    order: usize,
    objective: Objective,
    obs: DichotomicObservable,
    taus: Vec<f64>,
    kernels: Vec<KnKernel>,
    spacing: f64,
    extremize: bool,
}

impl ObjectiveEvaluator {
    pub fn new(p: &PtParams, order: usize, objective: Objective, tau: TauStrategy) -> Result<Self> {
        let obs = DichotomicObservable::sigma_y();
        let (taus, spacing, extremize) = match tau {
            TauStrategy::Extremize => {
                let domain = ScanDomain::for_params(p);
                (domain.grid(SCAN_POINTS), domain.spacing(SCAN_POINTS), true)
            }
            TauStrategy::Fixed(t) => (vec![t], 0.0, false),
        };
        let kernels = par::try_map(&taus, |_, &t| {
            KnKernel::new(p, &CorrelationSchedule::new(order, t)?, &obs)
        })?;
        Ok(Self {
            params: *p,
            order,
            objective,
            obs,
            taus,
            kernels,
            spacing,
            extremize,
        })
    }

    pub fn evaluate(&self, tsp: &TargetStateParams) -> Result<ObjectiveValue> {
        let psi = target_state(tsp);
        if !self.extremize {
            return Ok(ObjectiveValue {
                value: self.kernels[0].eval(&psi)?,
                jtau: self.taus[0],
            });
        }
        let values = self
            .kernels
            .iter()
            .map(|k| k.eval(&psi))
            .collect::<Result<Vec<_>>>()?;
        let best = grid_best(&values, self.objective);
        let f = |t: f64| -> Result<f64> {
            KnKernel::new(&self.params, &CorrelationSchedule::new(self.order, t)?, &self.obs)?
                .eval(&psi)
        };
        let (jtau, value) =
            refine_extremum(f, self.taus[best], values[best], self.spacing, self.objective)?;
        Ok(ObjectiveValue { value, jtau })
    }
}

/// Reproduce the objective at a single `(θ, φ)`.
pub fn objective_at(
    p: &PtParams,
    order: usize,
    objective: Objective,
    tau: TauStrategy,
    tsp: &TargetStateParams,
) -> Result<ObjectiveValue> {
    ObjectiveEvaluator::new(p, order, objective, tau)?.evaluate(tsp)
}

/// Grid search over `θ × φ`, then one local grid at [`REFINE_FACTOR`]× the
/// resolution around the best coarse cell. Ties go to the smallest `θ`, then
/// the smallest `φ`.
pub fn optimize_target_state(
    p: &PtParams,
    order: usize,
    objective: Objective,
    grid: GridResolution,
    tau: TauStrategy,
) -> Result<OptimizationResult> {
    if grid.theta_points < MIN_GRID || grid.phi_points < MIN_GRID {
        return Err(invalid("grid", format!("need at least {MIN_GRID} points per axis")));
    }
    let eval = ObjectiveEvaluator::new(p, order, objective, tau)?;
    let thetas = grid.thetas();
    let phis = grid.phis();
    let cells: Vec<TargetStateParams> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&f| TargetStateParams { theta: t, phi: f }))
        .collect();
    let coarse = par::try_map(&cells, |_, c| eval.evaluate(c))?;
    let coarse_best = best_index(&coarse, objective);

    let centre = cells[coarse_best];
    let d_theta = grid.theta_step() / REFINE_FACTOR as f64;
    let d_phi = grid.phi_step() / REFINE_FACTOR as f64;
    let r = REFINE_FACTOR as i64;
    let mut fine_thetas: Vec<f64> = (-r..=r)
        .map(|k| centre.theta + k as f64 * d_theta)
        .filter(|t| (0.0..=PI).contains(t))
        .collect();
    // the pole cells may have been pushed past the boundary
    fine_thetas.sort_by(f64::total_cmp);
    let mut fine_phis: Vec<f64> = (-r..=r)
        .map(|k| (centre.phi + k as f64 * d_phi).rem_euclid(2.0 * PI))
        .collect();
    fine_phis.sort_by(f64::total_cmp);
    fine_phis.dedup();
    let fine_cells: Vec<TargetStateParams> = fine_thetas
        .iter()
        .flat_map(|&t| fine_phis.iter().map(move |&f| TargetStateParams { theta: t, phi: f }))
        .collect();
    let fine = par::try_map(&fine_cells, |_, c| eval.evaluate(c))?;
    let fine_best = best_index(&fine, objective);

    let (best, best_eval) = if objective.better(fine[fine_best].value, coarse[coarse_best].value) {
        (fine_cells[fine_best], fine[fine_best])
    } else {
        (centre, coarse[coarse_best])
    };

    let values = coarse
        .chunks(phis.len())
        .map(|row| row.iter().map(|v| v.value).collect())
        .collect();
    Ok(OptimizationResult {
        best,
        best_value: best_eval.value,
        best_jtau: best_eval.jtau,
        objective,
        order,
        thetas,
        phis,
        values,
        refined_step: (d_theta, d_phi),
    })
}

/// First best entry in `θ`-major order.
fn best_index(values: &[ObjectiveValue], objective: Objective) -> usize {
    let plain: Vec<f64> = values.iter().map(|v| v.value).collect();
    grid_best(&plain, objective)
}
