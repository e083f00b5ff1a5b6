//! Parameter-space exploration of `K_n`: surfaces over `(γ/J, Jτ)`, extremal
//! bounds over `τ` and the summary bound table.
//!
//! Every value here comes from the joint-probability oracle in [`crate::lgi`].

use std::f64::consts::PI;

use crate::dynamics::{Phase, PtParams, QubitState};
use crate::error::{invalid, Result};
use crate::lgi::{k_n, CorrelationSchedule, DichotomicObservable};
use crate::par;

/// Grid points in one `τ` scan.
pub const SCAN_POINTS: usize = 2000;

/// Largest scanned `Jτ`; the dynamical period `π/χ` diverges at the
/// exceptional point.
pub const TAU_CAP: f64 = 50.0;

/// Stand-in for the `γ → J` limit.
pub const EP_PROXY_RATIO: f64 = 1.0 - 1e-3;

/// Largest ratio accepted by [`extremal_bounds`].
pub const MAX_BOUND_RATIO: f64 = 0.999;

/// Parabolic refinement stops once the bracket half-width drops below this.
const REFINE_WIDTH: f64 = 1e-10;
const REFINE_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Max,
    Min,
}

impl Objective {
    fn sign(self) -> f64 {
        match self {
            Objective::Max => 1.0,
            Objective::Min => -1.0,
        }
    }

    /// `a` strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.sign() * a > self.sign() * b
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Max => "max",
            Objective::Min => "min",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "max" => Ok(Objective::Max),
            "min" => Ok(Objective::Min),
            other => Err(format!("expected `max` or `min`, got `{other}`")),
        }
    }
}

/// The scanned interval `(0, upper]` of `Jτ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanDomain {
    pub upper: f64,
    /// `true` when one period `π/χ` exceeds [`TAU_CAP`].
    pub capped: bool,
}

impl ScanDomain {
    pub fn for_params(p: &PtParams) -> Self {
        let period = match p.phase() {
            Phase::Symmetric => PI / p.chi().re,
            Phase::Exceptional | Phase::Broken => f64::INFINITY,
        };
        if period > TAU_CAP {
            Self {
                upper: TAU_CAP,
                capped: true,
            }
        } else {
            Self {
                upper: period,
                capped: false,
            }
        }
    }

    /// `τ_k = k·upper/points`, `k = 1..=points`.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        (1..=points)
            .map(|k| self.upper * k as f64 / points as f64)
            .collect()
    }

    pub fn spacing(&self, points: usize) -> f64 {
        self.upper / points as f64
    }
}

/// One extremum of a `τ` scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauExtremum {
    /// Refined value.
    pub value: f64,
    /// Location `Jτ` of the refined value.
    pub jtau: f64,
    /// Best value on the raw grid before refinement.
    pub raw_value: f64,
}

/// Polish a grid extremum at `x0` by successive parabolic interpolation on a
/// bracket of half-width `h0`, shrinking the bracket by 4 per round. Only
/// improvements are accepted, so the result is never worse than `f0`.
pub fn refine_extremum<F>(f: F, x0: f64, f0: f64, h0: f64, objective: Objective) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let s = objective.sign();
    let (mut x, mut fx) = (x0, s * f0);
    let mut h = h0;
    for _ in 0..REFINE_MAX_ITER {
        if h < REFINE_WIDTH {
            break;
        }
        if x - h <= 0.0 {
            h = 0.5 * x;
            continue;
        }
        let fl = s * f(x - h)?;
        let fr = s * f(x + h)?;
        if fl > fx || fr > fx {
            if fl > fr {
                x -= h;
                fx = fl;
            } else {
                x += h;
                fx = fr;
            }
            continue;
        }
        let curvature = fl - 2.0 * fx + fr;
        if curvature < 0.0 {
            let xv = x + 0.5 * h * (fl - fr) / curvature;
            if xv > 0.0 && xv != x {
                let fv = s * f(xv)?;
                if fv > fx {
                    x = xv;
                    fx = fv;
                }
            }
        }
        h *= 0.25;
    }
    Ok((x, s * fx))
}

/// Sup and inf of `f` over the domain grid, each refined parabolically.
/// Ties on the grid resolve to the smallest `τ`.
pub fn scan_extrema<F>(f: F, domain: &ScanDomain, points: usize) -> Result<(TauExtremum, TauExtremum)>
where
    F: Fn(f64) -> Result<f64>,
{
    let taus = domain.grid(points);
    let values = taus.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    extrema_from_grid(&f, &taus, &values, domain.spacing(points))
}

pub(crate) fn extrema_from_grid<F>(
    f: &F,
    taus: &[f64],
    values: &[f64],
    spacing: f64,
) -> Result<(TauExtremum, TauExtremum)>
where
    F: Fn(f64) -> Result<f64>,
{
    let pick = |objective: Objective| -> Result<TauExtremum> {
        let best = grid_best(values, objective);
        let (jtau, value) = refine_extremum(f, taus[best], values[best], spacing, objective)?;
        Ok(TauExtremum {
            value,
            jtau,
            raw_value: values[best],
        })
    };
    Ok((pick(Objective::Max)?, pick(Objective::Min)?))
}

/// Index of the first best value.
pub(crate) fn grid_best(values: &[f64], objective: Objective) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if objective.better(v, values[best]) {
            best = i;
        }
    }
    best
}

/// `K_n` over the rectangle `gamma_ratios × taus`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub order: usize,
    pub gamma_ratios: Vec<f64>,
    pub taus: Vec<f64>,
    /// `values[i][j]` at `(gamma_ratios[i], taus[j])`.
    pub values: Vec<Vec<f64>>,
}

impl SweepGrid {
    pub fn row(&self, ratio: f64) -> Option<&[f64]> {
        self.gamma_ratios
            .iter()
            .position(|&g| g == ratio)
            .map(|i| self.values[i].as_slice())
    }
}

fn check_increasing(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(invalid(name, "axis is empty"));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid(name, "axis must be strictly increasing"));
    }
    Ok(())
}

pub fn k_surface(p_base: &PtParams, gamma_ratios: &[f64], taus: &[f64], order: usize) -> Result<SweepGrid> {
    check_increasing("gamma_ratios", gamma_ratios)?;
    check_increasing("taus", taus)?;
    if gamma_ratios.iter().any(|&g| !(0.0..1.0).contains(&g)) {
        return Err(invalid("gamma_ratios", "ratios must lie in [0, 1)"));
    }
    if taus[0] <= 0.0 {
        return Err(invalid("taus", "spacings must be positive"));
    }
    CorrelationSchedule::new(order, taus[0])?;

    let target = QubitState::plus();
    let obs = DichotomicObservable::sigma_y();
    let cells: Vec<(f64, f64)> = gamma_ratios
        .iter()
        .flat_map(|&g| taus.iter().map(move |&t| (g, t)))
        .collect();
    let flat = par::try_map(&cells, |_, &(g, t)| {
        let p = p_base.with_ratio(g)?;
        Ok(k_n(&p, &CorrelationSchedule::new(order, t)?, &target, &obs)?.value)
    })?;
    let values = flat.chunks(taus.len()).map(<[f64]>::to_vec).collect();
    Ok(SweepGrid {
        order,
        gamma_ratios: gamma_ratios.to_vec(),
        taus: taus.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub ratio: f64,
    pub sup: TauExtremum,
    pub inf: TauExtremum,
    pub domain: ScanDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub order: usize,
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    pub fn at(&self, ratio: f64) -> Option<&BoundPoint> {
        self.points.iter().find(|b| b.ratio == ratio)
    }
}

/// Sup/inf over `τ` of the oracle `K_n` for the default target and
/// observable, one entry per ratio.
pub fn extremal_bounds(p_base: &PtParams, gamma_ratios: &[f64], order: usize) -> Result<BoundCurve> {
    extremal_bounds_with(
        p_base,
        gamma_ratios,
        order,
        &QubitState::plus(),
        &DichotomicObservable::sigma_y(),
    )
}

pub fn extremal_bounds_with(
    p_base: &PtParams,
    gamma_ratios: &[f64],
    order: usize,
    target: &QubitState,
    obs: &DichotomicObservable,
) -> Result<BoundCurve> {
    if gamma_ratios
        .iter()
        .any(|&g| !(0.0..=MAX_BOUND_RATIO).contains(&g))
    {
        return Err(invalid("gamma_ratios", format!("ratios must lie in [0, {MAX_BOUND_RATIO}]")));
    }
    if order < 3 {
        return Err(invalid("n", format!("order must be >= 3, got {order}")));
    }
    let points = par::try_map(gamma_ratios, |_, &g| {
        let p = p_base.with_ratio(g)?;
        let domain = ScanDomain::for_params(&p);
        let f = |t: f64| -> Result<f64> {
            Ok(k_n(&p, &CorrelationSchedule::new(order, t)?, target, obs)?.value)
        };
        let (sup, inf) = scan_extrema(f, &domain, SCAN_POINTS)?;
        Ok(BoundPoint {
            ratio: g,
            sup,
            inf,
            domain,
        })
    })?;
    Ok(BoundCurve { order, points })
}

/// `(K3 min, K3 max, K4 min, K4 max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub k3_min: f64,
    pub k3_max: f64,
    pub k4_min: f64,
    pub k4_max: f64,
}

impl BoundRow {
    pub fn as_array(&self) -> [f64; 4] {
        [self.k3_min, self.k3_max, self.k4_min, self.k4_max]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTable {
    /// Macrorealist bounds.
    pub classical: BoundRow,
    /// Scanned at `γ = 0`.
    pub hermitian: BoundRow,
    /// Scanned at [`EP_PROXY_RATIO`] for the default target and observable.
    pub near_ep: BoundRow,
    /// Limits claimed for `γ → J`. The `K4` minimum need not be reached with
    /// the same observable as the maximum.
    pub claimed_limit: BoundRow,
    pub near_ep_ratio: f64,
}

pub fn bound_table(p_base: &PtParams) -> Result<BoundTable> {
    let row = |g: f64| -> Result<BoundRow> {
        let k3 = extremal_bounds(p_base, &[g], 3)?.points[0];
        let k4 = extremal_bounds(p_base, &[g], 4)?.points[0];
        Ok(BoundRow {
            k3_min: k3.inf.value,
            k3_max: k3.sup.value,
            k4_min: k4.inf.value,
            k4_max: k4.sup.value,
        })
    };
    Ok(BoundTable {
        classical: BoundRow {
            k3_min: -3.0,
            k3_max: 1.0,
            k4_min: -2.0,
            k4_max: 2.0,
        },
        hermitian: row(0.0)?,
        near_ep: row(EP_PROXY_RATIO)?,
        claimed_limit: BoundRow {
            k3_min: -3.0,
            k3_max: 3.0,
            k4_min: -4.0,
            k4_max: 4.0,
        },
        near_ep_ratio: EP_PROXY_RATIO,
    })
}
