//! Pointwise comparison of the closed forms against the joint-probability
//! oracle, with a sanity audit of the oracle itself.

use std::f64::consts::PI;
use std::fmt;

use super::closed::{correlators_closed, k3_pt_closed, k4_pt_closed};
use super::{correlation, joint_probabilities, DichotomicObservable, JointDistribution};
use crate::dynamics::{Phase, PtParams, QubitState};
use crate::error::{Error, Result};
use crate::par;

/// Agreement threshold between closed form and oracle.
pub const CROSSCHECK_TOLERANCE: f64 = 1e-8;

/// Largest closed-form/oracle gap for one quantity over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrepancy {
    pub quantity: &'static str,
    pub max_abs_diff: f64,
    pub at_ratio: f64,
    pub at_jtau: f64,
    pub closed_value: f64,
    pub oracle_value: f64,
}

impl Discrepancy {
    pub fn agrees(&self) -> bool {
        self.max_abs_diff <= CROSSCHECK_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationReport {
    pub points: usize,
    pub discrepancies: Vec<Discrepancy>,
    /// Human-readable descriptions of any oracle invariant failures.
    pub oracle_violations: Vec<String>,
}

impl CrossValidationReport {
    pub fn oracle_ok(&self) -> bool {
        self.oracle_violations.is_empty()
    }

    pub fn get(&self, quantity: &str) -> Option<&Discrepancy> {
        self.discrepancies.iter().find(|d| d.quantity == quantity)
    }
}

impl fmt::Display for CrossValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "closed form vs oracle over {} grid points", self.points)?;
        for d in &self.discrepancies {
            writeln!(
                f,
                "  {:<4} {} max |diff| = {:.3e} at gamma/J = {}, J*tau = {:.6} (closed {:.9}, oracle {:.9})",
                d.quantity,
                if d.agrees() { "match   " } else { "MISMATCH" },
                d.max_abs_diff,
                d.at_ratio,
                d.at_jtau,
                d.closed_value,
                d.oracle_value
            )?;
        }
        if self.oracle_ok() {
            writeln!(f, "  oracle invariants: ok")
        } else {
            for v in &self.oracle_violations {
                writeln!(f, "  oracle violation: {v}")?;
            }
            Ok(())
        }
    }
}

const QUANTITIES: [&str; 7] = ["C21", "C31", "C41", "C32", "C43", "K3", "K4"];

struct PointEval {
    ratio: f64,
    jtau: f64,
    closed: [f64; 7],
    oracle: [f64; 7],
    violations: Vec<String>,
}

fn audit(name: &str, j: &JointDistribution, ratio: f64, jtau: f64, out: &mut Vec<String>) {
    let c = correlation(j);
    if !j.is_valid() || c.abs() > 1.0 + 1e-10 {
        out.push(format!(
            "{name} at gamma/J = {ratio}, J*tau = {jtau}: {j:?} (C = {c})"
        ));
    }
}

fn evaluate(ratio: f64, jtau: f64) -> Result<PointEval> {
    let p = PtParams::from_ratio(ratio)?;
    let target = QubitState::plus();
    let obs = DichotomicObservable::sigma_y();
    let mut violations = Vec::new();
    let mut joint = |name: &str, t_i: f64, t_ji: f64| -> Result<f64> {
        let j = joint_probabilities(&target, &p, t_i, t_ji, &obs)?;
        audit(name, &j, ratio, jtau, &mut violations);
        Ok(correlation(&j))
    };
    let c21 = joint("C21", 0.0, jtau)?;
    let c31 = joint("C31", 0.0, 2.0 * jtau)?;
    let c41 = joint("C41", 0.0, 3.0 * jtau)?;
    let c32 = joint("C32", jtau, jtau)?;
    let c43 = joint("C43", 2.0 * jtau, jtau)?;
    let k3 = c21 + c32 - c31;
    let k4 = c21 + c32 + c43 - c41;

    let cc = correlators_closed(&p, jtau)?;
    let closed = [
        cc.c21,
        cc.c31,
        cc.c41,
        cc.c32,
        cc.c43,
        k3_pt_closed(&p, jtau)?,
        k4_pt_closed(&p, jtau)?,
    ];
    Ok(PointEval {
        ratio,
        jtau,
        closed,
        oracle: [c21, c31, c41, c32, c43, k3, k4],
        violations,
    })
}

/// Compare every closed form with the oracle on the `ratios × taus` grid
/// (ratios must lie in the symmetric phase).
pub fn cross_validate(ratios: &[f64], taus: &[f64]) -> Result<CrossValidationReport> {
    let grid: Vec<(f64, f64)> = ratios
        .iter()
        .flat_map(|&g| taus.iter().map(move |&t| (g, t)))
        .collect();
    cross_validate_grid(&grid)
}

/// As [`cross_validate`], but each ratio gets its own `points` spacings
/// `Jτ_k = kπ/(χ points)`, covering one period `(0, π/χ]`.
pub fn cross_validate_periods(ratios: &[f64], points: usize) -> Result<CrossValidationReport> {
    let mut grid = Vec::with_capacity(ratios.len() * points);
    for &g in ratios {
        let p = PtParams::from_ratio(g)?;
        if p.phase() != Phase::Symmetric {
            return Err(Error::OutsideSymmetricPhase {
                what: "cross_validate_periods",
                ratio: g,
            });
        }
        let period = PI / p.chi().re;
        grid.extend((1..=points).map(|k| (g, period * k as f64 / points as f64)));
    }
    cross_validate_grid(&grid)
}

fn cross_validate_grid(grid: &[(f64, f64)]) -> Result<CrossValidationReport> {
    let evals = par::try_map(grid, |_, &(g, t)| evaluate(g, t))?;

    let mut discrepancies: Vec<Discrepancy> = QUANTITIES
        .iter()
        .map(|&quantity| Discrepancy {
            quantity,
            max_abs_diff: 0.0,
            at_ratio: f64::NAN,
            at_jtau: f64::NAN,
            closed_value: f64::NAN,
            oracle_value: f64::NAN,
        })
        .collect();
    let mut oracle_violations = Vec::new();
    for e in &evals {
        for (q, d) in discrepancies.iter_mut().enumerate() {
            let mut diff = (e.closed[q] - e.oracle[q]).abs();
            // a NaN closed form counts as the worst case
            if diff.is_nan() {
                diff = f64::INFINITY;
            }
            if d.at_ratio.is_nan() || diff > d.max_abs_diff {
                d.max_abs_diff = diff;
                d.at_ratio = e.ratio;
                d.at_jtau = e.jtau;
                d.closed_value = e.closed[q];
                d.oracle_value = e.oracle[q];
            }
        }
        oracle_violations.extend(e.violations.iter().cloned());
    }
    Ok(CrossValidationReport {
        points: grid.len(),
        discrepancies,
        oracle_violations,
    })
}
