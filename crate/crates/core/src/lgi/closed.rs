//! Closed-form `K_3`, `K_4` and two-time correlations for the default target
//! `|+⟩` and observable `σ_y`, transcribed term by term. Arguments are the
//! dimensionless spacing `J·τ`; inside, `J = 1` and `γ = γ/J`.
//!
//! The expressions are evaluated as printed. Where they disagree with the
//! joint-probability oracle the difference is reported by
//! [`super::crosscheck`], not patched here.

use crate::dynamics::{Phase, PtParams};
use crate::error::{Error, Result};

/// `2cos(2Jτ) − cos(4Jτ)`.
pub fn k3_hermitian_closed(jtau: f64) -> f64 {
    2.0 * (2.0 * jtau).cos() - (4.0 * jtau).cos()
}

/// `3cos(2Jτ) − cos(6Jτ)`.
pub fn k4_hermitian_closed(jtau: f64) -> f64 {
    3.0 * (2.0 * jtau).cos() - (6.0 * jtau).cos()
}

fn symmetric(p: &PtParams, what: &'static str) -> Result<(f64, f64)> {
    if p.phase() != Phase::Symmetric {
        return Err(Error::OutsideSymmetricPhase {
            what,
            ratio: p.ratio(),
        });
    }
    Ok((p.ratio(), p.chi().re))
}

/// `(γ + J cos x)/(J + γ cos x)`, the shape shared by `C21`, `C31`, `C41`.
fn ratio_term(g: f64, c: f64) -> f64 {
    (g + c) / (1.0 + g * c)
}

/// The two-term `C32` expression as printed with `K_3`.
fn c32_printed(g: f64, c2: f64) -> f64 {
    let den = (1.0 - g * c2) * (1.0 + g * c2).powi(2);
    let first = (g * g + (1.0 + g - g * g) * c2) / den;
    let second = g * c2 * (-1.0 + g + g * g + c2) / den;
    first - second
}

/// Non-Hermitian `K_3`.
pub fn k3_pt_closed(p: &PtParams, jtau: f64) -> Result<f64> {
    let (g, chi) = symmetric(p, "k3_pt_closed")?;
    let c2 = (2.0 * jtau * chi).cos();
    let c4 = (4.0 * jtau * chi).cos();
    Ok(ratio_term(g, c2) - ratio_term(g, c4) + c32_printed(g, c2))
}

/// Non-Hermitian `K_4`, including the `χ²` term of the last numerator.
/// The printed bare `t` in the middle terms is read as `τ`.
pub fn k4_pt_closed(p: &PtParams, jtau: f64) -> Result<f64> {
    let (g, chi) = symmetric(p, "k4_pt_closed")?;
    let x = jtau * chi;
    let c1 = x.cos();
    let s1 = x.sin();
    let c2 = (2.0 * x).cos();
    let c4 = (4.0 * x).cos();
    let c6 = (6.0 * x).cos();
    let c8 = (8.0 * x).cos();

    let outer = ratio_term(g, c2) - ratio_term(g, c6);
    let mid_a = (g + 1.0) * c1 * c1 * (g + c2) / (1.0 + g * c2).powi(2);
    let mid_b = 2.0 * (1.0 - g) * s1 * s1 * (c2 - g) / (g * g - 2.0 + g * g * c4);
    let num = 2.0 * (-g.powi(3) + 2.0 + g - 2.0 * g * g) * c2
        + g * (2.0 * (1.0 - g) * c4 - (-2.0 * g + c8 + 1.0) + 2.0 * chi * chi * c6);
    let den = 4.0 * (1.0 - g * c2) * (1.0 + g * c2) * (1.0 + g * c4);
    Ok(outer + mid_a - mid_b + num / den)
}

/// The five two-time correlations in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedCorrelators {
    pub c21: f64,
    pub c31: f64,
    pub c41: f64,
    pub c32: f64,
    pub c43: f64,
}

impl ClosedCorrelators {
    pub fn as_array(&self) -> [(&'static str, f64); 5] {
        [
            ("C21", self.c21),
            ("C31", self.c31),
            ("C41", self.c41),
            ("C32", self.c32),
            ("C43", self.c43),
        ]
    }
}

pub fn correlators_closed(p: &PtParams, jtau: f64) -> Result<ClosedCorrelators> {
    let (g, chi) = symmetric(p, "correlators_closed")?;
    let c = |m: f64| (m * jtau * chi).cos();
    let (c2, c4, c6, c8) = (c(2.0), c(4.0), c(6.0), c(8.0));
    let chi2 = 1.0 - g * g;

    let c43_den = 4.0 * (1.0 - g * g * c2 * c2) * (g * c4 + 1.0);
    let c43 = 2.0 * chi2 * (g + 2.0) * c2 / c43_den
        + g * (2.0 * (1.0 - g) * c4 + 2.0 * chi2 * c6 - (-2.0 * g + c8 + 1.0)) / c43_den;

    Ok(ClosedCorrelators {
        c21: ratio_term(g, c2),
        c31: ratio_term(g, c4),
        c41: ratio_term(g, c6),
        c32: c32_printed(g, c2),
        c43,
    })
}
