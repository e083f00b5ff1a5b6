//! Independent reference implementations used across the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Amp = [C; 2];

const I: C = C { re: 0.0, im: 1.0 };

/// `dψ/ds = −i H_eff ψ` with `H_eff = [[0, 1], [1, −2ig]]`.
fn deriv(psi: Amp, g: f64) -> Amp {
    [-I * psi[1], -I * (psi[0] - I * 2.0 * g * psi[1])]
}

fn axpy(a: Amp, h: f64, k: Amp) -> Amp {
    [a[0] + k[0] * h, a[1] + k[1] * h]
}

/// Fixed-step RK4 of the unnormalized Schrödinger-like equation.
pub fn rk4(psi: Amp, g: f64, t: f64, dt: f64) -> Amp {
    if t == 0.0 {
        return psi;
    }
    let n = (t / dt).ceil() as usize;
    let h = t / n as f64;
    let mut y = psi;
    for _ in 0..n {
        let k1 = deriv(y, g);
        let k2 = deriv(axpy(y, 0.5 * h, k1), g);
        let k3 = deriv(axpy(y, 0.5 * h, k2), g);
        let k4 = deriv(axpy(y, h, k3), g);
        y = [
            y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
            y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
        ];
    }
    y
}

pub fn norm_sqr(a: Amp) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr()
}

/// `|⟨e|ψ⟩|²`.
pub fn overlap_sqr(e: Amp, psi: Amp) -> f64 {
    (e[0].conj() * psi[0] + e[1].conj() * psi[1]).norm_sqr()
}

/// Eigenvectors of the σ_y-type observable: `|±⟩ = (±i, 1)/√2`.
pub fn eig(plus: bool) -> Amp {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [C::new(0.0, if plus { s } else { -s }), C::new(s, 0.0)]
}

/// Joint probabilities `[pp, pm, mp, mm]` built from RK4-evolved states.
pub fn joint_rk4(psi: Amp, g: f64, t_i: f64, t_ji: f64) -> [f64; 4] {
    let dt = 1e-3;
    let at_first = rk4(psi, g, t_i, dt);
    let n1 = norm_sqr(at_first);
    let mut out = [0.0; 4];
    for (ia, a) in [true, false].into_iter().enumerate() {
        let pa = overlap_sqr(eig(a), at_first) / n1;
        let after = rk4(eig(a), g, t_ji, dt);
        let n2 = norm_sqr(after);
        for (ib, b) in [true, false].into_iter().enumerate() {
            out[2 * ia + ib] = pa * overlap_sqr(eig(b), after) / n2;
        }
    }
    out
}

pub fn corr(d: [f64; 4]) -> f64 {
    d[0] - d[1] - d[2] + d[3]
}

/// `K_n` assembled from [`joint_rk4`] for the target `psi`.
pub fn kn_rk4(psi: Amp, g: f64, n: usize, tau: f64) -> f64 {
    let mut k = 0.0;
    for j in 1..n {
        k += corr(joint_rk4(psi, g, (j - 1) as f64 * tau, tau));
    }
    k - corr(joint_rk4(psi, g, 0.0, (n - 1) as f64 * tau))
}

pub fn plus_amp() -> Amp {
    eig(true)
}
