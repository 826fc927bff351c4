//! Closed-form success probabilities of ideal iterative phase estimation.
//!
//! Write `φ = φ̃ + δ·2^{−m}` with `φ̃` the m-bit truncation. Step `k` reads its
//! bit correctly with probability `cos²(πδ/2^k)`, and all `m` bits come out
//! right with
//!
//! ```text
//! P_tot(δ) = Π_{k=1}^{m} cos²(πδ/2^k) = sin²(πδ) / (2^{2m}·sin²(πδ/2^m))
//! ```
//!
//! Counting the upward neighbour of `φ̃` as a success as well gives
//! `P_tot(δ) + P_tot(1−δ) ≥ 8/π²`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `4/π²`, the large-m limit of `P_tot(1/2)`.
pub const FOUR_OVER_PI_SQ: f64 = 4.0 / (PI * PI);
/// `8/π²`, the large-m lower bound of the two-outcome success probability.
pub const EIGHT_OVER_PI_SQ: f64 = 8.0 / (PI * PI);

/// Remainders below this are treated as exactly zero in [`p_total`].
const DELTA_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition {
    pub phi_tilde: f64,
    pub delta: f64,
    pub m: u32,
}

pub fn decompose_phase(phi: f64, m: u32) -> Result<PhaseDecomposition> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::PhaseOutOfRange(phi));
    }
    if !(1..=52).contains(&m) {
        return Err(Error::config(format!(
            "m must be in 1..=52 for phase decomposition, got {m}"
        )));
    }
    let scale = 2f64.powi(m as i32);
    let scaled = phi * scale;
    let floor = scaled.floor();
    Ok(PhaseDecomposition {
        phi_tilde: floor / scale,
        delta: scaled - floor,
        m,
    })
}

/// `cos²(πδ/2^k)`.
pub fn p_step(delta: f64, k: u32) -> f64 {
    (PI * delta / 2f64.powi(k as i32)).cos().powi(2)
}

/// Product form of `P_tot`, kept as an independent route to [`p_total`].
pub fn p_total_product(delta: f64, m: u32) -> f64 {
    (1..=m).map(|k| p_step(delta, k)).product()
}

/// `sin²(πδ)/(2^{2m} sin²(πδ/2^m))`, with the `δ → 0` limit 1.
pub fn p_total(delta: f64, m: u32) -> f64 {
    if delta.abs() < DELTA_ZERO {
        return 1.0;
    }
    let scale = 2f64.powi(m as i32);
    let ratio = (PI * delta).sin() / (scale * (PI * delta / scale).sin());
    ratio * ratio
}

/// `P_tot(δ) + P_tot(1−δ)`.
pub fn success_sum(delta: f64, m: u32) -> f64 {
    p_total(delta, m) + p_total(1.0 - delta, m)
}

/// Mean ideal success probability over uniformly random phases,
/// `2∫₀¹ P_tot(δ) dδ`.
pub fn expected_ideal_success(m: u32) -> f64 {
    2.0 * integrate(|d| p_total(d, m), 0.0, 1.0, 1e-11)
}

/// Adaptive Simpson quadrature with Richardson correction, to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
