//! Test-only oracles, independent of the engine's circuit assembly.

#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use iqpe_core::qcore::{kron, SingleQubitOperator, StateVector, TwoQubitOperator, C64};

fn hadamard_on_ancilla() -> TwoQubitOperator {
    let h = SingleQubitOperator::new([
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)],
    ]);
    kron(&h, &SingleQubitOperator::IDENTITY)
}

/// Control-U^{2^k} built from the unreduced angle `2π·φ·2^k`.
fn controlled_power(k: u32, phi: f64) -> TwoQubitOperator {
    let theta = 2.0 * PI * phi * 2f64.powi(k as i32);
    let one = C64::new(1.0, 0.0);
    TwoQubitOperator::diag([
        one,
        one,
        C64::from_polar(1.0, theta),
        C64::from_polar(1.0, -theta),
    ])
}

fn rz_on_ancilla(omega: f64) -> TwoQubitOperator {
    let rz = SingleQubitOperator::diag(
        C64::from_polar(1.0, -omega / 2.0),
        C64::from_polar(1.0, omega / 2.0),
    );
    kron(&rz, &SingleQubitOperator::IDENTITY)
}

/// Feedback angle from the explicit binary fraction of the bits measured so
/// far (LSB first): `ω = −2π·Σ_j b_j 2^{−(n−j+1)}`.
fn omega_for(bits: &[u8]) -> f64 {
    let n = bits.len() as i32;
    -2.0 * PI
        * bits
            .iter()
            .enumerate()
            .map(|(j, &b)| f64::from(b) * 2f64.powi(-(n - j as i32 + 1)))
            .sum::<f64>()
}

/// Exact distribution of the ideal estimate `M ∈ [0, 2^m)`, found by
/// propagating every measurement branch with its probability. No sampling.
pub fn ideal_outcome_distribution(phi: f64, m: u32) -> Vec<f64> {
    let mut dist = vec![0.0; 1 << m];
    let mut bits = Vec::with_capacity(m as usize);
    descend(StateVector::basis(0), phi, m, 1.0, &mut bits, &mut dist);
    dist
}

fn descend(state: StateVector, phi: f64, m: u32, prob: f64, bits: &mut Vec<u8>, dist: &mut [f64]) {
    let i = bits.len() as u32;
    if i == m {
        let estimate: usize = bits
            .iter()
            .enumerate()
            .map(|(j, &b)| usize::from(b) << j)
            .sum();
        dist[estimate] += prob;
        return;
    }
    let h = hadamard_on_ancilla();
    let circuit = h * rz_on_ancilla(omega_for(bits)) * controlled_power(m - 1 - i, phi) * h;
    let s = state.transformed(&circuit);
    for bit in [0u8, 1] {
        let rows = if bit == 0 { [0, 1] } else { [2, 3] };
        let p: f64 = rows.iter().map(|&r| s.amp[r].norm_sqr()).sum();
        if p < 1e-300 {
            continue;
        }
        // collapse, then reset the ancilla to |0⟩
        let mut amp = [C64::new(0.0, 0.0); 4];
        amp[0] = s.amp[rows[0]] / p.sqrt();
        amp[1] = s.amp[rows[1]] / p.sqrt();
        bits.push(bit);
        descend(StateVector { amp }, phi, m, prob * p, bits, dist);
        bits.pop();
    }
}

/// Product-form probability of estimate `M`: `Π_k cos²(π·x/2^k)` with
/// `x = 2^m·φ − M`.
pub fn product_form_probability(phi: f64, m: u32, estimate: u64) -> f64 {
    let x = phi * 2f64.powi(m as i32) - estimate as f64;
    (1..=m)
        .map(|k| (PI * x / 2f64.powi(k as i32)).cos().powi(2))
        .product()
}

/// Probability that the ideal estimate lands within one LSB of `φ`.
pub fn ideal_success_probability(phi: f64, m: u32) -> f64 {
    ideal_outcome_distribution(phi, m)
        .iter()
        .enumerate()
        .filter(|(est, _)| iqpe_core::iqpe::is_success(*est as u64, phi, m))
        .map(|(_, p)| p)
        .sum()
}
