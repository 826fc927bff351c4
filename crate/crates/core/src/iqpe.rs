//! The iterative phase-estimation engine.
//!
//! Step `i` (of `m`) runs `H · [gap] · C-U^{2^k} · [gap] · R_z(ω_i) · [gap] · H`
//! on the ancilla with `k = m−1−i`, then measures the ancilla. The measured bit
//! is fed back into the next `ω`, the ancilla is reset to `|0⟩`, and the
//! target keeps its collapsed state. Bits therefore come out least
//! significant first.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::{
    controlled_u_gate, hadamard_gate, rz_gate, sample_disorder, GateFamily, NoisePolicy,
    StaticDisorder,
};
use crate::parec::{Gap, GapPolicy};
use crate::qcore::{measure_ancilla, Qubit, SingleQubitOperator, StateVector};

pub const MAX_BITS: u32 = 62;
pub const DEFAULT_GAPS_PER_ITERATION: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Bits of precision.
    pub m: u32,
    /// True eigenphase in `[0, 1)`.
    pub phi: f64,
    pub noise: NoisePolicy,
    pub epsilon2: f64,
    /// Calibration constant scaling the disorder interval.
    pub a: f64,
    pub gap_policy: GapPolicy,
    /// Gaps after the first `n` of the H, C-U, R_z gates (at most 3).
    pub gaps_per_iteration: u32,
}

impl RunConfig {
    /// A noiseless run.
    pub fn ideal(m: u32, phi: f64) -> Self {
        Self {
            m,
            phi,
            noise: NoisePolicy::NONE,
            epsilon2: 0.0,
            a: crate::gates::calibrate_a(Default::default()),
            gap_policy: GapPolicy::BARE,
            gaps_per_iteration: DEFAULT_GAPS_PER_ITERATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_BITS {
            return Err(Error::config(format!(
                "m must be in 1..={MAX_BITS}, got {}",
                self.m
            )));
        }
        if !(0.0..1.0).contains(&self.phi) {
            return Err(Error::PhaseOutOfRange(self.phi));
        }
        self.noise.validate()?;
        if !(self.epsilon2.is_finite() && self.epsilon2 >= 0.0) {
            return Err(Error::config(format!(
                "epsilon2 must be finite and >= 0, got {}",
                self.epsilon2
            )));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::config(format!(
                "a must be finite and > 0, got {}",
                self.a
            )));
        }
        if self.gaps_per_iteration > 3 {
            return Err(Error::config(format!(
                "gaps_per_iteration must be at most 3, got {}",
                self.gaps_per_iteration
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub step: u32,
    /// Feedback angle fed to R_z at this step.
    pub omega: f64,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Measured bits, least significant first.
    pub bits: Vec<u8>,
    /// `M = Σ bits[i]·2^i`; the phase estimate is `M/2^m`.
    pub estimate: u64,
    pub success: bool,
    pub trace: Vec<IterationRecord>,
    pub disorder: StaticDisorder,
}

/// `(ω − π·bit)/2`: after bits `b_0..b_{i−1}`, `ω = −2π·(0.0 b_{i−1} … b_0)₂`.
pub fn feedback_angle(prev_omega: f64, bit: u8) -> f64 {
    (prev_omega - PI * f64::from(bit)) / 2.0
}

/// `M/2^m` for LSB-first bits.
pub fn estimate_phase(bits: &[u8], m: u32) -> Result<f64> {
    if bits.len() != m as usize {
        return Err(Error::config(format!(
            "expected {m} bits, got {}",
            bits.len()
        )));
    }
    Ok(estimate_integer(bits) as f64 / 2f64.powi(m as i32))
}

fn estimate_integer(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| u64::from(b) << i)
        .sum()
}

/// Whether `M/2^m` lies strictly within one least-significant bit of `φ` on
/// the unit circle. For a non-exact phase this accepts exactly the truncation
/// and its upward neighbour.
pub fn is_success(estimate: u64, phi: f64, m: u32) -> bool {
    let scale = 2f64.powi(m as i32);
    let d = (estimate as f64 / scale - phi).rem_euclid(1.0);
    d.min(1.0 - d) < 1.0 / scale
}

/// Executes one algorithm run for a fixed disorder realization.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    cfg: &'a RunConfig,
    disorder: StaticDisorder,
    gap: Option<Gap>,
}

impl<'a> Engine<'a> {
    /// Gaps are skipped entirely when `ε₂ = 0`.
    pub fn new(cfg: &'a RunConfig, disorder: StaticDisorder) -> Self {
        let gap = (cfg.epsilon2 > 0.0 && cfg.gaps_per_iteration > 0)
            .then(|| Gap::new(&disorder, cfg.gap_policy));
        Self { cfg, disorder, gap }
    }

    /// Runs the gap machinery even when `ε₂ = 0`.
    pub fn with_forced_gaps(mut self) -> Self {
        if self.cfg.gaps_per_iteration > 0 {
            self.gap = Some(Gap::new(&self.disorder, self.cfg.gap_policy));
        }
        self
    }

    fn gap_after<R: Rng + ?Sized>(&self, gate: u32, s: StateVector, rng: &mut R) -> StateVector {
        match &self.gap {
            Some(gap) if gate < self.cfg.gaps_per_iteration => gap.apply(&s, &self.cfg.noise, rng),
            _ => s,
        }
    }

    /// One circuit pass and ancilla measurement.
    pub fn iteration<R: Rng + ?Sized>(
        &self,
        s: &StateVector,
        i: u32,
        omega: f64,
        rng: &mut R,
    ) -> Result<(u8, StateVector)> {
        let cfg = self.cfg;
        if i >= cfg.m {
            return Err(Error::config(format!(
                "step {i} out of range for m = {}",
                cfg.m
            )));
        }
        let noise = &cfg.noise;
        let k = cfg.m - 1 - i;

        let mut s = *s;
        s.apply_single(
            Qubit::Ancilla,
            &hadamard_gate(noise.draw(GateFamily::Hadamard, rng)),
        );
        s = self.gap_after(0, s, rng);
        s = s.transformed(&controlled_u_gate(
            k,
            cfg.phi,
            noise.draw(GateFamily::ControlledU, rng),
        ));
        s = self.gap_after(1, s, rng);
        s.apply_single(
            Qubit::Ancilla,
            &rz_gate(omega, noise.draw(GateFamily::Rz, rng)),
        );
        s = self.gap_after(2, s, rng);
        s.apply_single(
            Qubit::Ancilla,
            &hadamard_gate(noise.draw(GateFamily::Hadamard, rng)),
        );

        let u: f64 = rng.random();
        measure_ancilla(&s, u)
    }

    /// All `m` steps from `|00⟩`. Also returns the register state after the
    /// final measurement and ancilla reset.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(RunResult, StateVector)> {
        let m = self.cfg.m;
        let mut state = StateVector::basis(0);
        let mut omega = 0.0;
        let mut bits = Vec::with_capacity(m as usize);
        let mut trace = Vec::with_capacity(m as usize);
        for i in 0..m {
            let (bit, collapsed) = self.iteration(&state, i, omega, rng)?;
            state = collapsed;
            if bit == 1 {
                state.apply_single(Qubit::Ancilla, &SingleQubitOperator::X);
            }
            trace.push(IterationRecord {
                step: i,
                omega,
                bit,
            });
            bits.push(bit);
            omega = feedback_angle(omega, bit);
        }
        let estimate = estimate_integer(&bits);
        let success = is_success(estimate, self.cfg.phi, m);
        Ok((
            RunResult {
                bits,
                estimate,
                success,
                trace,
                disorder: self.disorder,
            },
            state,
        ))
    }
}

/// One step of the algorithm for an explicit disorder.
pub fn run_iteration<R: Rng + ?Sized>(
    s: &StateVector,
    i: u32,
    omega: f64,
    cfg: &RunConfig,
    dis: &StaticDisorder,
    rng: &mut R,
) -> Result<(u8, StateVector)> {
    Engine::new(cfg, *dis).iteration(s, i, omega, rng)
}

/// Draws one static disorder (held for the whole run), then runs all `m` steps.
pub fn run_algorithm<R: Rng + ?Sized>(cfg: &RunConfig, rng: &mut R) -> Result<RunResult> {
    cfg.validate()?;
    let disorder = sample_disorder(cfg.epsilon2, cfg.a, rng);
    Engine::new(cfg, disorder)
        .run(rng)
        .map(|(result, _)| result)
}
