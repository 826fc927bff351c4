//! Ideal and noisy gates of the phase-estimation circuit, static disorder
//! sampling, and the ε₁/ε₂ calibration constant `a`.
//!
//! Random gate noise is multiplicative on the rotation angle: a nominal
//! rotation by `θ` is realized as a rotation by `θ(1+Δ)` with
//! `Δ ~ U[−ε₁/2, ε₁/2]`, drawn fresh for every gate application.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::{expm_static, Qubit, SingleQubitOperator, TwoQubitOperator, C64};

/// Gate families that can be made noisy independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateFamily {
    Hadamard,
    Rz,
    ControlledU,
    /// PAREC frame pulses.
    Pauli,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePolicy {
    pub epsilon1: f64,
    pub hadamard: bool,
    pub rz: bool,
    pub controlled_u: bool,
    pub pauli: bool,
}

impl NoisePolicy {
    pub const NONE: Self = Self {
        epsilon1: 0.0,
        hadamard: false,
        rz: false,
        controlled_u: false,
        pauli: false,
    };

    /// Noise on every gate of the algorithm and on PAREC pulses.
    pub fn all(epsilon1: f64) -> Self {
        Self {
            epsilon1,
            hadamard: true,
            rz: true,
            controlled_u: true,
            pauli: true,
        }
    }

    pub fn enabled(&self, family: GateFamily) -> bool {
        match family {
            GateFamily::Hadamard => self.hadamard,
            GateFamily::Rz => self.rz,
            GateFamily::ControlledU => self.controlled_u,
            GateFamily::Pauli => self.pauli,
        }
    }

    /// Draws `Δ` for one application of a gate of `family`, or returns 0
    /// without touching the stream when that family is noiseless.
    pub fn draw<R: Rng + ?Sized>(&self, family: GateFamily, rng: &mut R) -> f64 {
        if self.enabled(family) {
            sample_delta(self.epsilon1, rng)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon1.is_finite() && self.epsilon1 >= 0.0) {
            return Err(Error::config(format!(
                "epsilon1 must be finite and >= 0, got {}",
                self.epsilon1
            )));
        }
        Ok(())
    }
}

impl Default for NoisePolicy {
    fn default() -> Self {
        Self::NONE
    }
}

/// `Δ ~ U[−ε₁/2, ε₁/2]`. Always consumes exactly one draw.
pub fn sample_delta<R: Rng + ?Sized>(epsilon1: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    (u - 0.5) * epsilon1
}

/// `exp[−i (n·σ) θ/2] = cos(θ/2)·I − i·sin(θ/2)·(n·σ)`.
pub fn rotation(axis: [f64; 3], theta: f64) -> Result<SingleQubitOperator> {
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitAxis(norm));
    }
    Ok(rotation_unchecked(axis, theta))
}

fn rotation_unchecked([nx, ny, nz]: [f64; 3], theta: f64) -> SingleQubitOperator {
    let (s, c) = (theta / 2.0).sin_cos();
    // −i s (n·σ) with n·σ = [[nz, nx − i ny], [nx + i ny, −nz]]
    SingleQubitOperator::new([
        [C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
        [C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
    ])
}

const HADAMARD_AXIS: [f64; 3] = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];

/// Hadamard as a single π-rotation about `(x̂+ẑ)/√2`, global phase `i`.
pub fn hadamard_gate(delta: f64) -> SingleQubitOperator {
    rotation_unchecked(HADAMARD_AXIS, PI * (1.0 + delta)).scale(C64::i())
}

/// `R_z(ω(1+Δ)) = diag(e^{−iω(1+Δ)/2}, e^{+iω(1+Δ)/2})`.
pub fn rz_gate(omega: f64, delta: f64) -> SingleQubitOperator {
    let half = omega * (1.0 + delta) / 2.0;
    SingleQubitOperator::diag(C64::from_polar(1.0, -half), C64::from_polar(1.0, half))
}

/// Nominal kick angle of control-U^{2^k}: `2π·φ·2^k` reduced to `(−π, π]`.
pub fn controlled_phase_angle(k: u32, phi: f64) -> f64 {
    assert!(k <= 62, "controlled-U exponent 2^{k} too large");
    let mut t = (phi * (1u64 << k) as f64).rem_euclid(1.0);
    if t > 0.5 {
        t -= 1.0;
    }
    2.0 * PI * t
}

/// Control-U^{2^k} with the target in the computational basis:
/// `diag(1, 1, e^{+iθ}, e^{−iθ})`, `θ` the nominal kick angle times `(1+Δ)`.
pub fn controlled_u_gate(k: u32, phi: f64, delta: f64) -> TwoQubitOperator {
    let theta = controlled_phase_angle(k, phi) * (1.0 + delta);
    let one = C64::new(1.0, 0.0);
    TwoQubitOperator::diag([
        one,
        one,
        C64::from_polar(1.0, theta),
        C64::from_polar(1.0, -theta),
    ])
}

/// One-qubit Pauli letter, including the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> SingleQubitOperator {
        match self {
            Pauli::I => SingleQubitOperator::IDENTITY,
            Pauli::X => SingleQubitOperator::X,
            Pauli::Y => SingleQubitOperator::Y,
            Pauli::Z => SingleQubitOperator::Z,
        }
    }

    fn axis(self) -> Option<[f64; 3]> {
        match self {
            Pauli::I => None,
            Pauli::X => Some([1.0, 0.0, 0.0]),
            Pauli::Y => Some([0.0, 1.0, 0.0]),
            Pauli::Z => Some([0.0, 0.0, 1.0]),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// A Pauli π-pulse `i·R_n(π(1+Δ))` on one qubit. The identity is not a pulse
/// and is returned exactly, whatever `delta`.
pub fn pauli_pulse_single(which: Pauli, delta: f64) -> SingleQubitOperator {
    match which.axis() {
        None => SingleQubitOperator::IDENTITY,
        Some(axis) => rotation_unchecked(axis, PI * (1.0 + delta)).scale(C64::i()),
    }
}

pub fn pauli_pulse(which: Pauli, qubit: Qubit, delta: f64) -> TwoQubitOperator {
    qubit.embed(&pauli_pulse_single(which, delta))
}

/// Residual-coupling strengths of one run; the gate gap `Δt` is absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StaticDisorder {
    pub d1: f64,
    pub d2: f64,
    pub j: f64,
}

impl StaticDisorder {
    pub const ZERO: Self = Self {
        d1: 0.0,
        d2: 0.0,
        j: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0 && self.j == 0.0
    }

    /// `tr[δH²] = 4(d1² + d2² + 4J²)` over the 4-dimensional register.
    pub fn hamiltonian_trace_sq(&self) -> f64 {
        4.0 * (self.d1 * self.d1 + self.d2 * self.d2 + 4.0 * self.j * self.j)
    }
}

/// Each of `d1, d2, J` independently uniform on `[−a√3·ε₂, a√3·ε₂]`, drawn in
/// that order. Always consumes three draws.
pub fn sample_disorder<R: Rng + ?Sized>(epsilon2: f64, a: f64, rng: &mut R) -> StaticDisorder {
    let half_width = a * 3f64.sqrt() * epsilon2;
    let mut draw = || (2.0 * rng.random::<f64>() - 1.0) * half_width;
    let d1 = draw();
    let d2 = draw();
    let j = draw();
    StaticDisorder { d1, d2, j }
}

/// `exp(i·scale·δH)` for the given disorder.
pub fn static_propagator(dis: &StaticDisorder, scale: f64) -> TwoQubitOperator {
    expm_static(scale * dis.d1, scale * dis.d2, scale * dis.j)
}

/// How the static strength ε₂ is put on the same footing as the random
/// strength ε₁, by matching `⟨tr[δH_rnd²]⟩` (a π-rotation) against
/// `⟨tr[δH_stat²]⟩ = 24a²ε₂²`, both traced over the full register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CalibrationConvention {
    /// The published value `a = 0.37`.
    #[default]
    Published,
    /// `Δ ~ U[−ε₁/2, ε₁/2]`, `⟨Δ²⟩ = ε₁²/12`: `a = π/(12√2)`.
    Strict,
    /// `Δ ~ U[−ε₁, ε₁]`, `⟨Δ²⟩ = ε₁²/3`: `a = π/(6√2)`.
    HalfWidth,
}

impl CalibrationConvention {
    pub fn name(self) -> &'static str {
        match self {
            CalibrationConvention::Published => "published",
            CalibrationConvention::Strict => "strict",
            CalibrationConvention::HalfWidth => "half-width",
        }
    }
}

impl FromStr for CalibrationConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "published" => Ok(Self::Published),
            "strict" => Ok(Self::Strict),
            "half-width" => Ok(Self::HalfWidth),
            other => Err(Error::config(format!(
                "unknown a-convention '{other}' (expected published, strict or half-width)"
            ))),
        }
    }
}

impl fmt::Display for CalibrationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Solves `24a² = π²⟨Δ²⟩/ε₁²` for the chosen `⟨Δ²⟩`, or returns 0.37.
pub fn calibrate_a(conv: CalibrationConvention) -> f64 {
    // ⟨tr[δH_rnd²]⟩ = 4·(π/2)²·⟨Δ²⟩ = π²⟨Δ²⟩
    let rnd_trace = |mean_sq_delta: f64| PI * PI * mean_sq_delta;
    match conv {
        CalibrationConvention::Published => 0.37,
        CalibrationConvention::Strict => (rnd_trace(1.0 / 12.0) / 24.0).sqrt(),
        CalibrationConvention::HalfWidth => (rnd_trace(1.0 / 3.0) / 24.0).sqrt(),
    }
}
