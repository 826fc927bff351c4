//! Pauli-random-error-correction: random Pauli frames wrapped around
//! time-sliced static propagators inside every gate gap.
//!
//! With `n_p` blocks per gap the gap is cut into `2·n_p` segments. Segment `s`
//! draws a uniformly random frame `F_s` and applies `F_s · U(1/(2n_p)) · F_s`,
//! where `U(x) = exp(i·x·δH)`. Conjugation by a Pauli frame flips the sign of
//! each Hamiltonian term independently with probability ½, so the first-order
//! effective coupling of a gap is a random walk with per-term spread
//! `δ/√(2n_p)` instead of the coherent `δ`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::{
    pauli_pulse_single, static_propagator, GateFamily, NoisePolicy, StaticDisorder,
};
use crate::qcore::{kron, Qubit, StateVector, TwoQubitOperator};

pub use crate::gates::Pauli;

/// One Pauli letter per qubit: `p1` on the ancilla, `p2` on the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    pub p1: Pauli,
    pub p2: Pauli,
}

impl PauliFrame {
    pub const IDENTITY: Self = Self {
        p1: Pauli::I,
        p2: Pauli::I,
    };

    /// All 16 frames, `p1` major.
    pub fn all() -> impl Iterator<Item = PauliFrame> {
        Pauli::ALL
            .into_iter()
            .flat_map(|p1| Pauli::ALL.into_iter().map(move |p2| PauliFrame { p1, p2 }))
    }

    pub fn index(&self) -> usize {
        let idx = |p: Pauli| Pauli::ALL.iter().position(|&q| q == p).unwrap();
        4 * idx(self.p1) + idx(self.p2)
    }

    /// The exact frame operator `p1 ⊗ p2`.
    pub fn operator(&self) -> TwoQubitOperator {
        kron(&self.p1.matrix(), &self.p2.matrix())
    }
}

/// Uniform over the 16 frames; one draw per call.
pub fn sample_frame<R: Rng + ?Sized>(rng: &mut R) -> PauliFrame {
    let i = rng.random_range(0..16usize);
    PauliFrame {
        p1: Pauli::ALL[i >> 2],
        p2: Pauli::ALL[i & 3],
    }
}

fn pulse_delta<R: Rng + ?Sized>(p: Pauli, noise: &NoisePolicy, rng: &mut R) -> f64 {
    if p == Pauli::I {
        0.0
    } else {
        noise.draw(GateFamily::Pauli, rng)
    }
}

/// The applied frame as a matrix. Non-identity letters are π-pulses that draw
/// a fresh `Δ` (ancilla first) when `noise.pauli` is set.
pub fn frame_operator<R: Rng + ?Sized>(
    f: PauliFrame,
    noise: &NoisePolicy,
    rng: &mut R,
) -> TwoQubitOperator {
    let d1 = pulse_delta(f.p1, noise, rng);
    let d2 = pulse_delta(f.p2, noise, rng);
    kron(&pauli_pulse_single(f.p1, d1), &pauli_pulse_single(f.p2, d2))
}

/// Applies the frame to `s` in place. Same draws as [`frame_operator`].
pub fn apply_frame<R: Rng + ?Sized>(
    s: &mut StateVector,
    f: PauliFrame,
    noise: &NoisePolicy,
    rng: &mut R,
) {
    if f.p1 != Pauli::I {
        let d = pulse_delta(f.p1, noise, rng);
        s.apply_single(Qubit::Ancilla, &pauli_pulse_single(f.p1, d));
    }
    if f.p2 != Pauli::I {
        let d = pulse_delta(f.p2, noise, rng);
        s.apply_single(Qubit::Target, &pauli_pulse_single(f.p2, d));
    }
}

/// How each gate gap is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GapPolicy {
    /// PAREC blocks per gap; 0 is a single bare propagator.
    pub n_p: u32,
    /// Whether frame pulses carry random rotation errors.
    pub noisy_pulses: bool,
}

impl GapPolicy {
    pub const BARE: Self = Self {
        n_p: 0,
        noisy_pulses: false,
    };

    pub fn parec(n_p: u32, noisy_pulses: bool) -> Self {
        Self { n_p, noisy_pulses }
    }

    pub fn segments(&self) -> u32 {
        2 * self.n_p
    }

    /// Linear time-slice of the gap carried by each propagator.
    pub fn propagator_scale(&self) -> f64 {
        if self.n_p == 0 {
            1.0
        } else {
            1.0 / f64::from(self.segments())
        }
    }
}

/// A gap with its propagator precomputed for one disorder realization.
#[derive(Debug, Clone)]
pub struct Gap {
    policy: GapPolicy,
    propagator: TwoQubitOperator,
}

impl Gap {
    pub fn new(dis: &StaticDisorder, policy: GapPolicy) -> Self {
        Self {
            policy,
            propagator: static_propagator(dis, policy.propagator_scale()),
        }
    }

    pub fn policy(&self) -> GapPolicy {
        self.policy
    }

    /// Evolves `s` through the gap. Pulse noise is on iff the gap policy asks
    /// for noisy pulses; `noise` supplies ε₁.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        s: &StateVector,
        noise: &NoisePolicy,
        rng: &mut R,
    ) -> StateVector {
        if self.policy.n_p == 0 {
            return s.transformed(&self.propagator);
        }
        let noise = NoisePolicy {
            pauli: self.policy.noisy_pulses,
            ..*noise
        };
        let mut out = *s;
        for _ in 0..self.policy.segments() {
            let frame = sample_frame(rng);
            apply_frame(&mut out, frame, &noise, rng);
            out = out.transformed(&self.propagator);
            apply_frame(&mut out, frame, &noise, rng);
        }
        out
    }

    /// The whole gap as one operator, consuming the same draws as [`Gap::apply`].
    pub fn operator<R: Rng + ?Sized>(&self, noise: &NoisePolicy, rng: &mut R) -> TwoQubitOperator {
        if self.policy.n_p == 0 {
            return self.propagator;
        }
        let noise = NoisePolicy {
            pauli: self.policy.noisy_pulses,
            ..*noise
        };
        let mut total = TwoQubitOperator::identity();
        for _ in 0..self.policy.segments() {
            let frame = sample_frame(rng);
            let before = frame_operator(frame, &noise, rng);
            let after = frame_operator(frame, &noise, rng);
            total = after * self.propagator * before * total;
        }
        total
    }
}

pub fn apply_gap<R: Rng + ?Sized>(
    s: &StateVector,
    dis: &StaticDisorder,
    policy: GapPolicy,
    noise: &NoisePolicy,
    rng: &mut R,
) -> StateVector {
    Gap::new(dis, policy).apply(s, noise, rng)
}

/// The bare static strength PAREC with `n_p` blocks is predicted to mimic,
/// `ε₂/√(2n_p)`. Used for cross-checks only.
pub fn effective_epsilon(epsilon2: f64, n_p: u32) -> Result<f64> {
    if n_p == 0 {
        return Err(Error::config("effective_epsilon needs n_p >= 1"));
    }
    Ok(epsilon2 / (2.0 * f64::from(n_p)).sqrt())
}
