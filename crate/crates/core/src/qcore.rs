//! Complex linear algebra for the permanently 4-dimensional register.
//!
//! Basis ordering is `|a t⟩ ↦ 2·a + t` where `a` is the ancilla (the measured,
//! "left" qubit, qubit 1) and `t` the target (qubit 2). Single-qubit operators
//! are embedded with the ancilla as the left Kronecker factor.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Below this `r`, `sin(r)/r` is evaluated by its Taylor series.
const SINC_SERIES_CUTOFF: f64 = 1e-6;

/// A 2×2 complex matrix acting on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitOperator {
    pub m: [[C64; 2]; 2],
}

impl SingleQubitOperator {
    pub const IDENTITY: Self = Self {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };
    pub const X: Self = Self {
        m: [[ZERO, ONE], [ONE, ZERO]],
    };
    pub const Y: Self = Self {
        m: [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]],
    };
    pub const Z: Self = Self {
        m: [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]],
    };
    pub const HADAMARD: Self = Self {
        m: [
            [
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ],
            [
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ],
        ],
    };

    pub fn new(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        Self {
            m: [[d0, ZERO], [ZERO, d1]],
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|x| *x *= c);
        Self { m }
    }

    pub fn dagger(&self) -> Self {
        let m = self.m;
        Self {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::IDENTITY)
    }
}

impl Mul for SingleQubitOperator {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, out) in row.iter_mut().enumerate() {
                *out = self.m[r][0] * rhs.m[0][c] + self.m[r][1] * rhs.m[1][c];
            }
        }
        Self { m }
    }
}

/// A 4×4 complex matrix on the `ancilla ⊗ target` register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitOperator {
    pub m: [[C64; 4]; 4],
}

impl TwoQubitOperator {
    pub const ZERO: Self = Self { m: [[ZERO; 4]; 4] };

    pub fn identity() -> Self {
        Self::diag([ONE; 4])
    }

    pub fn new(m: [[C64; 4]; 4]) -> Self {
        Self { m }
    }

    pub fn diag(d: [C64; 4]) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, x) in d.into_iter().enumerate() {
            m[i][i] = x;
        }
        Self { m }
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|x| *x *= c);
        Self { m }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.m;
        m.iter_mut()
            .flatten()
            .zip(other.m.iter().flatten())
            .for_each(|(a, b)| *a += b);
        Self { m }
    }

    pub fn dagger(&self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, out) in row.iter_mut().enumerate() {
                *out = self.m[c][r].conj();
            }
        }
        Self { m }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }

    /// Induced 1-norm (max column sum).
    fn norm_1(&self) -> f64 {
        (0..4)
            .map(|c| (0..4).map(|r| self.m[r][c].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Mul for TwoQubitOperator {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, out) in row.iter_mut().enumerate() {
                *out = (0..4).map(|k| self.m[r][k] * rhs.m[k][c]).sum();
            }
        }
        Self { m }
    }
}

/// Kronecker product `a ⊗ b`; `a` acts on the ancilla.
pub fn kron(a: &SingleQubitOperator, b: &SingleQubitOperator) -> TwoQubitOperator {
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, out) in row.iter_mut().enumerate() {
            *out = a.m[r >> 1][c >> 1] * b.m[r & 1][c & 1];
        }
    }
    TwoQubitOperator { m }
}

/// Which register qubit a single-qubit operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    /// Qubit 1, the measured one.
    Ancilla,
    /// Qubit 2, holding the eigenstate.
    Target,
}

impl Qubit {
    pub fn embed(self, op: &SingleQubitOperator) -> TwoQubitOperator {
        match self {
            Qubit::Ancilla => kron(op, &SingleQubitOperator::IDENTITY),
            Qubit::Target => kron(&SingleQubitOperator::IDENTITY, op),
        }
    }
}

/// Four amplitudes over `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub amp: [C64; 4],
}

impl StateVector {
    /// The computational basis state with the given index `2·a + t`.
    pub fn basis(index: usize) -> Self {
        assert!(index < 4, "basis index {index} out of range");
        let mut amp = [ZERO; 4];
        amp[index] = ONE;
        Self { amp }
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amp: [C64; 4]) -> Result<Self> {
        if !amp.iter().all(|a| a.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-15 {
            return Err(Error::CollapseFailed(norm));
        }
        Ok(Self {
            amp: amp.map(|a| a / norm),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.amp.iter().all(|a| a.is_finite())
    }

    /// Probability that the ancilla reads 0.
    pub fn ancilla_p0(&self) -> f64 {
        self.amp[0].norm_sqr() + self.amp[1].norm_sqr()
    }

    /// `U s` without validation; the simulator's hot path.
    pub fn transformed(&self, u: &TwoQubitOperator) -> Self {
        let mut amp = [ZERO; 4];
        for (r, out) in amp.iter_mut().enumerate() {
            *out = (0..4).map(|c| u.m[r][c] * self.amp[c]).sum();
        }
        Self { amp }
    }

    /// Applies a single-qubit operator to one qubit in place, equivalent to
    /// `transformed(&q.embed(op))` at a quarter of the cost.
    pub fn apply_single(&mut self, q: Qubit, op: &SingleQubitOperator) {
        let pairs = match q {
            Qubit::Ancilla => [(0, 2), (1, 3)],
            Qubit::Target => [(0, 1), (2, 3)],
        };
        for (i0, i1) in pairs {
            let (a0, a1) = (self.amp[i0], self.amp[i1]);
            self.amp[i0] = op.m[0][0] * a0 + op.m[0][1] * a1;
            self.amp[i1] = op.m[1][0] * a0 + op.m[1][1] * a1;
        }
    }
}

/// `U s`, rejecting non-finite operands.
pub fn apply(u: &TwoQubitOperator, s: &StateVector) -> Result<StateVector> {
    if !u.is_finite() {
        return Err(Error::NonFinite("operator"));
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    Ok(s.transformed(u))
}

/// `sin(r)/r`, continuous through `r = 0`.
fn sinc(r: f64) -> f64 {
    if r < SINC_SERIES_CUTOFF {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    }
}

/// `exp(i(a σz + b σx))` as a 2×2 block `[[p, q], [q, p*]]` in row-major order.
fn block_exp(a: f64, b: f64) -> [[C64; 2]; 2] {
    let r = a.hypot(b);
    let s = sinc(r);
    let c = r.cos();
    [
        [C64::new(c, s * a), C64::new(0.0, s * b)],
        [C64::new(0.0, s * b), C64::new(c, -s * a)],
    ]
}

/// Closed-form `exp(iδH)` for `δH = d1·σz⊗I + d2·I⊗σz + 2J·σx⊗σx`.
///
/// `δH` leaves `span{|00⟩,|11⟩}` and `span{|01⟩,|10⟩}` invariant; on each it is
/// `a σz + b σx` with `b = 2J` and `a = d1 ± d2`.
pub fn expm_static(d1: f64, d2: f64, j: f64) -> TwoQubitOperator {
    let even = block_exp(d1 + d2, 2.0 * j);
    let odd = block_exp(d1 - d2, 2.0 * j);
    let mut m = [[ZERO; 4]; 4];
    for (bi, &row) in [0usize, 3].iter().enumerate() {
        for (bj, &col) in [0usize, 3].iter().enumerate() {
            m[row][col] = even[bi][bj];
        }
    }
    for (bi, &row) in [1usize, 2].iter().enumerate() {
        for (bj, &col) in [1usize, 2].iter().enumerate() {
            m[row][col] = odd[bi][bj];
        }
    }
    TwoQubitOperator { m }
}

/// The static-imperfection Hamiltonian as an explicit matrix.
pub fn static_hamiltonian(d1: f64, d2: f64, j: f64) -> TwoQubitOperator {
    use SingleQubitOperator as S;
    kron(&S::Z, &S::IDENTITY)
        .scale(d1.into())
        .add(&kron(&S::IDENTITY, &S::Z).scale(d2.into()))
        .add(&kron(&S::X, &S::X).scale((2.0 * j).into()))
}

/// `exp(iH)` for Hermitian `H` by scaling and squaring a truncated Taylor
/// series. Test oracle for [`expm_static`]; not used by the simulator.
pub fn expm_series(h: &TwoQubitOperator) -> Result<TwoQubitOperator> {
    if !h.is_finite() {
        return Err(Error::NonFinite("Hamiltonian"));
    }
    let herm_dev = h.max_abs_diff(&h.dagger());
    if herm_dev > 1e-12 {
        return Err(Error::NotHermitian(herm_dev));
    }
    let a = h.scale(I);
    let norm = a.norm_1();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(C64::from(0.5f64.powi(squarings)));
    let scaled_norm = norm * 0.5f64.powi(squarings);

    let mut sum = TwoQubitOperator::identity();
    let mut term = TwoQubitOperator::identity();
    let mut term_bound = 1.0;
    for n in 1..64 {
        term = (term * a).scale(C64::from(1.0 / n as f64));
        sum = sum.add(&term);
        term_bound *= scaled_norm / n as f64;
        // tail after term n is bounded by a geometric series with ratio ≤ x/(n+1)
        let ratio = scaled_norm / (n + 1) as f64;
        if term_bound * ratio / (1.0 - ratio) < 1e-17 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    Ok(sum)
}

/// Projective measurement of the ancilla driven by a caller-supplied uniform
/// variate `u ∈ [0,1)`: bit 0 iff `u < p0`. Returns the collapsed,
/// renormalized state.
pub fn measure_ancilla(s: &StateVector, u: f64) -> Result<(u8, StateVector)> {
    if !s.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    let p0 = s.ancilla_p0();
    let (bit, keep) = if u < p0 { (0u8, [0, 1]) } else { (1u8, [2, 3]) };
    let norm = keep
        .iter()
        .map(|&i| s.amp[i].norm_sqr())
        .sum::<f64>()
        .sqrt();
    if norm < 1e-15 {
        return Err(Error::CollapseFailed(norm));
    }
    let mut amp = [ZERO; 4];
    for i in keep {
        amp[i] = s.amp[i] / norm;
    }
    Ok((bit, StateVector { amp }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    type S = SingleQubitOperator;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cis(x: f64) -> C64 {
        C64::from_polar(1.0, x)
    }

    #[test]
    fn kron_embeddings() {
        assert_eq!(
            kron(&S::IDENTITY, &S::IDENTITY),
            TwoQubitOperator::identity()
        );
        let z1 = kron(&S::Z, &S::IDENTITY);
        assert_eq!(z1, TwoQubitOperator::diag([ONE, ONE, -ONE, -ONE]));
        let xx = kron(&S::X, &S::X);
        for r in 0..4 {
            for col in 0..4 {
                let want = if r + col == 3 { ONE } else { ZERO };
                assert_eq!(xx.m[r][col], want);
            }
        }
    }

    #[test]
    fn apply_basic_gates() {
        let s = StateVector::basis(0);
        assert_eq!(apply(&TwoQubitOperator::identity(), &s).unwrap(), s);
        let flipped = apply(&kron(&S::X, &S::IDENTITY), &s).unwrap();
        assert_eq!(flipped, StateVector::basis(2));
        let h = apply(&kron(&S::HADAMARD, &S::IDENTITY), &s).unwrap();
        let want = [c(FRAC_1_SQRT_2, 0.0), ZERO, c(FRAC_1_SQRT_2, 0.0), ZERO];
        for (a, b) in h.amp.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn apply_rejects_non_finite() {
        let mut bad = TwoQubitOperator::identity();
        bad.m[1][2] = c(f64::NAN, 0.0);
        assert!(matches!(
            apply(&bad, &StateVector::basis(0)),
            Err(Error::NonFinite(_))
        ));
        let s = StateVector {
            amp: [c(f64::INFINITY, 0.0), ZERO, ZERO, ZERO],
        };
        assert!(apply(&TwoQubitOperator::identity(), &s).is_err());
    }

    #[test]
    fn apply_single_matches_embedding() {
        let s =
            StateVector::from_amplitudes([c(0.1, 0.2), c(-0.3, 0.4), c(0.5, -0.1), c(0.2, 0.7)])
                .unwrap();
        let op = S::HADAMARD * S::Y;
        for q in [Qubit::Ancilla, Qubit::Target] {
            let mut fast = s;
            fast.apply_single(q, &op);
            let slow = s.transformed(&q.embed(&op));
            for (a, b) in fast.amp.iter().zip(slow.amp) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn expm_static_trivial_cases() {
        assert!(expm_static(0.0, 0.0, 0.0).max_abs_diff(&TwoQubitOperator::identity()) == 0.0);
        let (d1, d2) = (0.3, -0.7);
        let want =
            TwoQubitOperator::diag([cis(d1 + d2), cis(d1 - d2), cis(-(d1 - d2)), cis(-(d1 + d2))]);
        assert!(expm_static(d1, d2, 0.0).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn expm_static_pure_coupling_matches_oracle() {
        let j: f64 = 0.37;
        let want = TwoQubitOperator::identity()
            .scale((2.0 * j).cos().into())
            .add(&kron(&S::X, &S::X).scale(c(0.0, (2.0 * j).sin())));
        let oracle = expm_series(&static_hamiltonian(0.0, 0.0, j)).unwrap();
        assert!(oracle.max_abs_diff(&want) < 1e-13);
        assert!(expm_static(0.0, 0.0, j).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn expm_series_trivial_cases() {
        assert_eq!(
            expm_series(&TwoQubitOperator::ZERO).unwrap(),
            TwoQubitOperator::identity()
        );
        let h = kron(&S::Z, &S::IDENTITY).scale(PI.into());
        let u = expm_series(&h).unwrap();
        assert!(u.max_abs_diff(&TwoQubitOperator::identity().scale(-ONE)) < 1e-13);
    }

    #[test]
    fn expm_series_rejects_non_hermitian() {
        let mut h = TwoQubitOperator::ZERO;
        h.m[0][1] = ONE;
        assert!(matches!(expm_series(&h), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sinc_is_continuous_at_cutoff() {
        let below = sinc(SINC_SERIES_CUTOFF * (1.0 - 1e-9));
        let above = sinc(SINC_SERIES_CUTOFF * (1.0 + 1e-9));
        assert!((below - above).abs() < 1e-15);
    }

    #[test]
    fn measure_examples() {
        let (bit, post) = measure_ancilla(&StateVector::basis(0), 0.999).unwrap();
        assert_eq!((bit, post), (0, StateVector::basis(0)));

        let plus = StateVector::from_amplitudes([ONE, ZERO, ONE, ZERO]).unwrap();
        let (b0, s0) = measure_ancilla(&plus, 0.49).unwrap();
        assert_eq!(b0, 0);
        assert!(s0.fidelity(&StateVector::basis(0)) > 1.0 - 1e-15);
        let (b1, s1) = measure_ancilla(&plus, 0.51).unwrap();
        assert_eq!(b1, 1);
        assert!(s1.fidelity(&StateVector::basis(2)) > 1.0 - 1e-15);
    }

    #[test]
    fn measure_probability_of_kicked_state() {
        // ½[(1 + e^{i2πφ})|00⟩ + (1 − e^{i2πφ})|10⟩]
        for phi in [0.0, 0.1, 0.25, 0.3, 0.5, 0.77] {
            let k = cis(2.0 * PI * phi);
            let s = StateVector {
                amp: [(ONE + k) / 2.0, ZERO, (ONE - k) / 2.0, ZERO],
            };
            assert!((s.ancilla_p0() - (PI * phi).cos().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn measure_rejects_empty_branch() {
        // unnormalized input: ancilla-1 branch is empty but gets selected
        let s = StateVector {
            amp: [C64::new(0.5, 0.0), ZERO, ZERO, ZERO],
        };
        assert!(matches!(
            measure_ancilla(&s, 0.5),
            Err(Error::CollapseFailed(_))
        ));
    }

    fn arb_state() -> impl Strategy<Value = StateVector> {
        prop::array::uniform8(-1.0f64..1.0)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| {
                StateVector::from_amplitudes([
                    c(v[0], v[1]),
                    c(v[2], v[3]),
                    c(v[4], v[5]),
                    c(v[6], v[7]),
                ])
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn expm_static_agrees_with_series(d1 in -1.0f64..1.0, d2 in -1.0f64..1.0, j in -1.0f64..1.0) {
            let fast = expm_static(d1, d2, j);
            let oracle = expm_series(&static_hamiltonian(d1, d2, j)).unwrap();
            prop_assert!(fast.max_abs_diff(&oracle) <= 1e-12);
            prop_assert!(fast.unitarity_deviation() <= 1e-12);
        }

        #[test]
        fn expm_static_inverse(d1 in -3.0f64..3.0, d2 in -3.0f64..3.0, j in -3.0f64..3.0) {
            let prod = expm_static(d1, d2, j) * expm_static(-d1, -d2, -j);
            prop_assert!(prod.max_abs_diff(&TwoQubitOperator::identity()) <= 1e-12);
        }

        #[test]
        fn unitary_preserves_norm(s in arb_state(), d1 in -2.0f64..2.0, d2 in -2.0f64..2.0, j in -2.0f64..2.0) {
            let out = apply(&expm_static(d1, d2, j), &s).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn measurement_is_exhaustive(s in arb_state(), u in 0.0f64..1.0) {
            let p0 = s.ancilla_p0();
            let p1 = s.amp[2].norm_sqr() + s.amp[3].norm_sqr();
            prop_assert!((p0 + p1 - 1.0).abs() <= 1e-12);
            if let Ok((_, post)) = measure_ancilla(&s, u) {
                prop_assert!((post.norm_sqr() - 1.0).abs() <= 1e-10);
            }
        }
    }
}
