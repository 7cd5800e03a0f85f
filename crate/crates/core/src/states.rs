//! Three-qubit pure states, the parametrized families they are sampled from,
//! and reduced density matrices.
//!
//! Basis index convention: `b = 4·q_A + 2·q_B + q_C`, so qubit A is the
//! leftmost label in `|q_A q_B q_C⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on Σ|amplitude|² and Σμ at construction time.
pub const NORM_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Qubit {
    A,
    B,
    C,
}

impl Qubit {
    pub const ALL: [Qubit; 3] = [Qubit::A, Qubit::B, Qubit::C];

    pub fn index(self) -> usize {
        match self {
            Qubit::A => 0,
            Qubit::B => 1,
            Qubit::C => 2,
        }
    }

    /// Bit position of this qubit inside a basis index.
    pub fn shift(self) -> usize {
        2 - self.index()
    }

    pub fn from_index(i: usize) -> Qubit {
        Qubit::ALL[i]
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Qubit::A => "A",
            Qubit::B => "B",
            Qubit::C => "C",
        };
        f.write_str(s)
    }
}

/// An assignment of the roles (X, Y, Z) to the physical qubits A, B, C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Permutation {
    pub x: Qubit,
    pub y: Qubit,
    pub z: Qubit,
}

impl Permutation {
    pub fn new(x: Qubit, y: Qubit, z: Qubit) -> Option<Self> {
        (x != y && y != z && x != z).then_some(Self { x, y, z })
    }

    pub fn identity() -> Self {
        Self { x: Qubit::A, y: Qubit::B, z: Qubit::C }
    }

    /// All six permutations of (A, B, C).
    pub fn all() -> [Permutation; 6] {
        use Qubit::*;
        [
            Self { x: A, y: B, z: C },
            Self { x: A, y: C, z: B },
            Self { x: B, y: A, z: C },
            Self { x: B, y: C, z: A },
            Self { x: C, y: A, z: B },
            Self { x: C, y: B, z: A },
        ]
    }
}

/// A normalized pure state of three qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState3Q {
    amps: [Complex64; 8],
}

impl PureState3Q {
    /// Wraps the given amplitudes, rejecting anything off unit norm by more than [`NORM_TOL`].
    pub fn new(amps: [Complex64; 8]) -> Result<Self> {
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("amplitude"));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary non-zero amplitudes onto the unit sphere.
    pub fn from_unnormalized(amps: [Complex64; 8]) -> Result<Self> {
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || norm_sq == 0.0 {
            return Err(Error::NotNormalized(norm_sq));
        }
        let scale = norm_sq.sqrt().recip();
        Self::new(amps.map(|a| a * scale))
    }

    pub fn amplitudes(&self) -> &[Complex64; 8] {
        &self.amps
    }

    pub fn amplitude(&self, basis: usize) -> Complex64 {
        self.amps[basis]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// (|000⟩ + |111⟩)/√2
    pub fn ghz() -> Self {
        let mut amps = [ZERO; 8];
        amps[0b000] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[0b111] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self { amps }
    }

    /// (|001⟩ + |010⟩ + |100⟩)/√3
    pub fn w() -> Self {
        let r = Complex64::new(3f64.sqrt().recip(), 0.0);
        let mut amps = [ZERO; 8];
        amps[0b001] = r;
        amps[0b010] = r;
        amps[0b100] = r;
        Self { amps }
    }

    /// |000⟩
    pub fn product_zero() -> Self {
        let mut amps = [ZERO; 8];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// |0⟩_A ⊗ (|00⟩ + |11⟩)/√2, the 2–1 separable state with maximal Mermin value.
    pub fn bellpair_a() -> Self {
        let mut amps = [ZERO; 8];
        amps[0b000] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[0b011] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self { amps }
    }

    /// Tensor product of three single-qubit states (each normalized by the caller).
    pub fn product(a: [Complex64; 2], b: [Complex64; 2], c: [Complex64; 2]) -> Result<Self> {
        let mut amps = [ZERO; 8];
        for (idx, amp) in amps.iter_mut().enumerate() {
            *amp = a[(idx >> 2) & 1] * b[(idx >> 1) & 1] * c[idx & 1];
        }
        Self::new(amps)
    }

    /// `single` on qubit `lone`, `pair` (a 4-vector over the other two qubits in
    /// A<B<C order) on the remaining two.
    pub fn two_one_product(lone: Qubit, single: [Complex64; 2], pair: [Complex64; 4]) -> Result<Self> {
        let others: Vec<Qubit> = Qubit::ALL.into_iter().filter(|&q| q != lone).collect();
        let mut amps = [ZERO; 8];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let bit = |q: Qubit| (idx >> q.shift()) & 1;
            let pair_idx = 2 * bit(others[0]) + bit(others[1]);
            *amp = single[bit(lone)] * pair[pair_idx];
        }
        Self::new(amps)
    }

    /// Relabels the qubits: the returned state carries qubit `perm.x`'s content on A,
    /// `perm.y`'s on B and `perm.z`'s on C.
    pub fn permuted(&self, perm: Permutation) -> Self {
        let sources = [perm.x, perm.y, perm.z];
        let mut amps = [ZERO; 8];
        for (old_idx, &amp) in self.amps.iter().enumerate() {
            let mut new_idx = 0;
            for (slot, src) in sources.iter().enumerate() {
                let bit = (old_idx >> src.shift()) & 1;
                new_idx |= bit << (2 - slot);
            }
            amps[new_idx] = amp;
        }
        Self { amps }
    }

    /// Applies a 2×2 matrix (row-major) to one qubit. The result is only a valid
    /// state if `u` is unitary.
    pub fn apply_single(&self, qubit: Qubit, u: [[Complex64; 2]; 2]) -> Result<Self> {
        let mask = 1 << qubit.shift();
        let mut amps = self.amps;
        for idx in 0..8 {
            if idx & mask == 0 {
                let (a0, a1) = (self.amps[idx], self.amps[idx | mask]);
                amps[idx] = u[0][0] * a0 + u[0][1] * a1;
                amps[idx | mask] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        Self::new(amps)
    }
}

/// Coordinates of the five-parameter canonical family:
/// √μ₀|000⟩ + √μ₁e^{iφ}|100⟩ + √μ₂|101⟩ + √μ₃|110⟩ + √μ₄|111⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalParams {
    pub mu: [f64; 5],
    pub phi: f64,
}

impl CanonicalParams {
    pub fn new(mu: [f64; 5], phi: f64) -> Result<Self> {
        let p = Self { mu, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.iter().any(|m| !m.is_finite()) || !self.phi.is_finite() {
            return Err(Error::NonFinite("canonical parameter"));
        }
        if let Some(m) = self.mu.iter().find(|&&m| m < 0.0) {
            return Err(Error::InvalidCanonical(format!("negative weight {m}")));
        }
        let sum: f64 = self.mu.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidCanonical(format!("weights sum to {sum}")));
        }
        if !(0.0..=PI).contains(&self.phi) {
            return Err(Error::InvalidCanonical(format!("phase {} outside [0, π]", self.phi)));
        }
        Ok(())
    }
}

/// Angles of the three-spinor subfamily
/// cosθ₁|000⟩ + sinθ₁|1⟩(cosθ₂|0⟩+sinθ₂|1⟩)(cosθ₃|0⟩+sinθ₃|1⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeSpinorParams {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl ThreeSpinorParams {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite() && theta3.is_finite()) {
            return Err(Error::NonFinite("spinor angle"));
        }
        Ok(Self { theta1, theta2, theta3 })
    }
}

pub fn canonical_to_state(p: &CanonicalParams) -> Result<PureState3Q> {
    p.validate()?;
    let [m0, m1, m2, m3, m4] = p.mu;
    let mut amps = [ZERO; 8];
    amps[0b000] = Complex64::new(m0.sqrt(), 0.0);
    amps[0b100] = Complex64::from_polar(m1.sqrt(), p.phi);
    amps[0b101] = Complex64::new(m2.sqrt(), 0.0);
    amps[0b110] = Complex64::new(m3.sqrt(), 0.0);
    amps[0b111] = Complex64::new(m4.sqrt(), 0.0);
    PureState3Q::new(amps)
}

pub fn three_spinor_to_state(p: &ThreeSpinorParams) -> Result<PureState3Q> {
    let p = ThreeSpinorParams::new(p.theta1, p.theta2, p.theta3)?;
    let (s1, c1) = p.theta1.sin_cos();
    let (s2, c2) = p.theta2.sin_cos();
    let (s3, c3) = p.theta3.sin_cos();
    let mut amps = [ZERO; 8];
    amps[0b000] = Complex64::new(c1, 0.0);
    amps[0b100] += Complex64::new(s1 * c2 * c3, 0.0);
    amps[0b101] = Complex64::new(s1 * c2 * s3, 0.0);
    amps[0b110] = Complex64::new(s1 * s2 * c3, 0.0);
    amps[0b111] = Complex64::new(s1 * s2 * s3, 0.0);
    PureState3Q::new(amps)
}

/// Reduced density matrix of one or two qubits. Rows/columns are indexed by the
/// kept qubits' bits, the earliest qubit (A before B before C) most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    qubits: Vec<Qubit>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const EIGEN_TOL: f64 = 1e-10;

    /// Validates hermiticity, unit trace and positivity.
    pub fn new(entries: DMatrix<Complex64>, qubits: Vec<Qubit>) -> Result<Self> {
        let d = entries.nrows();
        if entries.ncols() != d || !(d == 2 || d == 4) || d != 1 << qubits.len() {
            return Err(Error::InvalidDensityMatrix(format!(
                "shape {}x{} for {} qubits",
                d,
                entries.ncols(),
                qubits.len()
            )));
        }
        for i in 0..d {
            for j in 0..d {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > Self::HERMITIAN_TOL {
                    return Err(Error::InvalidDensityMatrix(format!("not Hermitian at ({i},{j})")));
                }
            }
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > Self::TRACE_TOL || trace.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let rho = Self { entries, qubits };
        if let Some(ev) = rho.eigenvalues().into_iter().find(|&e| e < -Self::EIGEN_TOL) {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {ev}")));
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn determinant(&self) -> Complex64 {
        self.entries.determinant()
    }
}

/// Partial trace of |ψ⟩⟨ψ| onto the qubits in `keep`.
pub fn reduce(s: &PureState3Q, keep: &[Qubit]) -> Result<DensityMatrix> {
    let mut kept: Vec<Qubit> = keep.to_vec();
    kept.sort();
    kept.dedup();
    if kept.is_empty() || kept.len() == 3 {
        return Err(Error::InvalidKeep(kept.len()));
    }
    let traced: Vec<Qubit> = Qubit::ALL.into_iter().filter(|q| !kept.contains(q)).collect();

    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0;
        for (pos, q) in kept.iter().enumerate() {
            let bit = (kept_bits >> (kept.len() - 1 - pos)) & 1;
            idx |= bit << q.shift();
        }
        for (pos, q) in traced.iter().enumerate() {
            let bit = (traced_bits >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << q.shift();
        }
        idx
    };

    let d = 1 << kept.len();
    let env = 1 << traced.len();
    let amps = s.amplitudes();
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            rho[(i, j)] = (0..env).map(|e| amps[compose(i, e)] * amps[compose(j, e)].conj()).sum();
        }
    }
    DensityMatrix::new(rho, kept)
}

/// `n` canonical-family parameter sets: μ uniform on the 4-simplex via sorted
/// uniform spacings, φ uniform on [0, π].
pub fn sample_canonical(seed: u64, n: usize) -> Vec<CanonicalParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut cuts = [0.0f64; 4];
            for c in &mut cuts {
                *c = rng.random::<f64>();
            }
            cuts.sort_by(f64::total_cmp);
            let mu = [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], cuts[3] - cuts[2], 1.0 - cuts[3]];
            let phi = PI * rng.random::<f64>();
            CanonicalParams { mu, phi }
        })
        .collect()
}

/// `n` spinor-family angle triples: θ₁ uniform on [0, π/2], θ₂, θ₃ uniform on [0, π].
pub fn sample_three_spinor(seed: u64, n: usize) -> Vec<ThreeSpinorParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| ThreeSpinorParams {
            theta1: 0.5 * PI * rng.random::<f64>(),
            theta2: PI * rng.random::<f64>(),
            theta3: PI * rng.random::<f64>(),
        })
        .collect()
}
