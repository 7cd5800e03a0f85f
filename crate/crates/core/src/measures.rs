//! Bipartite concurrences, the tangle τ and the monotone σ.
//!
//! τ = C²_{A(BC)} − C²_{AB} − C²_{AC}
//! σ = min over pairs {X,Y} of (C²_{X(YZ)} + C²_{Y(XZ)})/2 − C²_{XY}

use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{canonical_to_state, reduce, CanonicalParams, DensityMatrix, Permutation, PureState3Q, Qubit};

/// Undershoot below 0 (or overshoot above 1) tolerated and clamped away.
pub const CLAMP_TOL: f64 = 1e-10;

/// Eigen-weights of ρ below this are treated as exact zeros by [`wootters_concurrence`].
const RANK_CUTOFF: f64 = 1e-13;

/// Largest imaginary residue accepted from the spin-flip product's eigenvalues.
const SPIN_FLIP_IMAG_TOL: f64 = 1e-8;

/// τ, σ and the squared concurrences they are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSet {
    pub tau: f64,
    pub sigma: f64,
    /// C²_{A(BC)}, C²_{B(AC)}, C²_{C(AB)}
    pub c_sq_one_vs_two: [f64; 3],
    /// C²_{AB}, C²_{AC}, C²_{BC}
    pub c_sq_pairwise: [f64; 3],
    /// Δ, only when computed from canonical parameters.
    pub delta: Option<f64>,
}

impl MeasureSet {
    pub fn one_vs_two(&self, q: Qubit) -> f64 {
        self.c_sq_one_vs_two[q.index()]
    }

    pub fn pairwise(&self, x: Qubit, y: Qubit) -> f64 {
        self.c_sq_pairwise[pair_index(x, y)]
    }

    fn validate(self) -> Result<Self> {
        let in_unit = |v: f64| (-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&v);
        let all = [self.tau, self.sigma].into_iter().chain(self.c_sq_one_vs_two).chain(self.c_sq_pairwise);
        if let Some(v) = all.into_iter().find(|&v| !in_unit(v)) {
            return Err(Error::Numerical(format!("measure {v} outside [0, 1]")));
        }
        if self.tau > self.sigma + CLAMP_TOL {
            return Err(Error::Numerical(format!("τ = {} exceeds σ = {}", self.tau, self.sigma)));
        }
        Ok(self)
    }
}

/// Index of the unordered pair {x, y} in `c_sq_pairwise`.
pub fn pair_index(x: Qubit, y: Qubit) -> usize {
    match (x.min(y), x.max(y)) {
        (Qubit::A, Qubit::B) => 0,
        (Qubit::A, Qubit::C) => 1,
        (Qubit::B, Qubit::C) => 2,
        _ => panic!("pair needs two distinct qubits, got {x}{y}"),
    }
}

/// The qubit not in {x, y}.
fn third(x: Qubit, y: Qubit) -> Qubit {
    Qubit::from_index(3 - x.index() - y.index())
}

fn clamp_unit(v: f64, what: &str) -> Result<f64> {
    if !v.is_finite() || v < -CLAMP_TOL || v > 1.0 + CLAMP_TOL {
        return Err(Error::Numerical(format!("{what} = {v} outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}

// φᵀ (σ_y ⊗ σ_y) ψ
fn spin_flip_form(phi: &[Complex64], psi: &[Complex64]) -> Complex64 {
    -phi[0] * psi[3] + phi[1] * psi[2] + phi[2] * psi[1] - phi[3] * psi[0]
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(format!("concurrence needs a 4x4 matrix, got {0}x{0}", rho.dim())));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// The λᵢ (square roots of the eigenvalues of ρ·ρ̃) are obtained as the singular
/// values of τᵢⱼ = φᵢᵀ(σ_y⊗σ_y)φⱼ over the weighted eigenvectors φᵢ = √pᵢ|eᵢ⟩ of ρ.
/// This keeps them accurate near zero, where a square root of a noisy
/// eigenvalue would lose half the digits.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let eig = SymmetricEigen::new(rho.matrix().clone());
    let weighted: Vec<Vec<Complex64>> = (0..4)
        .filter(|&i| eig.eigenvalues[i] > RANK_CUTOFF)
        .map(|i| {
            let w = eig.eigenvalues[i].sqrt();
            eig.eigenvectors.column(i).iter().map(|z| z * w).collect()
        })
        .collect();
    let k = weighted.len();
    if k == 0 {
        return Err(Error::Numerical("density matrix has no positive weight".into()));
    }
    let tau = DMatrix::from_fn(k, k, |i, j| spin_flip_form(&weighted[i], &weighted[j]));
    let mut lambdas: Vec<f64> = SVD::new(tau, false, false).singular_values.iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1..].iter().sum::<f64>();
    clamp_unit(c.max(0.0), "concurrence")
}

/// Wootters concurrence straight from the eigenvalues of the non-Hermitian
/// product ρ·(σ_y⊗σ_y)ρ*(σ_y⊗σ_y), via a complex Schur decomposition.
///
/// Independent of [`wootters_concurrence`]; less accurate when ρ is rank
/// deficient (errors of order √ε).
pub fn wootters_concurrence_spin_flip(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let yy = DMatrix::from_fn(4, 4, |i, j| {
        let v = match (i, j) {
            (0, 3) | (3, 0) => -1.0,
            (1, 2) | (2, 1) => 1.0,
            _ => 0.0,
        };
        Complex64::new(v, 0.0)
    });
    let m = rho.matrix();
    let flipped = &yy * m.map(|z| z.conj()) * &yy;
    let product = m * flipped;
    let (_, t) = Schur::new(product).unpack();
    let mut lambdas = Vec::with_capacity(4);
    for i in 0..4 {
        let ev = t[(i, i)];
        if ev.im.abs() > SPIN_FLIP_IMAG_TOL || ev.re < -SPIN_FLIP_IMAG_TOL {
            return Err(Error::Numerical(format!("spin-flip eigenvalue {ev} is not a non-negative real")));
        }
        lambdas.push(ev.re.max(0.0).sqrt());
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1..].iter().sum::<f64>();
    clamp_unit(c.max(0.0), "concurrence")
}

/// C²_{X(YZ)} = 4 det ρ_X.
pub fn one_vs_two_concurrence_sq(s: &PureState3Q, x: Qubit) -> Result<f64> {
    let rho = reduce(s, &[x])?;
    let m = rho.matrix();
    let det = m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].norm_sqr();
    clamp_unit(4.0 * det, "C²_{X(YZ)}")
}

/// Squared Wootters concurrence of the reduced state of qubits x and y.
pub fn pairwise_concurrence_sq(s: &PureState3Q, x: Qubit, y: Qubit) -> Result<f64> {
    let c = wootters_concurrence(&reduce(s, &[x, y])?)?;
    Ok(c * c)
}

fn all_pairwise(s: &PureState3Q) -> Result<[f64; 3]> {
    use Qubit::*;
    Ok([pairwise_concurrence_sq(s, A, B)?, pairwise_concurrence_sq(s, A, C)?, pairwise_concurrence_sq(s, B, C)?])
}

fn all_one_vs_two(s: &PureState3Q) -> Result<[f64; 3]> {
    use Qubit::*;
    Ok([one_vs_two_concurrence_sq(s, A)?, one_vs_two_concurrence_sq(s, B)?, one_vs_two_concurrence_sq(s, C)?])
}

// min over unordered {X,Y} of (C²_X + C²_Y)/2 − C²_XY
fn sigma_by_pairs(one: &[f64; 3], pair: &[f64; 3]) -> f64 {
    use Qubit::*;
    [(A, B), (A, C), (B, C)]
        .into_iter()
        .map(|(x, y)| 0.5 * (one[x.index()] + one[y.index()]) - pair[pair_index(x, y)])
        .fold(f64::INFINITY, f64::min)
}

/// τ via the A(BC) split and σ by direct minimization over qubit pairs.
pub fn measures_from_state(s: &PureState3Q) -> Result<MeasureSet> {
    let one = all_one_vs_two(s)?;
    let pair = all_pairwise(s)?;
    let tau = clamp_unit(one[0] - pair[0] - pair[1], "τ")?;
    let sigma = clamp_unit(sigma_by_pairs(&one, &pair), "σ")?;
    MeasureSet { tau, sigma, c_sq_one_vs_two: one, c_sq_pairwise: pair, delta: None }.validate()
}

/// Δ = μ₁μ₄ + μ₂μ₃ − 2√(μ₁μ₂μ₃μ₄) cos φ
pub fn canonical_delta(p: &CanonicalParams) -> f64 {
    let [_, m1, m2, m3, m4] = p.mu;
    m1 * m4 + m2 * m3 - 2.0 * (m1 * m2 * m3 * m4).sqrt() * p.phi.cos()
}

/// Closed forms on the canonical parameters; pairwise terms come from the
/// constructed state since they have no closed form here.
pub fn measures_from_canonical(p: &CanonicalParams) -> Result<MeasureSet> {
    let s = canonical_to_state(p)?;
    let [m0, _, m2, m3, m4] = p.mu;
    let delta = canonical_delta(p);
    let tau = clamp_unit(4.0 * m0 * m4, "τ")?;
    let one = [
        clamp_unit(4.0 * m0 * (m2 + m3 + m4), "C²_{A(BC)}")?,
        clamp_unit(4.0 * m0 * (m3 + m4) + 4.0 * delta, "C²_{B(AC)}")?,
        clamp_unit(4.0 * m0 * (m2 + m4) + 4.0 * delta, "C²_{C(AB)}")?,
    ];
    let pair = all_pairwise(&s)?;
    let min_one = one.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma = clamp_unit(0.5 * (tau + min_one), "σ")?;
    MeasureSet { tau, sigma, c_sq_one_vs_two: one, c_sq_pairwise: pair, delta: Some(delta) }.validate()
}

/// The two alternative σ expressions:
/// `(½(τ + min_Z C²_{Z(XY)}), τ + ½ min_Z (C²_{XZ} + C²_{YZ}))`.
pub fn sigma_alternative(s: &PureState3Q) -> Result<(f64, f64)> {
    let one = all_one_vs_two(s)?;
    let pair = all_pairwise(s)?;
    let tau = clamp_unit(one[0] - pair[0] - pair[1], "τ")?;
    let min_one = one.iter().copied().fold(f64::INFINITY, f64::min);
    let min_pair_sum = Qubit::ALL
        .into_iter()
        .map(|z| {
            let others: Vec<Qubit> = Qubit::ALL.into_iter().filter(|&q| q != z).collect();
            pair[pair_index(others[0], z)] + pair[pair_index(others[1], z)]
        })
        .fold(f64::INFINITY, f64::min);
    Ok((0.5 * (tau + min_one), tau + 0.5 * min_pair_sum))
}

/// |τ − (C²_{X(YZ)} + C²_{Y(XZ)} − C²_{Z(XY)} − 2C²_{XY})| for the given roles.
pub fn sudbery_identity_residual(s: &PureState3Q, perm: Permutation) -> Result<f64> {
    let m = measures_from_state(s)?;
    debug_assert_eq!(perm.z, third(perm.x, perm.y));
    let rhs = m.one_vs_two(perm.x) + m.one_vs_two(perm.y) - m.one_vs_two(perm.z) - 2.0 * m.pairwise(perm.x, perm.y);
    Ok((m.tau - rhs).abs())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;
    use crate::states::{CanonicalParams, DensityMatrix};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn concurrence_maximally_mixed() {
        let rho = DensityMatrix::new(DMatrix::from_diagonal_element(4, 4, c(0.25)), vec![Qubit::A, Qubit::B]).unwrap();
        assert_eq!(wootters_concurrence(&rho).unwrap(), 0.0);
        assert_eq!(wootters_concurrence_spin_flip(&rho).unwrap(), 0.0);
    }

    #[test]
    fn concurrence_bell_projector() {
        let v = [c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)];
        let m = DMatrix::from_fn(4, 4, |i, j| v[i] * v[j].conj());
        let rho = DensityMatrix::new(m, vec![Qubit::A, Qubit::B]).unwrap();
        close(wootters_concurrence(&rho).unwrap(), 1.0, 1e-14);
        close(wootters_concurrence_spin_flip(&rho).unwrap(), 1.0, 1e-7);
    }

    #[test]
    fn concurrence_of_w_pair() {
        let rho = reduce(&PureState3Q::w(), &[Qubit::A, Qubit::B]).unwrap();
        close(wootters_concurrence(&rho).unwrap(), 2.0 / 3.0, 1e-14);
        close(wootters_concurrence_spin_flip(&rho).unwrap(), 2.0 / 3.0, 1e-7);
    }

    #[test]
    fn concurrence_rejects_single_qubit() {
        let rho = reduce(&PureState3Q::ghz(), &[Qubit::A]).unwrap();
        assert!(wootters_concurrence(&rho).is_err());
    }

    #[test]
    fn one_vs_two_examples() {
        for q in Qubit::ALL {
            close(one_vs_two_concurrence_sq(&PureState3Q::ghz(), q).unwrap(), 1.0, 1e-15);
            close(one_vs_two_concurrence_sq(&PureState3Q::product_zero(), q).unwrap(), 0.0, 0.0);
            close(one_vs_two_concurrence_sq(&PureState3Q::w(), q).unwrap(), 8.0 / 9.0, 1e-15);
        }
    }

    #[test]
    fn measures_of_named_states() {
        let ghz = measures_from_state(&PureState3Q::ghz()).unwrap();
        close(ghz.tau, 1.0, 1e-12);
        close(ghz.sigma, 1.0, 1e-12);
        assert_eq!(ghz.delta, None);

        let w = measures_from_state(&PureState3Q::w()).unwrap();
        close(w.tau, 0.0, 1e-12);
        close(w.sigma, 4.0 / 9.0, 1e-12);
        for p in w.c_sq_pairwise {
            close(p, 4.0 / 9.0, 1e-12);
        }

        let sep = measures_from_state(&PureState3Q::bellpair_a()).unwrap();
        close(sep.tau, 0.0, 1e-12);
        close(sep.sigma, 0.0, 1e-12);
    }

    #[test]
    fn canonical_closed_forms() {
        let ghz = measures_from_canonical(&CanonicalParams::new([0.5, 0.0, 0.0, 0.0, 0.5], 0.0).unwrap()).unwrap();
        assert_eq!(ghz.tau, 1.0);
        assert_eq!(ghz.delta, Some(0.0));
        assert_eq!(ghz.c_sq_one_vs_two, [1.0; 3]);
        assert_eq!(ghz.sigma, 1.0);

        let p = CanonicalParams::new([0.2; 5], PI / 2.0).unwrap();
        let m = measures_from_canonical(&p).unwrap();
        close(m.delta.unwrap(), 0.08, 1e-15);
        close(m.tau, 0.16, 1e-15);

        let p = CanonicalParams::new([0.0, 0.1, 0.2, 0.3, 0.4], 1.0).unwrap();
        let m = measures_from_canonical(&p).unwrap();
        assert_eq!(m.tau, 0.0);
        assert_eq!(m.c_sq_one_vs_two[0], 0.0);
    }

    #[test]
    fn canonical_matches_general_path() {
        let p = CanonicalParams::new([0.1, 0.25, 0.15, 0.3, 0.2], 2.2).unwrap();
        let closed = measures_from_canonical(&p).unwrap();
        let general = measures_from_state(&canonical_to_state(&p).unwrap()).unwrap();
        close(closed.tau, general.tau, 1e-10);
        close(closed.sigma, general.sigma, 1e-10);
        for i in 0..3 {
            close(closed.c_sq_one_vs_two[i], general.c_sq_one_vs_two[i], 1e-12);
        }
    }

    #[test]
    fn sigma_alternatives_on_named_states() {
        let (a, b) = sigma_alternative(&PureState3Q::ghz()).unwrap();
        close(a, 1.0, 1e-12);
        close(b, 1.0, 1e-12);
        let (a, b) = sigma_alternative(&PureState3Q::w()).unwrap();
        close(a, 4.0 / 9.0, 1e-12);
        close(b, 4.0 / 9.0, 1e-12);
    }

    #[test]
    fn sudbery_on_named_states() {
        for perm in Permutation::all() {
            assert!(sudbery_identity_residual(&PureState3Q::ghz(), perm).unwrap() <= 1e-10);
            assert!(sudbery_identity_residual(&PureState3Q::w(), perm).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn clamp_policy() {
        assert_eq!(clamp_unit(-5e-11, "x").unwrap(), 0.0);
        assert!(clamp_unit(-1e-9, "x").is_err());
        assert_eq!(clamp_unit(1.0 + 5e-11, "x").unwrap(), 1.0);
        assert!(clamp_unit(f64::NAN, "x").is_err());
    }
}
