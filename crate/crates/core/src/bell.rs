//! Three-qubit correlators and the Mermin / Svetlichny combinations.
//!
//! Everything is expressed through the correlation tensor
//! `t[i][j][k] = ⟨ψ|σ_i⊗σ_j⊗σ_k|ψ⟩`, so E(a,b,c) = Σ aᵢ bⱼ c_k t[i][j][k].
//! For fixed b, b′, c, c′ both combinations are linear in a and a′, which
//! makes the maximization over the first qubit's pair of settings exact:
//! max over a, a′ equals |v| + |v′| for the two coefficient vectors.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::states::PureState3Q;

pub type Vec3 = [f64; 3];

const UNIT_TOL: f64 = 1e-12;

/// Which Bell combination is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellMode {
    /// |ℰ|
    Mermin,
    /// |ℰ − ℰ′|
    Svetlichny,
}

impl BellMode {
    /// Largest value reachable by a local realistic (Mermin) or hybrid (Svetlichny) model.
    pub fn classical_bound(self) -> f64 {
        match self {
            BellMode::Mermin => 2.0,
            BellMode::Svetlichny => 4.0,
        }
    }

    /// Largest value reachable by any three-qubit state.
    pub fn quantum_max(self) -> f64 {
        match self {
            BellMode::Mermin => 4.0,
            BellMode::Svetlichny => 4.0 * SQRT_2,
        }
    }
}

impl fmt::Display for BellMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellMode::Mermin => "mermin",
            BellMode::Svetlichny => "svetlichny",
        })
    }
}

/// A measurement direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVector3 {
    pub const Z: UnitVector3 = UnitVector3 { x: 0.0, y: 0.0, z: 1.0 };
    pub const X: UnitVector3 = UnitVector3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: UnitVector3 = UnitVector3 { x: 0.0, y: 1.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = x * x + y * y + z * z;
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(n));
        }
        Ok(Self { x, y, z })
    }

    /// Polar angle θ from +z, azimuth φ from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self { x: st * cp, y: st * sp, z: ct }
    }

    /// Direction of `v`, or +z when `v` vanishes.
    pub fn direction_of(v: Vec3) -> Self {
        let n = norm(v);
        if n < 1e-14 {
            Self::Z
        } else {
            Self { x: v[0] / n, y: v[1] / n, z: v[2] / n }
        }
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn neg(self) -> Self {
        Self { x: -self.x, y: -self.y, z: -self.z }
    }
}

/// The six measurement directions, two per qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSettings {
    pub a: UnitVector3,
    pub a_prime: UnitVector3,
    pub b: UnitVector3,
    pub b_prime: UnitVector3,
    pub c: UnitVector3,
    pub c_prime: UnitVector3,
}

impl BellSettings {
    /// Primed and unprimed direction equal for every qubit.
    pub fn uniform(u: UnitVector3) -> Self {
        Self { a: u, a_prime: u, b: u, b_prime: u, c: u, c_prime: u }
    }
}

/// t[i][j][k] = ⟨σ_i⊗σ_j⊗σ_k⟩ for i, j, k ∈ {x, y, z}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor {
    pub t: [[[f64; 3]; 3]; 3],
}

// σ_p |bit⟩ = phase · |bit ^ flip⟩
fn pauli_action(p: usize, bit: usize) -> (Complex64, usize) {
    match p {
        0 => (Complex64::new(1.0, 0.0), 1),
        1 => (if bit == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) }, 1),
        _ => (Complex64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0), 0),
    }
}

pub fn correlation_tensor(s: &PureState3Q) -> Result<CorrelationTensor> {
    let amps = s.amplitudes();
    let mut t = [[[0.0; 3]; 3]; 3];
    for (i, plane) in t.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, &amp) in amps.iter().enumerate() {
                    let (pa, fa) = pauli_action(i, (idx >> 2) & 1);
                    let (pb, fb) = pauli_action(j, (idx >> 1) & 1);
                    let (pc, fc) = pauli_action(k, idx & 1);
                    let target = idx ^ (fa << 2) ^ (fb << 1) ^ fc;
                    acc += amps[target].conj() * pa * pb * pc * amp;
                }
                if acc.im.abs() > 1e-10 || acc.re.abs() > 1.0 + 1e-10 {
                    return Err(Error::Numerical(format!("correlator t[{i}][{j}][{k}] = {acc}")));
                }
                *entry = acc.re.clamp(-1.0, 1.0);
            }
        }
    }
    Ok(CorrelationTensor { t })
}

fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl CorrelationTensor {
    /// E(a, b, c)
    pub fn correlator(&self, a: UnitVector3, b: UnitVector3, c: UnitVector3) -> f64 {
        dot(a.to_array(), self.contract_bc(b.to_array(), c.to_array()))
    }

    /// The vector wᵢ = Σ_{jk} t[i][j][k] bⱼ c_k, so that E(a,b,c) = a·w.
    pub fn contract_bc(&self, b: Vec3, c: Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..3 {
                *o += b[j] * dot(self.t[i][j], c);
            }
        }
        out
    }

    /// M[i][k] = Σⱼ t[i][j][k] bⱼ
    fn contract_b(&self, b: Vec3) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                *e = b[0] * self.t[i][0][k] + b[1] * self.t[i][1][k] + b[2] * self.t[i][2][k];
            }
        }
        m
    }
}

/// ℰ = E(a,b,c′) + E(a,b′,c) + E(a′,b,c) − E(a′,b′,c′)
pub fn mermin_value(t: &CorrelationTensor, s: &BellSettings) -> f64 {
    t.correlator(s.a, s.b, s.c_prime) + t.correlator(s.a, s.b_prime, s.c) + t.correlator(s.a_prime, s.b, s.c)
        - t.correlator(s.a_prime, s.b_prime, s.c_prime)
}

/// ℰ′ = E(a′,b′,c) + E(a′,b,c′) + E(a,b′,c′) − E(a,b,c)
pub fn mermin_prime_value(t: &CorrelationTensor, s: &BellSettings) -> f64 {
    t.correlator(s.a_prime, s.b_prime, s.c) + t.correlator(s.a_prime, s.b, s.c_prime)
        + t.correlator(s.a, s.b_prime, s.c_prime)
        - t.correlator(s.a, s.b, s.c)
}

/// ℰ − ℰ′
pub fn svetlichny_value(t: &CorrelationTensor, s: &BellSettings) -> f64 {
    mermin_value(t, s) - mermin_prime_value(t, s)
}

pub fn bell_value(t: &CorrelationTensor, s: &BellSettings, mode: BellMode) -> f64 {
    match mode {
        BellMode::Mermin => mermin_value(t, s),
        BellMode::Svetlichny => svetlichny_value(t, s),
    }
}

/// Coefficient vectors (v, v′) with value = a·v + a′·v′.
fn combine(bc: Vec3, bc_p: Vec3, b_pc: Vec3, b_pc_p: Vec3, mode: BellMode) -> (Vec3, Vec3) {
    let mut v = [0.0; 3];
    let mut vp = [0.0; 3];
    for i in 0..3 {
        match mode {
            BellMode::Mermin => {
                v[i] = bc_p[i] + b_pc[i];
                vp[i] = bc[i] - b_pc_p[i];
            }
            BellMode::Svetlichny => {
                v[i] = bc[i] + bc_p[i] + b_pc[i] - b_pc_p[i];
                vp[i] = bc[i] - bc_p[i] - b_pc[i] - b_pc_p[i];
            }
        }
    }
    (v, vp)
}

/// The vectors v, v′ multiplying a and a′ for the given b, b′, c, c′.
pub fn inner_vectors(
    t: &CorrelationTensor,
    b: UnitVector3,
    b_prime: UnitVector3,
    c: UnitVector3,
    c_prime: UnitVector3,
    mode: BellMode,
) -> (Vec3, Vec3) {
    let (b, bp, c, cp) = (b.to_array(), b_prime.to_array(), c.to_array(), c_prime.to_array());
    combine(t.contract_bc(b, c), t.contract_bc(b, cp), t.contract_bc(bp, c), t.contract_bc(bp, cp), mode)
}

/// max over a, a′ of |value| at fixed b, b′, c, c′, namely |v| + |v′|.
pub fn inner_max(
    t: &CorrelationTensor,
    b: UnitVector3,
    b_prime: UnitVector3,
    c: UnitVector3,
    c_prime: UnitVector3,
    mode: BellMode,
) -> f64 {
    let (v, vp) = inner_vectors(t, b, b_prime, c, c_prime, mode);
    norm(v) + norm(vp)
}

/// Settings for b, b′, c, c′ completed with the optimal a = v/|v|, a′ = v′/|v′|.
pub fn complete_settings(
    t: &CorrelationTensor,
    b: UnitVector3,
    b_prime: UnitVector3,
    c: UnitVector3,
    c_prime: UnitVector3,
    mode: BellMode,
) -> BellSettings {
    let (v, vp) = inner_vectors(t, b, b_prime, c, c_prime, mode);
    BellSettings {
        a: UnitVector3::direction_of(v),
        a_prime: UnitVector3::direction_of(vp),
        b,
        b_prime,
        c,
        c_prime,
    }
}

/// Decodes the 8 outer angles (θ, φ for b, b′, c, c′ in that order).
pub fn angles_to_vectors(angles: &[f64]) -> [UnitVector3; 4] {
    [
        UnitVector3::from_angles(angles[0], angles[1]),
        UnitVector3::from_angles(angles[2], angles[3]),
        UnitVector3::from_angles(angles[4], angles[5]),
        UnitVector3::from_angles(angles[6], angles[7]),
    ]
}

/// inner_max as a function of the 8 outer angles; the hot loop of every search.
pub fn inner_max_angles(t: &CorrelationTensor, angles: &[f64], mode: BellMode) -> f64 {
    let [b, bp, c, cp] = angles_to_vectors(angles).map(UnitVector3::to_array);
    let mb = t.contract_b(b);
    let mbp = t.contract_b(bp);
    let apply = |m: &[[f64; 3]; 3], x: Vec3| [dot(m[0], x), dot(m[1], x), dot(m[2], x)];
    let (v, vp) = combine(apply(&mb, c), apply(&mb, cp), apply(&mbp, c), apply(&mbp, cp), mode);
    norm(v) + norm(vp)
}

/// Multi-start search settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub restarts: usize,
    /// Evaluation cap per restart.
    pub max_evals: usize,
    /// Convergence tolerance on the objective.
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { restarts: 32, max_evals: 10_000, tol: 1e-10, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellResult {
    pub mode: BellMode,
    pub value: f64,
    pub settings: BellSettings,
    pub restarts_used: usize,
    /// True when the best restart stopped on the tolerance rather than the evaluation cap.
    pub converged: bool,
    pub evaluations: usize,
}

impl BellResult {
    pub fn violates(&self) -> bool {
        self.value > self.mode.classical_bound()
    }
}

/// Uniform random direction angles for restart `index` of the stream `seed`.
fn restart_start(seed: u64, index: usize) -> [f64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut x = [0.0; 8];
    for pair in x.chunks_mut(2) {
        pair[0] = rng.random_range(-1.0f64..1.0).acos();
        pair[1] = rng.random_range(0.0..2.0 * PI);
    }
    x
}

/// Maximizes |ℰ| or |ℰ − ℰ′| over all six directions.
///
/// The first qubit's pair is handled exactly; the remaining eight angles are
/// searched with `opts.restarts` Nelder–Mead runs from seeded random starts.
/// Restart `k` always starts from the same point for a given seed, so adding
/// restarts can only raise the result.
pub fn maximize(s: &PureState3Q, mode: BellMode, opts: &OptimizerOptions) -> Result<BellResult> {
    let t = correlation_tensor(s)?;
    maximize_tensor(&t, mode, opts)
}

pub fn maximize_tensor(t: &CorrelationTensor, mode: BellMode, opts: &OptimizerOptions) -> Result<BellResult> {
    let nm = NelderMeadOptions { max_evals: opts.max_evals, tol: opts.tol, initial_step: 0.6 };
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut evaluations = 0;
    for r in 0..opts.restarts.max(1) {
        let x0 = restart_start(opts.seed, r);
        let res = nelder_mead::minimize(|x| -inner_max_angles(t, x, mode), &x0, &nm);
        evaluations += res.evals;
        let value = -res.f;
        if !value.is_finite() {
            return Err(Error::Numerical(format!("non-finite Bell objective at restart {r}")));
        }
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, res.x, res.converged));
        }
    }
    let (value, x, converged) = best.expect("at least one restart");
    let [b, bp, c, cp] = angles_to_vectors(&x);
    Ok(BellResult {
        mode,
        value,
        settings: complete_settings(t, b, bp, c, cp, mode),
        restarts_used: opts.restarts.max(1),
        converged,
        evaluations,
    })
}

/// Evaluations in a full oracle grid are capped at this many points; finer
/// grids fall back to random sampling.
const ORACLE_RANDOM_POINTS: usize = 1_000_000;
const ORACLE_SEED: u64 = 0x5eed_0f_0a_c1e;

/// Brute-force lower bound on the maximal violation.
///
/// For `grid_n ≤ 8` evaluates inner_max on every combination of grid
/// directions (θ = kπ/n, φ = 2πl/n for each of b, b′, c, c′); for larger
/// `grid_n` on 10⁶ random angle sets. The best point is then refined by a
/// compass search, which is independent of the Nelder–Mead path used by
/// [`maximize`].
pub fn oracle_max(s: &PureState3Q, mode: BellMode, grid_n: usize) -> Result<f64> {
    if grid_n < 4 {
        return Err(Error::OutOfRange { value: grid_n as f64, lo: 4.0, hi: f64::INFINITY });
    }
    let t = correlation_tensor(s)?;
    let start = if grid_n <= 8 { grid_search(&t, mode, grid_n) } else { random_search(&t, mode, grid_n) };
    Ok(compass_refine(&t, mode, start, PI / grid_n as f64))
}

fn grid_search(t: &CorrelationTensor, mode: BellMode, n: usize) -> [f64; 8] {
    // grid directions with pole duplicates removed
    let mut dirs: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for k in 1..n {
        for l in 0..n {
            dirs.push((k as f64 * PI / n as f64, 2.0 * PI * l as f64 / n as f64));
        }
    }
    let units: Vec<Vec3> = dirs.iter().map(|&(th, ph)| UnitVector3::from_angles(th, ph).to_array()).collect();
    let d = units.len();
    // w[bi][ci] = t(b, c)
    let w: Vec<Vec3> = units.iter().flat_map(|&b| units.iter().map(move |&c| t.contract_bc(b, c))).collect();

    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for bi in 0..d {
        for bpi in 0..d {
            for ci in 0..d {
                let bc = w[bi * d + ci];
                let bpc = w[bpi * d + ci];
                for cpi in 0..d {
                    let (v, vp) = combine(bc, w[bi * d + cpi], bpc, w[bpi * d + cpi], mode);
                    let val = norm(v) + norm(vp);
                    if val > best.0 {
                        best = (val, [bi, bpi, ci, cpi]);
                    }
                }
            }
        }
    }
    let mut x = [0.0; 8];
    for (slot, &idx) in best.1.iter().enumerate() {
        x[2 * slot] = dirs[idx].0;
        x[2 * slot + 1] = dirs[idx].1;
    }
    x
}

fn random_search(t: &CorrelationTensor, mode: BellMode, grid_n: usize) -> [f64; 8] {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED ^ grid_n as u64);
    let mut best = (f64::NEG_INFINITY, [0.0; 8]);
    let mut x = [0.0; 8];
    for _ in 0..ORACLE_RANDOM_POINTS {
        for pair in x.chunks_mut(2) {
            pair[0] = rng.random_range(-1.0f64..1.0).acos();
            pair[1] = rng.random_range(0.0..2.0 * PI);
        }
        let val = inner_max_angles(t, &x, mode);
        if val > best.0 {
            best = (val, x);
        }
    }
    best.1
}

/// Coordinate-wise pattern search: try ±step on each angle, halve the step
/// when nothing improves.
fn compass_refine(t: &CorrelationTensor, mode: BellMode, start: [f64; 8], step0: f64) -> f64 {
    let mut x = start;
    let mut fx = inner_max_angles(t, &x, mode);
    let mut step = step0;
    while step > 1e-11 {
        let mut improved = false;
        for i in 0..8 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] += dir * step;
                let fy = inner_max_angles(t, &y, mode);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    fx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn ghz_tensor() {
        let t = correlation_tensor(&PureState3Q::ghz()).unwrap().t;
        // x=0, y=1, z=2
        let mut expected = [[[0.0; 3]; 3]; 3];
        expected[0][0][0] = 1.0;
        expected[0][1][1] = -1.0;
        expected[1][0][1] = -1.0;
        expected[1][1][0] = -1.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    close(t[i][j][k], expected[i][j][k], 1e-15);
                }
            }
        }
    }

    #[test]
    fn product_tensor() {
        let t = correlation_tensor(&PureState3Q::product_zero()).unwrap().t;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let expected = if (i, j, k) == (2, 2, 2) { 1.0 } else { 0.0 };
                    assert_eq!(t[i][j][k], expected);
                }
            }
        }
    }

    #[test]
    fn mermin_textbook_ghz_settings() {
        // unprimed along x, primed along y: ℰ = ⟨xxy⟩ + ⟨xyx⟩ + ⟨yxx⟩ − ⟨yyy⟩ = 0 for GHZ,
        // whereas unprimed y, primed x gives −4.
        let t = correlation_tensor(&PureState3Q::ghz()).unwrap();
        let s = BellSettings {
            a: UnitVector3::Y,
            a_prime: UnitVector3::X,
            b: UnitVector3::Y,
            b_prime: UnitVector3::X,
            c: UnitVector3::Y,
            c_prime: UnitVector3::X,
        };
        close(mermin_value(&t, &s), -4.0, 1e-14);
    }

    #[test]
    fn degenerate_settings_collapse() {
        let t = correlation_tensor(&PureState3Q::w()).unwrap();
        let u = UnitVector3::from_angles(0.7, 1.9);
        let s = BellSettings::uniform(u);
        let e = t.correlator(u, u, u);
        close(mermin_value(&t, &s), 2.0 * e, 1e-14);
        assert!(mermin_value(&t, &s).abs() <= 2.0 + 1e-12);
        close(svetlichny_value(&t, &s), 0.0, 1e-14);
    }

    #[test]
    fn product_state_arithmetic() {
        let t = correlation_tensor(&PureState3Q::product_zero()).unwrap();
        let s = BellSettings::uniform(UnitVector3::Z);
        close(mermin_value(&t, &s), 2.0, 0.0);
        close(svetlichny_value(&t, &s), 0.0, 0.0);
        let s = BellSettings { c_prime: UnitVector3::Z.neg(), ..s };
        close(svetlichny_value(&t, &s), 4.0, 0.0);
    }

    #[test]
    fn inner_max_product() {
        let t = correlation_tensor(&PureState3Q::product_zero()).unwrap();
        let z = UnitVector3::Z;
        let (v, vp) = inner_vectors(&t, z, z, z, z, BellMode::Mermin);
        assert_eq!(v, [0.0, 0.0, 2.0]);
        assert_eq!(vp, [0.0, 0.0, 0.0]);
        assert_eq!(inner_max(&t, z, z, z, z, BellMode::Mermin), 2.0);
    }

    #[test]
    fn angle_path_matches_vector_path() {
        let t = correlation_tensor(&PureState3Q::w()).unwrap();
        let x = [0.3, 1.0, 2.0, 4.0, 1.1, 0.2, 2.9, 5.5];
        let [b, bp, c, cp] = angles_to_vectors(&x);
        for mode in [BellMode::Mermin, BellMode::Svetlichny] {
            close(inner_max_angles(&t, &x, mode), inner_max(&t, b, bp, c, cp, mode), 1e-14);
        }
    }

    #[test]
    fn maximize_ghz() {
        let opts = OptimizerOptions::default();
        let m = maximize(&PureState3Q::ghz(), BellMode::Mermin, &opts).unwrap();
        close(m.value, 4.0, 1e-6);
        assert!(m.violates());
        let s = maximize(&PureState3Q::ghz(), BellMode::Svetlichny, &opts).unwrap();
        close(s.value, 4.0 * SQRT_2, 1e-6);
    }

    #[test]
    fn returned_settings_reproduce_value() {
        let t = correlation_tensor(&PureState3Q::w()).unwrap();
        for mode in [BellMode::Mermin, BellMode::Svetlichny] {
            let r = maximize_tensor(&t, mode, &OptimizerOptions { restarts: 4, ..Default::default() }).unwrap();
            close(bell_value(&t, &r.settings, mode).abs(), r.value, 1e-8);
        }
    }

    #[test]
    fn oracle_rejects_coarse_grid() {
        assert!(oracle_max(&PureState3Q::ghz(), BellMode::Mermin, 3).is_err());
    }

    #[test]
    fn unit_vector_validation() {
        assert!(UnitVector3::new(1.0, 0.0, 0.0).is_ok());
        assert!(UnitVector3::new(1.0, 0.1, 0.0).is_err());
        assert_eq!(UnitVector3::direction_of([0.0; 3]), UnitVector3::Z);
    }
}
