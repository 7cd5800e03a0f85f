#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use tripartite::states::{CanonicalParams, PureState3Q, Qubit};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Canonical parameters from four cut points and a phase fraction.
pub fn canonical_from_cuts(mut cuts: [f64; 4], phi_frac: f64) -> CanonicalParams {
    cuts.sort_by(f64::total_cmp);
    let mu = [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], cuts[3] - cuts[2], 1.0 - cuts[3]];
    CanonicalParams::new(mu, PI * phi_frac).unwrap()
}

pub fn canonical_strategy() -> impl Strategy<Value = CanonicalParams> {
    (prop::array::uniform4(0.0f64..1.0), 0.0f64..1.0).prop_map(|(cuts, f)| canonical_from_cuts(cuts, f))
}

/// Arbitrary normalized 8-amplitude states.
pub fn general_state_strategy() -> impl Strategy<Value = PureState3Q> {
    prop::array::uniform16(-1.0f64..1.0)
        .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.1)
        .prop_map(|v| {
            let mut amps = [c(0.0, 0.0); 8];
            for (i, a) in amps.iter_mut().enumerate() {
                *a = c(v[2 * i], v[2 * i + 1]);
            }
            PureState3Q::from_unnormalized(amps).unwrap()
        })
}

pub fn normalize<const N: usize>(v: [Complex64; N]) -> [Complex64; N] {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

/// A 2–1 separable state: a single qubit times an arbitrary state of the other two.
pub fn separable_strategy() -> impl Strategy<Value = PureState3Q> {
    (0usize..3, prop::array::uniform4(-1.0f64..1.0), prop::array::uniform8(-1.0f64..1.0))
        .prop_filter("non-degenerate", |(_, s, p)| {
            s.iter().map(|x| x * x).sum::<f64>() > 0.05 && p.iter().map(|x| x * x).sum::<f64>() > 0.05
        })
        .prop_map(|(lone, s, p)| {
            let single = normalize([c(s[0], s[1]), c(s[2], s[3])]);
            let pair = normalize([c(p[0], p[1]), c(p[2], p[3]), c(p[4], p[5]), c(p[6], p[7])]);
            PureState3Q::two_one_product(Qubit::from_index(lone), single, pair).unwrap()
        })
}

/// Rz(α)·Ry(β)·Rz(γ)
pub fn su2(alpha: f64, beta: f64, gamma: f64) -> [[Complex64; 2]; 2] {
    let e = |t: f64| Complex64::from_polar(1.0, t);
    let (s, co) = (beta / 2.0).sin_cos();
    [
        [e(-(alpha + gamma) / 2.0) * co, -e(-(alpha - gamma) / 2.0) * s],
        [e((alpha - gamma) / 2.0) * s, e((alpha + gamma) / 2.0) * co],
    ]
}

pub fn local_unitary_strategy() -> impl Strategy<Value = [[[Complex64; 2]; 2]; 3]> {
    prop::array::uniform9(0.0f64..(2.0 * PI)).prop_map(|a| [su2(a[0], a[1], a[2]), su2(a[3], a[4], a[5]), su2(a[6], a[7], a[8])])
}

pub fn apply_local(s: &PureState3Q, us: &[[[Complex64; 2]; 2]; 3]) -> PureState3Q {
    let mut out = *s;
    for (q, u) in Qubit::ALL.into_iter().zip(us) {
        out = out.apply_single(q, *u).unwrap();
    }
    out
}
