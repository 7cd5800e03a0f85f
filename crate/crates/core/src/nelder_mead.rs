//! Derivative-free simplex minimizer used for the outer Bell maximization.

/// Stopping rules for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Converged once the spread of simplex values drops below this.
    pub tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 10_000, tol: 1e-10, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        // NaN would poison every comparison below
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `f` from `x0` with adaptive Nelder–Mead coefficients.
///
/// After the simplex collapses it is rebuilt around the best vertex with a
/// smaller edge; the search ends once a rebuild no longer improves the value
/// by more than `tol`, or when the evaluation budget runs out.
pub fn minimize<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut obj = Counted { f, evals: 0 };
    let mut best_x = x0.to_vec();
    let mut best_f = obj.call(&best_x);
    let mut step = opts.initial_step;
    let mut converged = false;
    while obj.evals < opts.max_evals {
        let (x, fx, collapsed) = run_simplex(&mut obj, &best_x, step, opts);
        let improvement = best_f - fx;
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
        if !collapsed {
            break;
        }
        if improvement <= opts.tol {
            converged = true;
            break;
        }
        step = (step * 0.1).max(1e-4);
    }
    NelderMeadResult { x: best_x, f: best_f, evals: obj.evals, converged }
}

fn run_simplex<F>(obj: &mut Counted<F>, x0: &[f64], step: f64, opts: &NelderMeadOptions) -> (Vec<f64>, f64, bool)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let alpha = 1.0;
    let gamma = 1.0 + 2.0 / nf;
    let rho = 0.75 - 0.5 / nf;
    let shrink = 1.0 - 1.0 / nf;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| obj.call(v)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        if values[worst] - values[best] <= opts.tol {
            return (simplex[best].clone(), values[best], true);
        }
        if obj.evals >= opts.max_evals {
            return (simplex[best].clone(), values[best], false);
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x / nf;
            }
        }

        let along = |t: f64, out: &mut Vec<f64>, worst_v: &[f64], centroid: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(centroid).zip(worst_v) {
                *o = c + t * (c - w);
            }
        };

        along(alpha, &mut trial, &simplex[worst], &centroid);
        let f_reflect = obj.call(&trial);

        if f_reflect < values[best] {
            along(gamma, &mut trial2, &simplex[worst], &centroid);
            let f_expand = obj.call(&trial2);
            if f_expand < f_reflect {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_expand;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }

        let outside = f_reflect < values[worst];
        let t = if outside { rho * alpha } else { -rho };
        along(t, &mut trial2, &simplex[worst], &centroid);
        let f_contract = obj.call(&trial2);
        if f_contract < f_reflect.min(values[worst]) {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = f_contract;
            continue;
        }

        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for (x, a) in simplex[idx].iter_mut().zip(&anchor) {
                *x = a + shrink * (*x - a);
            }
            values[idx] = obj.call(&simplex[idx]);
        }
    }
}
