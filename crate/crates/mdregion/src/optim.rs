//! Derivative-free maximization helpers: Nelder-Mead simplex search, a
//! coordinatewise finite-difference polish, and golden-section search for
//! one-dimensional refinement. All routines maximize; minimize by negating
//! the objective.

use crate::linalg::{fp, Scalar};

/// Knobs for one Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct SimplexOptions<F> {
    /// Evaluation budget for the run.
    pub max_evals: usize,
    /// Relative improvement under which progress counts as stalled.
    pub rel_tol: F,
    /// Number of consecutive stalled iterations that ends the run.
    pub patience: usize,
    /// Absolute initial displacement per coordinate.
    pub init_step: F,
}

impl<F: Scalar> Default for SimplexOptions<F> {
    fn default() -> Self {
        SimplexOptions {
            max_evals: 20_000,
            rel_tol: fp(1e-9),
            patience: 25,
            init_step: fp(0.25),
        }
    }
}

/// Outcome of a simplex run: best point found, its value, evaluations
/// spent, and whether the stall criterion (rather than the budget) stopped
/// the search.
#[derive(Debug, Clone)]
pub struct SimplexResult<F> {
    pub x: Vec<F>,
    pub value: F,
    pub evaluations: usize,
    pub converged: bool,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) run as a maximizer.
pub fn nelder_mead_max<F, G>(f: &mut G, x0: &[F], opts: &SimplexOptions<F>) -> SimplexResult<F>
where
    F: Scalar,
    G: FnMut(&[F]) -> F,
{
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[F], evals: &mut usize| -> F {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            F::neg_infinity()
        } else {
            v
        }
    };

    // simplex of dim+1 vertices, kept sorted best-first
    let mut simplex: Vec<(Vec<F>, F)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] = x[i] + opts.init_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let by_value_desc =
        |a: &(Vec<F>, F), b: &(Vec<F>, F)| b.1.partial_cmp(&a.1).expect("values are ordered");
    simplex.sort_by(by_value_desc);

    let mut stalled = 0usize;
    let mut best_seen = simplex[0].1;
    let mut converged = false;
    let half = fp::<F>(0.5);
    let two = fp::<F>(2.0);

    while evals < opts.max_evals {
        // centroid of all but the worst vertex
        let mut centroid = vec![F::zero(); dim];
        for (x, _) in simplex.iter().take(dim) {
            for (c, &xi) in centroid.iter_mut().zip(x) {
                *c = *c + xi;
            }
        }
        let inv = F::one() / fp::<F>(dim as f64);
        for c in centroid.iter_mut() {
            *c = *c * inv;
        }
        let worst = simplex[dim].0.clone();
        let point_at = |t: F| -> Vec<F> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let reflected = point_at(F::one());
        let fr = eval(&reflected, &mut evals);
        if fr > simplex[0].1 {
            let expanded = point_at(two);
            let fe = eval(&expanded, &mut evals);
            if fe > fr {
                simplex[dim] = (expanded, fe);
            } else {
                simplex[dim] = (reflected, fr);
            }
        } else if fr > simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let contracted = if fr > simplex[dim].1 {
                point_at(half)
            } else {
                point_at(-half)
            };
            let fc = eval(&contracted, &mut evals);
            if fc > simplex[dim].1.max(fr) {
                simplex[dim] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<F> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(&xi, &bi)| bi + half * (xi - bi))
                        .collect();
                    let v = eval(&x, &mut evals);
                    *entry = (x, v);
                }
            }
        }
        simplex.sort_by(by_value_desc);

        let improvement = simplex[0].1 - best_seen;
        let scale = best_seen.abs() + F::one();
        if improvement <= opts.rel_tol * scale {
            stalled += 1;
        } else {
            stalled = 0;
            best_seen = simplex[0].1;
        }
        if stalled >= opts.patience {
            converged = true;
            break;
        }
    }

    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evals,
        converged,
    }
}

/// Coordinatewise quadratic polish around `x`. For each coordinate the
/// objective is probed one relative step to either side, a parabola is
/// fitted, and the best of the probed and fitted points is kept. Passes
/// repeat until a full pass yields no improvement. Returns the improved
/// point, its value, and the number of evaluations spent.
pub fn coordinate_polish<F, G>(
    f: &mut G,
    x: &[F],
    value: F,
    rel_step: F,
    max_passes: usize,
) -> (Vec<F>, F, usize)
where
    F: Scalar,
    G: FnMut(&[F]) -> F,
{
    let mut best = x.to_vec();
    let mut best_val = value;
    let mut evals = 0usize;
    let two = fp::<F>(2.0);
    let cap = fp::<F>(8.0);
    for _ in 0..max_passes {
        let before = best_val;
        for i in 0..best.len() {
            let h = rel_step * (best[i].abs() + rel_step);
            let mut probe = |xi: F, evals: &mut usize| -> F {
                let mut p = best.clone();
                p[i] = xi;
                *evals += 1;
                let v = f(&p);
                if v.is_nan() {
                    F::neg_infinity()
                } else {
                    v
                }
            };
            let x0 = best[i];
            let f_plus = probe(x0 + h, &mut evals);
            let f_minus = probe(x0 - h, &mut evals);
            let mut cand_x = x0;
            let mut cand_v = best_val;
            if f_plus > cand_v {
                cand_x = x0 + h;
                cand_v = f_plus;
            }
            if f_minus > cand_v {
                cand_x = x0 - h;
                cand_v = f_minus;
            }
            let curvature = f_plus + f_minus - two * best_val;
            if curvature < F::zero() {
                let t = (f_minus - f_plus) / (two * curvature);
                let t = t.max(-cap).min(cap);
                let xv = x0 + t * h;
                let fv = probe(xv, &mut evals);
                if fv > cand_v {
                    cand_x = xv;
                    cand_v = fv;
                }
            }
            if cand_v > best_val {
                best[i] = cand_x;
                best_val = cand_v;
            }
        }
        if best_val <= before + F::epsilon() * (before.abs() + F::one()) {
            break;
        }
    }
    (best, best_val, evals)
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_section_max<F, G>(f: &mut G, lo: F, hi: F, iters: usize) -> (F, F)
where
    F: Scalar,
    G: FnMut(F) -> F,
{
    let phi = fp::<F>(0.618_033_988_749_894_9);
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_maximum() {
        let mut f = |x: &[f64]| -(x[0] - 1.5).powi(2) - 2.0 * (x[1] + 0.5).powi(2);
        let r = nelder_mead_max(&mut f, &[0.0, 0.0], &SimplexOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.5).abs() < 1e-5);
        assert!((r.x[1] + 0.5).abs() < 1e-5);
        let (x, v, _) = coordinate_polish(&mut f, &r.x, r.value, 1e-6, 40);
        assert!(v >= r.value);
        assert!((x[0] - 1.5).abs() < 1e-7);
    }

    #[test]
    fn survives_infinite_regions() {
        // plateau of -inf outside the unit disc
        let mut f = |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 > 1.0 {
                f64::NEG_INFINITY
            } else {
                -(x[0] - 0.2).powi(2) - (x[1] - 0.1).powi(2)
            }
        };
        let r = nelder_mead_max(&mut f, &[0.5, -0.5], &SimplexOptions::default());
        assert!((r.x[0] - 0.2).abs() < 1e-4);
        assert!((r.x[1] - 0.1).abs() < 1e-4);
    }

    #[test]
    fn golden_section_refines() {
        let mut g = |x: f64| -(x - 0.3).powi(2);
        let (x, v) = golden_section_max(&mut g, 0.0, 1.0, 80);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v > -1e-17);
    }
}
