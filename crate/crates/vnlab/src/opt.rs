//! Small gradient-free / numerical-gradient optimizers shared by the
//! estimate routines. Deterministic given their inputs.

/// Nelder–Mead downhill simplex minimization of `f` over `R^n`.
///
/// Returns the best point and value found within the iteration budget.
pub(crate) fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() < 1e-12 {
            break;
        }
        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, &xi) in centroid.iter_mut().zip(x.iter()) {
                *c += xi / n as f64;
            }
        }
        let blend = |a: f64, b: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(simplex[n].0.iter())
                .map(|(&c, &w)| a * c + b * w)
                .collect()
        };
        let xr = blend(1.0 + alpha, -alpha);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = blend(1.0 + alpha * gamma, -alpha * gamma);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let x = blend(1.0 + alpha * rho, -alpha * rho);
                let v = f(&x);
                (x, v)
            } else {
                let x = blend(1.0 - rho, rho);
                let v = f(&x);
                (x, v)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best_x
                        .iter()
                        .zip(entry.0.iter())
                        .map(|(&b, &x)| b + sigma * (x - b))
                        .collect();
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0)
}

/// Numerical-gradient descent with backtracking line search.
///
/// `f` must be smooth around the iterates; the caller is responsible for
/// any reparameterization that keeps the argument unconstrained.
pub(crate) fn gradient_descent(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let h = 1e-5;
    let mut step = 0.5;
    for _ in 0..max_iters {
        let mut grad = vec![0.0; n];
        let mut gnorm2 = 0.0;
        for i in 0..n {
            let old = x[i];
            x[i] = old + h;
            let fp = f(&x);
            x[i] = old - h;
            let fm = f(&x);
            x[i] = old;
            grad[i] = (fp - fm) / (2.0 * h);
            gnorm2 += grad[i] * grad[i];
        }
        if gnorm2.sqrt() < 1e-9 {
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let cand: Vec<f64> =
                x.iter().zip(grad.iter()).map(|(&xi, &g)| xi - step * g).collect();
            let fc = f(&cand);
            if fc < fx - 1e-14 {
                x = cand;
                fx = fc;
                step *= 1.3;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_minimizes_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2);
        let (x, v) = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 500);
        assert!(v < 1e-8);
        assert!((x[0] - 1.0).abs() < 1e-4);
        assert!((x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn gradient_descent_minimizes_rosenbrock_ish() {
        let mut f =
            |x: &[f64]| (1.0 - x[0]).powi(2) + 10.0 * (x[1] - x[0] * x[0]).powi(2);
        let (_, v) = gradient_descent(&mut f, &[-0.5, 0.5], 2000);
        assert!(v < 1e-5);
    }
}
