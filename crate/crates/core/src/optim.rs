//! Derivative-free simplex search and quasi-Newton refinement with
//! finite-difference gradients, for small smooth unconstrained problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the finite-difference gradient at `x` (NaN if not computed).
    pub grad_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter falls below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            initial_step: 0.1,
            f_tol: 1e-8,
            x_tol: 1e-6,
        }
    }
}

/// Adaptive Nelder–Mead (dimension-dependent coefficients of Gao and Han).
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> OptimOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (
        1.0,
        1.0 + 2.0 / nf,
        0.75 - 1.0 / (2.0 * nf),
        1.0 - 1.0 / nf,
    );
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let fx0 = eval(x0);
    simplex.push((x0.to_vec(), fx0));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += if x[k].abs() > 1.0 {
            opts.initial_step * x[k].abs()
        } else {
            opts.initial_step
        };
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= opts.f_tol * (1.0 + best.abs()) && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        if evals.get() >= opts.max_evals {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(alpha, &simplex[n].0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(beta, &simplex[n].0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(gamma, &simplex[n].0);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-gamma, &simplex[n].0);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + delta * (*xi - bi);
                    }
                    *fx = eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    OptimOutcome {
        x,
        f: fx,
        evals: evals.get(),
        iterations,
        converged,
        grad_max: f64::NAN,
    }
}

/// Central-difference gradient with per-coordinate steps `h·max(1, |x_k|)`.
pub fn fd_gradient<F>(f: &F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|k| {
            let step = h * x[k].abs().max(1.0);
            xp[k] = x[k] + step;
            let up = f(&xp);
            xp[k] = x[k] - step;
            let dn = f(&xp);
            xp[k] = x[k];
            (up - dn) / (2.0 * step)
        })
        .collect()
}

/// Central-difference Hessian with steps `h·max(1, |x_k|)`, symmetrized.
pub fn fd_hessian<F>(f: &F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let steps: Vec<f64> = x.iter().map(|v| h * v.abs().max(1.0)).collect();
    let f0 = f(x);
    let mut hess = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + steps[i];
        let fp = f(&xp);
        xp[i] = x[i] - steps[i];
        let fm = f(&xp);
        xp[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        for j in 0..i {
            let mut g = |si: f64, sj: f64| {
                xp[i] = x[i] + si * steps[i];
                xp[j] = x[j] + sj * steps[j];
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v = (g(1.0, 1.0) - g(1.0, -1.0) - g(-1.0, 1.0) + g(-1.0, -1.0))
                / (4.0 * steps[i] * steps[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Converged when the max-norm of the gradient falls below this.
    pub grad_tol: f64,
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-5,
            fd_step: 1e-5,
        }
    }
}

/// BFGS on the inverse Hessian with backtracking Armijo line search.
pub fn bfgs<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> OptimOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let fe = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut x = DVector::from_column_slice(x0);
    let mut fx = fe(x.as_slice());
    let mut g = DVector::from_vec(fd_gradient(&fe, x.as_slice(), opts.fd_step));
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut scaled = false;
    let mut iterations = 0;
    let mut converged = g.amax() < opts.grad_tol;
    let mut stalls = 0;

    while !converged && iterations < opts.max_iter && fx.is_finite() {
        iterations += 1;
        let mut dir = -(&hinv * &g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            hinv = DMatrix::identity(n, n);
            scaled = false;
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        if !scaled {
            // First step: limit the move to unit length in max-norm.
            let m = dir.amax();
            if m > 1.0 {
                dir /= m;
                slope /= m;
            }
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + t * &dir;
            let fnew = fe(xn.as_slice());
            if fnew.is_finite() && fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            stalls += 1;
            if stalls > 1 {
                break;
            }
            hinv = DMatrix::identity(n, n);
            scaled = false;
            continue;
        };
        let gn = DVector::from_vec(fd_gradient(&fe, xn.as_slice(), opts.fd_step));
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if !scaled {
                hinv = DMatrix::identity(n, n) * (sy / y.dot(&y));
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let df = fx - fnew;
        x = xn;
        fx = fnew;
        g = gn;
        converged = g.amax() < opts.grad_tol;
        if !converged && df.abs() <= 1e-15 * (1.0 + fx.abs()) && s.amax() < 1e-12 {
            break;
        }
    }
    OptimOutcome {
        grad_max: g.amax(),
        x: x.as_slice().to_vec(),
        f: fx,
        evals: evals.get(),
        iterations,
        converged,
    }
}
