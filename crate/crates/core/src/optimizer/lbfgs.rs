//! Limited-memory BFGS with Armijo backtracking.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the sup-norm of the gradient falls below this.
    pub grad_tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Length of the very first step.
    pub first_step: f64,
    /// Hard cap on function evaluations.
    pub max_evals: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 10, max_iter: 500, grad_tol: 1e-8, armijo: 1e-4, max_backtracks: 50, first_step: 1e-4, max_evals: usize::MAX }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsReport {
    pub iterations: usize,
    pub evaluations: usize,
    pub f: f64,
    pub grad_inf: f64,
    /// Every accepted step decreased `f`.
    pub monotone: bool,
    pub stalled: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Minimizes `f` from `x` in place. `f` writes the gradient into its second
/// argument and returns the value.
pub fn minimize(mut f: impl FnMut(&[f64], &mut [f64]) -> f64, x: &mut [f64], opts: &LbfgsOptions) -> LbfgsReport {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = f(x, &mut g);
    let mut evals = 1;
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut monotone = true;
    let mut stalled = false;
    let mut iters = 0;
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut d = vec![0.0; n];
    while iters < opts.max_iter && evals < opts.max_evals {
        if !fx.is_finite() || inf_norm(&g) < opts.grad_tol {
            break;
        }
        // two-loop recursion
        d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        } else {
            let gn2 = dot(&g, &g).sqrt();
            d.iter_mut().for_each(|di| *di *= opts.first_step / gn2);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let bcoef = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - bcoef) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // not a descent direction: restart along −g
            hist.clear();
            let gn2 = dot(&g, &g).sqrt();
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi * opts.first_step / gn2);
            slope = dot(&g, &d);
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..opts.max_backtracks.min(opts.max_evals.saturating_sub(evals)) {
            xn.iter_mut().zip(x.iter().zip(&d)).for_each(|(xi, (x0, di))| *xi = x0 + t * di);
            let fnew = f(&xn, &mut gn);
            evals += 1;
            if fnew.is_finite() && fnew <= fx + opts.armijo * t * slope {
                if fnew > fx {
                    monotone = false;
                }
                let s: Vec<f64> = xn.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-300 {
                    if hist.len() == opts.memory {
                        hist.pop_front();
                    }
                    hist.push_back((s, y, 1.0 / sy));
                }
                x.copy_from_slice(&xn);
                g.copy_from_slice(&gn);
                fx = fnew;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iters += 1;
        if !accepted {
            if hist.is_empty() {
                stalled = true;
                break;
            }
            hist.clear();
        }
    }
    LbfgsReport { iterations: iters, evaluations: evals, f: fx, grad_inf: inf_norm(&g), monotone, stalled }
}
