//! Quadrature rules.
//!
//! Polyline integrands are polynomials on each segment, so they are handled
//! with Gauss–Legendre rules of sufficient degree; smooth analytic integrands
//! (lengths of graphs) go through adaptive double-exponential quadrature.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[0, 1]` with `n` points.
///
/// The rule integrates polynomials of degree `2n − 1` exactly.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Newton iteration on P_n starting from the Tricomi approximation.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1, 1] to [0, 1].
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive integral of a smooth function on `[a, b]` to absolute accuracy
/// `abs_tol`.
///
/// Subdivides the interval until every piece reports an error estimate below
/// its share of the tolerance; the double-exponential rule converges
/// geometrically on analytic integrands, including algebraic endpoint
/// behaviour such as `√(1 + c t³)`.
pub fn integrate(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    integrate_piece(f, a, b, abs_tol, 0)
}

fn integrate_piece(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol || depth >= 16 {
        return out.integral;
    }
    let mid = 0.5 * (a + b);
    integrate_piece(f, a, mid, 0.5 * tol, depth + 1) + integrate_piece(f, mid, b, 0.5 * tol, depth + 1)
}
