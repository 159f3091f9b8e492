//! Normal extremals: the angle form `θ̇ = λQ(ω)`, `ω̇ = (cos θ, sin θ)`, the
//! full Hamiltonian system, and single-start shooting.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::curve::{PlanarCurve, PlanePoint};
use crate::error::{LabError, Result};
use crate::martinet::{reference_holonomy_target, StructureParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Fixed step for rk4, initial step for rk45.
    pub step: f64,
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { step: 1e-4, method: Method::Rk4, abs_tol: 1e-12, rel_tol: 1e-12 }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        Self { step, ..Self::default() }
    }

    pub fn rk45(tol: f64) -> Self {
        Self { step: 1e-3, method: Method::Rk45, abs_tol: tol, rel_tol: tol }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(LabError::InvalidParameter(format!("bad integrator config {self:?}")));
        }
        Ok(())
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

fn rk4_step<const N: usize>(f: &impl Fn(&[f64; N]) -> [f64; N], y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * h, &k1));
    let k3 = f(&axpy(y, 0.5 * h, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// `n` equal rk4 steps over `[0, t_end]`, recording every node.
fn rk4_path<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], y0: [f64; N], t_end: f64, n: usize) -> (Vec<f64>, Vec<[f64; N]>) {
    let h = t_end / n as f64;
    let mut ts = Vec::with_capacity(n + 1);
    let mut ys = Vec::with_capacity(n + 1);
    ts.push(0.0);
    ys.push(y0);
    let mut y = y0;
    for i in 1..=n {
        y = rk4_step(&f, &y, h);
        ts.push(if i == n { t_end } else { i as f64 * h });
        ys.push(y);
    }
    (ts, ys)
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B_STAR: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk45_path<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<[f64; N]>)> {
    let _ = DP_C;
    let mut ts = vec![0.0];
    let mut ys = vec![y0];
    let mut t = 0.0;
    let mut y = y0;
    let mut h = cfg.step.min(t_end);
    let mut rejections = 0usize;
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = f(&y);
        for s in 1..7 {
            let mut ys_ = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = DP_A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys_[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(&ys_);
        }
        let mut y_new = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += DP_B[s] * k[s][i];
                lo += DP_B_STAR[s] * k[s][i];
            }
            y_new[i] += h * hi;
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * (hi - lo)).abs() / sc);
        }
        if !y_new.iter().all(|v| v.is_finite()) {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            t = if t_end - (t + h) < 1e-15 * t_end { t_end } else { t + h };
            y = y_new;
            ts.push(t);
            ys.push(y);
        } else {
            rejections += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t_end.max(1.0) || rejections > 100_000 {
            return Err(LabError::Integration { t, reason: "step size underflow".into() });
        }
    }
    Ok((ts, ys))
}

fn integrate_path<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    fixed_steps: Option<usize>,
) -> Result<(Vec<f64>, Vec<[f64; N]>)> {
    cfg.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(LabError::InvalidParameter(format!("integration length must be positive, got {t_end}")));
    }
    match cfg.method {
        Method::Rk4 => {
            let n = fixed_steps.unwrap_or_else(|| steps_for(t_end, cfg.step));
            Ok(rk4_path(f, y0, t_end, n))
        }
        Method::Rk45 => rk45_path(f, y0, t_end, cfg),
    }
}

fn steps_for(t_end: f64, step: f64) -> usize {
    ((t_end / step).ceil() as usize).max(1)
}

/// Normal extremal in angle form, with continuous (unwrapped) `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalTrace {
    /// Arc-length parametrized trace.
    pub curve: PlanarCurve,
    pub theta: Vec<f64>,
    pub lambda: f64,
    /// `∫ ω̇₂P²` integrated along with the trace.
    pub holonomy: f64,
}

impl ExtremalTrace {
    pub fn length(&self) -> f64 {
        self.curve.t_end() - self.curve.t_start()
    }

    pub fn end_theta(&self) -> f64 {
        *self.theta.last().expect("trace has samples")
    }
}

fn angle_rhs(params: StructureParams, lambda: f64) -> impl Fn(&[f64; 4]) -> [f64; 4] {
    move |y: &[f64; 4]| {
        let p = PlanePoint::new(y[0], y[1]);
        let pv = params.eval_p(p);
        let (sn, cs) = y[2].sin_cos();
        [cs, sn, lambda * 4.0 * y[0] * pv, sn * pv * pv]
    }
}

/// Integrates `θ̇ = λQ(ω)`, `ω̇ = (cos θ, sin θ)` for arc length `t_len`.
pub fn integrate_extremal(
    params: StructureParams,
    start: PlanePoint,
    theta0: f64,
    lambda: f64,
    t_len: f64,
    cfg: &IntegratorConfig,
) -> Result<ExtremalTrace> {
    integrate_extremal_steps(params, start, theta0, lambda, t_len, cfg, None)
}

fn integrate_extremal_steps(
    params: StructureParams,
    start: PlanePoint,
    theta0: f64,
    lambda: f64,
    t_len: f64,
    cfg: &IntegratorConfig,
    fixed_steps: Option<usize>,
) -> Result<ExtremalTrace> {
    if !start.is_finite() || !theta0.is_finite() || !lambda.is_finite() {
        return Err(LabError::InvalidParameter("non-finite extremal data".into()));
    }
    let y0 = [start.x1, start.x2, theta0, 0.0];
    let (ts, ys) = integrate_path(angle_rhs(params, lambda), y0, t_len, cfg, fixed_steps)?;
    if let Some((i, _)) = ys.iter().enumerate().find(|(_, y)| !y.iter().all(|v| v.is_finite())) {
        return Err(LabError::Integration { t: ts[i - 1], reason: "trace blew up".into() });
    }
    let points = ys.iter().map(|y| PlanePoint::new(y[0], y[1])).collect();
    let theta = ys.iter().map(|y| y[2]).collect();
    let holonomy = ys.last().expect("nonempty")[3];
    Ok(ExtremalTrace { curve: PlanarCurve::from_arc_length_ode(ts, points)?, theta, lambda, holonomy })
}

/// Covector `(p₁, p₂, p₃)` over the base point `(x₁, x₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianState {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub x1: f64,
    pub x2: f64,
}

impl HamiltonianState {
    /// Gauge `p₁ = cos θ₀`, `p₂ = sin θ₀ − P(x⁰)²λ`, `p₃ = λ`, so that `H = ½`.
    pub fn from_angle(params: StructureParams, x: PlanePoint, theta0: f64, lambda: f64) -> Self {
        let p = params.eval_p(x);
        Self { p1: theta0.cos(), p2: theta0.sin() - p * p * lambda, p3: lambda, x1: x.x1, x2: x.x2 }
    }

    pub fn point(&self) -> PlanePoint {
        PlanePoint::new(self.x1, self.x2)
    }

    fn to_array(self) -> [f64; 5] {
        [self.p1, self.p2, self.p3, self.x1, self.x2]
    }

    fn from_array(a: &[f64; 5]) -> Self {
        Self { p1: a[0], p2: a[1], p3: a[2], x1: a[3], x2: a[4] }
    }
}

/// `H = ½(p₁² + (p₂ + P²p₃)²)`.
pub fn hamiltonian(params: StructureParams, s: &HamiltonianState) -> f64 {
    let p = params.eval_p(s.point());
    let h2 = s.p2 + p * p * s.p3;
    0.5 * (s.p1 * s.p1 + h2 * h2)
}

/// Integrates the Hamiltonian system for time `t_end`; returns the states and
/// the base trajectory (time-parametrized).
pub fn integrate_hamiltonian(
    params: StructureParams,
    state0: HamiltonianState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<(Vec<HamiltonianState>, PlanarCurve)> {
    if !(hamiltonian(params, &state0) > 0.0) {
        return Err(LabError::InvalidParameter("initial Hamiltonian must be positive".into()));
    }
    let rhs = move |y: &[f64; 5]| {
        let x = PlanePoint::new(y[3], y[4]);
        let p = params.eval_p(x);
        let h1 = y[0];
        let h2 = y[1] + p * p * y[2];
        [-params.eval_q(x) * h2 * y[2], -params.d2_p_squared(x) * h2 * y[2], 0.0, h1, h2]
    };
    let (ts, ys) = integrate_path(rhs, state0.to_array(), t_end, cfg, None)?;
    let states: Vec<_> = ys.iter().map(HamiltonianState::from_array).collect();
    if let Some(i) = states.iter().position(|s| !s.to_array().iter().all(|v| v.is_finite())) {
        return Err(LabError::Integration { t: ts[i - 1], reason: "state blew up".into() });
    }
    let curve = PlanarCurve::new(ts, states.iter().map(HamiltonianState::point).collect(), false)?;
    Ok((states, curve))
}

/// Max over interior nodes of `|κ_fd − λQ(ω)|`, where `κ_fd` is the central
/// difference of `θ`.
pub fn curvature_residual(params: StructureParams, trace: &ExtremalTrace) -> Result<f64> {
    let n = trace.theta.len();
    if n < 3 {
        return Err(LabError::InvalidCurve("curvature residual needs three nodes".into()));
    }
    let t = trace.curve.times();
    let pts = trace.curve.points();
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let kfd = (trace.theta[i + 1] - trace.theta[i - 1]) / (t[i + 1] - t[i - 1]);
        worst = worst.max((kfd - trace.lambda * params.eval_q(pts[i])).abs());
    }
    Ok(worst)
}

/// Endpoint and holonomy a shooting run must hit from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootTarget {
    pub start: PlanePoint,
    pub end: PlanePoint,
    pub holonomy: f64,
}

impl ShootTarget {
    /// Competitor data: from `(0, −s)` to `(±ε^q, ε)` with holonomy `s^{2b+1}/(2b+1)`.
    pub fn competitor(params: StructureParams, s: f64, eps: f64, mirrored: bool) -> Result<Self> {
        if !(s >= 0.0) || !(eps > 0.0) {
            return Err(LabError::InvalidParameter(format!("need s ≥ 0, ε > 0; got s={s}, ε={eps}")));
        }
        let e1 = params.pow_q(eps);
        Ok(Self {
            start: PlanePoint::new(0.0, -s),
            end: PlanePoint::new(if mirrored { -e1 } else { e1 }, eps),
            holonomy: reference_holonomy_target(params, s),
        })
    }

    /// Scale dividing the holonomy residual: `|target|`, or 1 when it vanishes.
    pub fn holonomy_scale(&self) -> f64 {
        if self.holonomy == 0.0 {
            1.0
        } else {
            self.holonomy.abs()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootConfig {
    pub integrator: IntegratorConfig,
    pub tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
    pub max_halvings: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), tol: 1e-10, max_iter: 60, fd_step: 1e-7, max_halvings: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingSolution {
    pub theta0: f64,
    pub lambda: f64,
    pub t_final: f64,
    /// `ω(T) − end`.
    pub endpoint_residual: [f64; 2],
    /// `(holonomy − target)/scale`, see [`ShootTarget::holonomy_scale`].
    pub holonomy_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub trace: ExtremalTrace,
}

impl ShootingSolution {
    pub fn residual_norm(&self) -> f64 {
        norm3(&[self.endpoint_residual[0], self.endpoint_residual[1], self.holonomy_residual])
    }
}

fn norm3(r: &[f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// Damped Newton on `(θ₀, λ, T) ↦ (ω(T) − end, (holonomy − target)/scale)`.
///
/// The rk4 step count is frozen from the initial `T` so that the residual map
/// depends smoothly on `T`. Returns the best iterate; `converged` reports
/// whether the residual norm went below `cfg.tol`.
pub fn shoot_to(params: StructureParams, target: &ShootTarget, guess: (f64, f64, f64), cfg: &ShootConfig) -> Result<ShootingSolution> {
    let (theta0, lambda, t_len) = guess;
    if !theta0.is_finite() || !lambda.is_finite() || !(t_len > 0.0) || !t_len.is_finite() {
        return Err(LabError::InvalidParameter(format!("bad shooting guess {guess:?}")));
    }
    let steps = match cfg.integrator.method {
        Method::Rk4 => Some(steps_for(t_len, cfg.integrator.step)),
        Method::Rk45 => None,
    };
    let scale = target.holonomy_scale();
    let eval = |v: &[f64; 3]| -> Option<(ExtremalTrace, [f64; 3])> {
        if !(v[2] > 0.0) {
            return None;
        }
        let tr = integrate_extremal_steps(params, target.start, v[0], v[1], v[2], &cfg.integrator, steps).ok()?;
        let e = tr.curve.end();
        let r = [e.x1 - target.end.x1, e.x2 - target.end.x2, (tr.holonomy - target.holonomy) / scale];
        r.iter().all(|x| x.is_finite()).then_some((tr, r))
    };

    let mut v = [theta0, lambda, t_len];
    let (mut trace, mut r) = eval(&v).ok_or_else(|| LabError::Integration {
        t: 0.0,
        reason: "initial guess does not integrate".into(),
    })?;
    let mut iterations = 0;
    let mut polish = 0;
    while iterations < cfg.max_iter {
        let norm = norm3(&r);
        if norm < cfg.tol {
            // a few extra steps tighten the parameters beyond the residual test
            polish += 1;
            if polish > 3 {
                break;
            }
        }
        iterations += 1;
        let mut jac = Matrix3::zeros();
        let mut ok = true;
        for j in 0..3 {
            let h = cfg.fd_step * v[j].abs().max(1.0);
            let mut vp = v;
            vp[j] += h;
            match eval(&vp) {
                Some((_, rp)) => {
                    for i in 0..3 {
                        jac[(i, j)] = (rp[i] - r[i]) / h;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let Some(delta) = jac.lu().solve(&Vector3::new(-r[0], -r[1], -r[2])) else {
            break;
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=cfg.max_halvings {
            let cand = [v[0] + step * delta[0], v[1] + step * delta[1], v[2] + step * delta[2]];
            if let Some((tr, rc)) = eval(&cand) {
                if norm3(&rc) < norm {
                    v = cand;
                    trace = tr;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let converged = norm3(&r) < cfg.tol;
    Ok(ShootingSolution {
        theta0: v[0],
        lambda: v[1],
        t_final: v[2],
        endpoint_residual: [r[0], r[1]],
        holonomy_residual: r[2],
        converged,
        iterations,
        trace,
    })
}

/// Shooting for the competitor problem `(s, ε)`.
pub fn shoot(params: StructureParams, s: f64, eps: f64, guess: (f64, f64, f64), cfg: &ShootConfig) -> Result<ShootingSolution> {
    let target = ShootTarget::competitor(params, s, eps, false)?;
    shoot_to(params, &target, guess, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn b5() -> StructureParams {
        StructureParams::new(5).unwrap()
    }

    #[test]
    fn zero_multiplier_gives_straight_segment() {
        let tr = integrate_extremal(b5(), PlanePoint::new(0.2, 0.1), 0.7, 0.0, 1.5, &IntegratorConfig::rk4(1e-2)).unwrap();
        let e = tr.curve.end();
        assert!((e.x1 - (0.2 + 1.5 * 0.7f64.cos())).abs() < 1e-14);
        assert!((e.x2 - (0.1 + 1.5 * 0.7f64.sin())).abs() < 1e-14);
        assert!(tr.theta.iter().all(|&t| t == 0.7));
    }

    #[test]
    fn axis_trace_stays_on_axis() {
        let tr = integrate_extremal(b5(), PlanePoint::new(0.0, -1.0), FRAC_PI_2, 3.0, 1.0, &IntegratorConfig::rk4(1e-3)).unwrap();
        assert!(tr.curve.points().iter().all(|p| p.x1.abs() < 1e-15));
        assert!(curvature_residual(b5(), &tr).unwrap() < 1e-12);
        // holonomy of (0, t) on [−1, 0] is 1/11
        assert!((tr.holonomy - 1.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn rk4_and_rk45_agree() {
        let p = b5();
        let start = PlanePoint::new(0.5, 0.0);
        let a = integrate_extremal(p, start, 0.0, 1.0, 0.1, &IntegratorConfig::rk4(1e-4)).unwrap();
        let b = integrate_extremal(p, start, 0.0, 1.0, 0.1, &IntegratorConfig::rk45(1e-12)).unwrap();
        assert!((a.end_theta() - b.end_theta()).abs() < 1e-8);
        assert!(a.curve.end().dist(&b.curve.end()) < 1e-8);
    }

    #[test]
    fn hamiltonian_examples() {
        let p = b5();
        let s = |p1, p2, p3, x1, x2| HamiltonianState { p1, p2, p3, x1, x2 };
        assert_eq!(hamiltonian(p, &s(1.0, 0.0, 0.0, 0.3, 0.4)), 0.5);
        assert_eq!(hamiltonian(p, &s(0.0, 1.0, 0.0, 0.3, 0.4)), 0.5);
        assert_eq!(hamiltonian(p, &s(0.0, 0.0, 1.0, 1.0, 0.0)), 0.5);
        let g = HamiltonianState::from_angle(p, PlanePoint::new(0.3, -0.2), 1.1, -2.0);
        assert!((hamiltonian(p, &g) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_flow_matches_angle_form() {
        let p = b5();
        let x0 = PlanePoint::new(0.6, 0.3);
        let (th, lam) = (2.0, 1.7);
        let (states, curve) = integrate_hamiltonian(p, HamiltonianState::from_angle(p, x0, th, lam), 1.0, &IntegratorConfig::rk4(1e-3)).unwrap();
        assert!(states.iter().all(|s| s.p3 == lam));
        let tr = integrate_extremal(p, x0, th, lam, 1.0, &IntegratorConfig::rk4(1e-3)).unwrap();
        assert!(curve.end().dist(&tr.curve.end()) < 1e-10);
    }

    #[test]
    fn reflection_equivariance() {
        let p = b5();
        let cfg = IntegratorConfig::rk4(1e-3);
        let a = integrate_extremal(p, PlanePoint::new(0.4, 0.2), 0.3, 2.0, 0.8, &cfg).unwrap();
        let b = integrate_extremal(p, PlanePoint::new(-0.4, 0.2), PI - 0.3, 2.0, 0.8, &cfg).unwrap();
        for (u, v) in a.curve.points().iter().zip(b.curve.points()) {
            assert!(u.mirrored().dist(v) < 1e-12);
        }
    }

    #[test]
    fn chord_misses_the_holonomy_target() {
        let p = b5();
        let target = ShootTarget::competitor(p, 0.1, 0.1, false).unwrap();
        let d = target.end.dist(&target.start);
        let th = (target.end.x2 - target.start.x2).atan2(target.end.x1 - target.start.x1);
        let cfg = ShootConfig { max_iter: 0, ..ShootConfig::default() };
        let sol = shoot(p, 0.1, 0.1, (th, 0.0, d), &cfg).unwrap();
        assert!(sol.endpoint_residual[0].abs() < 1e-12 && sol.endpoint_residual[1].abs() < 1e-12);
        assert!(sol.holonomy_residual.abs() > 1e-3);
        assert!(!sol.converged);
    }

    #[test]
    fn manufactured_round_trip() {
        let p = b5();
        let cfg = ShootConfig { integrator: IntegratorConfig::rk4(1e-3), ..ShootConfig::default() };
        let start = PlanePoint::new(0.3, -0.4);
        let (th, lam, t) = (0.9, 2.5, 0.8);
        let tr = integrate_extremal(p, start, th, lam, t, &cfg.integrator).unwrap();
        let target = ShootTarget { start, end: tr.curve.end(), holonomy: tr.holonomy };
        let sol = shoot_to(p, &target, (th + 1e-3, lam - 1e-3, t + 1e-3), &cfg).unwrap();
        assert!(sol.converged, "{sol:?}");
        assert!((sol.theta0 - th).abs() < 1e-8);
        assert!((sol.lambda - lam).abs() < 1e-8);
        assert!((sol.t_final - t).abs() < 1e-8);
    }
}
