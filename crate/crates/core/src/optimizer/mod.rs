//! Desk-scale minimality probes: discretized competitors minimized by an
//! augmented Lagrangian on the holonomy constraint, shooting sweeps over the
//! normal family, and the report comparing every feasible candidate with
//! `L(γ_{s,ε})`.

pub mod lbfgs;

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{PlanarCurve, PlanePoint};
use crate::error::{LabError, Result};
use crate::flow::{shoot_to, ShootConfig, ShootTarget, ShootingSolution};
use crate::geometry::{detect_loops, loop_stats, LoopStats};
use crate::levelset::log_grid;
use crate::martinet::{beta_values, gamma, gamma_length, gamma_polyline, reference_holonomy_target, HolonomyKernel, LengthMode, StructureParams};

/// Competitor data for `(s, ε)`: curves from `(0, −s)` to `(±ε^q, ε)` with
/// holonomy `s^{2b+1}/(2b+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitorProblem {
    pub params: StructureParams,
    pub s: f64,
    pub eps: f64,
    pub mirrored: bool,
    pub holonomy_target: f64,
    pub start: PlanePoint,
    pub end: PlanePoint,
    /// `L(γ_{s,ε})` by quadrature.
    pub gamma_length: f64,
    pub warnings: Vec<String>,
}

impl CompetitorProblem {
    pub fn new(params: StructureParams, s: f64, eps: f64, mirrored: bool) -> Result<Self> {
        if !(s > 0.0) || !(eps > 0.0) || !s.is_finite() || !eps.is_finite() {
            return Err(LabError::InvalidParameter(format!("need s > 0 and ε > 0, got s={s}, ε={eps}")));
        }
        let mut warnings = Vec::new();
        if s >= eps * eps {
            warnings.push(format!("s={s} is not below ε²={}; outside the recommended regime", eps * eps));
        }
        let target = ShootTarget::competitor(params, s, eps, mirrored)?;
        Ok(Self {
            params,
            s,
            eps,
            mirrored,
            holonomy_target: reference_holonomy_target(params, s),
            start: target.start,
            end: target.end,
            gamma_length: gamma_length(params, s, eps, LengthMode::Quadrature)?,
            warnings,
        })
    }

    /// The same problem under `x₁ ↦ −x₁`.
    pub fn mirror(&self) -> Self {
        Self { mirrored: !self.mirrored, start: self.start.mirrored(), end: self.end.mirrored(), ..self.clone() }
    }

    pub fn shoot_target(&self) -> ShootTarget {
        ShootTarget { start: self.start, end: self.end, holonomy: self.holonomy_target }
    }

    /// `holonomy/target − 1`.
    pub fn scaled_residual(&self, points: &[PlanePoint]) -> f64 {
        HolonomyKernel::new(self.params).polyline(points) / self.holonomy_target - 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub n_nodes: usize,
    pub max_outer: usize,
    pub max_inner: usize,
    pub penalty_mu0: f64,
    pub penalty_growth: f64,
    pub grad_tol: f64,
    pub cons_tol: f64,
    pub rng_seed: u64,
    pub n_seeds: usize,
    /// Perturbation amplitude in units of ε.
    pub perturbation: f64,
    pub lbfgs_memory: usize,
    /// Nodes of the seeded loop.
    pub loop_nodes: usize,
    pub tol_cert: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_nodes: 2000,
            max_outer: 12,
            max_inner: 400,
            penalty_mu0: 1.0,
            penalty_growth: 10.0,
            grad_tol: 1e-8,
            cons_tol: 1e-10,
            rng_seed: 0,
            n_seeds: 16,
            perturbation: 0.05,
            lbfgs_memory: 10,
            loop_nodes: 32,
            tol_cert: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidParameter(format!("optimizer config: {m}")));
        if self.n_nodes < 64 {
            return bad("n_nodes must be at least 64");
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.n_seeds == 0 || self.lbfgs_memory == 0 {
            return bad("iteration counts, seeds and memory must be positive");
        }
        if !(self.penalty_mu0 > 0.0) || !(self.penalty_growth > 1.0) {
            return bad("need penalty_mu0 > 0 and penalty_growth > 1");
        }
        if !(self.grad_tol > 0.0) || !(self.cons_tol > 0.0) || !(self.tol_cert > 0.0) || !(self.perturbation >= 0.0) {
            return bad("tolerances must be positive");
        }
        if self.loop_nodes < 8 || self.loop_nodes >= self.n_nodes / 2 {
            return bad("loop_nodes must be in [8, n_nodes/2)");
        }
        Ok(())
    }

    /// The seed list; the first seed runs unperturbed.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_seeds as u64).map(|k| self.rng_seed + k).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Abnormal,
    Chord,
    LoopSeeded,
    Custom(PlanarCurve),
}

impl Init {
    pub fn label(&self) -> &'static str {
        match self {
            Init::Abnormal => "abnormal",
            Init::Chord => "chord",
            Init::LoopSeeded => "loop_seeded",
            Init::Custom(_) => "custom",
        }
    }
}

/// Unmirrored `pr(γ)` polyline with `n` nodes.
fn abnormal_nodes(problem: &CompetitorProblem, n: usize) -> Result<Vec<PlanePoint>> {
    Ok(gamma_polyline(problem.params, problem.s, problem.eps, n - 1, false)?.points().to_vec())
}

/// `pr(γ)` with `n − m` nodes and a clockwise circle of `m` nodes tangent
/// on the `P > 0` side at the node nearest `x₂ = 0.7ε`. The radius is chosen
/// so that the circle's weighted area `≈ −4π x₀ |∇P| r³` cancels the excess
/// holonomy of the discretized curve.
fn loop_seeded_nodes(problem: &CompetitorProblem, n: usize, m: usize) -> Result<Vec<PlanePoint>> {
    let params = problem.params;
    let base = abnormal_nodes(problem, n - m)?;
    let k = base
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.x2 - 0.7 * problem.eps).abs().total_cmp(&(b.1.x2 - 0.7 * problem.eps).abs()))
        .map(|(i, _)| i)
        .expect("nonempty");
    let pk = base[k];
    let grad = PlanePoint::new(2.0 * pk.x1, -f64::from(params.b()) * pk.x2.powi(params.b() as i32 - 1));
    let gnorm = grad.x1.hypot(grad.x2);
    let excess = (HolonomyKernel::new(params).polyline(&base) - problem.holonomy_target).max(0.0);
    let r = (excess / (4.0 * PI * pk.x1 * gnorm)).cbrt().max(1e-12 * problem.eps);
    let center = PlanePoint::new(pk.x1 + r * grad.x1 / gnorm, pk.x2 + r * grad.x2 / gnorm);
    let phi0 = (pk.x2 - center.x2).atan2(pk.x1 - center.x1);
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&base[..=k]);
    for j in 1..m {
        let a = phi0 - 2.0 * PI * j as f64 / m as f64;
        out.push(PlanePoint::new(center.x1 + r * a.cos(), center.x2 + r * a.sin()));
    }
    out.extend_from_slice(&base[k..]);
    Ok(out)
}

/// Smooth random perturbation: four sine modes in the node index, amplitude
/// `amp` decaying like `1/k`, vanishing at the endpoints.
fn perturb(points: &mut [PlanePoint], amp: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64)> = (1..=4)
        .map(|k| {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            (a * amp / k as f64, b * amp / k as f64)
        })
        .collect();
    let n = points.len() - 1;
    for (i, p) in points.iter_mut().enumerate().take(n).skip(1) {
        let u = i as f64 / n as f64;
        for (k, (a, b)) in modes.iter().enumerate() {
            let s = ((k + 1) as f64 * PI * u).sin();
            p.x1 += a * s;
            p.x2 += b * s;
        }
    }
}

/// Initial nodes for the unmirrored problem.
fn init_nodes(problem: &CompetitorProblem, cfg: &OptimizerConfig, init: &Init, seed: Option<u64>) -> Result<Vec<PlanePoint>> {
    let base = if problem.mirrored { problem.mirror() } else { problem.clone() };
    let n = cfg.n_nodes;
    let mut pts = match init {
        Init::Abnormal => abnormal_nodes(&base, n)?,
        Init::Chord => (0..n).map(|i| base.start.lerp(&base.end, i as f64 / (n - 1) as f64)).collect(),
        Init::LoopSeeded => loop_seeded_nodes(&base, n, cfg.loop_nodes)?,
        Init::Custom(c) => {
            let pts = c.points();
            let (a, z) = (pts[0], pts[pts.len() - 1]);
            if a.dist(&problem.start) > 1e-12 || z.dist(&problem.end) > 1e-12 {
                return Err(LabError::InvalidCurve("custom init must join the problem endpoints".into()));
            }
            // custom curves are given in the problem's own frame
            return Ok(pts.to_vec());
        }
    };
    if let Some(seed) = seed {
        perturb(&mut pts, cfg.perturbation * base.eps, seed);
    }
    if problem.mirrored {
        pts.iter_mut().for_each(|p| *p = p.mirrored());
    }
    Ok(pts)
}

/// Length and scaled constraint of the polyline with pinned endpoints and
/// free interior nodes `z = [x₁, x₂, x₁, x₂, …]`, with gradients.
struct Discrete<'a> {
    problem: &'a CompetitorProblem,
    kernel: HolonomyKernel,
    n: usize,
}

impl Discrete<'_> {
    fn node(&self, z: &[f64], k: usize) -> PlanePoint {
        if k == 0 {
            self.problem.start
        } else if k == self.n - 1 {
            self.problem.end
        } else {
            PlanePoint::new(z[2 * (k - 1)], z[2 * (k - 1) + 1])
        }
    }

    fn points(&self, z: &[f64]) -> Vec<PlanePoint> {
        (0..self.n).map(|k| self.node(z, k)).collect()
    }

    fn pack(points: &[PlanePoint]) -> Vec<f64> {
        points[1..points.len() - 1].iter().flat_map(|p| [p.x1, p.x2]).collect()
    }

    /// `(L, c)` with `∇L` and `∇c` written into the slices.
    fn eval(&self, z: &[f64], gl: &mut [f64], gc: &mut [f64]) -> (f64, f64) {
        gl.iter_mut().for_each(|v| *v = 0.0);
        gc.iter_mut().for_each(|v| *v = 0.0);
        let mut len = 0.0;
        let mut hol = 0.0;
        let last = self.n - 1;
        let add = |g: &mut [f64], k: usize, d1: f64, d2: f64| {
            if k != 0 && k != last {
                g[2 * (k - 1)] += d1;
                g[2 * (k - 1) + 1] += d2;
            }
        };
        for k in 0..last {
            let a = self.node(z, k);
            let c = self.node(z, k + 1);
            let (dx, dy) = (c.x1 - a.x1, c.x2 - a.x2);
            let l = dx.hypot(dy);
            len += l;
            if l > 0.0 {
                add(gl, k, -dx / l, -dy / l);
                add(gl, k + 1, dx / l, dy / l);
            }
            let (h, g) = self.kernel.segment_with_grad(a, c);
            hol += h;
            add(gc, k, g[0], g[1]);
            add(gc, k + 1, g[2], g[3]);
        }
        let t = self.problem.holonomy_target;
        gc.iter_mut().for_each(|v| *v /= t);
        (len, hol / t - 1.0)
    }
}

impl Discrete<'_> {
    fn constraint(&self, z: &[f64]) -> f64 {
        self.kernel.polyline(&self.points(z)) / self.problem.holonomy_target - 1.0
    }

    /// Damped minimum-norm projection `z ← z − t c ∇c/|∇c|²`, halving `t`
    /// until `|c|` drops. Returns the number of accepted steps.
    fn restore(&self, z: &mut Vec<f64>, tol: f64, max_steps: usize) -> usize {
        let m = z.len();
        let (mut gl, mut gc) = (vec![0.0; m], vec![0.0; m]);
        let (_, mut c) = self.eval(z, &mut gl, &mut gc);
        let mut steps = 0;
        while steps < max_steps && c.abs() >= tol {
            let g2: f64 = gc.iter().map(|v| v * v).sum();
            if !(g2 > 0.0 && g2.is_finite()) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let zn: Vec<f64> = z.iter().zip(&gc).map(|(a, g)| a - t * c * g / g2).collect();
                let cn = self.constraint(&zn);
                if cn.abs() < c.abs() {
                    accepted = Some(zn);
                    break;
                }
                t *= 0.5;
            }
            let Some(zn) = accepted else { break };
            *z = zn;
            c = self.eval(z, &mut gl, &mut gc).1;
            steps += 1;
        }
        steps
    }
}

/// One augmented-Lagrangian outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub merit: f64,
    pub length: f64,
    pub constraint: f64,
    pub multiplier: f64,
    pub mu: f64,
    pub inner_iterations: usize,
    pub inner_monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub init: String,
    /// `None` for the unperturbed start.
    pub seed: Option<u64>,
    pub mirrored: bool,
    pub curve: PlanarCurve,
    pub length: f64,
    /// `holonomy − target`.
    pub constraint_residual: f64,
    /// `holonomy/target − 1`; feasibility is judged on this.
    pub scaled_residual: f64,
    pub gap: f64,
    pub loops: Vec<LoopStats>,
    pub loop_count: usize,
    /// Final multiplier of the unscaled constraint.
    pub lambda_est: Option<f64>,
    pub beta: f64,
    pub beta_tilde: f64,
    pub converged: bool,
    pub feasible: bool,
    pub history: Vec<OuterRecord>,
    /// Projection steps before the first outer iteration.
    pub restore_steps: usize,
    pub polish_steps: usize,
}

impl OptResult {
    /// Every inner solve decreased its merit monotonically.
    pub fn merit_monotone(&self) -> bool {
        self.history.iter().all(|r| r.inner_monotone)
    }

    /// The length after every outer iteration.
    pub fn length_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.length).collect()
    }
}

const MAX_LOOP_STATS: usize = 16;

fn summarize_loops(params: StructureParams, curve: &PlanarCurve) -> (Vec<LoopStats>, usize) {
    match detect_loops(curve) {
        Ok(loops) => {
            let stats = loops.iter().take(MAX_LOOP_STATS).filter_map(|l| loop_stats(params, curve, l).ok()).collect();
            (stats, loops.len())
        }
        Err(_) => (Vec::new(), 0),
    }
}

/// Augmented Lagrangian on the scaled constraint `c = holonomy/target − 1`:
/// merit `L − y c + (μ/2)c²`, inner L-BFGS, `y ← y − μc`, and `μ` grown
/// whenever `|c|` fails to drop by a factor 4. A final Gauss–Newton
/// projection along `∇c` polishes feasibility.
pub fn direct_minimize(problem: &CompetitorProblem, cfg: &OptimizerConfig, init: &Init, seed: Option<u64>) -> Result<OptResult> {
    cfg.validate()?;
    let pts0 = init_nodes(problem, cfg, init, seed)?;
    let disc = Discrete { problem, kernel: HolonomyKernel::new(problem.params), n: pts0.len() };
    let mut z = Discrete::pack(&pts0);
    let m = z.len();
    let mut gl = vec![0.0; m];
    let mut gc = vec![0.0; m];
    let mut restore_steps = 0;
    if disc.constraint(&z).abs() > cfg.cons_tol {
        restore_steps = disc.restore(&mut z, cfg.cons_tol, 100);
    }
    let (_, c0) = disc.eval(&z, &mut gl, &mut gc);
    let (mut y, mut mu) = (0.0, cfg.penalty_mu0);
    let mut c_prev = c0.abs();
    let mut history = Vec::new();
    let mut converged = false;
    let opts = lbfgs::LbfgsOptions {
        memory: cfg.lbfgs_memory,
        max_iter: cfg.max_inner,
        grad_tol: cfg.grad_tol,
        first_step: 1e-6 * problem.eps,
        max_evals: 4 * cfg.max_inner,
        ..Default::default()
    };
    for _ in 0..cfg.max_outer {
        let mut gl_i = vec![0.0; m];
        let mut gc_i = vec![0.0; m];
        let rep = lbfgs::minimize(
            |x, g| {
                let (l, c) = disc.eval(x, &mut gl_i, &mut gc_i);
                let w = mu * c - y;
                for i in 0..g.len() {
                    g[i] = gl_i[i] + w * gc_i[i];
                }
                l - y * c + 0.5 * mu * c * c
            },
            &mut z,
            &opts,
        );
        let (l, c) = disc.eval(&z, &mut gl, &mut gc);
        history.push(OuterRecord {
            merit: rep.f,
            length: l,
            constraint: c,
            multiplier: y,
            mu,
            inner_iterations: rep.iterations,
            inner_monotone: rep.monotone,
        });
        y -= mu * c;
        let lag_grad = gl.iter().zip(&gc).fold(0.0f64, |acc, (a, b)| acc.max((a - y * b).abs()));
        if c.abs() < cfg.cons_tol && lag_grad < cfg.grad_tol {
            converged = true;
            break;
        }
        if c.abs() > 0.25 * c_prev {
            mu *= cfg.penalty_growth;
        }
        c_prev = c.abs();
    }
    let polish_steps = disc.restore(&mut z, 1e-3 * cfg.cons_tol, 100);
    let points = disc.points(&z);
    let curve = PlanarCurve::from_points(points)?;
    let length = curve.length();
    let hol = HolonomyKernel::new(problem.params).polyline(curve.points());
    let scaled = hol / problem.holonomy_target - 1.0;
    let (loops, loop_count) = summarize_loops(problem.params, &curve);
    let (beta, beta_tilde) = beta_values(problem.params, &curve);
    Ok(OptResult {
        init: init.label().into(),
        seed,
        mirrored: problem.mirrored,
        length,
        constraint_residual: hol - problem.holonomy_target,
        scaled_residual: scaled,
        gap: length - problem.gamma_length,
        loops,
        loop_count,
        lambda_est: Some(y / problem.holonomy_target),
        beta,
        beta_tilde,
        converged,
        feasible: scaled.abs() < cfg.cons_tol,
        history,
        restore_steps,
        polish_steps,
        curve,
    })
}

/// Every init in `{abnormal, chord, loop_seeded}` for every seed; the first
/// seed runs unperturbed. Results come back in (seed, init) order.
pub fn direct_multistart(problem: &CompetitorProblem, cfg: &OptimizerConfig) -> Result<Vec<OptResult>> {
    let seeds = cfg.seeds();
    let mut jobs = Vec::new();
    for (k, &seed) in seeds.iter().enumerate() {
        for init in [Init::Abnormal, Init::Chord, Init::LoopSeeded] {
            jobs.push((if k == 0 { None } else { Some(seed) }, init));
        }
    }
    jobs.par_iter().map(|(seed, init)| direct_minimize(problem, cfg, init, *seed)).collect()
}

/// `θ₀` around the vertical start direction and `λ` with log-spaced
/// magnitudes, negative values first.
pub fn default_shooting_grid() -> (Vec<f64>, Vec<f64>) {
    let theta = (0..20).map(|i| FRAC_PI_2 - 0.3 + 0.6 * i as f64 / 19.0).collect();
    let mags = log_grid(1e2, 1e11, 10);
    let mut lambda: Vec<f64> = mags.iter().map(|m| -m).collect();
    lambda.extend(mags);
    (theta, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootAttempt {
    pub theta0: f64,
    pub lambda: f64,
    pub converged: bool,
    pub residual: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Converged, deduplicated, sorted by `(T, |λ|)`.
    pub solutions: Vec<ShootingSolution>,
    pub attempts: Vec<ShootAttempt>,
}

/// Shooting from every grid point (`λ < 0` first), guess `T = L(γ_{s,ε})`.
pub fn shooting_sweep(problem: &CompetitorProblem, theta_grid: &[f64], lambda_grid: &[f64], cfg: &ShootConfig) -> SweepOutcome {
    let mut lams: Vec<f64> = lambda_grid.to_vec();
    lams.sort_by(|a, b| (*a >= 0.0).cmp(&(*b >= 0.0)).then(a.abs().total_cmp(&b.abs())));
    let starts: Vec<(f64, f64)> = lams.iter().flat_map(|&l| theta_grid.iter().map(move |&t| (t, l))).collect();
    let target = problem.shoot_target();
    let t_guess = problem.gamma_length;
    let runs: Vec<(ShootAttempt, Option<ShootingSolution>)> = starts
        .par_iter()
        .map(|&(th, lam)| {
            let th = if problem.mirrored { PI - th } else { th };
            match shoot_to(problem.params, &target, (th, lam, t_guess), cfg) {
                Ok(sol) => (
                    ShootAttempt { theta0: th, lambda: lam, converged: sol.converged, residual: sol.residual_norm(), error: None },
                    sol.converged.then_some(sol),
                ),
                Err(e) => (
                    ShootAttempt { theta0: th, lambda: lam, converged: false, residual: f64::NAN, error: Some(e.to_string()) },
                    None,
                ),
            }
        })
        .collect();
    let mut solutions: Vec<ShootingSolution> = Vec::new();
    let mut attempts = Vec::with_capacity(runs.len());
    for (a, sol) in runs {
        attempts.push(a);
        if let Some(sol) = sol {
            let dup = solutions.iter().any(|o| {
                (o.theta0 - sol.theta0).abs() < 1e-6 && (o.lambda - sol.lambda).abs() < 1e-6 * o.lambda.abs().max(1.0) && (o.t_final - sol.t_final).abs() < 1e-6
            });
            if !dup {
                solutions.push(sol);
            }
        }
    }
    solutions.sort_by(|a, b| a.t_final.total_cmp(&b.t_final).then(a.lambda.abs().total_cmp(&b.lambda.abs())));
    SweepOutcome { solutions, attempts }
}

/// A candidate as it enters the minimality report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub source: String,
    pub seed: Option<u64>,
    pub length: f64,
    pub gap: f64,
    pub scaled_residual: f64,
    pub feasible: bool,
    pub converged: bool,
    pub beta: f64,
    pub beta_tilde: f64,
    pub loop_count: usize,
    pub loops: Vec<LoopStats>,
    pub lambda_est: Option<f64>,
    /// `|λ| β_ℓ²` on the first loop.
    pub abs_lambda_beta_l_sq: Option<f64>,
    /// `min P̃` after the start, a logged sanity metric.
    pub min_p_tilde: f64,
}

fn min_p_tilde_after_start(params: StructureParams, curve: &PlanarCurve) -> f64 {
    curve.points().iter().skip(1).map(|p| params.eval_p_tilde(*p)).fold(f64::INFINITY, f64::min)
}

impl Candidate {
    pub fn from_opt(problem: &CompetitorProblem, r: &OptResult) -> Self {
        let lam_b = match (r.lambda_est, r.loops.first()) {
            (Some(l), Some(st)) => Some(l.abs() * st.beta_l * st.beta_l),
            _ => None,
        };
        Self {
            source: format!("direct:{}", r.init),
            seed: r.seed,
            length: r.length,
            gap: r.gap,
            scaled_residual: r.scaled_residual,
            feasible: r.feasible,
            converged: r.converged,
            beta: r.beta,
            beta_tilde: r.beta_tilde,
            loop_count: r.loop_count,
            loops: r.loops.clone(),
            lambda_est: r.lambda_est,
            abs_lambda_beta_l_sq: lam_b,
            min_p_tilde: min_p_tilde_after_start(problem.params, &r.curve),
        }
    }

    pub fn from_shooting(problem: &CompetitorProblem, sol: &ShootingSolution, cons_tol: f64) -> Self {
        let curve = &sol.trace.curve;
        let (loops, loop_count) = summarize_loops(problem.params, curve);
        let (beta, beta_tilde) = beta_values(problem.params, curve);
        let feasible = sol.converged && sol.holonomy_residual.abs() < cons_tol && sol.endpoint_residual.iter().all(|r| r.abs() < cons_tol);
        Self {
            source: "shooting".into(),
            seed: None,
            length: sol.t_final,
            gap: sol.t_final - problem.gamma_length,
            scaled_residual: sol.holonomy_residual,
            feasible,
            converged: sol.converged,
            beta,
            beta_tilde,
            abs_lambda_beta_l_sq: loops.first().map(|st| sol.lambda.abs() * st.beta_l * st.beta_l),
            loop_count,
            loops,
            lambda_est: Some(sol.lambda),
            min_p_tilde: min_p_tilde_after_start(problem.params, curve),
        }
    }

    /// The reference curve itself: feasible by construction, gap 0.
    pub fn reference(problem: &CompetitorProblem) -> Self {
        Self {
            source: "reference".into(),
            seed: None,
            length: problem.gamma_length,
            gap: 0.0,
            scaled_residual: 0.0,
            feasible: true,
            converged: true,
            beta: problem.s.powi(problem.params.b() as i32),
            beta_tilde: 0.0,
            loop_count: 0,
            loops: Vec::new(),
            lambda_est: None,
            abs_lambda_beta_l_sq: None,
            min_p_tilde: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub n_nodes: usize,
    pub seeds: usize,
    pub inits: usize,
    pub shooting_starts: usize,
    pub low_budget: bool,
}

impl Budget {
    pub fn describe(&self) -> String {
        format!(
            "{} nodes x {} seeds x {} inits + {} shooting starts",
            self.n_nodes, self.seeds, self.inits, self.shooting_starts
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub b: u32,
    pub s: f64,
    pub eps: f64,
    pub mirrored: bool,
    pub holonomy_target: f64,
    pub gamma_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Best {
    pub length: f64,
    pub gap: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub problem: ProblemSummary,
    pub best: Best,
    pub candidates: Vec<Candidate>,
    pub verdict: String,
    pub beaten: bool,
    pub tol_cert: f64,
    pub excluded_infeasible: usize,
    pub budget: Budget,
    pub seed_list: Vec<u64>,
    pub warnings: Vec<String>,
    /// Filled in by [`run_probe`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<ProbeDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDiagnostics {
    pub direct_runs: usize,
    pub direct_feasible: usize,
    /// Every inner solve of every direct run decreased its merit.
    pub merit_monotone: bool,
    pub shooting_converged: usize,
    /// `λ_est < 0` on every feasible direct run carrying a multiplier.
    pub lambda_negative: Vec<bool>,
}

/// Best feasible candidate against `L(γ_{s,ε})`. Candidates with
/// `|scaled residual| ≥ cons_tol` are listed but excluded from the verdict.
pub fn certify_gap(
    problem: &CompetitorProblem,
    candidates: Vec<Candidate>,
    tol_cert: f64,
    budget: Budget,
    seed_list: Vec<u64>,
) -> Result<MinimalityReport> {
    if candidates.is_empty() {
        return Err(LabError::InvalidParameter("no candidates to certify".into()));
    }
    let feasible: Vec<&Candidate> = candidates.iter().filter(|c| c.feasible).collect();
    let excluded = candidates.len() - feasible.len();
    let best = feasible
        .iter()
        .min_by(|a, b| a.length.total_cmp(&b.length))
        .map(|c| Best { length: c.length, gap: c.gap, source: c.source.clone() })
        .unwrap_or(Best { length: f64::NAN, gap: f64::NAN, source: "none".into() });
    let beaten = best.gap < -tol_cert;
    let verdict = format!(
        "{} at tolerance {tol_cert:e} with budget {}",
        if beaten { "beaten" } else { "not beaten" },
        budget.describe()
    );
    Ok(MinimalityReport {
        problem: ProblemSummary {
            b: problem.params.b(),
            s: problem.s,
            eps: problem.eps,
            mirrored: problem.mirrored,
            holonomy_target: problem.holonomy_target,
            gamma_length: problem.gamma_length,
        },
        best,
        candidates,
        verdict,
        beaten,
        tol_cert,
        excluded_infeasible: excluded,
        budget,
        seed_list,
        warnings: problem.warnings.clone(),
        diagnostics: None,
    })
}

/// Full probe: multistart direct minimization, the shooting sweep, and the
/// reference curve as baseline.
pub fn run_probe(problem: &CompetitorProblem, cfg: &OptimizerConfig, shoot_cfg: &ShootConfig, shooting: bool) -> Result<(MinimalityReport, Vec<OptResult>, SweepOutcome)> {
    let direct = direct_multistart(problem, cfg)?;
    let (theta, lambda) = default_shooting_grid();
    let sweep = if shooting {
        shooting_sweep(problem, &theta, &lambda, shoot_cfg)
    } else {
        SweepOutcome { solutions: Vec::new(), attempts: Vec::new() }
    };
    let mut cands = vec![Candidate::reference(problem)];
    cands.extend(direct.iter().map(|r| Candidate::from_opt(problem, r)));
    cands.extend(sweep.solutions.iter().map(|s| Candidate::from_shooting(problem, s, cfg.cons_tol)));
    let budget = Budget {
        n_nodes: cfg.n_nodes,
        seeds: cfg.n_seeds,
        inits: 3,
        shooting_starts: sweep.attempts.len(),
        low_budget: cfg.n_seeds < 16,
    };
    let mut report = certify_gap(problem, cands, cfg.tol_cert, budget, cfg.seeds())?;
    report.diagnostics = Some(ProbeDiagnostics {
        direct_runs: direct.len(),
        direct_feasible: direct.iter().filter(|r| r.feasible).count(),
        merit_monotone: direct.iter().all(OptResult::merit_monotone),
        shooting_converged: sweep.solutions.len(),
        lambda_negative: direct.iter().filter(|r| r.feasible).filter_map(|r| r.lambda_est).map(|l| l < 0.0).collect(),
    });
    Ok((report, direct, sweep))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRun {
    pub init: String,
    pub length: f64,
    pub mirrored_length: f64,
    pub histories_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub runs: Vec<BranchRun>,
    pub max_length_difference: f64,
    pub gamma_branches_agree: bool,
    pub gamma_lengths_equal: bool,
    pub ok: bool,
}

/// Runs the unperturbed inits on the problem and on its mirror image, and
/// checks that `γ` and `γ̄` share their trace for `t ≤ 0`.
pub fn branch_compare(problem: &CompetitorProblem, cfg: &OptimizerConfig) -> Result<BranchReport> {
    let mirror = problem.mirror();
    let inits = [Init::Abnormal, Init::Chord, Init::LoopSeeded];
    let pairs: Vec<(OptResult, OptResult)> = inits
        .par_iter()
        .map(|init| Ok((direct_minimize(problem, cfg, init, None)?, direct_minimize(&mirror, cfg, init, None)?)))
        .collect::<Result<_>>()?;
    let mut runs = Vec::new();
    let mut max_diff = 0.0f64;
    for (a, b) in &pairs {
        max_diff = max_diff.max((a.length - b.length).abs());
        runs.push(BranchRun {
            init: a.init.clone(),
            length: a.length,
            mirrored_length: b.length,
            histories_match: a.length_history() == b.length_history(),
        });
    }
    let n = 1000;
    let gamma_branches_agree = (0..=n).all(|i| {
        let t = -problem.s * (1.0 - i as f64 / n as f64);
        gamma(problem.params, t, false) == gamma(problem.params, t, true)
    });
    let lg = gamma_length(problem.params, problem.s, problem.eps, LengthMode::Quadrature)?;
    let gamma_lengths_equal = lg == mirror.gamma_length;
    let ok = max_diff <= 1e-12 && gamma_branches_agree && gamma_lengths_equal && runs.iter().all(|r| r.histories_match);
    Ok(BranchReport { runs, max_length_difference: max_diff, gamma_branches_agree, gamma_lengths_equal, ok })
}

/// `L(γ_{s,ε}) − L(pr γ polyline)` for each node count, for the
/// mesh-refinement ratio test.
pub fn mesh_refinement_errors(problem: &CompetitorProblem, node_counts: &[usize]) -> Result<Vec<f64>> {
    node_counts
        .iter()
        .map(|&n| Ok(problem.gamma_length - abnormal_nodes(problem, n).and_then(PlanarCurve::from_points)?.length()))
        .collect()
}
