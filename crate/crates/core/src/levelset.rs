//! The explicit shortest path `ν_{s,ε}(·, ζ)` inside the sublevel region
//! `D_ζ = {P̃ ≤ ζ, x₁ ≥ 0}`: a tangent segment, an arc of the graph
//! `x₁ = f_ζ(x₂) = √(x₂ᵇ + ζ)`, and a second tangent segment.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{PlanarCurve, PlanePoint};
use crate::error::{LabError, Result};
use crate::io::fmt_f64;
use crate::martinet::{gamma_length, LengthMode, StructureParams};
use crate::quadrature::integrate;
use crate::roots::newton_bisect;

pub const N_ARC: usize = 4096;
const N_SEG: usize = 256;

/// `g(m) = √(1 + m²) − 1`, without cancellation.
fn excess(m: f64) -> f64 {
    let m2 = m * m;
    m2 / ((1.0 + m2).sqrt() + 1.0)
}

fn f_zeta(params: StructureParams, t: f64, zeta: f64) -> f64 {
    (t.powi(params.b() as i32) + zeta).sqrt()
}

/// Slope `f_ζ'(t) = q t^{b−1} / √(tᵇ + ζ)`.
fn f_zeta_slope(params: StructureParams, t: f64, zeta: f64) -> f64 {
    params.q() * t.powi(params.b() as i32 - 1) / f_zeta(params, t, zeta)
}

/// Residual of the start tangency `y₀ᵇ + ζ = q y₀^{b−1}(y₀ + s)`, relative to `ζ`.
pub fn tangency_start_residual(params: StructureParams, s: f64, zeta: f64, y0: f64) -> f64 {
    let b = params.b() as i32;
    let lhs = y0.powi(b) + zeta;
    let rhs = params.q() * y0.powi(b - 1) * (y0 + s);
    (lhs - rhs).abs() / zeta
}

/// Root `y₀` of the start tangency and the slope `m₀ = f_ζ'(y₀)`.
///
/// Written as `h(y) = (1 − q)yᵇ − q s y^{b−1} + ζ`, which is decreasing on
/// `(0, ∞)` with `h(0) = ζ > 0` and `h(ŷ) ≤ 0` at the `s = 0` root
/// `ŷ = (ζ/(q − 1))^{1/b}`.
pub fn solve_tangency_start(params: StructureParams, s: f64, zeta: f64) -> Result<(f64, f64)> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(LabError::InvalidParameter(format!("ζ must be positive, got {zeta}")));
    }
    if !(s >= 0.0) {
        return Err(LabError::InvalidParameter(format!("s must be nonnegative, got {s}")));
    }
    let q = params.q();
    let bf = f64::from(params.b());
    let b = params.b() as i32;
    let y_hat = (zeta / (q - 1.0)).powf(1.0 / bf);
    let y0 = if s == 0.0 {
        y_hat
    } else {
        let h = |y: f64| {
            let yb1 = y.powi(b - 1);
            let v = (1.0 - q) * yb1 * y - q * s * yb1 + zeta;
            let d = bf * (1.0 - q) * yb1 - q * s * (bf - 1.0) * y.powi(b - 2);
            (v, d)
        };
        newton_bisect(h, 0.0, y_hat, 1e-17 * y_hat, 200)?
    };
    Ok((y0, f_zeta_slope(params, y0, zeta)))
}

/// Scaled end tangency `G(ξ)` with `y = ε(1 − ξ)`, `α = ζ/εᵇ`, `Ŝ = (1−ξ)ᵇ + α`:
/// `G = Ŝ − √Ŝ + qξ(1 − ξ)^{b−1}`, evaluated as `√Ŝ·D/(√Ŝ + 1) + qξ(1−ξ)^{b−1}`
/// with `D = Ŝ − 1`.
pub fn tangency_end_scaled(params: StructureParams, alpha: f64, xi: f64) -> f64 {
    let bf = f64::from(params.b());
    let d = alpha + (bf * (-xi).ln_1p()).exp_m1();
    let sh = (1.0 + d).sqrt();
    sh * d / (sh + 1.0) + params.q() * xi * (1.0 - xi).powi(params.b() as i32 - 1)
}

/// Residual of `(y₁ᵇ + ζ) = q y₁^{b−1}(y₁ − ε) + ε^q √(y₁ᵇ + ζ)`, divided by `εᵇ`.
pub fn tangency_end_residual(params: StructureParams, eps: f64, zeta: f64, y1: f64) -> f64 {
    let b = params.b() as i32;
    let s = y1.powi(b) + zeta;
    let rhs = params.q() * y1.powi(b - 1) * (y1 - eps) + params.pow_q(eps) * s.sqrt();
    (s - rhs).abs() / eps.powi(b)
}

/// Root `y₁ = ε(1 − ξ)` of the end tangency and `m₁ = f_ζ'(y₁)`.
///
/// `G(0) = α·√(1+α)/(√(1+α)+1) > 0`; the root sought is the first sign change
/// of `G` scanning `ξ` upward geometrically.
pub fn solve_tangency_end(params: StructureParams, eps: f64, zeta: f64) -> Result<(f64, f64)> {
    let xi = solve_xi(params, eps, zeta)?;
    let y1 = eps * (1.0 - xi);
    Ok((y1, f_zeta_slope(params, y1, zeta)))
}

fn solve_xi(params: StructureParams, eps: f64, zeta: f64) -> Result<f64> {
    if !(eps > 0.0) || !(zeta > 0.0) || !eps.is_finite() || !zeta.is_finite() {
        return Err(LabError::InvalidParameter(format!("need ε > 0 and ζ > 0, got ε={eps}, ζ={zeta}")));
    }
    let alpha = zeta / eps.powi(params.b() as i32);
    let g = |xi: f64| tangency_end_scaled(params, alpha, xi);
    let mut lo = (1e-6 * alpha.sqrt()).min(1e-3);
    if g(lo) <= 0.0 {
        return Err(LabError::NoBracket(format!("end tangency: G ≤ 0 already at ξ={lo:e}")));
    }
    let mut hi = lo;
    loop {
        let next = (hi * 1.25).min(1.0 - 1e-12);
        if g(next) <= 0.0 {
            hi = next;
            break;
        }
        if next >= 1.0 - 1e-12 {
            return Err(LabError::NoBracket(format!("end tangency: no sign change for ζ={zeta:e}, ε={eps}")));
        }
        lo = next;
        hi = next;
    }
    let lo0 = lo;
    let dg = |xi: f64| {
        let h = 1e-7 * xi;
        (g(xi + h) - g(xi - h)) / (2.0 * h)
    };
    newton_bisect(|x| (g(x), dg(x)), lo0, hi, 1e-17 * hi, 300)
}

/// The three-piece minimizer with its tangency data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetGeodesic {
    pub b: u32,
    pub s: f64,
    pub eps: f64,
    pub zeta: f64,
    pub y0: f64,
    pub y1: f64,
    pub m0: f64,
    pub m1: f64,
    pub residual_t0: f64,
    pub residual_t1: f64,
    /// Total length; the arc part by adaptive quadrature.
    pub length: f64,
    /// Same length with the arc as a chord sum, Richardson-extrapolated once.
    pub length_chord: f64,
}

impl LevelSetGeodesic {
    pub fn junction0(&self, params: StructureParams) -> PlanePoint {
        PlanePoint::new(f_zeta(params, self.y0, self.zeta), self.y0)
    }

    pub fn junction1(&self, params: StructureParams) -> PlanePoint {
        PlanePoint::new(f_zeta(params, self.y1, self.zeta), self.y1)
    }
}

/// Highest `P̃` level reached on the straight chord from `(0, −s)` to `(ε^q, ε)`.
pub fn chord_level(params: StructureParams, s: f64, eps: f64) -> f64 {
    let e1 = params.pow_q(eps);
    let x1 = |x2: f64| e1 * (x2 + s) / (eps + s);
    let val = |x2: f64| params.eval_p_tilde(PlanePoint::new(x1(x2), x2));
    // below the axis P̃ = x₁² peaks at x₂ = 0
    let mut best = val(0.0).max(val(-s));
    let n = 2048;
    let mut arg = 0.0;
    for i in 0..=n {
        let t = eps * i as f64 / n as f64;
        let v = val(t);
        if v > best {
            best = v;
            arg = t;
        }
    }
    // golden-section refinement around the best grid node
    let h = eps / n as f64;
    let (mut a, mut c) = ((arg - h).max(0.0), (arg + h).min(eps));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = c - r * (c - a);
        let m2 = a + r * (c - a);
        if val(m1) > val(m2) {
            c = m2;
        } else {
            a = m1;
        }
    }
    best.max(val(0.5 * (a + c)))
}

/// Builds `ν_{s,ε}(·, ζ)` and samples it (`n_arc` arc intervals uniform in `x₂`).
pub fn build_nu(params: StructureParams, s: f64, eps: f64, zeta: f64) -> Result<(LevelSetGeodesic, PlanarCurve)> {
    build_nu_with(params, s, eps, zeta, N_ARC)
}

pub fn build_nu_with(params: StructureParams, s: f64, eps: f64, zeta: f64, n_arc: usize) -> Result<(LevelSetGeodesic, PlanarCurve)> {
    if !(eps > 0.0) || !(s >= 0.0) || !(zeta > 0.0) {
        return Err(LabError::InvalidParameter(format!("need s ≥ 0, ε > 0, ζ > 0; got s={s}, ε={eps}, ζ={zeta}")));
    }
    if n_arc < 2 || !n_arc.is_multiple_of(2) {
        return Err(LabError::InvalidParameter("n_arc must be even and at least 2".into()));
    }
    let level = chord_level(params, s, eps);
    if zeta >= level {
        return Err(LabError::ChordAdmissible { zeta, chord_level: level });
    }
    let (y0, m0) = solve_tangency_start(params, s, zeta)?;
    let (y1, m1) = solve_tangency_end(params, eps, zeta)?;
    if !(0.0 < y0 && y0 < y1 && y1 < eps) {
        return Err(LabError::InvalidParameter(format!(
            "tangency points out of order: y0={y0:e}, y1={y1:e}, ε={eps}"
        )));
    }
    let arc_pts: Vec<PlanePoint> = (0..=n_arc)
        .map(|i| {
            let t = if i == n_arc { y1 } else { y0 + (y1 - y0) * i as f64 / n_arc as f64 };
            PlanePoint::new(f_zeta(params, t, zeta), t)
        })
        .collect();
    let start = PlanePoint::new(0.0, -s);
    let end = PlanePoint::new(params.pow_q(eps), eps);
    let j0 = arc_pts[0];
    let j1 = arc_pts[n_arc];

    let seg0 = (y0 + s) * (1.0 + m0 * m0).sqrt();
    let seg1 = (eps - y1) * (1.0 + m1 * m1).sqrt();
    let arc = (y1 - y0) + arc_excess(params, y0, y1, zeta);
    let chord_excess = |step: usize| -> f64 {
        arc_pts
            .iter()
            .step_by(step)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| {
                let (dx1, dx2) = (w[1].x1 - w[0].x1, w[1].x2 - w[0].x2);
                dx1 * dx1 / ((dx1 * dx1 + dx2 * dx2).sqrt() + dx2)
            })
            .sum()
    };
    let (fine, coarse) = (chord_excess(1), chord_excess(2));
    let arc_chord = (y1 - y0) + fine + (fine - coarse) / 3.0;

    let mut pts = Vec::with_capacity(n_arc + 2 * N_SEG + 1);
    for i in 0..N_SEG {
        pts.push(start.lerp(&j0, i as f64 / N_SEG as f64));
    }
    pts.extend_from_slice(&arc_pts);
    for i in 1..=N_SEG {
        pts.push(if i == N_SEG { end } else { j1.lerp(&end, i as f64 / N_SEG as f64) });
    }
    let curve = PlanarCurve::from_points(pts)?;
    let nu = LevelSetGeodesic {
        b: params.b(),
        s,
        eps,
        zeta,
        y0,
        y1,
        m0,
        m1,
        residual_t0: tangency_start_residual(params, s, zeta, y0),
        residual_t1: tangency_end_residual(params, eps, zeta, y1),
        length: seg0 + arc + seg1,
        length_chord: seg0 + arc_chord + seg1,
    };
    Ok((nu, curve))
}

/// `∫_{y0}^{y1} (√(1 + f_ζ'²) − 1) dt`.
fn arc_excess(params: StructureParams, y0: f64, y1: f64, zeta: f64) -> f64 {
    let scale = excess(f_zeta_slope(params, y1, zeta)) * (y1 - y0);
    if scale == 0.0 {
        return 0.0;
    }
    let f = move |u: f64| excess(f_zeta_slope(params, y0 + (y1 - y0) * u, zeta)) * (y1 - y0) / scale;
    scale * integrate(f, 0.0, 1.0, 1e-14)
}

/// `L(γ_{s,ε}) − L(ν)` assembled so that the linear parts cancel exactly:
/// `R_γ − R_arc − (y₀ + s)g(m₀) − (ε − y₁)g(m₁)`, `g(m) = √(1+m²) − 1`.
pub fn length_deficit(params: StructureParams, nu: &LevelSetGeodesic) -> f64 {
    let r_gamma = crate::martinet::gamma_length_remainder(params, nu.eps, LengthMode::Quadrature);
    let r_arc = arc_excess(params, nu.y0, nu.y1, nu.zeta);
    r_gamma - r_arc - (nu.y0 + nu.s) * excess(nu.m0) - (nu.eps - nu.y1) * excess(nu.m1)
}

/// Upper end of the bound regime, `ε^{3q−1}`.
pub fn regime_limit(params: StructureParams, eps: f64) -> f64 {
    eps.powf(3.0 * params.q() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub l_nu: f64,
    pub l_gamma: f64,
    pub deficit: f64,
    /// `deficit / ζ^{1−1/b}`.
    pub scaled: f64,
    pub bound_ok: bool,
}

/// Compares `deficit = L(γ_{s,ε}) − L(ν)` against `K_fit ζ^{1−1/b}`.
pub fn nu_length_bound_check(params: StructureParams, s: f64, eps: f64, zeta: f64, k_fit: f64) -> Result<BoundCheck> {
    let limit = regime_limit(params, eps);
    if zeta > limit {
        return Err(LabError::Regime { zeta, limit });
    }
    let (nu, _) = build_nu(params, s, eps, zeta)?;
    let deficit = length_deficit(params, &nu);
    let scaled = deficit / zeta.powf(1.0 - 1.0 / f64::from(params.b()));
    Ok(BoundCheck {
        l_nu: nu.length,
        l_gamma: gamma_length(params, s, eps, LengthMode::Quadrature)?,
        deficit,
        scaled,
        bound_ok: scaled <= k_fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub alpha: f64,
    pub xi: f64,
    pub ratio: f64,
    pub y0_over_eps: f64,
}

/// `α = ζ/εᵇ`, `ξ = 1 − y₁/ε`, `α/ξ²` and `y₀/ε` (at `s = 0`).
pub fn asymptotic_report(params: StructureParams, eps: f64, zeta: f64) -> Result<AsymptoticReport> {
    let xi = solve_xi(params, eps, zeta)?;
    let alpha = zeta / eps.powi(params.b() as i32);
    let (y0, _) = solve_tangency_start(params, 0.0, zeta)?;
    Ok(AsymptoticReport { alpha, xi, ratio: alpha / (xi * xi), y0_over_eps: y0 / eps })
}

/// `b(q − 1)/2`, the limit of `α/ξ²`.
pub fn asymptotic_coefficient(params: StructureParams) -> f64 {
    f64::from(params.b()) * (params.q() - 1.0) / 2.0
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub k_fit: f64,
    pub min_scaled: f64,
    pub max_scaled: f64,
    pub points: usize,
}

impl Calibration {
    /// `max/min` of `deficit/ζ^{1−1/b}` over the grid.
    pub fn spread(&self) -> f64 {
        self.max_scaled / self.min_scaled
    }
}

/// `K_fit = 2·max deficit/ζ^{1−1/b}` over `ζ ∈ [1e−12, 1e−6]` (13 log-spaced
/// values), `ε ∈ {0.05, 0.1, 0.2}`, `s ∈ {0, ε²/2}`, restricted to the regime
/// `ζ ≤ ε^{3q−1}` and to levels below the chord.
pub fn calibrate_k_fit(params: StructureParams) -> Result<Calibration> {
    let mut cases = Vec::new();
    for eps in [0.05, 0.1, 0.2] {
        for s in [0.0, eps * eps / 2.0] {
            for zeta in log_grid(1e-12, 1e-6, 13) {
                if zeta <= regime_limit(params, eps) && zeta < chord_level(params, s, eps) {
                    cases.push((s, eps, zeta));
                }
            }
        }
    }
    let scaled: Vec<f64> = cases
        .par_iter()
        .map(|&(s, eps, zeta)| {
            let (nu, _) = build_nu(params, s, eps, zeta)?;
            Ok(length_deficit(params, &nu) / zeta.powf(1.0 - 1.0 / f64::from(params.b())))
        })
        .collect::<Result<_>>()?;
    if scaled.is_empty() {
        return Err(LabError::InvalidParameter("calibration grid is empty".into()));
    }
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Calibration { k_fit: 2.0 * max, min_scaled: min, max_scaled: max, points: scaled.len() })
}

/// One row of a level-set sweep; failed rows keep NaN fields and a status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub b: u32,
    pub s: f64,
    pub eps: f64,
    pub zeta: f64,
    pub y0: f64,
    pub y1: f64,
    pub alpha: f64,
    pub xi: f64,
    pub ratio: f64,
    pub l_nu: f64,
    pub l_gamma: f64,
    pub deficit: f64,
    pub status: String,
}

pub const SWEEP_HEADER: [&str; 13] =
    ["b", "s", "eps", "zeta", "y0", "y1", "alpha", "xi", "ratio", "L_nu", "L_gamma", "deficit", "status"];

fn sweep_row(params: StructureParams, s: f64, eps: f64, zeta: f64) -> SweepRow {
    let mut row = SweepRow {
        b: params.b(),
        s,
        eps,
        zeta,
        y0: f64::NAN,
        y1: f64::NAN,
        alpha: zeta / eps.powi(params.b() as i32),
        xi: f64::NAN,
        ratio: f64::NAN,
        l_nu: f64::NAN,
        l_gamma: gamma_length(params, s, eps, LengthMode::Quadrature).unwrap_or(f64::NAN),
        deficit: f64::NAN,
        status: "ok".into(),
    };
    match build_nu(params, s, eps, zeta) {
        Ok((nu, _)) => {
            row.y0 = nu.y0;
            row.y1 = nu.y1;
            row.xi = 1.0 - nu.y1 / eps;
            row.ratio = row.alpha / (row.xi * row.xi);
            row.l_nu = nu.length;
            row.deficit = length_deficit(params, &nu);
            if zeta > regime_limit(params, eps) {
                row.status = "outside_regime".into();
            }
        }
        Err(LabError::ChordAdmissible { .. }) => row.status = "chord_admissible".into(),
        Err(e) => row.status = format!("failed: {e}"),
    }
    row
}

/// Sweep over `(ε, ζ)` pairs, ordered by `(ε, ζ)` whatever the scheduling.
pub fn sweep(params: StructureParams, s_of_eps: impl Fn(f64) -> f64 + Sync, eps_grid: &[f64], zeta_grid: &[f64]) -> Vec<SweepRow> {
    let mut cases: Vec<(f64, f64)> = eps_grid.iter().flat_map(|&e| zeta_grid.iter().map(move |&z| (e, z))).collect();
    cases.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cases.par_iter().map(|&(eps, zeta)| sweep_row(params, s_of_eps(eps), eps, zeta)).collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SWEEP_HEADER)?;
    for r in rows {
        let mut rec = vec![r.b.to_string()];
        for v in [r.s, r.eps, r.zeta, r.y0, r.y1, r.alpha, r.xi, r.ratio, r.l_nu, r.l_gamma, r.deficit] {
            rec.push(fmt_f64(v));
        }
        rec.push(r.status.clone());
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}
