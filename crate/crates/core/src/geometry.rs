//! Planar geometry of closed and self-intersecting curves: winding numbers,
//! weighted areas, the Radó bound, turning numbers, loops and sign partitions
//! of `P̃` along a curve.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{PlanarCurve, PlanePoint};
use crate::error::{LabError, Result};
use crate::flow::ExtremalTrace;
use crate::martinet::{HolonomyKernel, StructureParams};

pub const TOL_CLOSE: f64 = 1e-10;
pub const TOL_ON_CURVE: f64 = 1e-12;
/// Turning angles within this distance of ±π are cusps.
pub const TOL_CUSP: f64 = 1e-9;

/// A polyline whose first and last points agree within [`TOL_CLOSE`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    polyline: PlanarCurve,
}

impl ClosedCurve {
    pub fn new(polyline: PlanarCurve) -> Result<Self> {
        let gap = polyline.start().dist(&polyline.end());
        if gap > TOL_CLOSE {
            return Err(LabError::InvalidCurve(format!("curve not closed: gap {gap:e}")));
        }
        if polyline.len() < 3 {
            return Err(LabError::InvalidCurve("closed curve needs at least three samples".into()));
        }
        Ok(Self { polyline })
    }

    /// Closes the vertex list by repeating the first vertex.
    pub fn from_vertices(mut vertices: Vec<PlanePoint>) -> Result<Self> {
        if let Some(&first) = vertices.first() {
            vertices.push(first);
        }
        Self::new(PlanarCurve::from_points(vertices)?)
    }

    pub fn polyline(&self) -> &PlanarCurve {
        &self.polyline
    }

    pub fn points(&self) -> &[PlanePoint] {
        self.polyline.points()
    }

    pub fn length(&self) -> f64 {
        self.polyline.length()
    }

    pub fn reversed(&self) -> Self {
        Self { polyline: self.polyline.reversed() }
    }

    pub fn bounding_box(&self) -> (PlanePoint, PlanePoint) {
        bounding_box(self.points())
    }
}

fn bounding_box(pts: &[PlanePoint]) -> (PlanePoint, PlanePoint) {
    let mut lo = PlanePoint::new(f64::INFINITY, f64::INFINITY);
    let mut hi = PlanePoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo.x1 = lo.x1.min(p.x1);
        lo.x2 = lo.x2.min(p.x2);
        hi.x1 = hi.x1.max(p.x1);
        hi.x2 = hi.x2.max(p.x2);
    }
    (lo, hi)
}

fn cross(a: PlanePoint, b: PlanePoint, c: PlanePoint) -> f64 {
    (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2)
}

fn point_segment_dist(y: PlanePoint, a: PlanePoint, c: PlanePoint) -> f64 {
    let (dx, dy) = (c.x1 - a.x1, c.x2 - a.x2);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return y.dist(&a);
    }
    let u = (((y.x1 - a.x1) * dx + (y.x2 - a.x2) * dy) / len2).clamp(0.0, 1.0);
    y.dist(&a.lerp(&c, u))
}

/// Winding number of `closed` around `y` (signed crossing count with
/// half-open edges). Points within [`TOL_ON_CURVE`] of the curve are rejected.
pub fn winding_number(closed: &ClosedCurve, y: PlanePoint) -> Result<i32> {
    let pts = closed.points();
    for w in pts.windows(2) {
        if point_segment_dist(y, w[0], w[1]) <= TOL_ON_CURVE {
            return Err(LabError::PointOnCurve { x1: y.x1, x2: y.x2 });
        }
    }
    Ok(winding_unchecked(pts, y))
}

fn winding_unchecked(pts: &[PlanePoint], y: PlanePoint) -> i32 {
    let mut wn = 0;
    for w in pts.windows(2) {
        let (a, c) = (w[0], w[1]);
        if a.x2 <= y.x2 {
            if c.x2 > y.x2 && cross(a, c, y) > 0.0 {
                wn += 1;
            }
        } else if c.x2 <= y.x2 && cross(a, c, y) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// `A(η) = ∫ η̇₂ P(η)² dt` (same kernel as the holonomy).
pub fn weighted_area_line(params: StructureParams, closed: &ClosedCurve) -> f64 {
    HolonomyKernel::new(params).polyline(closed.points())
}

/// `Σ winding(center)·Q(center)·cell_area` over a `grid_n × grid_n` grid on
/// the bounding box. Rows run in parallel and are summed in row order.
pub fn weighted_area_region(params: StructureParams, closed: &ClosedCurve, grid_n: usize) -> Result<f64> {
    if grid_n < 64 {
        return Err(LabError::InvalidParameter(format!("grid_n must be at least 64, got {grid_n}")));
    }
    let (lo, hi) = closed.bounding_box();
    let (w, h) = (hi.x1 - lo.x1, hi.x2 - lo.x2);
    if w == 0.0 || h == 0.0 {
        return Ok(0.0);
    }
    let (dx, dy) = (w / grid_n as f64, h / grid_n as f64);
    let pts = closed.points();
    let rows: Vec<f64> = (0..grid_n)
        .into_par_iter()
        .map(|r| {
            let y = lo.x2 + (r as f64 + 0.5) * dy;
            // crossings of the horizontal line through y, with ±1 orientation
            let mut xs: Vec<(f64, i32)> = Vec::new();
            for s in pts.windows(2) {
                let (a, c) = (s[0], s[1]);
                let up = a.x2 <= y && c.x2 > y;
                let down = a.x2 > y && c.x2 <= y;
                if up || down {
                    let xc = a.x1 + (y - a.x2) / (c.x2 - a.x2) * (c.x1 - a.x1);
                    xs.push((xc, if up { 1 } else { -1 }));
                }
            }
            xs.sort_by(|a, b| b.0.total_cmp(&a.0));
            // sweep cells right to left; winding = Σ signs of crossings to the right
            let mut k = 0;
            let mut wn = 0;
            let mut acc = 0.0;
            for j in (0..grid_n).rev() {
                let x = lo.x1 + (j as f64 + 0.5) * dx;
                while k < xs.len() && xs[k].0 > x {
                    wn += xs[k].1;
                    k += 1;
                }
                if wn != 0 {
                    acc += f64::from(wn) * params.eval_q(PlanePoint::new(x, y));
                }
            }
            acc * dx * dy
        })
        .collect();
    Ok(rows.iter().sum())
}

/// Exact `sup |Q|` over the box `[lo, hi]`.
///
/// `Q` has no interior critical point besides the origin (where it
/// vanishes), is monotone along vertical edges, and along a horizontal edge
/// `x₂ = c` is critical only at `x₁ = ±√(cᵇ/3)`.
pub fn box_sup_abs_q(params: StructureParams, lo: PlanePoint, hi: PlanePoint) -> f64 {
    let mut cands = vec![
        PlanePoint::new(lo.x1, lo.x2),
        PlanePoint::new(lo.x1, hi.x2),
        PlanePoint::new(hi.x1, lo.x2),
        PlanePoint::new(hi.x1, hi.x2),
    ];
    for c in [lo.x2, hi.x2] {
        let cb = c.powi(params.b() as i32);
        if cb > 0.0 {
            let r = (cb / 3.0).sqrt();
            for x in [-r, r] {
                if x >= lo.x1 && x <= hi.x1 {
                    cands.push(PlanePoint::new(x, c));
                }
            }
        }
    }
    cands.iter().map(|p| params.eval_q(*p).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadoCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `|A(η)| ≤ L(η)²/(4π) · sup|Q|`, with the sup taken over the bounding box.
pub fn rado_check(params: StructureParams, closed: &ClosedCurve) -> RadoCheck {
    let lhs = weighted_area_line(params, closed).abs();
    let (lo, hi) = closed.bounding_box();
    let l = closed.length();
    let rhs = l * l / (4.0 * PI) * box_sup_abs_q(params, lo, hi);
    RadoCheck { lhs, rhs, ok: lhs <= rhs * (1.0 + 1e-9) }
}

fn turn_angle(a: PlanePoint, b: PlanePoint, c: PlanePoint) -> f64 {
    let (ux, uy) = (b.x1 - a.x1, b.x2 - a.x2);
    let (vx, vy) = (c.x1 - b.x1, c.x2 - b.x2);
    (ux * vy - uy * vx).atan2(ux * vx + uy * vy)
}

fn checked_turn(a: PlanePoint, b: PlanePoint, c: PlanePoint, index: usize) -> Result<f64> {
    let ang = turn_angle(a, b, c);
    if PI - ang.abs() <= TOL_CUSP {
        return Err(LabError::Cusp { index });
    }
    Ok(ang)
}

/// Sum of signed exterior angles at the vertices of a closed polygon.
pub fn total_turning_closed(closed: &ClosedCurve) -> Result<f64> {
    let pts = closed.points();
    let n = pts.len() - 1; // last repeats first
    let mut total = 0.0;
    for i in 0..n {
        let prev = pts[(i + n - 1) % n];
        total += checked_turn(prev, pts[i], pts[i + 1], i)?;
    }
    Ok(total)
}

/// Sum of signed turning angles at interior vertices of an open polyline.
pub fn total_turning_open(curve: &PlanarCurve) -> Result<f64> {
    let pts = curve.points();
    if pts.len() < 3 {
        return Err(LabError::InvalidCurve("turning needs at least three nodes".into()));
    }
    let mut total = 0.0;
    for i in 1..pts.len() - 1 {
        total += checked_turn(pts[i - 1], pts[i], pts[i + 1], i)?;
    }
    Ok(total)
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

fn theta_at(trace: &ExtremalTrace, t: f64) -> f64 {
    let (i, u) = trace.curve.locate(t);
    trace.theta[i] + u * (trace.theta[i + 1] - trace.theta[i])
}

/// Turning of the closed curve cut out by a loop of an extremal trace:
/// `θ(s⁺) − θ(s⁻)` plus the exterior angle at the closure point.
pub fn trace_loop_turning(trace: &ExtremalTrace, lp: &Loop) -> Result<f64> {
    if !(lp.s_minus < lp.s_plus) || lp.s_plus > trace.curve.t_end() {
        return Err(LabError::InvalidParameter("loop outside the trace".into()));
    }
    let th_in = theta_at(trace, lp.s_plus);
    let th_out = theta_at(trace, lp.s_minus);
    let ext = wrap_angle(th_out - th_in);
    if PI - ext.abs() <= TOL_CUSP {
        return Err(LabError::Cusp { index: 0 });
    }
    Ok(th_in - th_out + ext)
}

/// `∫ λQ(ω) dt` over the loop interval (trapezoid on the trace samples,
/// end pieces interpolated); cross-check for [`trace_loop_turning`].
pub fn trace_loop_turning_quadrature(params: StructureParams, trace: &ExtremalTrace, lp: &Loop) -> Result<f64> {
    let sub = trace.curve.sub_curve(lp.s_minus, lp.s_plus)?;
    let t = sub.times();
    let p = sub.points();
    let smooth: f64 = (1..t.len())
        .map(|i| 0.5 * (t[i] - t[i - 1]) * (params.eval_q(p[i]) + params.eval_q(p[i - 1])))
        .sum::<f64>()
        * trace.lambda;
    let th_in = theta_at(trace, lp.s_plus);
    let th_out = theta_at(trace, lp.s_minus);
    Ok(smooth + wrap_angle(th_out - th_in))
}

/// A self-intersection: `ω(s⁻) = ω(s⁺)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub s_minus: f64,
    pub s_plus: f64,
    #[serde(rename = "point", with = "point_array")]
    pub closure_point: PlanePoint,
    /// Segment indices of the crossing pair.
    #[serde(skip)]
    pub segments: (usize, usize),
}

mod point_array {
    use super::PlanePoint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &PlanePoint, s: S) -> Result<S::Ok, S::Error> {
        [p.x1, p.x2].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PlanePoint, D::Error> {
        let [x1, x2] = <[f64; 2]>::deserialize(d)?;
        Ok(PlanePoint::new(x1, x2))
    }
}

/// Parameters `(u, v)` of the crossing of segments `a→a'` and `c→c'`, if any.
/// Segments are half-open `[0, 1)` unless the `closed_end` flags say otherwise.
fn segment_crossing(
    a: PlanePoint,
    a2: PlanePoint,
    c: PlanePoint,
    c2: PlanePoint,
    a_closed_end: bool,
    c_closed_end: bool,
) -> std::result::Result<Option<(f64, f64)>, ()> {
    let (rx, ry) = (a2.x1 - a.x1, a2.x2 - a.x2);
    let (sx, sy) = (c2.x1 - c.x1, c2.x2 - c.x2);
    let (qx, qy) = (c.x1 - a.x1, c.x2 - a.x2);
    let denom = rx * sy - ry * sx;
    let scale = (rx.abs() + ry.abs()) * (sx.abs() + sy.abs());
    if denom.abs() <= 1e-14 * scale {
        // parallel; collinear overlap is degenerate
        let coll = qx * ry - qy * rx;
        if coll.abs() <= 1e-14 * (rx.abs() + ry.abs()) * (qx.abs() + qy.abs()).max(1e-300) {
            let rr = rx * rx + ry * ry;
            let t0 = (qx * rx + qy * ry) / rr;
            let t1 = t0 + (sx * rx + sy * ry) / rr;
            let (lo, hi) = (t0.min(t1), t0.max(t1));
            if hi > 0.0 && lo < 1.0 {
                return Err(());
            }
        }
        return Ok(None);
    }
    let u = (qx * sy - qy * sx) / denom;
    let v = (qx * ry - qy * rx) / denom;
    let in_u = u >= 0.0 && (u < 1.0 || (a_closed_end && u <= 1.0));
    let in_v = v >= 0.0 && (v < 1.0 || (c_closed_end && v <= 1.0));
    Ok((in_u && in_v).then_some((u, v)))
}

/// All transversal self-intersections between non-adjacent segments, sorted
/// by `s⁺`. Candidate pairs come from a sort-and-sweep over segment boxes;
/// crossing points are computed in closed form. On closed curves the pair
/// (first, last) is adjacent, and every crossing also yields the complement
/// loop `(s⁺, s⁻ + period)`.
pub fn detect_loops(curve: &PlanarCurve) -> Result<Vec<Loop>> {
    let pts = curve.points();
    let times = curve.times();
    let m = pts.len() - 1;
    let closed = pts[0].dist(&pts[m]) <= TOL_CLOSE;
    let mut order: Vec<usize> = (0..m).collect();
    let xmin = |i: usize| pts[i].x1.min(pts[i + 1].x1);
    let xmax = |i: usize| pts[i].x1.max(pts[i + 1].x1);
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)).then(i.cmp(&j)));
    let mut active: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for &i in &order {
        let lo = xmin(i);
        active.retain(|&j| xmax(j) >= lo);
        let (ylo, yhi) = (pts[i].x2.min(pts[i + 1].x2), pts[i].x2.max(pts[i + 1].x2));
        for &j in &active {
            let (jlo, jhi) = (pts[j].x2.min(pts[j + 1].x2), pts[j].x2.max(pts[j + 1].x2));
            if jhi >= ylo && jlo <= yhi {
                pairs.push((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    pairs.sort_unstable();
    let period = curve.t_end() - curve.t_start();
    let mut loops = Vec::new();
    for (i, j) in pairs {
        if j < i + 2 || (closed && i == 0 && j == m - 1) {
            continue;
        }
        let last_j = !closed && j == m - 1;
        match segment_crossing(pts[i], pts[i + 1], pts[j], pts[j + 1], false, last_j) {
            Err(()) => return Err(LabError::CollinearOverlap { first: i, second: j }),
            Ok(None) => {}
            Ok(Some((u, v))) => {
                let s_minus = times[i] + u * (times[i + 1] - times[i]);
                let s_plus = times[j] + v * (times[j + 1] - times[j]);
                let point = pts[i].lerp(&pts[i + 1], u);
                loops.push(Loop { s_minus, s_plus, closure_point: point, segments: (i, j) });
                if closed {
                    loops.push(Loop { s_minus: s_plus, s_plus: s_minus + period, closure_point: point, segments: (j, i) });
                }
            }
        }
    }
    loops.sort_by(|a, b| a.s_plus.total_cmp(&b.s_plus).then(a.s_minus.total_cmp(&b.s_minus)));
    Ok(loops)
}

/// The loop with minimal closing time.
pub fn first_simple_loop(curve: &PlanarCurve) -> Result<Option<Loop>> {
    Ok(detect_loops(curve)?.into_iter().next())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopStats {
    pub beta_l: f64,
    pub t_l: f64,
    pub x_l: f64,
    pub y_l: f64,
    pub delta_l: f64,
    pub length: f64,
    pub weighted_area: f64,
}

/// The closed sub-arc `ω|[s⁻, s⁺]`; wraps around for complement loops of a
/// closed curve.
pub fn loop_curve(curve: &PlanarCurve, lp: &Loop) -> Result<PlanarCurve> {
    let (t0, t1) = (curve.t_start(), curve.t_end());
    if lp.s_plus <= t1 {
        return curve.sub_curve(lp.s_minus, lp.s_plus);
    }
    let period = t1 - t0;
    let head = curve.sub_curve(lp.s_minus, t1)?;
    let tail = curve.sub_curve(t0, lp.s_plus - period)?;
    head.concat(&tail, TOL_CLOSE)
}

/// Def.-style loop statistics: `β_ℓ = max|P|` over the loop, its argmax time
/// and point, `δ_ℓ = β_ℓ min(1/x_ℓ, 1/|y_ℓ|^q)`, length and weighted area.
pub fn loop_stats(params: StructureParams, curve: &PlanarCurve, lp: &Loop) -> Result<LoopStats> {
    let sub = loop_curve(curve, lp)?;
    let (mut beta, mut arg) = (-1.0, 0);
    for (i, p) in sub.points().iter().enumerate() {
        let v = params.eval_p(*p).abs();
        if v > beta {
            beta = v;
            arg = i;
        }
    }
    let pt = sub.points()[arg];
    let (x, y) = (pt.x1, pt.x2);
    if x == 0.0 && y == 0.0 {
        return Err(LabError::UndefinedDelta);
    }
    let inv = |v: f64| if v == 0.0 { f64::INFINITY } else { 1.0 / v };
    let delta = if beta == 0.0 { 0.0 } else { beta * inv(x.abs()).min(inv(params.pow_q(y.abs()))) };
    let mut closed_pts = sub.points().to_vec();
    closed_pts.push(closed_pts[0]);
    Ok(LoopStats {
        beta_l: beta,
        t_l: sub.times()[arg],
        x_l: x,
        y_l: y,
        delta_l: delta,
        length: sub.length(),
        weighted_area: HolonomyKernel::new(params).polyline(&closed_pts),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPartition {
    pub taus: Vec<f64>,
    pub signs: Vec<Sign>,
    pub degenerate: bool,
}

/// Times where `P̃∘ω` crosses the band `[−η, η]`, with interval signs.
/// `eta_tol = None` uses `1e−13·(1 + β̃)`.
pub fn sign_partition(params: StructureParams, curve: &PlanarCurve, eta_tol: Option<f64>) -> Result<SignPartition> {
    let vals: Vec<f64> = curve.points().iter().map(|p| params.eval_p_tilde(*p)).collect();
    let beta_t = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eta = match eta_tol {
        Some(e) if e >= 0.0 => e,
        Some(e) => return Err(LabError::InvalidParameter(format!("eta_tol must be nonnegative, got {e}"))),
        None => 1e-13 * (1.0 + beta_t),
    };
    let t = curve.times();
    let mut taus = Vec::new();
    let mut signs = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, &v) in vals.iter().enumerate() {
        if v.abs() <= eta {
            continue;
        }
        match last {
            None => signs.push(if v > 0.0 { Sign::Positive } else { Sign::Negative }),
            Some((k, vk)) if vk.signum() != v.signum() => {
                taus.push(t[k] + (t[i] - t[k]) * vk / (vk - v));
                signs.push(if v > 0.0 { Sign::Positive } else { Sign::Negative });
            }
            _ => {}
        }
        last = Some((i, v));
    }
    if signs.is_empty() {
        return Ok(SignPartition { taus, signs: vec![Sign::Zero], degenerate: true });
    }
    Ok(SignPartition { taus, signs, degenerate: false })
}

/// JSON export of loops and a sign partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryExport {
    pub loops: Vec<Loop>,
    pub taus: Vec<f64>,
    pub signs: Vec<Sign>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b5() -> StructureParams {
        StructureParams::new(5).unwrap()
    }

    fn circle(n: usize, r: f64, c: PlanePoint, ccw: bool) -> ClosedCurve {
        let pts = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64 * if ccw { 1.0 } else { -1.0 };
                PlanePoint::new(c.x1 + r * a.cos(), c.x2 + r * a.sin())
            })
            .collect();
        ClosedCurve::from_vertices(pts).unwrap()
    }

    fn unit_square() -> ClosedCurve {
        ClosedCurve::from_vertices(vec![
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(1.0, 1.0),
            PlanePoint::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn winding_numbers_of_circles() {
        let o = PlanePoint::new(0.0, 0.0);
        assert_eq!(winding_number(&circle(256, 1.0, o, true), o).unwrap(), 1);
        assert_eq!(winding_number(&circle(256, 1.0, o, true), PlanePoint::new(2.0, 0.0)).unwrap(), 0);
        assert_eq!(winding_number(&circle(256, 1.0, o, false), o).unwrap(), -1);
        assert!(winding_number(&circle(256, 1.0, o, true), PlanePoint::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn unit_square_weighted_area() {
        let sq = unit_square();
        assert!((weighted_area_line(b5(), &sq) - 2.0 / 3.0).abs() < 1e-15);
        let reg = weighted_area_region(b5(), &sq, 512).unwrap();
        assert!((reg - 2.0 / 3.0).abs() < 2e-3, "{reg}");
        let r = rado_check(b5(), &sq);
        assert!(r.ok);
        assert!((r.rhs - 16.0 / (4.0 * PI) * 4.0).abs() < 1e-12);
    }

    #[test]
    fn box_sup_uses_edge_critical_points() {
        let p = b5();
        // on x₂ = 1 the cubic 4x³ − 4x has its extremum at x = 1/√3
        let s = box_sup_abs_q(p, PlanePoint::new(0.0, 1.0), PlanePoint::new(0.9, 1.0));
        let x = (1.0f64 / 3.0).sqrt();
        assert!((s - (4.0 * x * (x * x - 1.0)).abs()).abs() < 1e-15);
    }

    #[test]
    fn turning_of_polygons() {
        let tri = ClosedCurve::from_vertices(vec![
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(0.0, 1.0),
        ])
        .unwrap();
        assert!((total_turning_closed(&tri).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((total_turning_closed(&unit_square().reversed()).unwrap() + 2.0 * PI).abs() < 1e-12);
        let cusp = PlanarCurve::from_points(vec![
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(0.5, 0.0),
        ])
        .unwrap();
        assert!(matches!(total_turning_open(&cusp), Err(LabError::Cusp { index: 1 })));
    }

    #[test]
    fn figure_eight_has_one_crossing_two_loops() {
        let pts: Vec<_> = (0..200)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / 200.0;
                PlanePoint::new(a.sin(), (2.0 * a).sin() * 0.5)
            })
            .collect();
        let c = ClosedCurve::from_vertices(pts).unwrap();
        let loops = detect_loops(c.polyline()).unwrap();
        assert_eq!(loops.len(), 2);
        assert!(loops[0].closure_point.dist(&PlanePoint::new(0.0, 0.0)) < 1e-12);
        let period = c.polyline().t_end();
        assert!((loops[1].s_plus - loops[0].s_minus - period).abs() < 1e-12);
    }

    #[test]
    fn open_square_has_no_loops() {
        let c = PlanarCurve::from_points(vec![
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(1.0, 1.0),
            PlanePoint::new(0.0, 1.0),
            PlanePoint::new(0.0, 1e-3),
        ])
        .unwrap();
        assert!(detect_loops(&c).unwrap().is_empty());
    }

    #[test]
    fn collinear_overlap_is_rejected() {
        let c = PlanarCurve::from_points(vec![
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(2.0, 0.0),
            PlanePoint::new(2.0, 1.0),
            PlanePoint::new(1.0, 1.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(3.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(detect_loops(&c), Err(LabError::CollinearOverlap { .. })));
    }

    #[test]
    fn loop_stats_of_cycloid_loop() {
        let p = b5();
        // prolate cycloid arc x = 0.3a − sin a, y = −cos a, scaled and shifted to (1, 0)
        let (c0, r) = (1.0, 0.05);
        let pts = (0..=600)
            .map(|i| {
                let a = -3.0 + 6.0 * i as f64 / 600.0;
                PlanePoint::new(c0 + r * (0.3 * a - a.sin()), -r * a.cos())
            })
            .collect();
        let curve = PlanarCurve::from_points(pts).unwrap();
        let loops = detect_loops(&curve).unwrap();
        assert_eq!(loops.len(), 1);
        assert!(loops[0].closure_point.x1 - c0 < 1e-12);
        let st = loop_stats(p, &curve, &loops[0]).unwrap();
        // max of 0.3a − sin a on the loop is at cos a = 0.3
        let a = -(0.3f64).acos();
        let xmax = c0 + r * (0.3 * a - a.sin());
        assert!((st.beta_l - xmax * xmax).abs() < 1e-4, "{} vs {}", st.beta_l, xmax * xmax);
        assert!(st.delta_l > 0.0);
        assert!(st.beta_l <= crate::martinet::beta_values(p, &curve).0);
    }

    #[test]
    fn sign_partitions() {
        let p = b5();
        let c = PlanarCurve::from_points(vec![PlanePoint::new(0.5, -1.0), PlanePoint::new(0.6, -0.5)]).unwrap();
        let sp = sign_partition(p, &c, None).unwrap();
        assert_eq!(sp.signs, vec![Sign::Positive]);
        assert!(sp.taus.is_empty());
        // crossing x₁² = x₂⁵ along x₂ = 0.5
        let c = PlanarCurve::from_points((0..=100).map(|i| PlanePoint::new(i as f64 / 100.0, 0.5)).collect()).unwrap();
        let sp = sign_partition(p, &c, None).unwrap();
        assert_eq!(sp.signs, vec![Sign::Negative, Sign::Positive]);
        assert_eq!(sp.taus.len(), 1);
        assert!((sp.taus[0] - 0.5f64.powf(2.5)).abs() < 1e-3);
    }
}
