//! The Martinet-type structure `span{∂₁, ∂₂ + P²∂₃}` with `P = x₁² − x₂ᵇ`,
//! the reference curves `γ`, `γ̄` and the holonomy constraint.

use serde::{Deserialize, Serialize};

use crate::curve::{HorizontalCurve, PlanarCurve, PlanePoint, SpacePoint};
use crate::error::{LabError, Result};
use crate::quadrature::{gauss_legendre_unit, integrate};

/// The exponent `b` (odd, at least 5). `q = b/2` is always recomputed from `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct StructureParams {
    b: u32,
}

impl TryFrom<u32> for StructureParams {
    type Error = LabError;
    fn try_from(b: u32) -> Result<Self> {
        Self::new(b)
    }
}

impl From<StructureParams> for u32 {
    fn from(p: StructureParams) -> u32 {
        p.b
    }
}

impl StructureParams {
    pub fn new(b: u32) -> Result<Self> {
        if b < 5 || b.is_multiple_of(2) {
            return Err(LabError::InvalidExponent(b));
        }
        Ok(Self { b })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    /// `q = b/2`; exact in binary floating point since `b` is a small integer.
    pub fn q(&self) -> f64 {
        f64::from(self.b) / 2.0
    }

    /// `x^q` for `x ≥ 0`, as `exp(q ln x)` with `0^q = 0`.
    pub fn pow_q(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            (self.q() * x.ln()).exp()
        }
    }

    fn pow_b(&self, x: f64) -> f64 {
        x.powi(self.b as i32)
    }

    pub fn eval_p(&self, p: PlanePoint) -> f64 {
        p.x1 * p.x1 - self.pow_b(p.x2)
    }

    pub fn eval_p_tilde(&self, p: PlanePoint) -> f64 {
        if p.x2 >= 0.0 {
            self.eval_p(p)
        } else {
            p.x1 * p.x1
        }
    }

    /// `Q = ∂₁(P²) = 4x₁P`.
    pub fn eval_q(&self, p: PlanePoint) -> f64 {
        4.0 * p.x1 * self.eval_p(p)
    }

    /// `∂₂(P²) = −2b x₂^{b−1} P`.
    pub fn d2_p_squared(&self, p: PlanePoint) -> f64 {
        -2.0 * f64::from(self.b) * p.x2.powi(self.b as i32 - 1) * self.eval_p(p)
    }
}

/// Reference curve: `γ(t) = (0, t, t^{2b+1}/(2b+1))` for `t < 0` and
/// `(±t^q, t, 0)` for `t ≥ 0`, minus sign iff `mirrored` (that is `γ̄`).
pub fn gamma(params: StructureParams, t: f64, mirrored: bool) -> SpacePoint {
    if t < 0.0 {
        let k = 2 * params.b() + 1;
        SpacePoint::new(0.0, t, t.powi(k as i32) / f64::from(k))
    } else {
        let x1 = params.pow_q(t);
        SpacePoint::new(if mirrored { -x1 } else { x1 }, t, 0.0)
    }
}

/// Lifted endpoints `γ(−s)` and `γ(ε)` of the reference curve.
pub fn reference_endpoints(params: StructureParams, s: f64, eps: f64, mirrored: bool) -> (SpacePoint, SpacePoint) {
    (gamma(params, -s, mirrored), gamma(params, eps, mirrored))
}

/// Net third-coordinate change `+s^{2b+1}/(2b+1)` a competitor must realize.
pub fn reference_holonomy_target(params: StructureParams, s: f64) -> f64 {
    let k = 2 * params.b() + 1;
    s.powi(k as i32) / f64::from(k)
}

/// Samples of `pr(γ)` on `[−s, ε]` with `n` segments in total, shared between
/// the vertical part and the arc in proportion to their lengths; `t = 0` is
/// always a node. The result is parametrized by cumulative chord length.
pub fn gamma_polyline(params: StructureParams, s: f64, eps: f64, n: usize, mirrored: bool) -> Result<PlanarCurve> {
    if !(s >= 0.0) || !(eps > 0.0) {
        return Err(LabError::InvalidParameter(format!("need s ≥ 0 and ε > 0, got s={s}, ε={eps}")));
    }
    if n < 2 {
        return Err(LabError::InvalidParameter("need at least two segments".into()));
    }
    let arc = gamma_length(params, 0.0, eps, LengthMode::Quadrature)?;
    let n_neg = if s > 0.0 {
        ((n as f64 * s / (s + arc)).round() as usize).clamp(1, n - 1)
    } else {
        0
    };
    let n_pos = n - n_neg;
    let mut pts = Vec::with_capacity(n + 1);
    for i in 0..n_neg {
        let t = -s + s * i as f64 / n_neg as f64;
        pts.push(gamma(params, t, mirrored).planar());
    }
    for i in 0..=n_pos {
        let t = eps * i as f64 / n_pos as f64;
        pts.push(gamma(params, t, mirrored).planar());
    }
    PlanarCurve::from_points(pts)
}

/// Exact holonomy of polyline segments.
///
/// Along a segment `P²` is a polynomial of degree `2b` in the segment
/// parameter, so a `b+1`-point Gauss–Legendre rule integrates `∫ẋ₂P²` exactly
/// up to roundoff. Every polyline is thereby treated as a genuine curve.
#[derive(Debug, Clone)]
pub struct HolonomyKernel {
    params: StructureParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl HolonomyKernel {
    pub fn new(params: StructureParams) -> Self {
        let (nodes, weights) = gauss_legendre_unit(params.b() as usize + 1);
        Self { params, nodes, weights }
    }

    pub fn params(&self) -> StructureParams {
        self.params
    }

    /// `∫ ẋ₂ P² dt` along the straight segment from `a` to `c`.
    pub fn segment(&self, a: PlanePoint, c: PlanePoint) -> f64 {
        let d2 = c.x2 - a.x2;
        if d2 == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (&tau, &w) in self.nodes.iter().zip(&self.weights) {
            let x = PlanePoint::new((1.0 - tau) * a.x1 + tau * c.x1, (1.0 - tau) * a.x2 + tau * c.x2);
            let p = self.params.eval_p(x);
            acc += w * p * p;
        }
        d2 * acc
    }

    /// Segment value and its gradient `[∂a₁, ∂a₂, ∂c₁, ∂c₂]`.
    pub fn segment_with_grad(&self, a: PlanePoint, c: PlanePoint) -> (f64, [f64; 4]) {
        let d2 = c.x2 - a.x2;
        let bf = f64::from(self.params.b());
        let mut val = 0.0;
        let mut g = [0.0; 4];
        for (&tau, &w) in self.nodes.iter().zip(&self.weights) {
            let x1 = (1.0 - tau) * a.x1 + tau * c.x1;
            let x2 = (1.0 - tau) * a.x2 + tau * c.x2;
            let x2b1 = x2.powi(self.params.b() as i32 - 1);
            let p = self.params.eval_p(PlanePoint::new(x1, x2));
            let p2 = p * p;
            val += w * p2;
            // ∂(P²)/∂x₁ and ∂(P²)/∂x₂
            let dp1 = 4.0 * p * x1;
            let dp2 = -2.0 * bf * p * x2b1;
            g[0] += w * dp1 * (1.0 - tau) * d2;
            g[2] += w * dp1 * tau * d2;
            g[1] += w * (dp2 * (1.0 - tau) * d2 - p2);
            g[3] += w * (dp2 * tau * d2 + p2);
        }
        (d2 * val, g)
    }

    /// Holonomy of the polyline through `points`.
    pub fn polyline(&self, points: &[PlanePoint]) -> f64 {
        points.windows(2).map(|w| self.segment(w[0], w[1])).sum()
    }

    /// Cumulative holonomy at every node, starting from 0.
    pub fn running(&self, points: &[PlanePoint]) -> Vec<f64> {
        let mut out = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in points.windows(2) {
            acc += self.segment(w[0], w[1]);
            out.push(acc);
        }
        out
    }
}

/// `∫ ω̇₂ P(ω)² dt` along the curve.
pub fn holonomy(params: StructureParams, curve: &PlanarCurve) -> Result<f64> {
    if curve.len() < 2 {
        return Err(LabError::InvalidCurve("holonomy of a single sample".into()));
    }
    Ok(HolonomyKernel::new(params).polyline(curve.points()))
}

/// Horizontal lift with initial third coordinate `z0`.
pub fn lift(params: StructureParams, curve: &PlanarCurve, z0: f64) -> Result<HorizontalCurve> {
    let running = HolonomyKernel::new(params).running(curve.points());
    let points = curve
        .points()
        .iter()
        .zip(&running)
        .map(|(p, h)| SpacePoint::new(p.x1, p.x2, z0 + h))
        .collect();
    HorizontalCurve::new(curve.times().to_vec(), points, curve.is_arc_length())
}

pub fn project(curve: &HorizontalCurve) -> PlanarCurve {
    curve.project()
}

pub fn curve_length(curve: &PlanarCurve) -> f64 {
    curve.length()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthMode {
    Quadrature,
    Asymptotic,
}

/// `L(γ_{s,ε})`, by quadrature of `√(1 + q²t^{2q−2})` or by its two-term expansion.
pub fn gamma_length(params: StructureParams, s: f64, eps: f64, mode: LengthMode) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(LabError::InvalidParameter(format!("ε must be positive, got {eps}")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(LabError::InvalidParameter(format!("s must be nonnegative, got {s}")));
    }
    Ok(s + eps + gamma_length_remainder(params, eps, mode))
}

/// `L(γ_{s,ε}) − s − ε`, computed without cancellation.
pub fn gamma_length_remainder(params: StructureParams, eps: f64, mode: LengthMode) -> f64 {
    let q = params.q();
    match mode {
        LengthMode::Asymptotic => q * q * eps.powf(2.0 * q - 1.0) / (2.0 * (2.0 * q - 1.0)),
        LengthMode::Quadrature => {
            // √(1+u) − 1 = u / (√(1+u) + 1), on t = εx and scaled by c = q²ε^{2q−2}
            let c = q * q * eps.powf(2.0 * q - 2.0);
            let f = move |x: f64| {
                let v = x.powf(2.0 * q - 2.0);
                v / ((1.0 + c * v).sqrt() + 1.0)
            };
            eps * c * integrate(f, 0.0, 1.0, 1e-14)
        }
    }
}

pub fn apply_phi(curve: &HorizontalCurve) -> HorizontalCurve {
    curve.apply_phi()
}

/// `(β, β̃)`: the maxima of `|P|` and `|P̃|` over the samples.
pub fn beta_values(params: StructureParams, curve: &PlanarCurve) -> (f64, f64) {
    curve.points().iter().fold((0.0f64, 0.0f64), |(b, bt), p| {
        (b.max(params.eval_p(*p).abs()), bt.max(params.eval_p_tilde(*p).abs()))
    })
}
