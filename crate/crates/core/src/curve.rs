//! Point and curve types shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Relative tolerance for the arc-length parametrization check.
pub const TOL_ARC: f64 = 1e-8;

/// A point of the plane `(x₁, x₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x1: f64,
    pub x2: f64,
}

impl PlanePoint {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// Image under `x₁ ↦ −x₁`.
    pub fn mirrored(&self) -> Self {
        Self::new(-self.x1, self.x2)
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    pub fn lerp(&self, other: &PlanePoint, u: f64) -> PlanePoint {
        PlanePoint::new(self.x1 + u * (other.x1 - self.x1), self.x2 + u * (other.x2 - self.x2))
    }
}

/// A point of ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl SpacePoint {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    /// Projection onto the first two coordinates.
    pub fn planar(&self) -> PlanePoint {
        PlanePoint::new(self.x1, self.x2)
    }
}

/// A time-stamped polyline in the plane.
///
/// Times are strictly increasing and there are at least two samples. When
/// the arc-length flag is set, consecutive samples are checked to satisfy
/// `|Δpoint| = Δt` up to [`TOL_ARC`] (relative).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarCurve {
    times: Vec<f64>,
    points: Vec<PlanePoint>,
    arc_length: bool,
}

impl PlanarCurve {
    pub fn new(times: Vec<f64>, points: Vec<PlanePoint>, arc_length: bool) -> Result<Self> {
        validate_samples(&times, points.len(), points.iter().all(PlanePoint::is_finite))?;
        if arc_length {
            for i in 1..points.len() {
                let chord = points[i].dist(&points[i - 1]);
                let dt = times[i] - times[i - 1];
                if (chord - dt).abs() > TOL_ARC * dt.max(chord) {
                    return Err(LabError::InvalidCurve(format!(
                        "segment {} has chord {chord:e} but Δt {dt:e}: not arc-length",
                        i - 1
                    )));
                }
            }
        }
        Ok(Self { times, points, arc_length })
    }

    /// Polyline through `points`, parametrized by cumulative chord length.
    ///
    /// Consecutive duplicate points are rejected since they would produce a
    /// zero time step.
    pub fn from_points(points: Vec<PlanePoint>) -> Result<Self> {
        let mut times = Vec::with_capacity(points.len());
        let mut t = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                t += p.dist(&points[i - 1]);
            }
            times.push(t);
        }
        validate_samples(&times, points.len(), points.iter().all(PlanePoint::is_finite))?;
        Ok(Self { times, points, arc_length: true })
    }

    /// Curve whose times come from an arc-length ODE rather than from chords.
    ///
    /// The chord check is skipped: chords of a curved trace fall short of the
    /// time step by `O(h³κ²)`.
    pub(crate) fn from_arc_length_ode(times: Vec<f64>, points: Vec<PlanePoint>) -> Result<Self> {
        validate_samples(&times, points.len(), points.iter().all(PlanePoint::is_finite))?;
        Ok(Self { times, points, arc_length: true })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_arc_length(&self) -> bool {
        self.arc_length
    }

    pub fn start(&self) -> PlanePoint {
        self.points[0]
    }

    pub fn end(&self) -> PlanePoint {
        *self.points.last().expect("curve has samples")
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("curve has samples")
    }

    /// Euclidean length: the sum of chord lengths.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    /// Same samples traversed backwards; times become `t_end − t`.
    pub fn reversed(&self) -> Self {
        let t_end = self.t_end();
        let t0 = self.t_start();
        let times = self.times.iter().rev().map(|t| t0 + (t_end - t)).collect();
        let points = self.points.iter().rev().copied().collect();
        Self { times, points, arc_length: self.arc_length }
    }

    /// Image under `x₁ ↦ −x₁`.
    pub fn mirrored(&self) -> Self {
        Self {
            times: self.times.clone(),
            points: self.points.iter().map(PlanePoint::mirrored).collect(),
            arc_length: self.arc_length,
        }
    }

    /// Concatenation `self ∗ other`; `other` must start where `self` ends
    /// (within `tol`). The shared point is kept once.
    pub fn concat(&self, other: &PlanarCurve, tol: f64) -> Result<Self> {
        if self.end().dist(&other.start()) > tol {
            return Err(LabError::InvalidCurve(format!(
                "cannot concatenate: gap {:e} exceeds {tol:e}",
                self.end().dist(&other.start())
            )));
        }
        let shift = self.t_end() - other.t_start();
        let mut times = self.times.clone();
        let mut points = self.points.clone();
        times.extend(other.times[1..].iter().map(|t| t + shift));
        points.extend_from_slice(&other.points[1..]);
        let arc_length = self.arc_length && other.arc_length;
        validate_samples(&times, points.len(), true)?;
        Ok(Self { times, points, arc_length })
    }

    /// Linear interpolation of the polyline at time `t` (clamped).
    pub fn point_at(&self, t: f64) -> PlanePoint {
        let (i, u) = self.locate(t);
        self.points[i].lerp(&self.points[i + 1], u)
    }

    /// Segment index `i` and fraction `u ∈ [0, 1]` with `t = t_i + u Δt_i`.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.times.len();
        if t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 2, 1.0);
        }
        let i = match self.times.binary_search_by(|x| x.partial_cmp(&t).expect("finite times")) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let u = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        (i, u.clamp(0.0, 1.0))
    }

    /// The restriction to `[t0, t1]`, with interpolated end samples.
    pub fn sub_curve(&self, t0: f64, t1: f64) -> Result<Self> {
        if !(t0 < t1) {
            return Err(LabError::InvalidParameter(format!("empty time window [{t0}, {t1}]")));
        }
        let mut times = vec![t0];
        let mut points = vec![self.point_at(t0)];
        for (t, p) in self.times.iter().zip(&self.points) {
            if *t > t0 && *t < t1 {
                times.push(*t);
                points.push(*p);
            }
        }
        times.push(t1);
        points.push(self.point_at(t1));
        PlanarCurve::new(times, points, false).map(|mut c| {
            c.arc_length = self.arc_length;
            c
        })
    }
}

fn validate_samples(times: &[f64], n_points: usize, finite: bool) -> Result<()> {
    if times.len() != n_points {
        return Err(LabError::InvalidCurve(format!(
            "{} times for {} points",
            times.len(),
            n_points
        )));
    }
    if n_points < 2 {
        return Err(LabError::InvalidCurve("a curve needs at least two samples".into()));
    }
    if !finite || times.iter().any(|t| !t.is_finite()) {
        return Err(LabError::InvalidCurve("non-finite sample".into()));
    }
    if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidCurve(format!("times not strictly increasing at sample {}", i + 1)));
    }
    Ok(())
}

/// A curve in ℝ³, normally the lift of a [`PlanarCurve`].
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalCurve {
    times: Vec<f64>,
    points: Vec<SpacePoint>,
    arc_length: bool,
}

impl HorizontalCurve {
    pub fn new(times: Vec<f64>, points: Vec<SpacePoint>, arc_length: bool) -> Result<Self> {
        validate_samples(&times, points.len(), points.iter().all(SpacePoint::is_finite))?;
        Ok(Self { times, points, arc_length })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[SpacePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_arc_length(&self) -> bool {
        self.arc_length
    }

    /// Sub-Riemannian length, which equals the Euclidean length of the projection.
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].x1 - w[0].x1).hypot(w[1].x2 - w[0].x2))
            .sum()
    }

    /// Projection `pr` onto the plane; exact inverse of the lift.
    pub fn project(&self) -> PlanarCurve {
        PlanarCurve {
            times: self.times.clone(),
            points: self.points.iter().map(SpacePoint::planar).collect(),
            arc_length: self.arc_length,
        }
    }

    /// Pointwise `(x₁, x₂, x₃) ↦ (−x₁, x₂, x₃)`.
    pub fn apply_phi(&self) -> Self {
        Self {
            times: self.times.clone(),
            points: self
                .points
                .iter()
                .map(|p| SpacePoint::new(-p.x1, p.x2, p.x3))
                .collect(),
            arc_length: self.arc_length,
        }
    }
}
