//! Curve exchange formats.
//!
//! JSON documents carry a header `{"b", "arc_length"}` and a `samples` array
//! of `{"t", "x1", "x2"[, "x3"]}` records; extremal traces add `theta` and
//! `lambda`. The CSV mirror has columns `t,x1,x2[,x3]`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::curve::{HorizontalCurve, PlanarCurve, PlanePoint, SpacePoint};
use crate::error::{LabError, Result};
use crate::flow::ExtremalTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDocument {
    pub b: u32,
    pub arc_length: bool,
    pub samples: Vec<Sample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl CurveDocument {
    pub fn from_planar(b: u32, curve: &PlanarCurve) -> Self {
        let samples = curve
            .times()
            .iter()
            .zip(curve.points())
            .map(|(&t, p)| Sample { t, x1: p.x1, x2: p.x2, x3: None })
            .collect();
        Self { b, arc_length: curve.is_arc_length(), samples, theta: None, lambda: None }
    }

    pub fn from_horizontal(b: u32, curve: &HorizontalCurve) -> Self {
        let samples = curve
            .times()
            .iter()
            .zip(curve.points())
            .map(|(&t, p)| Sample { t, x1: p.x1, x2: p.x2, x3: Some(p.x3) })
            .collect();
        Self { b, arc_length: curve.is_arc_length(), samples, theta: None, lambda: None }
    }

    pub fn from_trace(b: u32, trace: &ExtremalTrace) -> Self {
        let mut doc = Self::from_planar(b, &trace.curve);
        doc.theta = Some(trace.theta.clone());
        doc.lambda = Some(trace.lambda);
        doc
    }

    /// Planar curve; the arc-length check is applied when the header says so.
    pub fn to_planar(&self) -> Result<PlanarCurve> {
        let times = self.samples.iter().map(|s| s.t).collect();
        let points = self.samples.iter().map(|s| PlanePoint::new(s.x1, s.x2)).collect();
        PlanarCurve::new(times, points, self.arc_length)
    }

    pub fn to_horizontal(&self) -> Result<HorizontalCurve> {
        let mut points = Vec::with_capacity(self.samples.len());
        for (i, s) in self.samples.iter().enumerate() {
            let x3 = s
                .x3
                .ok_or_else(|| LabError::InvalidCurve(format!("sample {i} has no x3")))?;
            points.push(SpacePoint::new(s.x1, s.x2, x3));
        }
        HorizontalCurve::new(self.samples.iter().map(|s| s.t).collect(), points, self.arc_length)
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json(r: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    /// CSV mirror; `x3` is written only when every sample has it.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let with_x3 = !self.samples.is_empty() && self.samples.iter().all(|s| s.x3.is_some());
        let mut wr = csv::Writer::from_writer(w);
        if with_x3 {
            wr.write_record(["t", "x1", "x2", "x3"])?;
        } else {
            wr.write_record(["t", "x1", "x2"])?;
        }
        for s in &self.samples {
            let mut row = vec![fmt_f64(s.t), fmt_f64(s.x1), fmt_f64(s.x2)];
            if with_x3 {
                row.push(fmt_f64(s.x3.unwrap_or_default()));
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(b: u32, arc_length: bool, r: impl Read) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut samples = Vec::new();
        for rec in rd.deserialize() {
            let s: Sample = rec?;
            samples.push(s);
        }
        Ok(Self { b, arc_length, samples, theta: None, lambda: None })
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_csv_round_trip() {
        let c = PlanarCurve::from_points(vec![
            PlanePoint::new(0.1, -0.3),
            PlanePoint::new(0.2, 0.7),
            PlanePoint::new(1.0 / 3.0, 0.9),
        ])
        .unwrap();
        let doc = CurveDocument::from_planar(5, &c);
        let mut buf = Vec::new();
        doc.write_json(&mut buf).unwrap();
        let back = CurveDocument::read_json(buf.as_slice()).unwrap().to_planar().unwrap();
        assert_eq!(back, c);

        let mut buf = Vec::new();
        doc.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2\n"));
        let back = CurveDocument::read_csv(5, true, buf.as_slice()).unwrap().to_planar().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_header_keys_are_rejected() {
        let text = r#"{"b":5,"arc_length":false,"samples":[],"colour":1}"#;
        assert!(CurveDocument::read_json(text.as_bytes()).is_err());
    }
}
