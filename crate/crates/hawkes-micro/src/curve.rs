//! Sampled curves over a grid of time scales, with CSV and JSON encodings
//! shared by the analytics, empirics, and CLI layers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("invalid curve: {0}")]
    Invalid(String),
    #[error("tau grids do not match at index {index}: {left} vs {right}")]
    GridMismatch { index: usize, left: f64, right: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// One sample of a curve at scale `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

/// A curve sampled on a strictly increasing grid of positive scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    points: Vec<CurvePoint>,
}

impl Curve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self, CurveError> {
        let mut prev = 0.0f64;
        for (i, p) in points.iter().enumerate() {
            if !(p.tau > 0.0) || !p.tau.is_finite() {
                return Err(CurveError::Invalid(format!(
                    "tau must be positive and finite, got {} at index {i}",
                    p.tau
                )));
            }
            if p.tau <= prev {
                return Err(CurveError::Invalid(format!(
                    "taus must be strictly increasing, got {} after {prev} at index {i}",
                    p.tau
                )));
            }
            prev = p.tau;
        }
        Ok(Self { points })
    }

    /// Pair a grid with values, without standard errors.
    pub fn from_values(taus: &[f64], values: &[f64]) -> Result<Self, CurveError> {
        if taus.len() != values.len() {
            return Err(CurveError::Invalid(format!(
                "{} taus vs {} values",
                taus.len(),
                values.len()
            )));
        }
        Self::new(
            taus.iter()
                .zip(values.iter())
                .map(|(&tau, &value)| CurvePoint { tau, value, stderr: None })
                .collect(),
        )
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pointwise mean and standard error across several curves sharing one
    /// grid. A single curve comes back with zero standard errors.
    pub fn aggregate(curves: &[Curve]) -> Result<Curve, CurveError> {
        let first = curves
            .first()
            .ok_or_else(|| CurveError::Invalid("no curves to aggregate".into()))?;
        for c in curves.iter().skip(1) {
            if c.len() != first.len() {
                return Err(CurveError::GridMismatch {
                    index: first.len().min(c.len()),
                    left: f64::NAN,
                    right: f64::NAN,
                });
            }
            for (i, (a, b)) in first.points.iter().zip(c.points.iter()).enumerate() {
                if a.tau != b.tau {
                    return Err(CurveError::GridMismatch { index: i, left: a.tau, right: b.tau });
                }
            }
        }
        let n = curves.len() as f64;
        let points = (0..first.len())
            .map(|i| {
                let mean = curves.iter().map(|c| c.points[i].value).sum::<f64>() / n;
                let stderr = if curves.len() < 2 {
                    0.0
                } else {
                    let ss = curves
                        .iter()
                        .map(|c| {
                            let d = c.points[i].value - mean;
                            d * d
                        })
                        .sum::<f64>();
                    (ss / (n - 1.0)).sqrt() / n.sqrt()
                };
                CurvePoint { tau: first.points[i].tau, value: mean, stderr: Some(stderr) }
            })
            .collect();
        Ok(Curve { points })
    }

    /// Write as CSV with columns `tau,value[,stderr]`. The stderr column is
    /// present when any point carries one.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), CurveError> {
        let mut w = writer;
        let with_stderr = self.points.iter().any(|p| p.stderr.is_some());
        if with_stderr {
            writeln!(w, "tau,value,stderr")?;
            for p in &self.points {
                writeln!(w, "{},{},{}", p.tau, p.value, p.stderr.unwrap_or(0.0))?;
            }
        } else {
            writeln!(w, "tau,value")?;
            for p in &self.points {
                writeln!(w, "{},{}", p.tau, p.value)?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self, CurveError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let with_stderr = headers.iter().any(|h| h.trim() == "stderr");
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64, CurveError> {
                rec.get(i)
                    .ok_or_else(|| CurveError::Invalid(format!("missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| CurveError::Invalid(format!("bad number: {e}")))
            };
            points.push(CurvePoint {
                tau: get(0)?,
                value: get(1)?,
                stderr: if with_stderr { Some(get(2)?) } else { None },
            });
        }
        Self::new(points)
    }

    /// JSON mirror of the CSV encoding, same field names.
    pub fn write_json<W: std::io::Write>(&self, writer: W) -> Result<(), CurveError> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(reader: R) -> Result<Self, CurveError> {
        let curve: Curve = serde_json::from_reader(reader)?;
        Self::new(curve.points)
    }
}

/// Log-spaced grid of `n` scales in `[lo, hi]` (inclusive at both ends).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "need 0 < lo < hi and n >= 2");
    let (a, b) = (lo.ln(), hi.ln());
    let mut taus: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    // Guard against roundoff breaking strict monotonicity on dense grids.
    taus.dedup_by(|b, a| b <= a);
    taus
}

/// Linearly spaced grid of `n` scales in `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "need 0 < lo < hi and n >= 2");
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_taus() {
        assert!(Curve::from_values(&[1.0, 1.0], &[0.0, 0.0]).is_err());
        assert!(Curve::from_values(&[2.0, 1.0], &[0.0, 0.0]).is_err());
        assert!(Curve::from_values(&[0.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn aggregate_single_curve_has_zero_stderr() {
        let c = Curve::from_values(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        let agg = Curve::aggregate(std::slice::from_ref(&c)).unwrap();
        assert_eq!(agg.values(), vec![3.0, 4.0]);
        assert!(agg.points().iter().all(|p| p.stderr == Some(0.0)));
    }

    #[test]
    fn aggregate_identical_copies_has_zero_stderr() {
        let c = Curve::from_values(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        let agg = Curve::aggregate(&[c.clone(), c.clone(), c]).unwrap();
        assert!(agg.points().iter().all(|p| p.stderr == Some(0.0)));
    }

    #[test]
    fn aggregate_rejects_grid_mismatch() {
        let a = Curve::from_values(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        let b = Curve::from_values(&[1.0, 3.0], &[0.0, 0.0]).unwrap();
        assert!(Curve::aggregate(&[a, b]).is_err());
    }

    #[test]
    fn csv_roundtrip_with_stderr() {
        let c = Curve::new(vec![
            CurvePoint { tau: 1.0, value: 0.25, stderr: Some(0.01) },
            CurvePoint { tau: 10.0, value: 0.125, stderr: Some(0.02) },
        ])
        .unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = Curve::read_csv(&buf[..]).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn json_roundtrip() {
        let c = Curve::from_values(&[1.0, 2.0, 5.0], &[0.3, 0.2, 0.1]).unwrap();
        let mut buf = Vec::new();
        c.write_json(&mut buf).unwrap();
        let back = Curve::read_json(&buf[..]).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1.0, 1000.0, 50);
        assert_eq!(g.len(), 50);
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[49] - 1000.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
