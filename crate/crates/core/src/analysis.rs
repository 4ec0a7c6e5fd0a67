//! Graphs of `Y1 = step(Y0)`, box-counting dimension, and ratio tests for the
//! power series whose coefficients are the system's values.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::adds::AddsSpec;
use crate::error::{Error, Result};
use crate::ivt::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundingBox {
    pub x_min: Value,
    pub x_max: Value,
    pub y_min: Value,
    pub y_max: Value,
}

impl BoundingBox {
    fn of(points: &[(Value, Value)]) -> Option<Self> {
        let first = points.first()?;
        let mut b = BoundingBox {
            x_min: first.0,
            x_max: first.0,
            y_min: first.1,
            y_max: first.1,
        };
        for &(x, y) in points {
            b.x_min = b.x_min.min(x);
            b.x_max = b.x_max.max(x);
            b.y_min = b.y_min.min(y);
            b.y_max = b.y_max.max(y);
        }
        Some(b)
    }

    /// Maps a point into the unit square; a flat axis maps to 0.
    fn normalize(&self, (x, y): (Value, Value)) -> (f64, f64) {
        let scale = |v: Value, lo: Value, hi: Value| {
            if hi > lo {
                (v - lo) as f64 / (hi - lo) as f64
            } else {
                0.0
            }
        };
        (
            scale(x, self.x_min, self.x_max),
            scale(y, self.y_min, self.y_max),
        )
    }
}

/// Exact samples `(Y0, step(Y0))` for `Y0` in `0..n_points`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSample {
    pub spec: AddsSpec,
    pub points: Vec<(Value, Value)>,
    pub normalization: BoundingBox,
}

impl GraphSample {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["Y0", "Y1"]).map_err(csv_err)?;
        for (x, y) in &self.points {
            w.write_record([x.to_string(), y.to_string()])
                .map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

pub(crate) fn csv_err(e: impl fmt::Display) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}

pub fn graph_points(spec: &AddsSpec, n_points: Value) -> Result<GraphSample> {
    let min = spec.base().pow(3)?;
    if n_points < min {
        return Err(Error::InvalidParameter(format!(
            "n_points {n_points} must be at least p^3 = {min}"
        )));
    }
    let points = (0..n_points)
        .map(|y| Ok((y, spec.step(y)?)))
        .collect::<Result<Vec<_>>>()?;
    let normalization = BoundingBox::of(&points).expect("n_points >= p^3 > 0");
    Ok(GraphSample {
        spec: spec.clone(),
        points,
        normalization,
    })
}

/// What gets covered by boxes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMode {
    /// The sample points alone.
    Points,
    /// The piecewise-linear curve through consecutive samples, as plotted.
    #[default]
    Polyline,
}

impl std::str::FromStr for CoverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "points" => Ok(CoverMode::Points),
            "polyline" => Ok(CoverMode::Polyline),
            _ => Err(Error::InvalidParameter(format!("unknown cover mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountFit {
    pub mode: CoverMode,
    pub levels: Vec<u32>,
    /// Box side `1/p^level` on the normalized unit square.
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub dimension: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
}

impl BoxCountFit {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["level", "scale", "count"])
            .map_err(csv_err)?;
        for ((l, s), c) in self.levels.iter().zip(&self.scales).zip(&self.counts) {
            w.write_record([l.to_string(), format!("{s:.12}"), c.to_string()])
                .map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

fn cell(v: f64, k: u64) -> u64 {
    ((v * k as f64).floor() as u64).min(k - 1)
}

fn count_points(points: &[(f64, f64)], k: u64) -> u64 {
    let occupied: HashSet<(u64, u64)> = points
        .iter()
        .map(|&(x, y)| (cell(x, k), cell(y, k)))
        .collect();
    occupied.len() as u64
}

fn count_polyline(points: &[(f64, f64)], k: u64) -> u64 {
    let mut occupied: HashSet<(u64, u64)> = HashSet::new();
    if let [(x, y)] = points {
        occupied.insert((cell(*x, k), cell(*y, k)));
    }
    let kf = k as f64;
    for seg in points.windows(2) {
        let ((ax, ay), (bx, by)) = if seg[0].0 <= seg[1].0 {
            (seg[0], seg[1])
        } else {
            (seg[1], seg[0])
        };
        let y_at = |x: f64| {
            if bx > ax {
                ay + (x - ax) / (bx - ax) * (by - ay)
            } else {
                ay
            }
        };
        for c in cell(ax, k)..=cell(bx, k) {
            let lo = ax.max(c as f64 / kf);
            let hi = bx.min((c + 1) as f64 / kf);
            let (ya, yb) = if bx > ax {
                (y_at(lo), y_at(hi))
            } else {
                (ay, by)
            };
            for r in cell(ya.min(yb), k)..=cell(ya.max(yb), k) {
                occupied.insert((c, r));
            }
        }
    }
    occupied.len() as u64
}

/// Least-squares slope and RMS residual of `ys` against `xs`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    (slope, (ss / n).sqrt())
}

/// Box-counting dimension on the base-p grid hierarchy `1/p^level`.
pub fn box_dimension(sample: &GraphSample, levels: &[u32], mode: CoverMode) -> Result<BoxCountFit> {
    if levels.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 scale levels, got {}",
            levels.len()
        )));
    }
    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != levels.len() || sorted[0] == 0 {
        return Err(Error::InvalidParameter(
            "scale levels must be distinct and positive".into(),
        ));
    }
    let first = sample.points.first().copied();
    if sample.points.iter().all(|&pt| Some(pt) == first) {
        return Err(Error::DegenerateSample("all points are identical".into()));
    }
    let base = sample.spec.base();
    let unit: Vec<(f64, f64)> = sample
        .points
        .iter()
        .map(|&pt| sample.normalization.normalize(pt))
        .collect();
    let mut scales = Vec::with_capacity(sorted.len());
    let mut counts = Vec::with_capacity(sorted.len());
    for &level in &sorted {
        let k = base.pow(level)?;
        scales.push(1.0 / k as f64);
        counts.push(match mode {
            CoverMode::Points => count_points(&unit, k),
            CoverMode::Polyline => count_polyline(&unit, k),
        });
    }
    let xs: Vec<f64> = scales.iter().map(|s| -s.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (dimension, fit_residual) = least_squares(&xs, &ys);
    Ok(BoxCountFit {
        mode,
        levels: sorted,
        scales,
        counts,
        dimension,
        fit_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    RadiusOne,
    /// Ratios settle on a limit other than 1.
    OtherRadius,
    NonConvergent,
    DegenerateZeroTerms,
}

impl fmt::Display for SeriesVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesVerdict::RadiusOne => "radius-one",
            SeriesVerdict::OtherRadius => "other-radius",
            SeriesVerdict::NonConvergent => "non-convergent",
            SeriesVerdict::DegenerateZeroTerms => "degenerate-zero-terms",
        })
    }
}

/// Ratios within this spread over the tail count as settled.
pub const SETTLED_SPREAD: f64 = 1e-3;

/// A settled limit this close to 1 is reported as radius one. The tail mean
/// of `(n+1)/(n+2)` sits about `1/n` below 1, so this is looser than the
/// settling spread.
pub const RADIUS_ONE_TOLERANCE: f64 = 1e-2;

/// Coefficients `a_n` and ratio-test quotients `|a_n / a_(n+1)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSeries {
    pub spec: AddsSpec,
    pub terms: Vec<Value>,
    /// `ratios[n]` is `|a_n / a_(n+1)|`, absent where `a_(n+1) = 0`.
    pub ratios: Vec<Option<f64>>,
    /// Indices `n` whose ratio is undefined.
    pub undefined_at: Vec<usize>,
    /// First index of the tail used for the limit estimate.
    pub tail_start: usize,
    pub tail_spread: Option<f64>,
    pub limit_estimate: Option<f64>,
    pub verdict: SeriesVerdict,
}

impl RatioSeries {
    /// `max - min` of the defined ratios with index in `lo..hi`.
    pub fn spread(&self, lo: usize, hi: usize) -> Option<f64> {
        let hi = hi.min(self.ratios.len());
        let vals: Vec<f64> = self.ratios.get(lo..hi)?.iter().flatten().copied().collect();
        let max = vals.iter().copied().reduce(f64::max)?;
        let min = vals.iter().copied().reduce(f64::min)?;
        Some(max - min)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "a_n", "ratio"]).map_err(csv_err)?;
        for (n, a) in self.terms.iter().enumerate() {
            let r = self
                .ratios
                .get(n)
                .copied()
                .flatten()
                .map_or_else(String::new, |r| format!("{r:.12}"));
            w.write_record([n.to_string(), a.to_string(), r])
                .map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

/// Coefficient `a_n` of the series: `A*IVT(n) + B` for type I,
/// `IVT(a*n + b)` for type II. Both are one step of the system from `n`.
pub fn series_term(spec: &AddsSpec, n: Value) -> Result<Value> {
    spec.step(n)
}

/// Ratio test over `a_0..=a_(n_max)`. The limit is estimated from the last
/// tenth of the ratios and accepted only if their spread is below
/// [`SETTLED_SPREAD`].
pub fn ratio_sequence(spec: &AddsSpec, n_max: usize) -> Result<RatioSeries> {
    if n_max < 100 {
        return Err(Error::InvalidParameter(format!(
            "n_max {n_max} must be at least 100"
        )));
    }
    let terms = (0..=n_max as Value)
        .map(|n| series_term(spec, n))
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = Vec::with_capacity(n_max);
    let mut undefined_at = Vec::new();
    for n in 0..n_max {
        if terms[n + 1] == 0 {
            undefined_at.push(n);
            ratios.push(None);
        } else {
            ratios.push(Some(terms[n] as f64 / terms[n + 1] as f64));
        }
    }
    let tail_start = n_max - n_max / 10;
    let tail: Vec<f64> = ratios[tail_start..].iter().flatten().copied().collect();
    let mut series = RatioSeries {
        spec: spec.clone(),
        terms,
        ratios,
        undefined_at,
        tail_start,
        tail_spread: None,
        limit_estimate: None,
        verdict: SeriesVerdict::NonConvergent,
    };
    if series.terms.iter().all(|&a| a == 0) || tail.is_empty() {
        series.verdict = SeriesVerdict::DegenerateZeroTerms;
        return Ok(series);
    }
    let spread = series.spread(tail_start, n_max).expect("tail is non-empty");
    series.tail_spread = Some(spread);
    if spread < SETTLED_SPREAD {
        let limit = tail.iter().sum::<f64>() / tail.len() as f64;
        series.limit_estimate = Some(limit);
        series.verdict = if (limit - 1.0).abs() < RADIUS_ONE_TOLERANCE {
            SeriesVerdict::RadiusOne
        } else {
            SeriesVerdict::OtherRadius
        };
    }
    Ok(series)
}
