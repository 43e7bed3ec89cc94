//! Pareto-front quality indicators.
//!
//! Conventions: GD and IGD are arithmetic means of Euclidean nearest
//! distances (exponent 1). Hypervolume is exact for two and three
//! objectives. Spread is Deb's Δ for two objectives and the generalized
//! nearest-neighbour form for three.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Exponent of the GD/IGD power mean.
pub const GD_EXPONENT: u32 = 1;

/// A nonempty set of objective vectors of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontApproximation {
    points: Vec<Vec<f64>>,
}

impl FrontApproximation {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let m = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::UndefinedMetric("empty front".into()))?;
        if let Some(p) = points.iter().find(|p| p.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: p.len(),
            });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn num_objectives(&self) -> usize {
        self.points[0].len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub hypervolume: f64,
    pub gd: f64,
    pub igd: f64,
    pub spread: f64,
    pub reference_point: Vec<f64>,
    /// Set when every point was discarded before the hypervolume sweep.
    pub hv_empty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypervolume {
    pub value: f64,
    /// No point was strictly better than the reference in every objective.
    pub empty: bool,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn nearest(p: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter()
        .map(|q| distance(p, q))
        .fold(f64::INFINITY, f64::min)
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Exact dominated volume bounded by `reference`.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<Hypervolume> {
    let m = reference.len();
    if !(2..=3).contains(&m) {
        return Err(Error::UnsupportedObjectiveCount(m));
    }
    if let Some(p) = front.iter().find(|p| p.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: p.len(),
        });
    }
    let mut kept: Vec<&[f64]> = front
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(v, r)| v < r))
        .map(Vec::as_slice)
        .collect();
    if kept.is_empty() {
        log::warn!("hypervolume: no point is better than the reference point");
        return Ok(Hypervolume {
            value: 0.0,
            empty: true,
        });
    }
    let value = match m {
        2 => {
            kept.sort_by(|a, b| lex(a, b));
            hv2d_sorted(&kept, reference)
        }
        _ => hv3d(kept, reference),
    };
    Ok(Hypervolume {
        value,
        empty: false,
    })
}

/// Points sorted lexicographically; only the first two coordinates are used.
fn hv2d_sorted(points: &[&[f64]], reference: &[f64]) -> f64 {
    let mut area = 0.0;
    let mut floor = reference[1];
    for p in points {
        if p[1] < floor {
            area += (reference[0] - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    area
}

fn hv3d(mut points: Vec<&[f64]>, reference: &[f64]) -> f64 {
    points.sort_by(|a, b| a[2].total_cmp(&b[2]).then_with(|| lex(a, b)));
    let mut volume = 0.0;
    let mut slice: Vec<&[f64]> = Vec::with_capacity(points.len());
    let mut i = 0;
    while i < points.len() {
        let z = points[i][2];
        while i < points.len() && points[i][2] == z {
            let p = points[i];
            let at = slice.partition_point(|q| lex(q, p).is_lt());
            slice.insert(at, p);
            i += 1;
        }
        let next_z = points.get(i).map_or(reference[2], |p| p[2]);
        volume += hv2d_sorted(&slice, reference) * (next_z - z);
    }
    volume
}

/// Mean distance from each approximation point to the nearest truth point.
pub fn gd(approx: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    approx.iter().map(|a| nearest(a, truth)).sum::<f64>() / approx.len() as f64
}

/// Mean distance from each truth point to the nearest approximation point.
pub fn igd(approx: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    gd(truth, approx)
}

/// Spread Δ of `approx` relative to the extremes of `truth`.
pub fn spread(approx: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64> {
    if approx.len() < 2 {
        return Err(Error::UndefinedMetric(format!(
            "spread needs at least 2 points, got {}",
            approx.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::UndefinedMetric(
            "spread needs a nonempty truth set".into(),
        ));
    }
    let m = approx[0].len();
    match m {
        2 => Ok(spread_2d(approx, truth)),
        3 => Ok(spread_generalized(approx, truth)),
        other => Err(Error::UnsupportedObjectiveCount(other)),
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn spread_2d(approx: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    let mut a: Vec<&Vec<f64>> = approx.iter().collect();
    a.sort_by(|x, y| lex(x, y));
    let first_t = truth.iter().min_by(|x, y| lex(x, y)).expect("nonempty");
    let last_t = truth.iter().max_by(|x, y| lex(x, y)).expect("nonempty");
    let d_f = distance(a[0], first_t);
    let d_l = distance(a[a.len() - 1], last_t);
    let gaps: Vec<f64> = a.windows(2).map(|w| distance(w[0], w[1])).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let dev: f64 = gaps.iter().map(|d| (d - mean).abs()).sum();
    ratio(d_f + d_l + dev, d_f + d_l + gaps.len() as f64 * mean)
}

fn spread_generalized(approx: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    let m = approx[0].len();
    let extremes: f64 = (0..m)
        .map(|j| {
            let e = truth
                .iter()
                .max_by(|x, y| x[j].total_cmp(&y[j]).then_with(|| lex(y, x)))
                .expect("nonempty");
            nearest(e, approx)
        })
        .sum();
    let nn: Vec<f64> = approx
        .iter()
        .enumerate()
        .map(|(i, p)| {
            approx
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nn.iter().sum::<f64>() / nn.len() as f64;
    let dev: f64 = nn.iter().map(|d| (d - mean).abs()).sum();
    ratio(extremes + dev, extremes + nn.len() as f64 * mean)
}

/// Truth bounding box stretched by 10% past its upper corner.
pub fn default_reference_point(truth: &[Vec<f64>]) -> Vec<f64> {
    let m = truth[0].len();
    (0..m)
        .map(|i| {
            let lo = truth.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
            let hi = truth.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
            lo + 1.1 * (hi - lo)
        })
        .collect()
}

/// All four indicators for one approximation.
pub fn evaluate_front(
    approx: &FrontApproximation,
    truth: &[Vec<f64>],
    reference: Option<&[f64]>,
) -> Result<MetricReport> {
    let reference = reference.map_or_else(|| default_reference_point(truth), <[f64]>::to_vec);
    let hv = hypervolume(approx.points(), &reference)?;
    Ok(MetricReport {
        hypervolume: hv.value,
        gd: gd(approx.points(), truth),
        igd: igd(approx.points(), truth),
        spread: spread(approx.points(), truth)?,
        reference_point: reference,
        hv_empty: hv.empty,
    })
}

impl MetricReport {
    pub fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("hypervolume", self.hypervolume),
            ("gd", self.gd),
            ("igd", self.igd),
            ("spread", self.spread),
        ]
    }
}
