//! ZDT and DTLZ test problems with analytic Pareto-front samplers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::BoxBounds;
use crate::pareto;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
    Dtlz1,
    Dtlz2,
    Dtlz3,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 8] = [
        ProblemKind::Zdt1,
        ProblemKind::Zdt2,
        ProblemKind::Zdt3,
        ProblemKind::Zdt4,
        ProblemKind::Zdt6,
        ProblemKind::Dtlz1,
        ProblemKind::Dtlz2,
        ProblemKind::Dtlz3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Zdt1 => "zdt1",
            ProblemKind::Zdt2 => "zdt2",
            ProblemKind::Zdt3 => "zdt3",
            ProblemKind::Zdt4 => "zdt4",
            ProblemKind::Zdt6 => "zdt6",
            ProblemKind::Dtlz1 => "dtlz1",
            ProblemKind::Dtlz2 => "dtlz2",
            ProblemKind::Dtlz3 => "dtlz3",
        }
    }

    pub fn default_dim(self) -> usize {
        match self {
            ProblemKind::Zdt1 | ProblemKind::Zdt2 | ProblemKind::Zdt3 => 30,
            ProblemKind::Zdt4 | ProblemKind::Zdt6 => 10,
            ProblemKind::Dtlz1 => 7,
            ProblemKind::Dtlz2 | ProblemKind::Dtlz3 => 12,
        }
    }

    pub fn num_objectives(self) -> usize {
        match self {
            ProblemKind::Dtlz1 | ProblemKind::Dtlz2 | ProblemKind::Dtlz3 => 3,
            _ => 2,
        }
    }

    fn is_dtlz(self) -> bool {
        self.num_objectives() == 3
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::UnknownProblem(vec![s.to_string()]))
    }
}

/// A benchmark instance: objective map, box bounds and objective count.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkProblem {
    kind: ProblemKind,
    bounds: BoxBounds,
}

impl BenchmarkProblem {
    /// Instance at the default decision dimension.
    pub fn new(kind: ProblemKind) -> Self {
        Self::with_dim(kind, kind.default_dim()).expect("default dimension is valid")
    }

    pub fn with_dim(kind: ProblemKind, dim: usize) -> Result<Self> {
        let min_dim = if kind.is_dtlz() {
            kind.num_objectives()
        } else {
            2
        };
        if dim < min_dim {
            return Err(Error::InvalidDimension(dim));
        }
        let bounds = match kind {
            ProblemKind::Zdt4 => {
                let mut lower = vec![-5.0; dim];
                let mut upper = vec![5.0; dim];
                lower[0] = 0.0;
                upper[0] = 1.0;
                BoxBounds::new(lower, upper)?
            }
            _ => BoxBounds::unit(dim)?,
        };
        Ok(Self { kind, bounds })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::new(name.parse()?))
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn num_objectives(&self) -> usize {
        self.kind.num_objectives()
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    /// Ideal point of every problem in the registry.
    pub fn ideal_point(&self) -> Vec<f64> {
        vec![0.0; self.num_objectives()]
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if !self.bounds.contains(x) {
            return Err(Error::Domain(format!(
                "{} decision vector outside bounds",
                self.name()
            )));
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Evaluates without checking length or bounds.
    pub fn evaluate_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            ProblemKind::Zdt1 => {
                let g = zdt_linear_g(x);
                vec![x[0], g * (1.0 - (x[0] / g).sqrt())]
            }
            ProblemKind::Zdt2 => {
                let g = zdt_linear_g(x);
                vec![x[0], g * (1.0 - (x[0] / g).powi(2))]
            }
            ProblemKind::Zdt3 => {
                let g = zdt_linear_g(x);
                let r = x[0] / g;
                vec![x[0], g * (1.0 - r.sqrt() - r * (10.0 * PI * x[0]).sin())]
            }
            ProblemKind::Zdt4 => {
                let tail = &x[1..];
                let g = 1.0
                    + 10.0 * tail.len() as f64
                    + tail
                        .iter()
                        .map(|v| v * v - 10.0 * (4.0 * PI * v).cos())
                        .sum::<f64>();
                vec![x[0], g * (1.0 - (x[0] / g).sqrt())]
            }
            ProblemKind::Zdt6 => {
                let tail = &x[1..];
                let f1 = 1.0 - (-4.0 * x[0]).exp() * (6.0 * PI * x[0]).sin().powi(6);
                let g = 1.0 + 9.0 * (tail.iter().sum::<f64>() / tail.len() as f64).powf(0.25);
                vec![f1, g * (1.0 - (f1 / g).powi(2))]
            }
            ProblemKind::Dtlz1 => {
                let m = self.num_objectives();
                let g = dtlz_rastrigin_g(&x[m - 1..]);
                dtlz_linear(&x[..m - 1], 0.5 * (1.0 + g))
            }
            ProblemKind::Dtlz2 => {
                let m = self.num_objectives();
                let g = x[m - 1..].iter().map(|v| (v - 0.5).powi(2)).sum::<f64>();
                dtlz_spherical(&x[..m - 1], 1.0 + g)
            }
            ProblemKind::Dtlz3 => {
                let m = self.num_objectives();
                let g = dtlz_rastrigin_g(&x[m - 1..]);
                dtlz_spherical(&x[..m - 1], 1.0 + g)
            }
        }
    }
}

fn zdt_linear_g(x: &[f64]) -> f64 {
    let tail = &x[1..];
    1.0 + 9.0 * tail.iter().sum::<f64>() / tail.len() as f64
}

fn dtlz_rastrigin_g(xm: &[f64]) -> f64 {
    100.0
        * (xm.len() as f64
            + xm.iter()
                .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
                .sum::<f64>())
}

/// `f_i = scale · Π_{j < m-i} x_j · (1 − x_{m-i})` with the last factor
/// dropped for `i = 0`.
fn dtlz_linear(pos: &[f64], scale: f64) -> Vec<f64> {
    let m = pos.len() + 1;
    (0..m)
        .map(|i| {
            let keep = m - 1 - i;
            let mut f = scale * pos[..keep].iter().product::<f64>();
            if i > 0 {
                f *= 1.0 - pos[keep];
            }
            f
        })
        .collect()
}

fn dtlz_spherical(pos: &[f64], scale: f64) -> Vec<f64> {
    let m = pos.len() + 1;
    (0..m)
        .map(|i| {
            let keep = m - 1 - i;
            let mut f = scale
                * pos[..keep]
                    .iter()
                    .map(|v| (v * PI / 2.0).cos())
                    .product::<f64>();
            if i > 0 {
                f *= (pos[keep] * PI / 2.0).sin();
            }
            f
        })
        .collect()
}

/// A sampled analytic Pareto front.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueFront {
    pub points: Vec<Vec<f64>>,
    pub problem_name: String,
}

impl TrueFront {
    /// Componentwise minimum and maximum over the sampled points.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.points[0].len();
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for p in &self.points {
            for i in 0..m {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (lo, hi)
    }
}

/// Left end of the ZDT6 front, where `f1 = 1 − e^{−4x} sin^6(6πx)` is
/// smallest over `[0, 1]`.
pub fn zdt6_min_f1() -> f64 {
    let f1 = |x: f64| 1.0 - (-4.0 * x).exp() * (6.0 * PI * x).sin().powi(6);
    // The minimum sits at the first peak of sin^6, near x = 1/12.
    let (mut a, mut b) = (0.0f64, 1.0 / 6.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if f1(c) < f1(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f1(0.5 * (a + b))
}

/// Samples the analytic front of `name` with at least `count` points.
///
/// Continuous two-objective fronts are sampled with equal chord length
/// between neighbours, endpoints included. ZDT3 is sampled densely,
/// filtered to its nondominated part, then thinned evenly to `count`.
/// Three-objective fronts use the smallest simplex lattice holding at least
/// `count` points (projected onto the sphere for DTLZ2/3).
pub fn true_front(name: &str, count: usize) -> Result<TrueFront> {
    let kind: ProblemKind = name.parse()?;
    if count < 2 {
        return Err(Error::InvalidConfig(format!(
            "front sample count must be >= 2, got {count}"
        )));
    }
    let points = match kind {
        ProblemKind::Zdt1 | ProblemKind::Zdt4 => {
            equal_chord_curve(|t| [t * t, 1.0 - t], 0.0, 1.0, count)
        }
        ProblemKind::Zdt2 => equal_chord_curve(|t| [t, 1.0 - t * t], 0.0, 1.0, count),
        ProblemKind::Zdt6 => equal_chord_curve(|t| [t, 1.0 - t * t], zdt6_min_f1(), 1.0, count),
        ProblemKind::Zdt3 => zdt3_front(count),
        ProblemKind::Dtlz1 => simplex_lattice(count)
            .into_iter()
            .map(|w| w.into_iter().map(|v| 0.5 * v).collect())
            .collect(),
        ProblemKind::Dtlz2 | ProblemKind::Dtlz3 => simplex_lattice(count)
            .into_iter()
            .map(|w| {
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                w.into_iter().map(|v| v / norm).collect()
            })
            .collect(),
    };
    Ok(TrueFront {
        points,
        problem_name: kind.name().to_string(),
    })
}

fn simplex_lattice(count: usize) -> Vec<Vec<f64>> {
    let mut h = 1usize;
    while (h + 2) * (h + 1) / 2 < count {
        h += 1;
    }
    let hf = h as f64;
    let mut out = Vec::with_capacity((h + 2) * (h + 1) / 2);
    for i in 0..=h {
        for j in 0..=(h - i) {
            let k = h - i - j;
            out.push(vec![i as f64 / hf, j as f64 / hf, k as f64 / hf]);
        }
    }
    out
}

fn chord(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Bisects a monotone predicate on `[lo, hi]` down to adjacent floats and
/// returns the last value where `below` still holds.
fn bisect(mut lo: f64, mut hi: f64, below: impl Fn(f64) -> bool) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return lo;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Parameter `s > t` at chord distance `h` from `p(t)`.
fn next_at_chord(p: &impl Fn(f64) -> [f64; 2], t: f64, h: f64) -> f64 {
    let origin = p(t);
    let mut span = h.max(1e-3);
    while chord(p(t + span), origin) < h {
        span *= 2.0;
    }
    let lo = bisect(t, t + span, |s| chord(p(s), origin) < h);
    // Pick the closer of the two bracketing floats.
    let hi = f64::from_bits(lo.to_bits() + 1);
    if (chord(p(hi), origin) - h).abs() < (chord(p(lo), origin) - h).abs() {
        hi
    } else {
        lo
    }
}

/// `count` points along a monotone curve from `p(t0)` to `p(t1)` whose
/// consecutive chords all have the same length.
fn equal_chord_curve(p: impl Fn(f64) -> [f64; 2], t0: f64, t1: f64, count: usize) -> Vec<Vec<f64>> {
    let steps = count - 1;
    let march_end = |h: f64| (0..steps).fold(t0, |t, _| next_at_chord(&p, t, h));
    let straight = chord(p(t0), p(t1)) / steps as f64;
    let mut hi = straight * 2.0;
    while march_end(hi) < t1 {
        hi *= 2.0;
    }
    let h = bisect(straight, hi, |h| march_end(h) < t1);
    let mut ts = Vec::with_capacity(count);
    let mut t = t0;
    ts.push(t);
    for _ in 0..steps - 1 {
        t = next_at_chord(&p, t, h);
        ts.push(t);
    }
    ts.push(t1);
    ts.into_iter().map(|t| p(t).to_vec()).collect()
}

fn zdt3_front(count: usize) -> Vec<Vec<f64>> {
    let samples = (200 * count).max(100_000);
    let curve: Vec<Vec<f64>> = (0..samples)
        .map(|i| {
            let f1 = i as f64 / (samples - 1) as f64;
            vec![f1, 1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin()]
        })
        .collect();
    let mut kept = Vec::new();
    let mut best_f2 = f64::INFINITY;
    for p in curve {
        if p[1] < best_f2 {
            best_f2 = p[1];
            kept.push(p);
        }
    }
    if kept.len() <= count {
        return kept;
    }
    let last = kept.len() - 1;
    (0..count)
        .map(|i| kept[(i * last + (count - 1) / 2) / (count - 1)].clone())
        .collect()
}

/// CSV rows `f_1..f_m`.
pub fn write_front_csv<W: std::io::Write>(front: &TrueFront, out: W) -> Result<()> {
    let m = front.points.first().map_or(0, Vec::len);
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record((1..=m).map(|i| format!("f_{i}")))?;
    for p in &front.points {
        wtr.write_record(p.iter().map(f64::to_string))?;
    }
    wtr.flush()?;
    Ok(())
}

/// True when no point of `front` dominates another.
pub fn is_mutually_nondominated(points: &[Vec<f64>]) -> bool {
    points.iter().enumerate().all(|(i, a)| {
        points
            .iter()
            .enumerate()
            .all(|(j, b)| i == j || !pareto::dominates(a, b))
    })
}
