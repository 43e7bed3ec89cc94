//! Weighted Tchebycheff scalarization and simplex weight families.

use serde::{Deserialize, Serialize};

use crate::benchmarks::BenchmarkProblem;
use crate::error::{Error, Result};

/// Weights for one scalarized subproblem. Components are non-negative and
/// sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub components: Vec<f64>,
    pub index: usize,
}

impl WeightVector {
    pub fn new(components: Vec<f64>, index: usize) -> Result<Self> {
        if components.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "weights must be non-negative: {components:?}"
            )));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { components, index })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Ideal point `z*`, optionally pushed further by a utopian shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub z_star: Vec<f64>,
    #[serde(default)]
    pub utopian_shift: f64,
}

impl ReferencePoint {
    pub fn new(z_star: Vec<f64>, utopian_shift: f64) -> Result<Self> {
        if z_star.iter().any(|z| !z.is_finite()) || !(utopian_shift >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "reference point must be finite with a non-negative shift: {z_star:?}, {utopian_shift}"
            )));
        }
        Ok(Self {
            z_star,
            utopian_shift,
        })
    }

    pub fn origin(m: usize) -> Self {
        Self {
            z_star: vec![0.0; m],
            utopian_shift: 0.0,
        }
    }
}

/// `max_i w_i · (f_i − (z_i − shift))`.
pub fn tchebycheff(f_values: &[f64], w: &WeightVector, z: &ReferencePoint) -> Result<f64> {
    let m = w.len();
    for len in [f_values.len(), z.z_star.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: len,
            });
        }
    }
    Ok(tchebycheff_unchecked(f_values, &w.components, z))
}

#[inline]
fn tchebycheff_unchecked(f: &[f64], w: &[f64], z: &ReferencePoint) -> f64 {
    f.iter()
        .zip(w)
        .zip(&z.z_star)
        .map(|((fi, wi), zi)| wi * (fi - (zi - z.utopian_shift)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Deterministic weight family of exactly `n` vectors for `m` objectives.
///
/// Two objectives give an even grid on the first component. Three
/// objectives use the smallest simplex lattice with at least `n` points,
/// enumerated lexicographically and truncated to `n`.
pub fn generate_weights(m: usize, n: usize) -> Result<Vec<WeightVector>> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 weight vectors, got {n}"
        )));
    }
    let out = match m {
        2 => (0..n)
            .map(|i| {
                let a = i as f64 / (n - 1) as f64;
                WeightVector {
                    components: vec![a, 1.0 - a],
                    index: i,
                }
            })
            .collect(),
        3 => {
            let mut h = 1usize;
            while (h + 2) * (h + 1) / 2 < n {
                h += 1;
            }
            let hf = h as f64;
            let mut out = Vec::with_capacity(n);
            'outer: for i in 0..=h {
                for j in 0..=(h - i) {
                    if out.len() == n {
                        break 'outer;
                    }
                    let k = h - i - j;
                    out.push(WeightVector {
                        components: vec![i as f64 / hf, j as f64 / hf, k as f64 / hf],
                        index: out.len(),
                    });
                }
            }
            out
        }
        other => return Err(Error::UnsupportedObjectiveCount(other)),
    };
    Ok(out)
}

/// Scalar objective `x ↦ tchebycheff(problem(x), w, z)`.
pub fn scalarize_problem<'a>(
    problem: &'a BenchmarkProblem,
    w: &'a WeightVector,
    z: &'a ReferencePoint,
) -> Result<impl Fn(&[f64]) -> f64 + 'a> {
    let m = problem.num_objectives();
    for len in [w.len(), z.z_star.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: len,
            });
        }
    }
    Ok(move |x: &[f64]| {
        let f = problem.evaluate_unchecked(x);
        tchebycheff_unchecked(&f, &w.components, z)
    })
}

/// CSV rows `index,w_1..w_m`.
pub fn write_weights_csv<W: std::io::Write>(weights: &[WeightVector], out: W) -> Result<()> {
    let m = weights.first().map_or(0, WeightVector::len);
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["index".to_string()];
    header.extend((1..=m).map(|i| format!("w_{i}")));
    wtr.write_record(&header)?;
    for w in weights {
        let mut row = vec![w.index.to_string()];
        row.extend(w.components.iter().map(f64::to_string));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
