//! Friedman rank-sum aggregation of algorithm results across test functions.

use std::fmt::Write as _;
use std::str::FromStr;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Whether larger or smaller metric values are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" | "maximize" => Ok(Direction::Maximize),
            "min" | "minimize" => Ok(Direction::Minimize),
            other => Err(Error::InvalidConfig(format!("unknown direction '{other}'"))),
        }
    }
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Maximize => Direction::Minimize,
            Direction::Minimize => Direction::Maximize,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub algorithms: Vec<String>,
    pub functions: Vec<String>,
    /// `values[a][f]` for algorithm `a` on function `f`.
    pub values: Vec<Vec<f64>>,
    pub direction: Direction,
    /// `ranks[a][f]`, 1 = best, ties averaged.
    pub ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
    pub global_ranks: Vec<usize>,
}

/// Mean ranks closer than this share a global rank.
const RANK_TIE_EPS: f64 = 1e-9;

/// Ranks algorithms on every function and aggregates them.
///
/// A `None` cell is reported as incomplete data.
pub fn friedman_ranks(
    algorithms: Vec<String>,
    functions: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
    direction: Direction,
) -> Result<RankTable> {
    let n_alg = algorithms.len();
    let n_fun = functions.len();
    if n_alg == 0 || n_fun == 0 {
        return Err(Error::IncompleteData(
            "no algorithms or no functions".into(),
        ));
    }
    if values.len() != n_alg {
        return Err(Error::IncompleteData(format!(
            "{} value rows for {n_alg} algorithms",
            values.len()
        )));
    }
    let mut dense = Vec::with_capacity(n_alg);
    for (a, row) in values.iter().enumerate() {
        if row.len() != n_fun {
            return Err(Error::IncompleteData(format!(
                "algorithm '{}' has {} values for {n_fun} functions",
                algorithms[a],
                row.len()
            )));
        }
        let mut out = Vec::with_capacity(n_fun);
        for (f, cell) in row.iter().enumerate() {
            match cell {
                Some(v) if !v.is_nan() => out.push(*v),
                _ => {
                    return Err(Error::IncompleteData(format!(
                        "missing value for algorithm '{}' on function '{}'",
                        algorithms[a], functions[f]
                    )))
                }
            }
        }
        dense.push(out);
    }

    let mut ranks = vec![vec![0.0; n_fun]; n_alg];
    for f in 0..n_fun {
        let column: Vec<f64> = dense.iter().map(|row| row[f]).collect();
        for (a, r) in average_ranks(&column, direction).into_iter().enumerate() {
            ranks[a][f] = r;
        }
    }
    let mean_ranks: Vec<f64> = ranks
        .iter()
        .map(|row| row.iter().sum::<f64>() / n_fun as f64)
        .collect();
    let global_ranks = competition_ranks(&mean_ranks);
    Ok(RankTable {
        algorithms,
        functions,
        values: dense,
        direction,
        ranks,
        mean_ranks,
        global_ranks,
    })
}

/// Ranks with 1 = best; tied values share the mean of their positions.
fn average_ranks(values: &[f64], direction: Direction) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let o = values[a]
            .partial_cmp(&values[b])
            .expect("NaN rejected upstream");
        match direction {
            Direction::Minimize => o,
            Direction::Maximize => o.reverse(),
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Standard competition ranking ("1224") of ascending mean ranks.
fn competition_ranks(means: &[f64]) -> Vec<usize> {
    means
        .iter()
        .map(|m| 1 + means.iter().filter(|o| **o < m - RANK_TIE_EPS).count())
        .collect()
}

/// Friedman χ² statistic and its p-value with `k − 1` degrees of freedom.
pub fn friedman_statistic(table: &RankTable) -> Option<(f64, f64)> {
    let k = table.algorithms.len() as f64;
    let n = table.functions.len() as f64;
    if k < 2.0 {
        return None;
    }
    let center = (k + 1.0) / 2.0;
    let chi2 = 12.0 * n / (k * (k + 1.0))
        * table
            .mean_ranks
            .iter()
            .map(|r| (r - center).powi(2))
            .sum::<f64>();
    let p = ChiSquared::new(k - 1.0).ok().map(|d| 1.0 - d.cdf(chi2))?;
    Some((chi2, p))
}

/// A `"1.875 (1)"` style cell.
pub fn format_cell(mean_rank: f64, global_rank: usize) -> String {
    format!("{mean_rank:.3} ({global_rank})")
}

/// `(algorithm, cell)` pairs in input order.
pub fn report(table: &RankTable) -> Vec<(String, String)> {
    table
        .algorithms
        .iter()
        .zip(table.mean_ranks.iter().zip(&table.global_ranks))
        .map(|(name, (&m, &g))| (name.clone(), format_cell(m, g)))
        .collect()
}

/// Metric rows by algorithm columns, one ranking per metric.
pub fn summary_table(rows: &[(String, RankTable)]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["metric".to_string()];
    if let Some((_, first)) = rows.first() {
        header.extend(first.algorithms.iter().cloned());
    }
    let body = rows
        .iter()
        .map(|(metric, table)| {
            let mut row = vec![metric.clone()];
            row.extend(report(table).into_iter().map(|(_, cell)| cell));
            row
        })
        .collect();
    (header, body)
}

/// Left-aligned first column, right-aligned others.
pub fn align(header: &[String], body: &[Vec<String>]) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|c| {
            std::iter::once(header)
                .chain(body.iter().map(Vec::as_slice))
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(header).chain(body.iter().map(Vec::as_slice)) {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = width[c])
                } else {
                    format!("{s:>w$}", w = width[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
