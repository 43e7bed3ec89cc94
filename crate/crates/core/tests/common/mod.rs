#![allow(dead_code)]

//! Independent reference implementations used by the integration tests.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Closed-form benchmark objectives, written out per problem.
pub fn benchmark_oracle(name: &str, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    match name {
        "zdt1" | "zdt2" | "zdt3" => {
            let f1 = x[0];
            let mut s = 0.0;
            for xi in &x[1..] {
                s += xi;
            }
            let g = 1.0 + 9.0 * s / (n as f64 - 1.0);
            let h = match name {
                "zdt1" => 1.0 - (f1 / g).sqrt(),
                "zdt2" => 1.0 - (f1 / g) * (f1 / g),
                _ => 1.0 - (f1 / g).sqrt() - (f1 / g) * (10.0 * PI * f1).sin(),
            };
            vec![f1, g * h]
        }
        "zdt4" => {
            let f1 = x[0];
            let mut s = 0.0;
            for xi in &x[1..] {
                s += xi * xi - 10.0 * (4.0 * PI * xi).cos();
            }
            let g = 1.0 + 10.0 * (n as f64 - 1.0) + s;
            vec![f1, g * (1.0 - (f1 / g).sqrt())]
        }
        "zdt6" => {
            let f1 = 1.0 - (-4.0 * x[0]).exp() * (6.0 * PI * x[0]).sin().powi(6);
            let mut s = 0.0;
            for xi in &x[1..] {
                s += xi;
            }
            let g = 1.0 + 9.0 * (s / (n as f64 - 1.0)).powf(0.25);
            vec![f1, g * (1.0 - (f1 / g) * (f1 / g))]
        }
        "dtlz1" | "dtlz3" => {
            let k = n - 2;
            let mut s = 0.0;
            for xi in &x[2..] {
                s += (xi - 0.5) * (xi - 0.5) - (20.0 * PI * (xi - 0.5)).cos();
            }
            let g = 100.0 * (k as f64 + s);
            if name == "dtlz1" {
                vec![
                    0.5 * x[0] * x[1] * (1.0 + g),
                    0.5 * x[0] * (1.0 - x[1]) * (1.0 + g),
                    0.5 * (1.0 - x[0]) * (1.0 + g),
                ]
            } else {
                sphere3(x, g)
            }
        }
        "dtlz2" => {
            let mut g = 0.0;
            for xi in &x[2..] {
                g += (xi - 0.5) * (xi - 0.5);
            }
            sphere3(x, g)
        }
        other => panic!("no oracle for {other}"),
    }
}

fn sphere3(x: &[f64], g: f64) -> Vec<f64> {
    let (a, b) = (x[0] * PI / 2.0, x[1] * PI / 2.0);
    vec![
        (1.0 + g) * a.cos() * b.cos(),
        (1.0 + g) * a.cos() * b.sin(),
        (1.0 + g) * a.sin(),
    ]
}

/// Uniform point in the box.
pub fn sample_box(rng: &mut ChaCha8Rng, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(l, u)| rng.gen_range(*l..=*u))
        .collect()
}

/// Monte-Carlo hypervolume over `[0, reference]`: estimate and standard error.
pub fn hv_monte_carlo(
    front: &[Vec<f64>],
    reference: &[f64],
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let volume: f64 = reference.iter().product();
    let lower = vec![0.0; reference.len()];
    let mut hits = 0usize;
    for _ in 0..samples {
        let s = sample_box(rng, &lower, reference);
        if front
            .iter()
            .any(|p| p.iter().zip(&s).all(|(pi, si)| pi <= si))
        {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (volume * p, volume * (p * (1.0 - p) / samples as f64).sqrt())
}

/// Counts `step`-sized cells of the unit cube whose centers are dominated.
pub fn hv_grid_3d(front: &[Vec<f64>], step: f64) -> f64 {
    let cells = (1.0 / step).round() as usize;
    let mut count = 0usize;
    for i in 0..cells {
        let x = (i as f64 + 0.5) * step;
        let sub: Vec<&Vec<f64>> = front.iter().filter(|p| p[0] <= x).collect();
        for j in 0..cells {
            let y = (j as f64 + 0.5) * step;
            // lowest f3 among points dominating (x, y) in the first two axes
            let floor = sub
                .iter()
                .filter(|p| p[1] <= y)
                .map(|p| p[2])
                .fold(f64::INFINITY, f64::min);
            if floor.is_finite() {
                let first = (floor / step - 0.5).ceil().max(0.0) as usize;
                count += cells.saturating_sub(first);
            }
        }
    }
    count as f64 * step.powi(3)
}

/// Random mutually nondominated 2D front inside `(0, 1)²`.
pub fn random_front_2d(rng: &mut ChaCha8Rng, size: usize) -> Vec<Vec<f64>> {
    let mut xs: Vec<f64> = (0..size).map(|_| rng.gen_range(0.01..0.99)).collect();
    let mut ys: Vec<f64> = (0..size).map(|_| rng.gen_range(0.01..0.99)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| b.partial_cmp(a).unwrap());
    xs.into_iter().zip(ys).map(|(x, y)| vec![x, y]).collect()
}

/// Random points in `(0, 1)³`, dominated ones included.
pub fn random_points_3d(rng: &mut ChaCha8Rng, size: usize) -> Vec<Vec<f64>> {
    (0..size)
        .map(|_| (0..3).map(|_| rng.gen_range(0.05..0.95)).collect())
        .collect()
}
