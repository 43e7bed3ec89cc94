//! Deterministic mono-objective fractal decomposition search.
//!
//! The search descends best-first through the hypersphere tree: the best
//! scored sphere at the deepest open level is decomposed and its children
//! scored, until a sphere at `depth_k` is reached. Leaves are exploited with
//! a coordinate-wise intensification local search (ILS). Once every leaf of
//! the current branch has been exploited the search backtracks to the next
//! best sphere one level up. Every objective evaluation, including quality
//! probes, is charged to a single evaluation budget.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, BoxBounds, Hypersphere};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub depth_k: usize,
    pub eval_budget: usize,
    /// ILS starting step, as a fraction of the leaf radius.
    pub ils_initial_step_ratio: f64,
    pub ils_step_shrink: f64,
    /// ILS stops once the step falls below this fraction of its start value.
    pub ils_min_step: f64,
    pub inflation: f64,
    pub quality_probe_ratio: f64,
    #[serde(default)]
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            depth_k: 5,
            eval_budget: 100_000,
            ils_initial_step_ratio: 1.0,
            ils_step_shrink: 0.5,
            ils_min_step: 1e-5,
            inflation: geometry::DEFAULT_INFLATION,
            quality_probe_ratio: 0.5,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if dim < 1 {
            return Err(Error::InvalidDimension(dim));
        }
        if self.depth_k < 1 {
            return bad("depth_k must be at least 1".into());
        }
        if !(self.ils_initial_step_ratio > 0.0 && self.ils_initial_step_ratio <= 1.0) {
            return bad(format!(
                "ils_initial_step_ratio must lie in (0, 1], got {}",
                self.ils_initial_step_ratio
            ));
        }
        if !(self.ils_step_shrink > 0.0 && self.ils_step_shrink < 1.0) {
            return bad(format!(
                "ils_step_shrink must lie in (0, 1), got {}",
                self.ils_step_shrink
            ));
        }
        if !(self.ils_min_step > 0.0 && self.ils_min_step.is_finite()) {
            return bad(format!(
                "ils_min_step must be positive, got {}",
                self.ils_min_step
            ));
        }
        if !(self.inflation > 0.0 && self.inflation.is_finite()) {
            return bad(format!(
                "inflation must be positive, got {}",
                self.inflation
            ));
        }
        if !(self.quality_probe_ratio >= 0.0 && self.quality_probe_ratio.is_finite()) {
            return bad(format!(
                "quality_probe_ratio must be non-negative, got {}",
                self.quality_probe_ratio
            ));
        }
        let needed = 2 * dim * self.depth_k;
        if self.eval_budget < needed {
            return bad(format!(
                "eval_budget {} is below 2·D·depth_k = {needed}",
                self.eval_budget
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    /// Best point found, in problem space.
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evals_used: usize,
    /// `(evaluation count, best value so far)` at every strict improvement.
    pub trace: Option<Vec<(usize, f64)>>,
}

/// One step of the tree walk, identified by the sphere's `id_path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeEvent {
    Decompose(Vec<usize>),
    Exploit(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Exhausted;

impl From<Exhausted> for Error {
    fn from(_: Exhausted) -> Self {
        Error::BudgetExhausted
    }
}

/// Budgeted objective evaluator over unit-box points.
///
/// Tracks the best value seen and the problem-space point that produced it.
pub struct Evaluator<'a, F: ?Sized> {
    objective: &'a F,
    bounds: &'a BoxBounds,
    budget: usize,
    used: usize,
    best_value: f64,
    best_point: Vec<f64>,
    trace: Option<Vec<(usize, f64)>>,
    scratch: Vec<f64>,
}

impl<'a, F> Evaluator<'a, F>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    pub fn new(objective: &'a F, bounds: &'a BoxBounds, budget: usize, record_trace: bool) -> Self {
        Self {
            objective,
            bounds,
            budget,
            used: 0,
            best_value: f64::INFINITY,
            best_point: Vec::new(),
            trace: record_trace.then(Vec::new),
            scratch: vec![0.0; bounds.dim()],
        }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used
    }

    /// Evaluates a unit-box point; overhang is clamped onto the box.
    pub fn eval(&mut self, x_unit: &[f64]) -> Result<f64> {
        Ok(self.try_eval(x_unit)?)
    }

    pub(crate) fn try_eval(&mut self, x_unit: &[f64]) -> Result<f64, Exhausted> {
        if self.used >= self.budget {
            return Err(Exhausted);
        }
        debug_assert_eq!(x_unit.len(), self.scratch.len());
        geometry::map_into(x_unit, self.bounds, &mut self.scratch);
        let value = (self.objective)(&self.scratch);
        self.used += 1;
        if value < self.best_value || self.best_point.is_empty() {
            if value < self.best_value {
                self.best_value = value;
                if let Some(trace) = self.trace.as_mut() {
                    trace.push((self.used, value));
                }
            }
            self.best_point.clear();
            self.best_point.extend_from_slice(&self.scratch);
        }
        Ok(value)
    }

    pub fn finish(self) -> SolverResult {
        SolverResult {
            best_point: self.best_point,
            best_value: self.best_value,
            evals_used: self.used,
            trace: self.trace,
        }
    }
}

/// Scores a sphere by the best of three probes: the center and the center
/// shifted by `±probe_ratio·radius` along the main diagonal.
pub fn score_sphere<F>(
    sphere: &mut Hypersphere,
    evaluator: &mut Evaluator<'_, F>,
    probe_ratio: f64,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    Ok(score_in(sphere, evaluator, probe_ratio)?)
}

fn score_in<F>(
    sphere: &mut Hypersphere,
    ev: &mut Evaluator<'_, F>,
    probe_ratio: f64,
) -> Result<f64, Exhausted>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let shift = probe_ratio * sphere.radius / (sphere.dim() as f64).sqrt();
    let mut quality = ev.try_eval(&sphere.center)?;
    let mut probe = sphere.center.clone();
    for sign in [1.0, -1.0] {
        for (p, &c) in probe.iter_mut().zip(&sphere.center) {
            *p = c + sign * shift;
        }
        quality = quality.min(ev.try_eval(&probe)?);
    }
    sphere.quality = Some(quality);
    Ok(quality)
}

/// ILS step schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlsParams {
    pub step_shrink: f64,
    pub min_step: f64,
}

impl From<&SolverConfig> for IlsParams {
    fn from(cfg: &SolverConfig) -> Self {
        Self {
            step_shrink: cfg.ils_step_shrink,
            min_step: cfg.ils_min_step,
        }
    }
}

/// Intensification local search from `start` (unit-box coordinates) with its
/// own budget. Fails only if not even the start point can be evaluated.
///
/// Among equal values the later probe wins, so the search can slide along
/// flat directions; only strict improvements keep the step size.
pub fn ils<F>(
    start: &[f64],
    step0: f64,
    objective: &F,
    bounds: &BoxBounds,
    budget: usize,
    params: IlsParams,
) -> Result<SolverResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    if start.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            actual: start.len(),
        });
    }
    if !(step0 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "ILS step must be positive, got {step0}"
        )));
    }
    if budget == 0 {
        return Err(Error::BudgetExhausted);
    }
    let mut ev = Evaluator::new(objective, bounds, budget, false);
    let _ = ils_in(&mut ev, start, step0, params);
    Ok(ev.finish())
}

fn ils_in<F>(
    ev: &mut Evaluator<'_, F>,
    start: &[f64],
    step0: f64,
    params: IlsParams,
) -> Result<(), Exhausted>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut current: Vec<f64> = start.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut value = ev.try_eval(&current)?;
    let mut candidate = current.clone();
    let min_step = params.min_step * step0;
    let mut step = step0;
    while step >= min_step {
        let mut improved = false;
        for d in 0..current.len() {
            let base = current[d];
            let (mut best_coord, mut best_value) = (base, value);
            for sign in [1.0, -1.0] {
                let coord = (base + sign * step).clamp(0.0, 1.0);
                if coord == base {
                    continue;
                }
                candidate[d] = coord;
                let v = ev.try_eval(&candidate)?;
                if v <= best_value {
                    best_value = v;
                    best_coord = coord;
                }
            }
            candidate[d] = best_coord;
            current[d] = best_coord;
            if best_value < value {
                value = best_value;
                improved = true;
            }
        }
        if !improved {
            step *= params.step_shrink;
        }
    }
    Ok(())
}

fn by_quality(a: &Hypersphere, b: &Hypersphere) -> Ordering {
    let q = |s: &Hypersphere| match s.quality {
        Some(v) if !v.is_nan() => v,
        _ => f64::INFINITY,
    };
    q(a).total_cmp(&q(b))
        .then_with(|| a.id_path.cmp(&b.id_path))
}

/// Minimizes `objective` over `bounds`.
pub fn fda_solve<F>(objective: &F, bounds: &BoxBounds, cfg: &SolverConfig) -> Result<SolverResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut sink = None;
    solve_inner(objective, bounds, cfg, &mut sink)
}

/// Same as [`fda_solve`], also returning the decomposition/exploitation order.
pub fn fda_solve_logged<F>(
    objective: &F,
    bounds: &BoxBounds,
    cfg: &SolverConfig,
) -> Result<(SolverResult, Vec<TreeEvent>)>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut sink = Some(Vec::new());
    let result = solve_inner(objective, bounds, cfg, &mut sink)?;
    Ok((result, sink.unwrap_or_default()))
}

fn solve_inner<F>(
    objective: &F,
    bounds: &BoxBounds,
    cfg: &SolverConfig,
    events: &mut Option<Vec<TreeEvent>>,
) -> Result<SolverResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    cfg.validate(bounds.dim())?;
    let mut ev = Evaluator::new(objective, bounds, cfg.eval_budget, cfg.record_trace);
    // Running out of budget is the normal way to stop.
    let _ = explore(&mut ev, cfg, events);
    Ok(ev.finish())
}

fn explore<F>(
    ev: &mut Evaluator<'_, F>,
    cfg: &SolverConfig,
    events: &mut Option<Vec<TreeEvent>>,
) -> Result<(), Exhausted>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut log = |e: TreeEvent| {
        if let Some(events) = events.as_mut() {
            events.push(e);
        }
    };
    let depth = cfg.depth_k;
    let root = geometry::unit_root(ev.bounds.dim()).expect("dimension validated");

    // open[l] holds the scored, unvisited spheres of level l, best last.
    let mut open: Vec<Vec<Hypersphere>> = vec![Vec::new(); depth + 1];
    let expand = |parent: &Hypersphere,
                  ev: &mut Evaluator<'_, F>,
                  open: &mut Vec<Vec<Hypersphere>>|
     -> Result<(), Exhausted> {
        let mut children = geometry::decompose(parent, cfg.inflation);
        for child in children.iter_mut() {
            score_in(child, ev, cfg.quality_probe_ratio)?;
        }
        children.sort_by(|a, b| by_quality(b, a));
        open[parent.level + 1] = children;
        Ok(())
    };

    log(TreeEvent::Decompose(root.id_path.clone()));
    expand(&root, ev, &mut open)?;

    while let Some(level) = (1..=depth).rev().find(|&l| !open[l].is_empty()) {
        let sphere = open[level].pop().expect("level is non-empty");
        if level == depth {
            log(TreeEvent::Exploit(sphere.id_path.clone()));
            let step0 = cfg.ils_initial_step_ratio * sphere.radius;
            ils_in(ev, &sphere.center, step0, IlsParams::from(cfg))?;
        } else {
            log(TreeEvent::Decompose(sphere.id_path.clone()));
            expand(&sphere, ev, &mut open)?;
        }
    }
    Ok(())
}
