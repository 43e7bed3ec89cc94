//! Command implementations behind the `mofda` binary.
//!
//! Every CSV written here starts with `#` comment lines recording the tool
//! version, a hash of the settings that determine the content, and the
//! metric conventions in force.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::benchmarks::{self, BenchmarkProblem, ProblemKind};
use crate::error::{Error, Result};
use crate::metrics::{self, FrontApproximation, MetricReport};
use crate::runner::{self, ParetoArchive, RunOptions};
use crate::scalarization;
use crate::solver::SolverConfig;
use crate::stats::{self, Direction, RankTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metric names in report order, with the direction that is better.
pub const METRICS: [(&str, Direction); 4] = [
    ("hypervolume", Direction::Maximize),
    ("gd", Direction::Minimize),
    ("igd", Direction::Minimize),
    ("spread", Direction::Minimize),
];

/// Maps an error to the process exit code: 1 for usage, 2 for runtime.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::UnknownProblem(_)
        | Error::UnsupportedObjectiveCount(_)
        | Error::InvalidDimension(_) => 1,
        _ => 2,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem_name: String,
    pub n: usize,
    pub solver: SolverConfig,
    pub workers: usize,
    pub endpoints: Vec<String>,
    pub output_dir: PathBuf,
    /// Compute metrics on the nondominated points only.
    pub filter_dominated: bool,
    pub emit_trace: bool,
    pub truth_points: usize,
    /// Hypervolume reference; derived from the true front when `None`.
    pub hv_reference: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem_name: "zdt1".into(),
            n: 100,
            solver: SolverConfig::default(),
            workers: 1,
            endpoints: Vec::new(),
            output_dir: PathBuf::from("out"),
            filter_dominated: false,
            emit_trace: false,
            truth_points: 1000,
            hv_reference: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value for {key}: '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidConfig(format!(
            "bad value for {key}: '{value}'"
        ))),
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` setting. Keys mirror the command-line flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "problem" => self.problem_name = value.trim().to_string(),
            "n" => self.n = parse_num(&key, value)?,
            "budget" | "eval_budget" => self.solver.eval_budget = parse_num(&key, value)?,
            "depth" | "depth_k" => self.solver.depth_k = parse_num(&key, value)?,
            "inflation" => self.solver.inflation = parse_num(&key, value)?,
            "ils_initial_step_ratio" => {
                self.solver.ils_initial_step_ratio = parse_num(&key, value)?
            }
            "ils_step_shrink" => self.solver.ils_step_shrink = parse_num(&key, value)?,
            "ils_min_step" => self.solver.ils_min_step = parse_num(&key, value)?,
            "quality_probe_ratio" => self.solver.quality_probe_ratio = parse_num(&key, value)?,
            "workers" => self.workers = parse_num(&key, value)?,
            "endpoints" | "endpoint" => self.endpoints = parse_list(value),
            "output_dir" | "out" => self.output_dir = PathBuf::from(value.trim()),
            "filter_dominated" => self.filter_dominated = parse_bool(&key, value)?,
            "emit_trace" => self.emit_trace = parse_bool(&key, value)?,
            "truth_points" => self.truth_points = parse_num(&key, value)?,
            "hv_ref" | "hv_reference" => {
                self.hv_reference = Some(
                    parse_list(value)
                        .iter()
                        .map(|v| parse_num(&key, v))
                        .collect::<Result<_>>()?,
                )
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown config key '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Settings that determine output content. Scheduling and paths are left
    /// out so equal runs hash equally.
    fn content_settings(&self) -> Vec<(&'static str, String)> {
        let s = &self.solver;
        vec![
            ("problem", self.problem_name.to_ascii_lowercase()),
            ("n", self.n.to_string()),
            ("depth_k", s.depth_k.to_string()),
            ("eval_budget", s.eval_budget.to_string()),
            (
                "ils_initial_step_ratio",
                s.ils_initial_step_ratio.to_string(),
            ),
            ("ils_step_shrink", s.ils_step_shrink.to_string()),
            ("ils_min_step", s.ils_min_step.to_string()),
            ("inflation", s.inflation.to_string()),
            ("quality_probe_ratio", s.quality_probe_ratio.to_string()),
            ("filter_dominated", self.filter_dominated.to_string()),
            ("truth_points", self.truth_points.to_string()),
            (
                "hv_reference",
                self.hv_reference
                    .as_ref()
                    .map_or("auto".into(), |r| join(r)),
            ),
        ]
    }

    pub fn config_hash(&self) -> String {
        settings_hash(&self.content_settings())
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// First 16 hex digits of the SHA-256 of `key=value` lines.
pub fn settings_hash<K: AsRef<str>, V: AsRef<str>>(settings: &[(K, V)]) -> String {
    let mut hasher = Sha256::new();
    for (k, v) in settings {
        hasher.update(k.as_ref().as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_ref().as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())[..16].to_string()
}

/// Header comment lines for an output file.
pub fn provenance(config_hash: &str, hv_reference: Option<&[f64]>) -> Vec<String> {
    vec![
        format!("mofda {VERSION}"),
        format!("config_hash={config_hash}"),
        format!(
            "hv_reference={}",
            hv_reference.map_or("truth bounding box + 10%".into(), join)
        ),
        format!("gd_exponent={}", metrics::GD_EXPONENT),
        "spread=deb delta (m=2), generalized nearest-neighbour delta (m=3)".into(),
    ]
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_comments<W: Write>(out: &mut W, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    Ok(())
}

/// Writes `metric,value` rows.
pub fn write_metrics_csv<W: Write>(
    report: &MetricReport,
    comments: &[String],
    mut out: W,
) -> Result<()> {
    write_comments(&mut out, comments)?;
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["metric", "value"])?;
    for (name, value) in report.rows() {
        wtr.write_record([name.to_string(), value.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn metric_points(archive: &ParetoArchive, filter_dominated: bool) -> Vec<Vec<f64>> {
    if filter_dominated {
        archive.nondominated_objectives()
    } else {
        archive.objectives()
    }
}

/// Scores an archive against the sampled true front.
pub fn evaluate_archive(archive: &ParetoArchive, config: &RunConfig) -> Result<MetricReport> {
    let truth = benchmarks::true_front(&archive.problem_name, config.truth_points)?;
    let approx = FrontApproximation::new(metric_points(archive, config.filter_dominated))?;
    metrics::evaluate_front(&approx, &truth.points, config.hv_reference.as_deref())
}

pub struct SolveOutput {
    pub archive: ParetoArchive,
    pub report: MetricReport,
    pub archive_path: PathBuf,
    pub metrics_path: PathBuf,
}

/// Runs Mo-FDA on one problem and writes `archive.csv` and `metrics.csv`
/// into `config.output_dir`.
pub fn cmd_solve(config: &RunConfig) -> Result<SolveOutput> {
    let kind: ProblemKind = config.problem_name.parse()?;
    let mut solver = config.solver.clone();
    solver.record_trace = config.emit_trace;
    let opts = RunOptions {
        workers: config.workers,
        endpoints: config.endpoints.clone(),
        ..RunOptions::default()
    };
    let archive = runner::run_mo_fda(kind, config.n, &solver, &opts)?;
    let report = evaluate_archive(&archive, config)?;
    let comments = provenance(&config.config_hash(), config.hv_reference.as_deref());

    fs::create_dir_all(&config.output_dir)?;
    let archive_path = config.output_dir.join("archive.csv");
    let metrics_path = config.output_dir.join("metrics.csv");
    let mut comments_hv = comments.clone();
    comments_hv.push(format!(
        "hv_reference_used={}",
        join(&report.reference_point)
    ));
    archive.write_csv(&comments, create(&archive_path)?)?;
    write_metrics_csv(&report, &comments_hv, create(&metrics_path)?)?;
    if config.emit_trace {
        write_traces(
            &archive,
            &comments,
            create(&config.output_dir.join("traces.csv"))?,
        )?;
    }
    Ok(SolveOutput {
        archive,
        report,
        archive_path,
        metrics_path,
    })
}

fn write_traces<W: Write>(archive: &ParetoArchive, comments: &[String], mut out: W) -> Result<()> {
    write_comments(&mut out, comments)?;
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["task_id", "eval_index", "best_value"])?;
    for r in &archive.results {
        for (idx, value) in r.trace.iter().flatten() {
            wtr.write_record([r.task_id.to_string(), idx.to_string(), value.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn solve_summary(out: &SolveOutput) -> String {
    let a = &out.archive;
    let dominated = a.dominated_flags.iter().filter(|d| **d).count();
    let evals: usize = a.results.iter().map(|r| r.evals_used).sum();
    let mut s = format!(
        "{}: {} points ({} dominated), {} evaluations\n",
        a.problem_name,
        a.len(),
        dominated,
        evals
    );
    for (name, value) in out.report.rows() {
        s.push_str(&format!("  {name:<12} {value:.6e}\n"));
    }
    s.push_str(&format!("  archive: {}\n", out.archive_path.display()));
    s
}

/// Problems × metrics table with algorithm name.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    pub algorithm: String,
    pub problems: Vec<String>,
    /// `values[p][k]` follows [`METRICS`] order.
    pub values: Vec<[f64; 4]>,
}

impl MetricMatrix {
    pub fn write_csv<W: Write>(&self, comments: &[String], mut out: W) -> Result<()> {
        write_comments(&mut out, comments)?;
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["problem".to_string()];
        header.extend(METRICS.iter().map(|(m, _)| m.to_string()));
        wtr.write_record(&header)?;
        for (p, row) in self.problems.iter().zip(&self.values) {
            let mut rec = vec![p.clone()];
            rec.extend(row.iter().map(f64::to_string));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv(algorithm: &str, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let header = rdr.headers()?.clone();
        let column = |name: &str| {
            header
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| {
                    Error::InvalidConfig(format!("{}: missing column '{name}'", path.display()))
                })
        };
        let problem_col = column("problem")?;
        let metric_cols: Vec<usize> = METRICS
            .iter()
            .map(|(m, _)| column(m))
            .collect::<Result<_>>()?;
        let mut problems = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            problems.push(rec[problem_col].to_ascii_lowercase());
            let mut row = [0.0; 4];
            for (slot, &c) in row.iter_mut().zip(&metric_cols) {
                *slot = parse_num("metric value", &rec[c])?;
            }
            values.push(row);
        }
        Ok(Self {
            algorithm: algorithm.to_string(),
            problems,
            values,
        })
    }

    fn value(&self, problem: &str, metric: usize) -> Option<f64> {
        self.problems
            .iter()
            .position(|p| p == problem)
            .map(|i| self.values[i][metric])
    }
}

/// One Friedman ranking per metric across the given algorithms.
pub fn compare_matrices(
    matrices: &[MetricMatrix],
    problems: &[String],
) -> Result<Vec<(String, RankTable)>> {
    METRICS
        .iter()
        .enumerate()
        .map(|(k, (metric, direction))| {
            let algorithms = matrices.iter().map(|m| m.algorithm.clone()).collect();
            let values = matrices
                .iter()
                .map(|m| problems.iter().map(|p| m.value(p, k)).collect())
                .collect();
            let table = stats::friedman_ranks(algorithms, problems.to_vec(), values, *direction)?;
            Ok((metric.to_string(), table))
        })
        .collect()
}

pub struct SuiteOutput {
    pub matrix: MetricMatrix,
    pub failures: Vec<(String, Error)>,
    pub rankings: Option<Vec<(String, RankTable)>>,
}

/// Runs every problem in `problems` (all registered ones when empty), writes
/// per-problem outputs and `matrix.csv`, and ranks against `compare`
/// matrices when given.
pub fn cmd_suite(
    config: &RunConfig,
    problems: &[String],
    compare: &[(String, PathBuf)],
) -> Result<SuiteOutput> {
    let names: Vec<String> = if problems.is_empty() {
        ProblemKind::ALL
            .iter()
            .map(|k| k.name().to_string())
            .collect()
    } else {
        problems
            .iter()
            .map(|p| p.trim().to_ascii_lowercase())
            .collect()
    };
    let unknown: Vec<String> = names
        .iter()
        .filter(|n| n.parse::<ProblemKind>().is_err())
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownProblem(unknown));
    }
    let external: Vec<MetricMatrix> = compare
        .iter()
        .map(|(name, path)| MetricMatrix::read_csv(name, path))
        .collect::<Result<_>>()?;

    let mut matrix = MetricMatrix {
        algorithm: "mofda".into(),
        problems: Vec::new(),
        values: Vec::new(),
    };
    let mut failures = Vec::new();
    for name in &names {
        let mut cfg = config.clone();
        cfg.problem_name = name.clone();
        cfg.output_dir = config.output_dir.join(name);
        match cmd_solve(&cfg) {
            Ok(out) => {
                log::info!("{}", solve_summary(&out).trim_end());
                let r = &out.report;
                matrix.problems.push(name.clone());
                matrix.values.push([r.hypervolume, r.gd, r.igd, r.spread]);
            }
            Err(e) => {
                log::error!("{name}: {e}");
                failures.push((name.clone(), e));
            }
        }
    }

    let mut suite_cfg = config.clone();
    suite_cfg.problem_name = names.join(",");
    let comments = provenance(&suite_cfg.config_hash(), config.hv_reference.as_deref());
    matrix.write_csv(&comments, create(&config.output_dir.join("matrix.csv"))?)?;

    let rankings = if external.is_empty() || !failures.is_empty() {
        None
    } else {
        let mut all = vec![matrix.clone()];
        all.extend(external);
        let rankings = compare_matrices(&all, &matrix.problems)?;
        let (header, body) = stats::summary_table(&rankings);
        let mut out = create(&config.output_dir.join("friedman.csv"))?;
        write_comments(&mut out, &comments)?;
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(&header)?;
        for row in &body {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
        fs::write(
            config.output_dir.join("friedman.txt"),
            stats::align(&header, &body),
        )?;
        Some(rankings)
    };
    Ok(SuiteOutput {
        matrix,
        failures,
        rankings,
    })
}

/// Reads objective vectors from a CSV. Uses `f_1..f_m` columns when the
/// header names them, otherwise every column.
pub fn read_objectives_csv(path: &Path, m: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::UndefinedMetric(format!(
            "{}: no rows",
            path.display()
        )));
    }
    let numeric = |r: &csv::StringRecord| r.iter().all(|c| c.parse::<f64>().is_ok());
    let mut columns: Vec<usize> = (0..rows[0].len()).collect();
    if !numeric(&rows[0]) {
        let header = rows.remove(0);
        let named: Vec<usize> = (1..=m)
            .filter_map(|i| header.iter().position(|h| h == format!("f_{i}")))
            .collect();
        if named.len() == m {
            columns = named;
        }
    }
    if columns.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: columns.len(),
        });
    }
    rows.iter()
        .map(|r| {
            columns
                .iter()
                .map(|&c| parse_num("objective", &r[c]))
                .collect()
        })
        .collect()
}

/// Metric rows for an approximation file.
pub fn cmd_metrics(
    approx_path: &Path,
    problem: &str,
    truth_points: usize,
    hv_reference: Option<&[f64]>,
) -> Result<(MetricReport, Vec<String>)> {
    let p = BenchmarkProblem::by_name(problem)?;
    let points = read_objectives_csv(approx_path, p.num_objectives())?;
    let truth = benchmarks::true_front(problem, truth_points)?;
    let report = metrics::evaluate_front(
        &FrontApproximation::new(points)?,
        &truth.points,
        hv_reference,
    )?;
    let hash = settings_hash(&[
        ("problem", p.name().to_string()),
        ("truth_points", truth_points.to_string()),
        ("hv_reference", hv_reference.map_or("auto".into(), join)),
    ]);
    let mut comments = provenance(&hash, hv_reference);
    comments.push(format!(
        "hv_reference_used={}",
        join(&report.reference_point)
    ));
    Ok((report, comments))
}

/// Algorithm names, function names and the value matrix.
pub type RankInput = (Vec<String>, Vec<String>, Vec<Vec<Option<f64>>>);

/// Reads an algorithms × functions CSV (header row, first column names).
pub fn read_rank_input(path: &Path) -> Result<RankInput> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let functions: Vec<String> = rdr.headers()?.iter().skip(1).map(String::from).collect();
    let mut algorithms = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        algorithms.push(rec.get(0).unwrap_or("").to_string());
        let row = (1..=functions.len())
            .map(|i| {
                rec.get(i)
                    .filter(|c| !c.is_empty())
                    .and_then(|c| c.parse().ok())
            })
            .collect();
        values.push(row);
    }
    Ok((algorithms, functions, values))
}

/// Friedman ranks of a value matrix: CSV text and an aligned table.
pub fn cmd_friedman(input: &Path, direction: Direction) -> Result<(String, String)> {
    let (algorithms, functions, values) = read_rank_input(input)?;
    let table = stats::friedman_ranks(algorithms, functions, values, direction)?;
    let hash = settings_hash(&[
        ("input", fs::read_to_string(input)?),
        ("direction", format!("{direction:?}")),
    ]);
    let mut csv_out = Vec::new();
    write_comments(&mut csv_out, &provenance(&hash, None))?;
    if let Some((chi2, p)) = stats::friedman_statistic(&table) {
        writeln!(csv_out, "# friedman_chi2={chi2} p_value={p}")?;
    }
    {
        let mut wtr = csv::Writer::from_writer(&mut csv_out);
        wtr.write_record(["algorithm", "mean_rank", "global_rank", "cell"])?;
        for (i, (name, cell)) in stats::report(&table).into_iter().enumerate() {
            wtr.write_record([
                name,
                table.mean_ranks[i].to_string(),
                table.global_ranks[i].to_string(),
                cell,
            ])?;
        }
        wtr.flush()?;
    }
    let (header, body): (Vec<String>, Vec<Vec<String>>) = (
        vec!["algorithm".into(), "rank".into()],
        stats::report(&table)
            .into_iter()
            .map(|(a, c)| vec![a, c])
            .collect(),
    );
    Ok((
        String::from_utf8(csv_out).expect("utf-8"),
        stats::align(&header, &body),
    ))
}

/// Weight family as CSV text.
pub fn cmd_weights(m: usize, n: usize) -> Result<String> {
    let weights = scalarization::generate_weights(m, n)?;
    let mut out = Vec::new();
    let hash = settings_hash(&[("m", m.to_string()), ("n", n.to_string())]);
    write_comments(&mut out, &provenance(&hash, None))?;
    scalarization::write_weights_csv(&weights, &mut out)?;
    Ok(String::from_utf8(out).expect("utf-8"))
}

/// Sampled true front as CSV text.
pub fn cmd_pf_true(problem: &str, count: usize) -> Result<String> {
    let front = benchmarks::true_front(problem, count)?;
    let mut out = Vec::new();
    let hash = settings_hash(&[
        ("problem", front.problem_name.clone()),
        ("count", count.to_string()),
    ]);
    write_comments(&mut out, &provenance(&hash, None))?;
    benchmarks::write_front_csv(&front, &mut out)?;
    Ok(String::from_utf8(out).expect("utf-8"))
}

/// Writes `text` to `path`, or stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = create(p)?;
            f.write_all(text.as_bytes())?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `key=value` pairs such as `--compare nsga2=path.csv`.
pub fn parse_named_path(s: &str) -> Result<(String, PathBuf)> {
    let (name, path) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("expected NAME=PATH, got '{s}'")))?;
    Ok((name.trim().to_string(), PathBuf::from(path.trim())))
}
