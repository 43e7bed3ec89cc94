//! Mo-FDA orchestration: one scalarized solve per weight vector.
//!
//! The coordinator keeps a shared task queue. Local worker threads and
//! remote endpoints pull from it; results are collected over a channel and
//! normalized by `task_id`, so the archive never depends on scheduling.
//!
//! Remote workers speak newline-delimited JSON over TCP. Every record
//! carries `"v": 1`. A request is a [`Task`], a reply is a [`TaskResult`] or
//! an error record `{"v":1,"error":"...","task_id":<id or null>}`.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::benchmarks::{BenchmarkProblem, ProblemKind};
use crate::error::{Error, Result};
use crate::pareto;
use crate::scalarization::{self, ReferencePoint, WeightVector};
use crate::solver::{self, SolverConfig};

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: usize,
    pub problem_name: String,
    pub weight: WeightVector,
    pub z: ReferencePoint,
    pub solver_cfg: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task_id: usize,
    pub best_point: Vec<f64>,
    pub objectives: Vec<f64>,
    pub scalar_value: f64,
    pub evals_used: usize,
    /// Seconds spent in the solve.
    pub wall_time: f64,
    /// Best-so-far trace, present only when the solver config asks for it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<(usize, f64)>>,
}

impl TaskResult {
    /// Equality on everything except timing.
    pub fn same_outcome(&self, other: &TaskResult) -> bool {
        self.task_id == other.task_id
            && self.best_point == other.best_point
            && self.objectives == other.objectives
            && self.scalar_value.to_bits() == other.scalar_value.to_bits()
            && self.evals_used == other.evals_used
    }
}

/// The `n` results of a run, ordered by task id.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    pub problem_name: String,
    pub weights: Vec<WeightVector>,
    pub results: Vec<TaskResult>,
    pub dominated_flags: Vec<bool>,
}

impl ParetoArchive {
    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn objectives(&self) -> Vec<Vec<f64>> {
        self.results.iter().map(|r| r.objectives.clone()).collect()
    }

    pub fn nondominated_objectives(&self) -> Vec<Vec<f64>> {
        self.results
            .iter()
            .zip(&self.dominated_flags)
            .filter(|(_, &d)| !d)
            .map(|(r, _)| r.objectives.clone())
            .collect()
    }

    /// Equality on everything except timing.
    pub fn same_content(&self, other: &ParetoArchive) -> bool {
        self.problem_name == other.problem_name
            && self.weights == other.weights
            && self.dominated_flags == other.dominated_flags
            && self.results.len() == other.results.len()
            && self
                .results
                .iter()
                .zip(&other.results)
                .all(|(a, b)| a.same_outcome(b))
    }

    /// Writes `task_id, w_*, x_*, f_*, scalar_value, dominated` rows after
    /// the given `#` comment lines.
    pub fn write_csv<W: Write>(&self, comments: &[String], mut out: W) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let m = self.weights.first().map_or(0, WeightVector::len);
        let d = self.results.first().map_or(0, |r| r.best_point.len());
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["task_id".to_string()];
        header.extend((1..=m).map(|i| format!("w_{i}")));
        header.extend((1..=d).map(|i| format!("x_{i}")));
        header.extend((1..=m).map(|i| format!("f_{i}")));
        header.push("scalar_value".into());
        header.push("dominated".into());
        wtr.write_record(&header)?;
        for ((r, w), dominated) in self
            .results
            .iter()
            .zip(&self.weights)
            .zip(&self.dominated_flags)
        {
            let mut row = vec![r.task_id.to_string()];
            row.extend(w.components.iter().map(f64::to_string));
            row.extend(r.best_point.iter().map(f64::to_string));
            row.extend(r.objectives.iter().map(f64::to_string));
            row.push(r.scalar_value.to_string());
            row.push(dominated.to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Recomputes the dominance flags. Points are flagged, never removed.
pub fn nondominated_filter(mut archive: ParetoArchive) -> ParetoArchive {
    archive.dominated_flags = pareto::dominated_flags(&archive.objectives());
    archive
}

/// Runs one task in the calling thread.
pub fn execute_task(task: &Task) -> Result<TaskResult> {
    let problem = BenchmarkProblem::by_name(&task.problem_name)?;
    let objective = scalarization::scalarize_problem(&problem, &task.weight, &task.z)?;
    let start = Instant::now();
    let solved = solver::fda_solve(&objective, problem.bounds(), &task.solver_cfg)?;
    let wall_time = start.elapsed().as_secs_f64();
    let objectives = problem.evaluate(&solved.best_point)?;
    let scalar_value = scalarization::tchebycheff(&objectives, &task.weight, &task.z)?;
    Ok(TaskResult {
        task_id: task.task_id,
        best_point: solved.best_point,
        objectives,
        scalar_value,
        evals_used: solved.evals_used,
        wall_time,
        trace: solved.trace,
    })
}

fn encode<T: Serialize>(record: &T) -> String {
    let mut value = serde_json::to_value(record).expect("records serialize");
    if let Value::Object(map) = &mut value {
        map.insert("v".into(), json!(PROTOCOL_VERSION));
    }
    value.to_string()
}

fn decode<T: for<'de> Deserialize<'de>>(line: &str) -> Result<T> {
    let mut value: Value =
        serde_json::from_str(line).map_err(|e| Error::Protocol(format!("invalid JSON: {e}")))?;
    let map = value
        .as_object_mut()
        .ok_or_else(|| Error::Protocol("record is not an object".into()))?;
    match map.remove("v").and_then(|v| v.as_u64()) {
        Some(PROTOCOL_VERSION) => {}
        other => {
            return Err(Error::Protocol(format!(
                "unsupported protocol version {other:?}"
            )));
        }
    }
    if let Some(reason) = map.get("error").and_then(Value::as_str) {
        let task_id = map.get("task_id").and_then(Value::as_u64);
        return Err(match task_id {
            Some(id) => Error::TaskFailed {
                task_id: id as usize,
                reason: reason.to_string(),
            },
            None => Error::Protocol(reason.to_string()),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::Protocol(format!("bad record: {e}")))
}

pub fn encode_task(task: &Task) -> String {
    encode(task)
}

pub fn decode_task(line: &str) -> Result<Task> {
    decode(line)
}

pub fn encode_result(result: &TaskResult) -> String {
    encode(result)
}

pub fn decode_result(line: &str) -> Result<TaskResult> {
    decode(line)
}

fn error_reply(task_id: Option<u64>, reason: &str) -> String {
    json!({ "v": PROTOCOL_VERSION, "error": reason, "task_id": task_id }).to_string()
}

/// Worker side of one request line: a result record or an error record.
pub fn handle_line(line: &str) -> String {
    let task = match decode_task(line) {
        Ok(task) => task,
        Err(e) => {
            let task_id = serde_json::from_str::<Value>(line)
                .ok()
                .and_then(|v| v.get("task_id").and_then(Value::as_u64));
            return error_reply(task_id, &e.to_string());
        }
    };
    match catch_unwind(AssertUnwindSafe(|| execute_task(&task))) {
        Ok(Ok(result)) => encode_result(&result),
        Ok(Err(e)) => error_reply(Some(task.task_id as u64), &e.to_string()),
        Err(_) => error_reply(Some(task.task_id as u64), "worker panicked"),
    }
}

fn serve_connection(stream: TcpStream) -> std::io::Result<()> {
    let peer = stream.peer_addr().ok();
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = handle_line(&line);
        writer.write_all(reply.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    log::debug!("connection from {peer:?} closed");
    Ok(())
}

/// Accepts connections forever; each connection runs its tasks one at a time.
pub fn serve(listener: TcpListener) -> Result<()> {
    for stream in listener.incoming() {
        match stream {
            Ok(stream) => {
                thread::spawn(move || {
                    if let Err(e) = serve_connection(stream) {
                        log::warn!("worker connection dropped: {e}");
                    }
                });
            }
            Err(e) => log::warn!("accept failed: {e}"),
        }
    }
    Ok(())
}

pub fn worker_serve(address: &str) -> Result<()> {
    let listener = TcpListener::bind(address)?;
    log::info!("worker listening on {}", listener.local_addr()?);
    serve(listener)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Local worker threads.
    pub workers: usize,
    /// Remote worker addresses; each one serves a single task at a time.
    pub endpoints: Vec<String>,
    /// Reference point; the problem's ideal point when `None`.
    pub z: Option<ReferencePoint>,
    pub remote_timeout: Duration,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            endpoints: Vec::new(),
            z: None,
            remote_timeout: Duration::from_secs(600),
        }
    }
}

trait Executor {
    fn run(&mut self, task: &Task) -> Result<TaskResult>;
}

struct LocalExecutor;

impl Executor for LocalExecutor {
    fn run(&mut self, task: &Task) -> Result<TaskResult> {
        catch_unwind(AssertUnwindSafe(|| execute_task(task))).unwrap_or_else(|_| {
            Err(Error::TaskFailed {
                task_id: task.task_id,
                reason: "local worker panicked".into(),
            })
        })
    }
}

struct RemoteExecutor {
    address: String,
    timeout: Duration,
    conn: Option<(TcpStream, BufReader<TcpStream>)>,
}

impl RemoteExecutor {
    fn connect(&mut self) -> Result<&mut (TcpStream, BufReader<TcpStream>)> {
        if self.conn.is_none() {
            let addr = self
                .address
                .to_socket_addrs()?
                .next()
                .ok_or_else(|| Error::Protocol(format!("cannot resolve {}", self.address)))?;
            let stream = TcpStream::connect_timeout(&addr, self.timeout)?;
            stream.set_read_timeout(Some(self.timeout))?;
            stream.set_nodelay(true)?;
            let reader = BufReader::new(stream.try_clone()?);
            self.conn = Some((stream, reader));
        }
        Ok(self.conn.as_mut().expect("just connected"))
    }

    fn exchange(&mut self, task: &Task) -> Result<TaskResult> {
        let (writer, reader) = self.connect()?;
        writer.write_all(encode_task(task).as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::Protocol("worker closed the connection".into()));
        }
        decode_result(line.trim_end())
    }
}

impl Executor for RemoteExecutor {
    fn run(&mut self, task: &Task) -> Result<TaskResult> {
        let outcome = self.exchange(task);
        if outcome.is_err() {
            self.conn = None;
        }
        outcome
    }
}

/// Checks a result against its task before it enters the archive.
fn verify(problem: &BenchmarkProblem, task: &Task, result: &TaskResult) -> Result<()> {
    let fail = |reason: String| {
        Err(Error::TaskFailed {
            task_id: task.task_id,
            reason,
        })
    };
    if result.task_id != task.task_id {
        return fail(format!("reply carries task_id {}", result.task_id));
    }
    let objectives = problem.evaluate(&result.best_point)?;
    if objectives != result.objectives {
        return fail("objectives do not match the returned point".into());
    }
    let scalar = scalarization::tchebycheff(&objectives, &task.weight, &task.z)?;
    if (scalar - result.scalar_value).abs() > 1e-12 {
        return fail("scalar value does not match the objectives".into());
    }
    if result.evals_used > task.solver_cfg.eval_budget {
        return fail("evaluation budget exceeded".into());
    }
    Ok(())
}

/// Solves `n` scalarized subproblems and assembles the archive.
///
/// A failing task is retried once; a second failure aborts the whole run.
pub fn run_mo_fda(
    kind: ProblemKind,
    n: usize,
    solver_cfg: &SolverConfig,
    opts: &RunOptions,
) -> Result<ParetoArchive> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 weight vectors, got {n}"
        )));
    }
    if opts.workers < 1 && opts.endpoints.is_empty() {
        return Err(Error::InvalidConfig("need at least one worker".into()));
    }
    let problem = BenchmarkProblem::new(kind);
    solver_cfg.validate(problem.dim())?;
    let z = opts
        .z
        .clone()
        .unwrap_or_else(|| ReferencePoint::origin(problem.num_objectives()));
    let weights = scalarization::generate_weights(problem.num_objectives(), n)?;
    let tasks: Vec<Task> = weights
        .iter()
        .map(|w| Task {
            task_id: w.index,
            problem_name: kind.name().to_string(),
            weight: w.clone(),
            z: z.clone(),
            solver_cfg: solver_cfg.clone(),
        })
        .collect();

    let queue: Mutex<VecDeque<(usize, u32)>> = Mutex::new((0..n).map(|i| (i, 0)).collect());
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<TaskResult>>();

    let mut slots: Vec<Option<TaskResult>> = vec![None; n];
    let mut failure = None;

    thread::scope(|scope| {
        let mut executors: Vec<Box<dyn Executor + Send>> = Vec::new();
        for _ in 0..opts.workers {
            executors.push(Box::new(LocalExecutor));
        }
        for address in &opts.endpoints {
            executors.push(Box::new(RemoteExecutor {
                address: address.clone(),
                timeout: opts.remote_timeout,
                conn: None,
            }));
        }
        for mut exec in executors {
            let tx = tx.clone();
            let (queue, abort, tasks, problem) = (&queue, &abort, &tasks, &problem);
            scope.spawn(move || {
                while !abort.load(Ordering::SeqCst) {
                    let next = queue.lock().expect("queue lock").pop_front();
                    let Some((idx, attempts)) = next else { break };
                    let task = &tasks[idx];
                    let outcome = exec
                        .run(task)
                        .and_then(|r| verify(problem, task, &r).map(|_| r));
                    match outcome {
                        Ok(result) => {
                            let _ = tx.send(Ok(result));
                        }
                        Err(e) if attempts == 0 => {
                            log::warn!("task {} failed, retrying: {e}", task.task_id);
                            queue
                                .lock()
                                .expect("queue lock")
                                .push_back((idx, attempts + 1));
                        }
                        Err(e) => {
                            let _ = tx.send(Err(Error::TaskFailed {
                                task_id: task.task_id,
                                reason: e.to_string(),
                            }));
                        }
                    }
                }
            });
        }
        drop(tx);

        let mut done = 0;
        for outcome in rx {
            match outcome {
                Ok(result) => {
                    let id = result.task_id;
                    if slots[id].is_none() {
                        done += 1;
                    }
                    slots[id] = Some(result);
                    if done == n {
                        break;
                    }
                }
                Err(e) => {
                    abort.store(true, Ordering::SeqCst);
                    failure = Some(e);
                    break;
                }
            }
        }
    });

    if let Some(e) = failure {
        return Err(e);
    }
    let results: Vec<TaskResult> = slots
        .into_iter()
        .enumerate()
        .map(|(id, r)| {
            r.ok_or(Error::TaskFailed {
                task_id: id,
                reason: "no worker produced a result".into(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(nondominated_filter(ParetoArchive {
        problem_name: kind.name().to_string(),
        weights,
        dominated_flags: vec![false; n],
        results,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SolverConfig {
        SolverConfig {
            eval_budget: 2_000,
            ..SolverConfig::default()
        }
    }

    fn task(id: usize, w: Vec<f64>) -> Task {
        Task {
            task_id: id,
            problem_name: "zdt1".into(),
            weight: WeightVector::new(w, id).unwrap(),
            z: ReferencePoint::origin(2),
            solver_cfg: small_cfg(),
        }
    }

    #[test]
    fn dominance_flags_on_archive() {
        let mk = |id: usize, f: Vec<f64>| TaskResult {
            task_id: id,
            best_point: vec![],
            objectives: f,
            scalar_value: 0.0,
            evals_used: 0,
            wall_time: 0.0,
            trace: None,
        };
        let archive = |fs: Vec<Vec<f64>>| ParetoArchive {
            problem_name: "zdt1".into(),
            weights: vec![],
            dominated_flags: vec![false; fs.len()],
            results: fs.into_iter().enumerate().map(|(i, f)| mk(i, f)).collect(),
        };
        let a = nondominated_filter(archive(vec![vec![0.0, 1.0], vec![1.0, 0.0]]));
        assert_eq!(a.dominated_flags, vec![false, false]);
        let a = nondominated_filter(archive(vec![vec![0.0, 0.0], vec![1.0, 1.0]]));
        assert_eq!(a.dominated_flags, vec![false, true]);
        assert_eq!(a.len(), 2);
        let a = nondominated_filter(archive(vec![vec![0.0, 1.0], vec![0.0, 1.0]]));
        assert_eq!(a.dominated_flags, vec![false, false]);
    }

    #[test]
    fn wire_round_trip_is_exact() {
        let t = task(3, vec![0.1, 0.9]);
        let line = encode_task(&t);
        assert!(line.contains("\"v\":1"));
        assert_eq!(decode_task(&line).unwrap(), t);

        let r = execute_task(&t).unwrap();
        let back = decode_result(&encode_result(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn version_is_checked() {
        let line = encode_task(&task(0, vec![1.0, 0.0])).replace("\"v\":1", "\"v\":2");
        assert!(matches!(decode_task(&line), Err(Error::Protocol(_))));
    }

    #[test]
    fn malformed_lines_get_error_records() {
        let reply: Value = serde_json::from_str(&handle_line("not json")).unwrap();
        assert_eq!(reply["v"], 1);
        assert!(reply["error"].is_string());
        assert!(reply["task_id"].is_null());

        let reply: Value =
            serde_json::from_str(&handle_line(r#"{"v":1,"task_id":7,"problem_name":"zdt1"}"#))
                .unwrap();
        assert_eq!(reply["task_id"], 7);

        let mut t = task(4, vec![1.0, 0.0]);
        t.problem_name = "nope".into();
        let reply: Value = serde_json::from_str(&handle_line(&encode_task(&t))).unwrap();
        assert_eq!(reply["task_id"], 4);
        assert!(reply["error"].as_str().unwrap().contains("nope"));
    }

    #[test]
    fn task_result_invariants() {
        let t = task(0, vec![0.5, 0.5]);
        let r = execute_task(&t).unwrap();
        let p = BenchmarkProblem::by_name("zdt1").unwrap();
        assert_eq!(p.evaluate(&r.best_point).unwrap(), r.objectives);
        let s = scalarization::tchebycheff(&r.objectives, &t.weight, &t.z).unwrap();
        assert!((s - r.scalar_value).abs() <= 1e-12);
        assert!(r.evals_used <= 2_000);
    }

    #[test]
    fn archive_is_ordered_and_complete() {
        let opts = RunOptions {
            workers: 3,
            ..RunOptions::default()
        };
        let a = run_mo_fda(ProblemKind::Zdt1, 5, &small_cfg(), &opts).unwrap();
        assert_eq!(a.len(), 5);
        let ids: Vec<usize> = a.results.iter().map(|r| r.task_id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn unreachable_endpoint_fails_with_task_id() {
        // Bind then drop to get a port with nothing listening.
        let port = TcpListener::bind("127.0.0.1:0")
            .unwrap()
            .local_addr()
            .unwrap()
            .port();
        let opts = RunOptions {
            workers: 0,
            endpoints: vec![format!("127.0.0.1:{port}")],
            remote_timeout: Duration::from_secs(2),
            ..RunOptions::default()
        };
        let err = run_mo_fda(ProblemKind::Zdt1, 3, &small_cfg(), &opts).unwrap_err();
        assert!(matches!(err, Error::TaskFailed { task_id: 0, .. }), "{err}");
    }

    #[test]
    fn archive_csv_layout() {
        let opts = RunOptions::default();
        let a = run_mo_fda(ProblemKind::Zdt1, 2, &small_cfg(), &opts).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&["note".to_string()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# note"));
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 1 + 2 + 30 + 2 + 2);
        assert_eq!(header[0], "task_id");
        assert_eq!(header[3], "x_1");
        assert_eq!(header[35], "scalar_value");
        assert_eq!(header[36], "dominated");
        assert_eq!(lines.count(), 2);
    }
}
