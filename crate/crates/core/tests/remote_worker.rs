use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use mofda::benchmarks::ProblemKind;
use mofda::runner::{self, RunOptions, Task};
use mofda::scalarization::{generate_weights, ReferencePoint};
use mofda::solver::SolverConfig;
use mofda::Error;

fn spawn_worker() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || runner::serve(listener));
    addr
}

fn cfg(budget: usize) -> SolverConfig {
    SolverConfig {
        eval_budget: budget,
        ..SolverConfig::default()
    }
}

fn exchange(stream: &mut TcpStream, reader: &mut BufReader<TcpStream>, line: &str) -> String {
    stream.write_all(line.as_bytes()).unwrap();
    stream.write_all(b"\n").unwrap();
    let mut reply = String::new();
    reader.read_line(&mut reply).unwrap();
    reply
}

#[test]
fn remote_and_local_archives_match() {
    let a = spawn_worker();
    let b = spawn_worker();
    let local =
        runner::run_mo_fda(ProblemKind::Zdt1, 6, &cfg(5_000), &RunOptions::default()).unwrap();
    let remote_only = RunOptions {
        workers: 0,
        endpoints: vec![a.clone(), b.clone()],
        ..RunOptions::default()
    };
    let remote = runner::run_mo_fda(ProblemKind::Zdt1, 6, &cfg(5_000), &remote_only).unwrap();
    let mixed = RunOptions {
        workers: 2,
        endpoints: vec![a],
        ..RunOptions::default()
    };
    let mixed = runner::run_mo_fda(ProblemKind::Zdt1, 6, &cfg(5_000), &mixed).unwrap();
    assert!(local.same_content(&remote));
    assert!(local.same_content(&mixed));
}

#[test]
fn worker_minimizes_first_objective_for_corner_weight() {
    let addr = spawn_worker();
    let mut stream = TcpStream::connect(&addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let weight = generate_weights(2, 2).unwrap().pop().unwrap();
    assert_eq!(weight.components, vec![1.0, 0.0]);
    let task = Task {
        task_id: 1,
        problem_name: "zdt1".into(),
        weight,
        z: ReferencePoint::origin(2),
        solver_cfg: cfg(10_000),
    };
    let reply = exchange(&mut stream, &mut reader, &runner::encode_task(&task));
    let result = runner::decode_result(reply.trim()).unwrap();
    assert_eq!(result.task_id, 1);
    assert!(
        result.objectives[0] <= 1e-9,
        "f1 = {}",
        result.objectives[0]
    );

    // Same task again on the same connection: the worker keeps no state.
    let again = exchange(&mut stream, &mut reader, &runner::encode_task(&task));
    let again = runner::decode_result(again.trim()).unwrap();
    assert!(result.same_outcome(&again));
}

#[test]
fn malformed_records_get_error_replies_and_worker_survives() {
    let addr = spawn_worker();
    let mut stream = TcpStream::connect(&addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());

    let reply = exchange(&mut stream, &mut reader, "not json");
    let v: serde_json::Value = serde_json::from_str(reply.trim()).unwrap();
    assert_eq!(v["v"], 1);
    assert!(v["error"].is_string());
    assert!(v["task_id"].is_null());

    let reply = exchange(
        &mut stream,
        &mut reader,
        r#"{"v":1,"task_id":9,"problem_name":"zdt1"}"#,
    );
    let v: serde_json::Value = serde_json::from_str(reply.trim()).unwrap();
    assert_eq!(v["task_id"], 9);

    let reply = exchange(&mut stream, &mut reader, r#"{"v":2,"task_id":3}"#);
    assert!(matches!(
        runner::decode_result(reply.trim()),
        Err(Error::TaskFailed { task_id: 3, .. })
    ));

    let task = Task {
        task_id: 0,
        problem_name: "zdt2".into(),
        weight: generate_weights(2, 3).unwrap().remove(1),
        z: ReferencePoint::origin(2),
        solver_cfg: cfg(2_000),
    };
    let reply = exchange(&mut stream, &mut reader, &runner::encode_task(&task));
    assert!(runner::decode_result(reply.trim()).is_ok());
}

#[test]
fn dead_endpoint_alone_fails_the_run() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    drop(listener);
    let opts = RunOptions {
        workers: 0,
        endpoints: vec![addr],
        ..RunOptions::default()
    };
    let err = runner::run_mo_fda(ProblemKind::Zdt1, 3, &cfg(2_000), &opts).unwrap_err();
    assert!(matches!(err, Error::TaskFailed { .. }), "{err}");
}

#[test]
fn three_objective_tasks_round_trip() {
    let addr = spawn_worker();
    let opts = RunOptions {
        workers: 0,
        endpoints: vec![addr],
        ..RunOptions::default()
    };
    let remote = runner::run_mo_fda(ProblemKind::Dtlz2, 6, &cfg(3_000), &opts).unwrap();
    let local =
        runner::run_mo_fda(ProblemKind::Dtlz2, 6, &cfg(3_000), &RunOptions::default()).unwrap();
    assert!(remote.same_content(&local));
    assert!(remote.results.iter().all(|r| r.objectives.len() == 3));
}
