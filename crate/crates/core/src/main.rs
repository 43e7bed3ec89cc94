use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mofda::cli::{self, RunConfig};
use mofda::metrics::MetricReport;
use mofda::stats::Direction;
use mofda::{runner, Error, Result};

#[derive(Parser)]
#[command(
    name = "mofda",
    version,
    about = "Multi-objective fractal decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark problem and write archive.csv and metrics.csv.
    Solve(RunArgs),
    /// Solve every registered problem and write a metric matrix.
    Suite {
        #[command(flatten)]
        run: RunArgs,
        /// Restrict to these problems (comma separated).
        #[arg(long, value_delimiter = ',')]
        problems: Vec<String>,
        /// External metric matrix to rank against, as NAME=PATH.
        #[arg(long = "compare", value_name = "NAME=PATH")]
        compare: Vec<String>,
    },
    /// Score an objective-vector CSV against a sampled true front.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1000)]
        truth_points: usize,
        #[arg(long, value_delimiter = ',')]
        hv_ref: Option<Vec<f64>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Friedman mean ranks of an algorithms x functions CSV.
    Friedman {
        #[arg(long)]
        input: PathBuf,
        /// max or min
        #[arg(long, default_value = "min")]
        direction: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the weight family.
    Weights {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a sampled true front.
    PfTrue {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Serve tasks over TCP until killed.
    Worker {
        #[arg(long, default_value = "127.0.0.1:7878")]
        address: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value file; flags given here win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    inflation: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Remote worker address; repeatable.
    #[arg(long = "endpoint")]
    endpoints: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    filter_dominated: bool,
    #[arg(long)]
    emit_trace: bool,
    #[arg(long)]
    truth_points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    hv_ref: Option<Vec<f64>>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(p) = &self.problem {
            cfg.problem_name = p.clone();
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(b) = self.budget {
            cfg.solver.eval_budget = b;
        }
        if let Some(k) = self.depth {
            cfg.solver.depth_k = k;
        }
        if let Some(i) = self.inflation {
            cfg.solver.inflation = i;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if !self.endpoints.is_empty() {
            cfg.endpoints = self.endpoints.clone();
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.filter_dominated |= self.filter_dominated;
        cfg.emit_trace |= self.emit_trace;
        if let Some(t) = self.truth_points {
            cfg.truth_points = t;
        }
        if let Some(r) = &self.hv_ref {
            cfg.hv_reference = Some(r.clone());
        }
        Ok(cfg)
    }
}

fn metrics_text(report: &MetricReport, comments: &[String]) -> Result<String> {
    let mut buf = Vec::new();
    cli::write_metrics_csv(report, comments, &mut buf)?;
    Ok(String::from_utf8(buf).expect("utf-8"))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Solve(args) => {
            let out = cli::cmd_solve(&args.config()?)?;
            print!("{}", cli::solve_summary(&out));
        }
        Command::Suite {
            run,
            problems,
            compare,
        } => {
            let cfg = run.config()?;
            let compare = compare
                .iter()
                .map(|s| cli::parse_named_path(s))
                .collect::<Result<Vec<_>>>()?;
            let out = cli::cmd_suite(&cfg, &problems, &compare)?;
            println!(
                "{} problems solved, matrix at {}",
                out.matrix.problems.len(),
                cfg.output_dir.join("matrix.csv").display()
            );
            if out.rankings.is_some() {
                print!(
                    "{}",
                    std::fs::read_to_string(cfg.output_dir.join("friedman.txt"))?
                );
            }
            if !out.failures.is_empty() {
                for (name, e) in &out.failures {
                    eprintln!("{name}: {e}");
                }
                return Err(Error::IncompleteData(format!(
                    "{} problem(s) failed",
                    out.failures.len()
                )));
            }
        }
        Command::Metrics {
            input,
            problem,
            truth_points,
            hv_ref,
            output,
        } => {
            let (report, comments) =
                cli::cmd_metrics(&input, &problem, truth_points, hv_ref.as_deref())?;
            cli::emit(&metrics_text(&report, &comments)?, output.as_deref())?;
        }
        Command::Friedman {
            input,
            direction,
            output,
        } => {
            let direction: Direction = direction.parse()?;
            let (csv_text, table) = cli::cmd_friedman(&input, direction)?;
            match output {
                Some(path) => {
                    cli::emit(&csv_text, Some(&path))?;
                    print!("{table}");
                }
                None => {
                    print!("{csv_text}");
                    println!();
                    print!("{table}");
                }
            }
        }
        Command::Weights { m, n, output } => {
            cli::emit(&cli::cmd_weights(m, n)?, output.as_deref())?
        }
        Command::PfTrue {
            problem,
            count,
            output,
        } => cli::emit(&cli::cmd_pf_true(&problem, count)?, output.as_deref())?,
        Command::Worker { address } => {
            let listener = TcpListener::bind(&address)?;
            println!("listening on {}", listener.local_addr()?);
            std::io::stdout().flush()?;
            runner::serve(listener)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
