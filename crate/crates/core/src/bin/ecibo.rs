use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ecibo::harness::{compare_dir, render_compare_table, summarize_dir};
use ecibo::{run_experiment, Algorithm, Error, ExperimentConfig, ProblemId};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ecibo",
    version,
    about = "Coordinate-wise Bayesian optimization benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed campaign and write CSVs plus summary.json.
    Run(RunArgs),
    /// Recompute statistics from the CSVs in a directory.
    Summarize {
        #[arg(long = "in")]
        dir: PathBuf,
    },
    /// Wilcoxon table of every algorithm against a baseline.
    Compare {
        #[arg(long = "in")]
        dir: PathBuf,
        #[arg(long)]
        baseline: Algorithm,
        /// Print the rows as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with the campaign; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemId>,
    #[arg(long)]
    dim: Option<usize>,
    /// May be repeated.
    #[arg(long = "algo")]
    algorithms: Vec<Algorithm>,
    #[arg(long)]
    n_init: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: e.kind(),
            message: e.to_string(),
            code: 1,
        }
    }
}

fn missing(flag: &str) -> Failure {
    Failure {
        kind: "invalid_argument",
        message: format!("--{flag} is required (or supply it through --config)"),
        code: 2,
    }
}

fn format_error(path: &Path, message: impl Into<String>) -> Failure {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
    .into()
}

fn load_config(path: &Path) -> Result<serde_json::Map<String, serde_json::Value>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    match serde_json::from_str(&text) {
        Ok(serde_json::Value::Object(map)) => Ok(map),
        Ok(_) => Err(format_error(path, "config must be a JSON object")),
        Err(e) => Err(format_error(path, e.to_string())),
    }
}

fn experiment_config(args: RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut map = match &args.config {
        Some(path) => load_config(path)?,
        None => serde_json::Map::new(),
    };
    let mut set = |key: &str, v: serde_json::Value| {
        map.insert(key.to_string(), v);
    };
    if let Some(v) = args.problem {
        set("problem", json!(v));
    }
    if let Some(v) = args.dim {
        set("dim", json!(v));
    }
    if !args.algorithms.is_empty() {
        set("algorithms", json!(args.algorithms));
    }
    if let Some(v) = args.n_init {
        set("n_init", json!(v));
    }
    if let Some(v) = args.n_max {
        set("n_max", json!(v));
    }
    if let Some(v) = args.runs {
        set("runs", json!(v));
    }
    if let Some(v) = args.seed {
        set("seed", json!(v));
    }
    if let Some(v) = args.threads {
        set("threads", json!(v));
    }
    if let Some(v) = &args.out {
        set("out", json!(v));
    }
    for (key, flag) in [
        ("problem", "problem"),
        ("dim", "dim"),
        ("algorithms", "algo"),
        ("n_init", "n-init"),
        ("n_max", "n-max"),
        ("runs", "runs"),
        ("seed", "seed"),
        ("out", "out"),
    ] {
        if !map.contains_key(key) {
            return Err(missing(flag));
        }
    }
    serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| Failure {
        kind: "invalid_argument",
        message: format!("bad config: {e}"),
        code: 2,
    })
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure {
        kind: "format",
        message: e.to_string(),
        code: 1,
    })?;
    emit(&format!("{text}\n"));
    Ok(())
}

/// Write to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let cfg = experiment_config(args)?;
            let summary = run_experiment(&cfg)?;
            print_json(&json!({
                "out": cfg.out,
                "runs": summary.runs,
                "stats": summary.stats.iter().map(|(a, s)| (a.to_string(), json!({
                    "runs": s.runs,
                    "mean": s.mean,
                    "median": s.median,
                    "std": s.std,
                    "min": s.min,
                    "max": s.max,
                }))).collect::<serde_json::Map<_, _>>(),
            }))?;
            let failed: Vec<String> = summary
                .runs
                .iter()
                .filter(|r| !matches!(r.status, ecibo::engine::RunStatus::Completed))
                .map(|r| format!("{} run {}", r.algorithm, r.run))
                .collect();
            if !failed.is_empty() {
                return Err(Failure {
                    kind: "run_failed",
                    message: format!("{} run(s) failed: {}", failed.len(), failed.join(", ")),
                    code: 3,
                });
            }
            Ok(())
        }
        Command::Summarize { dir } => print_json(&summarize_dir(&dir)?),
        Command::Compare {
            dir,
            baseline,
            json,
        } => {
            let rows = compare_dir(&dir, baseline)?;
            if json {
                print_json(&rows)
            } else {
                emit(&render_compare_table(&rows, baseline));
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let err = json!({"error": {"kind": "usage", "message": message.trim_end()}});
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "{}",
                json!({"error": {"kind": f.kind, "message": f.message}})
            );
            ExitCode::from(f.code)
        }
    }
}
