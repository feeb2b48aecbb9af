//! Commands behind the `mobandit` binary: run experiments, recompute Table 1,
//! evaluate bound grids, list Pareto fronts and serve elicitation sessions.
//!
//! Exit status is 0 on success, 2 for configuration errors (including bad
//! arguments) and 1 for everything else.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mobandit_core::analysis::{run_bounds_grid, write_bounds_csv, BoundsConfig};
use mobandit_core::harness::{export, pareto_regret, run_experiment, ExperimentConfig};
use mobandit_core::objective::pareto_front;
use mobandit_core::policy::PolicyRegistry;
use mobandit_core::table1::{self, Column};
use mobandit_core::ActionSet;

const THREADS_VAR: &str = "MOBANDIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mobandit", version, about = "Multi-objective Thompson sampling toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a regret experiment and export regret.csv, mean_curve.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the Table 1 preference values and gaps.
    Table1 {
        #[arg(long, value_enum, default_value = "linear")]
        pref: PrefArg,
        /// Tolerance when comparing against the printed values.
        #[arg(long, default_value_t = 0.005)]
        tol: f64,
        #[arg(long)]
        csv: bool,
    },
    /// Evaluate concentration bounds with Monte-Carlo verdicts (CSV on stdout).
    Bounds {
        /// Grid config; the standard grid is used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the number of trials per grid point.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// List the Pareto front of an action set, environment or experiment config.
    Front {
        #[arg(long)]
        config: PathBuf,
        /// Also list dominated actions.
        #[arg(long)]
        all: bool,
    },
    /// Serve the elicitation HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Append-only session log; sessions are restored from it on start.
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrefArg {
    Linear,
    Econstraint,
    Chebyshev,
}

impl From<PrefArg> for Column {
    fn from(p: PrefArg) -> Self {
        match p {
            PrefArg::Linear => Column::Linear,
            PrefArg::Econstraint => Column::EpsilonConstraint,
            PrefArg::Chebyshev => Column::Chebyshev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl From<mobandit_core::Error> for Failure {
    fn from(e: mobandit_core::Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<mobandit_elicit::ServiceError> for Failure {
    fn from(e: mobandit_elicit::ServiceError) -> Self {
        match e {
            mobandit_elicit::ServiceError::BadRequest(m) => Failure::Config(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn output_err(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("writing output: {e}"))
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "config error: {msg}"),
            Failure::Runtime(msg) => f.write_str(msg),
        }
    }
}

/// Runs the command, writing results to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    dispatch(cli.command, out)
}

/// Sizes the global rayon pool from `MOBANDIT_THREADS` when it is set.
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn dispatch(command: Command, w: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Run { config, out } => run(&config, out, w),
        Command::Table1 { pref, tol, csv } => print_table1(pref.into(), tol, csv, w),
        Command::Bounds { config, trials } => bounds(config.as_deref(), trials, w),
        Command::Front { config, all } => front(&config, all, w),
        Command::Serve { bind, port, store } => serve(SocketAddr::new(bind, port), store.as_deref()),
    }
}

fn run(path: &Path, out: Option<PathBuf>, w: &mut dyn Write) -> Result<(), Failure> {
    let config = ExperimentConfig::from_file(path)?;
    let dir = out
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| Failure::Config("no output directory: pass --out or set output_dir".into()))?;
    let result = run_experiment(&config, &PolicyRegistry::with_defaults())?;
    let paths = export(&result, &dir)?;
    writeln!(w, "optimal action {} (T = {}, R = {})", result.gaps.star(), config.horizon, config.repetitions)
        .map_err(output_err)?;
    for c in &result.curves {
        writeln!(
            w,
            "{:<28} mean final regret {:>10.3}  [min {:.3}, max {:.3}]",
            c.label,
            c.final_mean(),
            c.min.last().copied().unwrap_or(0.0),
            c.max.last().copied().unwrap_or(0.0)
        )
        .map_err(output_err)?;
    }
    for p in [&paths.regret_csv, &paths.mean_curve_csv, &paths.summary_json] {
        writeln!(w, "wrote {}", p.display()).map_err(output_err)?;
    }
    Ok(())
}

fn print_table1(column: Column, tol: f64, csv: bool, w: &mut dyn Write) -> Result<(), Failure> {
    let rows = table1::recompute(column);
    let fmt_opt = |x: Option<f64>| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.2}"));
    if csv {
        writeln!(w, "action,mu1,mu2,value,gap,optimal,printed_value,printed_gap,match").map_err(output_err)?;
        for (a, r) in rows.iter().enumerate() {
            let printed = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
            writeln!(
                w,
                "{a},{},{},{},{},{},{},{},{}",
                r.mean[0],
                r.mean[1],
                r.value,
                r.gap,
                r.optimal,
                printed(r.printed_value),
                printed(r.printed_gap),
                r.matches(tol)
            )
            .map_err(output_err)?;
        }
        return Ok(());
    }
    writeln!(w, "preference: {}", column.preference().kind()).map_err(output_err)?;
    writeln!(w, "{:>2}  {:>12}  {:>7}  {:>7}  {:>7}  {:>7}  match", "a", "mean", "f", "gap", "f*", "gap*")
        .map_err(output_err)?;
    for (a, r) in rows.iter().enumerate() {
        writeln!(
            w,
            "{a:>2}  ({:.2}, {:.2})  {:>7.4}  {:>7.4}  {:>7}  {:>7}  {}{}",
            r.mean[0],
            r.mean[1],
            r.value,
            r.gap,
            fmt_opt(r.printed_value),
            fmt_opt(r.printed_gap),
            if r.matches(tol) { "yes" } else { "NO" },
            if r.optimal { "  <- optimal" } else { "" }
        )
        .map_err(output_err)?;
    }
    let matching = rows.iter().filter(|r| r.matches(tol)).count();
    writeln!(w, "{matching}/{} rows within ±{tol} of the printed values (* columns)", rows.len()).map_err(output_err)
}

fn bounds(path: Option<&Path>, trials: Option<u64>, w: &mut dyn Write) -> Result<(), Failure> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<BoundsConfig>(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => BoundsConfig::standard(),
    };
    if let Some(n) = trials {
        config.trials = n;
    }
    let rows = run_bounds_grid(&config)?;
    write_bounds_csv(&rows, w).map_err(output_err)
}

/// Accepts a bare action set, an environment, or a full experiment config.
fn load_actions(path: &Path) -> Result<ActionSet, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| Failure::Config(format!("{}: {e}", path.display()));
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    if let Some(env) = value.get_mut("environment") {
        value = env.take();
    }
    serde_json::from_value(value).map_err(bad)
}

fn front(path: &Path, all: bool, w: &mut dyn Write) -> Result<(), Failure> {
    let actions = load_actions(path)?;
    let front = pareto_front(&actions);
    let coords: Vec<String> = (1..=actions.dim()).map(|i| format!("z{i}")).collect();
    writeln!(w, "action,name,{},on_front,pareto_regret", coords.join(",")).map_err(output_err)?;
    for (a, action) in actions.actions().iter().enumerate() {
        let on_front = front.contains(&a);
        if !(on_front || all) {
            continue;
        }
        let mean: Vec<String> = action.mean.as_slice().iter().map(f64::to_string).collect();
        let regret = pareto_regret(&actions, a)?;
        writeln!(w, "{a},{},{},{on_front},{regret}", action.name, mean.join(",")).map_err(output_err)?;
    }
    Ok(())
}

fn serve(addr: SocketAddr, store: Option<&Path>) -> Result<(), Failure> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    eprintln!("mobandit: serving on http://{addr}");
    runtime.block_on(mobandit_elicit::serve(addr, store))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mobandit_core::policy::PolicyRegistry;

    fn configs_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
    }

    fn call(args: &[&str]) -> (Result<(), Failure>, String) {
        let cli = Cli::try_parse_from(std::iter::once("mobandit").chain(args.iter().copied())).expect("valid args");
        let mut out = Vec::new();
        let r = execute(cli, &mut out);
        (r, String::from_utf8(out).unwrap())
    }

    fn code(r: &Result<(), Failure>) -> u8 {
        r.as_ref().map_or_else(Failure::exit_code, |()| 0)
    }

    fn small_config(dir: &Path) -> PathBuf {
        let mut config = ExperimentConfig::from_file(&configs_dir().join("linear_mvn.json")).unwrap();
        config.horizon = 10;
        config.repetitions = 2;
        config.policies.truncate(2);
        config.output_dir = None;
        let path = dir.join("small.json");
        std::fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
        path
    }

    #[test]
    fn shipped_configs_are_valid() {
        let registry = PolicyRegistry::with_defaults();
        for name in ["wrong_optimum.json", "linear_mvn.json"] {
            ExperimentConfig::from_file(&configs_dir().join(name))
                .unwrap()
                .validate(&registry)
                .unwrap();
        }
        let text = std::fs::read_to_string(configs_dir().join("bounds_small.json")).unwrap();
        let bounds: BoundsConfig = serde_json::from_str(&text).unwrap();
        assert!(!bounds.queries().is_empty());
    }

    #[test]
    fn table1_csv_has_ten_rows() {
        let (r, text) = call(&["table1", "--pref", "econstraint", "--csv"]);
        r.unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "action,mu1,mu2,value,gap,optimal,printed_value,printed_gap,match");
        assert_eq!(lines.len(), 11);
        // (0.54, 0.72) is optimal under the ε-constraint.
        assert!(lines[6].starts_with("5,0.54,0.72,0.72,0,true"));

        let (r, text) = call(&["table1", "--pref", "chebyshev"]);
        r.unwrap();
        assert!(text.contains("<- optimal"));
        assert!(text.contains("10/10 rows"), "nothing printed, so every row matches");
    }

    #[test]
    fn run_writes_deterministic_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config(dir.path());
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        for out in [&a, &b] {
            let (r, text) = call(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            r.unwrap();
            assert!(text.contains("wrote"));
        }
        for f in ["regret.csv", "mean_curve.csv", "summary.json"] {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
        }
        // 2 policies × 2 repetitions × 10 episodes.
        let csv = std::fs::read_to_string(a.join("regret.csv")).unwrap();
        assert_eq!(csv.lines().count(), 41);
        let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["config"]["horizon"], 10);
    }

    #[test]
    fn config_errors_map_to_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"horizon": 0}"#).unwrap();
        assert_eq!(code(&call(&["run", "--config", bad.to_str().unwrap(), "--out", out]).0), 2);

        let mut config = ExperimentConfig::from_file(&small_config(dir.path())).unwrap();
        config.horizon = 0;
        std::fs::write(&bad, serde_json::to_string(&config).unwrap()).unwrap();
        let (r, _) = call(&["run", "--config", bad.to_str().unwrap(), "--out", out]);
        assert!(matches!(&r, Err(Failure::Config(m)) if m.contains("horizon")), "{r:?}");

        // Neither --out nor output_dir.
        let small = small_config(dir.path());
        assert_eq!(code(&call(&["run", "--config", small.to_str().unwrap()]).0), 2);

        // Unreadable files are not config errors.
        let missing = dir.path().join("missing.json");
        assert_eq!(code(&call(&["run", "--config", missing.to_str().unwrap()]).0), 1);

        // Argument errors come from clap, which also exits with 2.
        let e = Cli::try_parse_from(["mobandit", "table1", "--pref", "nope"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(Cli::try_parse_from(["mobandit"]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn front_lists_the_four_table1_members() {
        let path = configs_dir().join("table1_actions.json");
        let (r, text) = call(&["front", "--config", path.to_str().unwrap()]);
        r.unwrap();
        let members: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(members, ["2", "5", "7", "8"]);

        // Experiment configs are accepted too; --all adds dominated actions with their regret.
        let path = configs_dir().join("wrong_optimum.json");
        let (r, text) = call(&["front", "--config", path.to_str().unwrap(), "--all"]);
        r.unwrap();
        assert_eq!(text.lines().count(), 11);
        let row6 = text.lines().find(|l| l.starts_with("6,")).unwrap();
        // (0.49, 0.62) needs +0.05 to escape (0.54, 0.72).
        assert!(row6.contains(",false,0.05"), "{row6}");
    }

    #[test]
    fn bounds_emits_csv() {
        let path = configs_dir().join("bounds_small.json");
        let (r, text) = call(&["bounds", "--config", path.to_str().unwrap(), "--trials", "10000"]);
        r.unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("fact,variant,d,sigma,n,deviation,bound,empirical,std_error,holds"));
        let expected = serde_json::from_str::<BoundsConfig>(&std::fs::read_to_string(&path).unwrap())
            .unwrap()
            .queries()
            .len();
        assert_eq!(lines.count(), expected);

        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("b.json");
        std::fs::write(&bad, r#"{"grid": [{"fact": "chernoff", "d": [0], "sigma": [1], "deviation": [0.1]}]}"#).unwrap();
        assert_eq!(code(&call(&["bounds", "--config", bad.to_str().unwrap()]).0), 2);
        assert_eq!(code(&call(&["bounds", "--trials", "100"]).0), 2);
    }
}
