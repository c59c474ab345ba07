//! Command-line front end: `simulate`, `sweep`, `bounds` and `validate`.
//!
//! Exit codes: 0 success, 1 bad arguments or configuration, 2 I/O failure,
//! 3 a validation criterion failed.

mod scenario;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use scenario::{
    parse_sweep, HeadLinksName, PolicyName, PolicySection, ProfileSection, RatesSection,
    RunSection, ScenarioFile, SweepParam, TopologyName, TopologySection,
};

use crate::bounds::{self, BoundParams};
use crate::error::Error;
use crate::experiment::{run_all, Experiment};
use crate::metrics::{EnsembleStatistics, Estimate};
use crate::validation::{self, Level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "asuman-sim",
    version,
    about = "Version-age gossip simulator and bound calculator"
)]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "ASUMAN_SIM_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the replications of one scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Overrides `run.seed` from the scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Prefix CSV output with `#` comment lines.
        #[arg(long)]
        gnuplot_header: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Run a scenario at several values of one parameter.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// `param=v1,v2,...` with param one of n, q, nu, p, c.
        #[arg(long, alias = "param")]
        sweep: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        gnuplot_header: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate closed-form bounds.
    Bounds {
        /// Bound to evaluate; see `--all` for every bound the parameters allow.
        name: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        lambda_e: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        lambda_i: Option<f64>,
        #[arg(long)]
        a1: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        output: Output,
    },
    /// Run the acceptance criteria; exits 3 if any fails.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} of {1} criteria failed")]
    Validation(usize, usize),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Io(_) => EXIT_IO,
            Failure::Validation(..) => EXIT_VALIDATION,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = pool.install(|| execute(cli.command)).and_then(|r| {
        emit(r.out.as_deref(), stdout, &r.body)?;
        r.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            f.code()
        }
    }
}

/// Command output plus a failure to report after it was written.
struct Rendered {
    body: String,
    out: Option<PathBuf>,
    failure: Option<Failure>,
}

impl Rendered {
    fn ok(body: String, output: Output) -> Result<Self, Failure> {
        Ok(Rendered {
            body,
            out: output.out,
            failure: None,
        })
    }
}

fn execute(command: Command) -> Result<Rendered, Failure> {
    match command {
        Command::Simulate {
            scenario,
            format,
            seed,
            gnuplot_header,
            output,
        } => {
            let mut file = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                file.run.seed = seed;
            }
            let exp = file.experiment()?;
            let stats = run_all(std::slice::from_ref(&exp))?.remove(0);
            let body = match format {
                Format::Csv => {
                    let mut s = String::new();
                    if gnuplot_header {
                        header_comments(&mut s, &scenario, &exp, None);
                    }
                    s.push_str(CSV_HEADER);
                    s.push('\n');
                    csv_rows(&mut s, "", &exp, &stats);
                    s
                }
                Format::Json => pretty(&summary_json(&exp, &stats)),
                Format::Text => text_summary(&exp, &stats),
            };
            Rendered::ok(body, output)
        }
        Command::Sweep {
            scenario,
            sweep,
            format,
            seed,
            gnuplot_header,
            output,
        } => {
            let mut file = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                file.run.seed = seed;
            }
            let (param, mut values) = parse_sweep(&sweep)?;
            values.sort_by(f64::total_cmp);
            values.dedup();
            let exps = values
                .iter()
                .map(|&v| file.with_param(param, v)?.experiment())
                .collect::<crate::Result<Vec<_>>>()?;
            let results = run_all(&exps)?;
            let body = match format {
                Format::Csv => {
                    let mut s = String::new();
                    if gnuplot_header {
                        header_comments(&mut s, &scenario, &exps[0], Some(param.name()));
                    }
                    s.push_str("param,value,");
                    s.push_str(CSV_HEADER);
                    s.push('\n');
                    for ((v, e), st) in values.iter().zip(&exps).zip(&results) {
                        csv_rows(&mut s, &format!("{},{v},", param.name()), e, st);
                    }
                    s
                }
                Format::Json => {
                    let points: Vec<_> = values
                        .iter()
                        .zip(&exps)
                        .zip(&results)
                        .map(|((v, e), st)| json!({ "value": v, "result": summary_json(e, st) }))
                        .collect();
                    pretty(&json!({ "param": param.name(), "points": points }))
                }
                Format::Text => values
                    .iter()
                    .zip(&exps)
                    .zip(&results)
                    .map(|((v, e), st)| format!("{} = {v}\n{}", param.name(), text_summary(e, st)))
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            Rendered::ok(body, output)
        }
        Command::Bounds {
            name,
            all,
            lambda_e,
            lambda,
            b,
            n,
            q,
            c,
            m,
            p,
            nu,
            i,
            k,
            lambda_i,
            a1,
            format,
            output,
        } => {
            let params = BoundParams {
                lambda_e,
                lambda,
                b,
                n,
                q,
                c,
                m,
                p,
                nu,
                i,
                k,
                lambda_i,
                a1,
            };
            let reports = match (name, all) {
                (Some(name), false) => bounds::named_report(&name, &params)?,
                (None, true) => bounds::all_reports(&params)?,
                (Some(_), true) => {
                    return Err(Failure::Config(
                        "give a bound name or --all, not both".into(),
                    ))
                }
                (None, false) => {
                    return Err(Failure::Config(format!(
                        "give a bound name or --all; known bounds: {}",
                        bounds::BOUND_NAMES.join(", ")
                    )))
                }
            };
            let body = match format {
                Format::Csv => bounds::render_csv(&reports),
                Format::Text => bounds::render_text(&reports),
                Format::Json => pretty(&json!(reports
                    .iter()
                    .map(|r| json!({
                        "name": r.name,
                        "params": r.params.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
                        "kind": r.kind,
                        "value": r.value,
                    }))
                    .collect::<Vec<_>>())),
            };
            Rendered::ok(body, output)
        }
        Command::Validate {
            level,
            seed,
            format,
            output,
        } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let outcomes = validation::run_suite(level, seed);
            let body = match format {
                Format::Text => outcomes.iter().map(|o| format!("{o}\n")).collect(),
                Format::Csv => {
                    let mut s = String::from("criterion,name,passed,detail\n");
                    for o in &outcomes {
                        let _ = writeln!(
                            s,
                            "{},{},{},{}",
                            o.id,
                            o.name,
                            o.passed,
                            csv_field(&o.detail)
                        );
                    }
                    s
                }
                Format::Json => pretty(&json!(outcomes)),
            };
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            Ok(Rendered {
                body,
                out: output.out,
                failure: (failed > 0).then_some(Failure::Validation(failed, outcomes.len())),
            })
        }
    }
}

const CSV_HEADER: &str = "n,policy,node_id,mean_age,stderr,replications,seed";

fn load_scenario(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(ScenarioFile::from_json(&text)?)
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn header_comments(s: &mut String, scenario: &Path, exp: &Experiment, param: Option<&str>) {
    let _ = writeln!(s, "# scenario {}", scenario.display());
    let _ = writeln!(
        s,
        "# policy {} epochs {} warmup {} replications {} seed {}",
        exp.spec.policy.name(),
        exp.epochs,
        exp.warmup_epochs,
        exp.replications,
        exp.seed
    );
    if let Some(p) = param {
        let _ = writeln!(s, "# swept parameter {p}");
    }
}

/// Node subsets reported besides the per-node and network rows.
fn groups(exp: &Experiment) -> Vec<(&'static str, Vec<usize>)> {
    let t = &exp.spec.topology;
    if t.cluster_shape().is_some() {
        vec![("leaves", t.leaves()), ("heads", t.heads())]
    } else {
        Vec::new()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_rows(s: &mut String, prefix: &str, exp: &Experiment, stats: &EnsembleStatistics) {
    let (n, policy, reps, seed) = (
        exp.spec.n(),
        exp.spec.policy.name(),
        stats.replications(),
        exp.seed,
    );
    let mut row = |id: &str, e: Estimate| {
        let _ = writeln!(
            s,
            "{prefix}{n},{policy},{id},{},{},{reps},{seed}",
            e.mean,
            fmt_opt(e.stderr)
        );
    };
    for (i, e) in stats.per_node().into_iter().enumerate() {
        row(&i.to_string(), e);
    }
    for (name, nodes) in groups(exp) {
        row(name, stats.subset(&nodes));
    }
    row("network", stats.network());
}

fn summary_json(exp: &Experiment, stats: &EnsembleStatistics) -> serde_json::Value {
    let mut v = json!({
        "n": exp.spec.n(),
        "policy": exp.spec.policy.name(),
        "epochs": exp.epochs,
        "warmup_epochs": exp.warmup_epochs,
        "replications": stats.replications(),
        "seed": exp.seed,
        "network": stats.network(),
        "per_node": stats.per_node(),
        "min_age_tail": stats.min_age_tail(),
    });
    for (name, nodes) in groups(exp) {
        v[name] = json!(stats.subset(&nodes));
    }
    v
}

fn fmt_estimate(e: Estimate) -> String {
    match e.stderr {
        Some(se) => format!("{:.4} ± {:.4}", e.mean, se),
        None => format!("{:.4}", e.mean),
    }
}

fn text_summary(exp: &Experiment, stats: &EnsembleStatistics) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} on {} nodes, {} replications of {} epochs (seed {})",
        exp.spec.policy.name(),
        exp.spec.n(),
        stats.replications(),
        exp.epochs,
        exp.seed
    );
    let _ = writeln!(s, "  network mean age  {}", fmt_estimate(stats.network()));
    for (name, nodes) in groups(exp) {
        let _ = writeln!(s, "  {name:<17} {}", fmt_estimate(stats.subset(&nodes)));
    }
    if let Some(tail) = stats.min_age_tail() {
        let _ = writeln!(s, "  late minimum age  {}", fmt_estimate(tail));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("asuman-sim").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        assert_eq!(call(&["simulate"]).0, EXIT_CONFIG);
        assert_eq!(call(&["frobnicate"]).0, EXIT_CONFIG);
    }

    #[test]
    fn bounds_named_and_missing() {
        let (code, out, _) = call(&[
            "bounds",
            "ring-lb",
            "--lambda-e",
            "1",
            "--lambda",
            "1",
            "--n",
            "60",
            "--format",
            "csv",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(
            out.contains("ring-lb,lambda_e=1 lambda=1 n=60,lower"),
            "{out}"
        );
        assert!(out.trim_end().ends_with(",20"), "{out}");
        let (code, _, err) = call(&["bounds", "ring-lb", "--lambda-e", "1", "--lambda", "1"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("needs parameter"));
        assert_eq!(call(&["bounds"]).0, EXIT_CONFIG);
        assert_eq!(call(&["bounds", "ring-lb", "--n", "60"]).0, EXIT_CONFIG);
        assert_eq!(call(&["bounds", "--all", "--lambda-e", "1"]).0, EXIT_CONFIG);
    }

    #[test]
    fn missing_scenario_is_io() {
        assert_eq!(
            call(&["simulate", "--scenario", "/nonexistent/x.json"]).0,
            EXIT_IO
        );
    }

    #[test]
    fn csv_escaping() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
