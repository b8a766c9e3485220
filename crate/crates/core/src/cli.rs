//! Command dispatch for the `invinsert` binary.
//!
//! Every command writes one report to the given writer: JSON reports are
//! wrapped in a [`RunReport`], CSV and table formats print bare rows.
//! Exit codes: 0 success, 2 infeasible or no result, 64 usage error,
//! 65 malformed input, 1 anything else.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::bound_report;
use crate::compose::{compose_solve, composed_size, rate, sort_queries};
use crate::error::{Error, Result};
use crate::exact::{
    default_grid, free_series_names, k1_feasible, k2_feasible_with_grid, search_free_series,
    CosineSeries, SearchParams,
};
use crate::greedy::greedy_run;
use crate::hilbert::PhaseSchedule;
use crate::synth::{synthesize_exact, verify_schedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NONE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SCHEMA: i32 = 65;

/// Overrides the default certification grid when set.
pub const GRID_ENV: &str = "INVINSERT_GRID";

#[derive(Parser, Debug)]
#[command(
    name = "invinsert",
    version,
    about = "Translationally invariant quantum insertion algorithms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy success probabilities for k queries.
    Greedy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_name = "FILE")]
        emit_schedule: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Overlap bound and minimum query count for invariant algorithms.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Exact-algorithm feasibility, search and synthesis.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Runs a schedule against every oracle.
    Verify {
        #[arg(long, value_name = "FILE")]
        schedule: PathBuf,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Json)]
        format: VerifyFormat,
    },
    /// Iterates an exact (m, k) schedule h times.
    Compose(ComposeArgs),
    /// Queries per log2 N of the iterated schedule.
    Rate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Also print the implied query count for sorting this many items.
        #[arg(long, value_name = "ITEMS")]
        sort_n: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum ExactCommand {
    /// Feasibility of k-query exact algorithms over a range of n.
    Feasible {
        #[arg(long)]
        k: usize,
        #[arg(long, value_name = "A..B", value_parser = parse_range)]
        n_range: RangeInclusive<usize>,
    },
    /// Searches the free series of a k-query chain.
    Search {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Synthesizes an exact schedule, searching for free series if none are given.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_name = "FILE", num_args = 1..)]
        series: Vec<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ComposeArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    h: u32,
    #[arg(long, conflicts_with = "all")]
    j: Option<usize>,
    #[arg(long)]
    all: bool,
    /// Subroutine schedule; synthesized on the fly when omitted.
    #[arg(long, value_name = "FILE")]
    schedule: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VerifyFormat {
    Json,
    Table,
}

fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok(a..=b)
}

/// Envelope of every JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub results: Value,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunReport {
    pub fn new(command: &str, params: BTreeMap<String, Value>, results: Value) -> Self {
        RunReport {
            command: command.to_string(),
            params,
            results,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// What a command produced: rendered text and whether it found anything.
struct Outcome {
    text: String,
    found: bool,
}

impl Outcome {
    fn found(text: String) -> Self {
        Outcome { text, found: true }
    }
}

fn report(command: &str, params: Value, results: Value) -> Result<String> {
    let params = match params {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    Ok(serde_json::to_string_pretty(&RunReport::new(command, params, results))? + "\n")
}

fn env_grid() -> Result<Option<usize>> {
    match std::env::var(GRID_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Domain(format!("{GRID_ENV} = {v:?} is not a grid size"))),
        Err(_) => Ok(None),
    }
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn read_schedule(path: &Path) -> Result<PhaseSchedule> {
    PhaseSchedule::from_json(&read_text(path)?)
}

/// A series file holds one series object or an array of them.
fn read_series(path: &Path) -> Result<Vec<CosineSeries>> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    let items = match value {
        Value::Array(v) => v,
        other => vec![other],
    };
    items
        .into_iter()
        .map(|v| {
            let s: CosineSeries = serde_json::from_value(v)
                .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
            s.validate()
                .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
            Ok(s)
        })
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn run_greedy(n: usize, k: usize, emit: Option<&Path>, format: Format) -> Result<Outcome> {
    let trace = greedy_run(n, k)?;
    if let Some(path) = emit {
        std::fs::write(path, trace.schedule.to_json()? + "\n")?;
    }
    let classical = |ell: usize| (2f64.powi(ell as i32) / n as f64).min(1.0);
    let text = match format {
        Format::Csv => {
            let mut s = String::from("ell,prob,classical_2k_over_n\n");
            for ell in 1..=k {
                let _ = writeln!(s, "{ell},{:.4},{:.4}", trace.probs[ell], classical(ell));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = (1..=k)
                .map(|ell| json!({"ell": ell, "prob": trace.probs[ell], "classical_2k_over_n": classical(ell)}))
                .collect();
            report(
                "greedy",
                json!({"n": n, "k": k}),
                json!({"probs": trace.probs, "rows": rows}),
            )?
        }
    };
    Ok(Outcome::found(text))
}

fn run_bound(n: usize, epsilon: f64, format: Format) -> Result<Outcome> {
    let r = bound_report(n, epsilon)?;
    let text = match format {
        Format::Csv => {
            let mut s = String::from("ell,overlap_bound,prob_bound\n");
            for (ell, b) in r.per_ell.iter().enumerate() {
                let _ = writeln!(s, "{ell},{b:.6},{:.6}", (b * b).min(1.0));
            }
            let _ = writeln!(
                s,
                "# harmonic_sum={:.10} approx={:.10} rel_err={:.3e}",
                r.harmonic.exact,
                r.harmonic.approx,
                r.harmonic.relative_error()
            );
            let _ = writeln!(s, "# min_queries={}", r.min_queries);
            match r.asymptotic {
                Some(a) => {
                    let _ = writeln!(
                        s,
                        "# asymptotic_ln={:.4} asymptotic_log2={:.4}",
                        a.natural, a.base2
                    );
                }
                None => s.push_str("# asymptotic=not_applicable\n"),
            }
            s
        }
        Format::Json => report(
            "bound",
            json!({"n": n, "epsilon": epsilon}),
            json!({
                "harmonic_sum": r.harmonic.exact,
                "harmonic_approx": r.harmonic.approx,
                "relative_error": r.harmonic.relative_error(),
                "per_ell": r.per_ell,
                "min_queries": r.min_queries,
                "asymptotic": r.asymptotic,
            }),
        )?,
    };
    Ok(Outcome::found(text))
}

fn feasible_one(n: usize, k: usize, grid: Option<usize>) -> Result<(bool, Value)> {
    match k {
        0 => Err(Error::Domain("k must be at least 1".into())),
        1 => Ok((k1_feasible(n)?, Value::Null)),
        2 => {
            let (ok, cert) = k2_feasible_with_grid(n, grid.unwrap_or_else(|| default_grid(n)))?;
            Ok((ok, serde_json::to_value(cert)?))
        }
        _ => {
            let params = SearchParams {
                grid_points: grid,
                ..SearchParams::default()
            };
            match search_free_series(n, k, &params)? {
                Some(o) => Ok((
                    true,
                    json!({"delta": o.delta, "grid_points": o.grid_points}),
                )),
                None => Ok((false, Value::Null)),
            }
        }
    }
}

fn run_feasible(k: usize, range: RangeInclusive<usize>) -> Result<Outcome> {
    let grid = env_grid()?;
    let mut rows = Vec::new();
    let mut any = false;
    for n in range.clone() {
        let (ok, detail) = feasible_one(n, k, grid)?;
        any |= ok;
        rows.push(json!({"n": n, "feasible": ok, "certificate": detail}));
    }
    let text = report(
        "exact feasible",
        json!({"k": k, "n_range": format!("{}..{}", range.start(), range.end())}),
        Value::Array(rows),
    )?;
    Ok(Outcome { text, found: any })
}

fn run_search(k: usize, n: usize, grid: Option<usize>, out: Option<&Path>) -> Result<Outcome> {
    let params = SearchParams {
        grid_points: grid.or(env_grid()?),
        ..SearchParams::default()
    };
    let params_json =
        json!({"k": k, "n": n, "grid": params.grid_points.unwrap_or_else(|| default_grid(n))});
    match search_free_series(n, k, &params)? {
        Some(o) => {
            if let Some(path) = out {
                let series: Vec<&CosineSeries> = o.free.values().collect();
                if series.len() == 1 {
                    write_json(path, series[0])?;
                } else {
                    write_json(path, &series)?;
                }
            }
            let text = report(
                "exact search",
                params_json,
                json!({
                    "found": true,
                    "delta": o.delta,
                    "grid_points": o.grid_points,
                    "rounds": o.rounds,
                    "free": o.free,
                    "certificates": o.certificates,
                }),
            )?;
            Ok(Outcome::found(text))
        }
        None => Ok(Outcome {
            text: report("exact search", params_json, json!({"found": false}))?,
            found: false,
        }),
    }
}

fn free_from_files(k: usize, files: &[PathBuf]) -> Result<BTreeMap<String, CosineSeries>> {
    let series: Vec<CosineSeries> = files
        .iter()
        .map(|p| read_series(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let names = free_series_names(k);
    if series.len() != names.len() {
        return Err(Error::Schema(format!(
            "k = {k} needs {} free series ({}), got {}",
            names.len(),
            names.join(", "),
            series.len()
        )));
    }
    Ok(names.into_iter().zip(series).collect())
}

fn run_synth(n: usize, k: usize, files: &[PathBuf], out: &Path) -> Result<Outcome> {
    let free = if files.is_empty() && k >= 3 {
        let params = SearchParams {
            grid_points: env_grid()?,
            ..SearchParams::default()
        };
        match search_free_series(n, k, &params)? {
            Some(o) => o.free,
            None => {
                return Ok(Outcome {
                    text: report(
                        "exact synth",
                        json!({"n": n, "k": k}),
                        json!({"found": false}),
                    )?,
                    found: false,
                })
            }
        }
    } else {
        free_from_files(k, files)?
    };
    let s = synthesize_exact(n, k, &free)?;
    std::fs::write(out, s.schedule.to_json()? + "\n")?;
    let text = report(
        "exact synth",
        json!({"n": n, "k": k, "out": out.display().to_string()}),
        json!({
            "exact": s.exact(),
            "min_success": s.report.min_success,
            "success_probs": s.report.success_probs,
            "stages": s.stages,
            "certificates": s.certificates,
        }),
    )?;
    Ok(Outcome {
        text,
        found: s.exact(),
    })
}

fn run_verify(path: &Path, format: VerifyFormat) -> Result<Outcome> {
    let schedule = read_schedule(path)?;
    let r = verify_schedule(&schedule)?;
    let text = match format {
        VerifyFormat::Json => report(
            "verify",
            json!({"schedule": path.display().to_string()}),
            serde_json::to_value(&r)?,
        )?,
        VerifyFormat::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "n={} k={} min_success={:.12}", r.n, r.k, r.min_success);
            for (j, p) in r.success_probs.iter().enumerate() {
                let _ = writeln!(s, "j={j} success={p:.12}");
            }
            s.push('x');
            for ell in 1..=r.k {
                let _ = write!(s, "\tV{ell}");
            }
            s.push('\n');
            for x in 0..2 * r.n {
                let _ = write!(s, "{x}");
                for col in &r.v_columns {
                    let _ = write!(s, "\t{:.4}", col[x].re);
                }
                s.push('\n');
            }
            let _ = writeln!(s, "max_imag={:.3e}", r.max_v_imag);
            s
        }
    };
    Ok(Outcome {
        text,
        found: r.is_exact(1e-8),
    })
}

fn run_compose(a: &ComposeArgs) -> Result<Outcome> {
    let schedule = match &a.schedule {
        Some(p) => read_schedule(p)?,
        None => {
            let free = if a.k >= 3 {
                match search_free_series(a.m, a.k, &SearchParams::default())? {
                    Some(o) => o.free,
                    None => {
                        return Err(Error::Infeasible(format!(
                            "no exact ({}, {}) schedule found",
                            a.m, a.k
                        )))
                    }
                }
            } else {
                BTreeMap::new()
            };
            synthesize_exact(a.m, a.k, &free)?.schedule
        }
    };
    let n = composed_size(a.m, a.h)?;
    let hidden: Vec<usize> = match (a.j, a.all) {
        (Some(j), _) => vec![j],
        (None, true) => (0..n).collect(),
        (None, false) => return Err(Error::Domain("compose needs --j J or --all".into())),
    };
    let runs = hidden
        .iter()
        .map(|&j| compose_solve(a.m, a.k, a.h, &schedule, j))
        .collect::<Result<Vec<_>>>()?;
    let all_found = runs.iter().all(|r| r.found_j == r.hidden_j);
    let classical = (n as f64).log2().ceil() as usize;
    let text = report(
        "compose",
        json!({"m": a.m, "k": a.k, "h": a.h, "j": a.j, "all": a.all}),
        json!({
            "n": n,
            "queries_per_run": a.h as usize * a.k,
            "classical_queries": classical,
            "all_recovered": all_found,
            "runs": runs,
        }),
    )?;
    Ok(Outcome {
        text,
        found: all_found,
    })
}

fn run_rate(k: usize, m: usize, sort_n: Option<usize>) -> Result<Outcome> {
    let r = rate(k, m)?;
    let mut text = format!("{r:.4}\n");
    if let Some(items) = sort_n {
        let _ = writeln!(text, "sort_queries={:.1}", sort_queries(items, k, m)?);
    }
    Ok(Outcome::found(text))
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Greedy {
            n,
            k,
            emit_schedule,
            format,
        } => run_greedy(*n, *k, emit_schedule.as_deref(), *format),
        Command::Bound { n, epsilon, format } => run_bound(*n, *epsilon, *format),
        Command::Exact(ExactCommand::Feasible { k, n_range }) => run_feasible(*k, n_range.clone()),
        Command::Exact(ExactCommand::Search { k, n, grid, out }) => {
            run_search(*k, *n, *grid, out.as_deref())
        }
        Command::Exact(ExactCommand::Synth { n, k, series, out }) => run_synth(*n, *k, series, out),
        Command::Verify { schedule, format } => run_verify(schedule, *format),
        Command::Compose(a) => run_compose(a),
        Command::Rate { k, m, sort_n } => run_rate(*k, *m, *sort_n),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Schema(_) | Error::Json(_) => EXIT_SCHEMA,
        Error::Infeasible(_) => EXIT_NONE,
        Error::Stage { source, .. } => exit_code(source),
        _ => EXIT_FAILURE,
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code. Errors go to standard error.
pub fn dispatch<I, T>(argv: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(std::io::stderr(), "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(o) => {
            if out.write_all(o.text.as_bytes()).is_err() {
                return EXIT_FAILURE;
            }
            if o.found {
                EXIT_OK
            } else {
                EXIT_NONE
            }
        }
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "invinsert: {e}");
            exit_code(&e)
        }
    }
}
