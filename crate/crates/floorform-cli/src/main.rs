//! Command-line surface: representation queries, range scans with a report
//! cache, residue plans with verification, local solubility checks, theta
//! coefficients, and obstruction scans. Every command prints one JSON
//! envelope per invocation.
//!
//! Exit codes: 0 success/found, 1 not found, 2 usage or hypothesis error,
//! 3 unwritable output file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use floorform::coset::{build_coset, localized_l_target};
use floorform::form::{representation_count, scan_range, search_representation};
use floorform::padic::{shifted_quadratic_solvable, LocalProblem};
use floorform::planner::{plan_residues_abc, plan_residues_m, verify_plan, PlanVerification};
use floorform::theta::{coset_theta_coefficients, obstruction_scan};
use floorform::{
    CosetDescriptor, FloorForm, LocalStatus, PlannerMode, Representation, ResidueTriple,
    ScanReport, ThetaSeries, TOOL_VERSION,
};

const DEFAULT_MAX_N: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "floorform", version, about = "Representation engine for floor forms")]
struct Cli {
    /// Print only the core payload (witness, exception list, ...).
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

fn parse_form(s: &str) -> Result<FloorForm, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated positive integers".into());
    }
    let mut d = [0u64; 3];
    for (i, p) in parts.iter().enumerate() {
        d[i] = p
            .parse::<u64>()
            .map_err(|e| format!("bad divisor {p:?}: {e}"))?;
    }
    FloorForm::new(d[0], d[1], d[2]).map_err(|e| e.to_string())
}

#[derive(Args)]
struct FormArg {
    /// Form divisors a,b,c (comma-separated, no spaces).
    #[arg(long, value_parser = parse_form)]
    form: FloorForm,
}

#[derive(Subcommand)]
enum Command {
    /// Search a representation of n by the form.
    Represent {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        n: u64,
        /// Also report the exact signed representation count.
        #[arg(long)]
        all: bool,
    },
    /// Scan a range of n and report the unrepresented exceptions.
    Scan {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write (and reuse) the report at this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose certifying residues for n and verify every claim.
    Plan {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        n: u64,
    },
    /// Local solubility of the shifted quadratic at one or all primes.
    Local {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        n: u64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: i64,
        #[arg(long, allow_negative_numbers = true)]
        beta: i64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: i64,
        /// Default: every prime dividing 2abc.
        #[arg(long)]
        prime: Option<u64>,
    },
    /// Coset theta coefficients up to an index bound.
    Theta {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, allow_negative_numbers = true)]
        alpha: i64,
        #[arg(long, allow_negative_numbers = true)]
        beta: i64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: i64,
        #[arg(long)]
        max: u64,
    },
    /// Scan a range for square-class obstructions.
    Obstruct {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
}

#[derive(Serialize)]
struct ReportEnvelope<T: Serialize> {
    schema_version: &'static str,
    command: &'static str,
    parameters: BTreeMap<String, String>,
    result: T,
    elapsed_ms: u64,
}

fn emit<T: Serialize>(
    command: &'static str,
    parameters: BTreeMap<String, String>,
    result: T,
    started: Instant,
) {
    let envelope = ReportEnvelope {
        schema_version: "1",
        command,
        parameters,
        result,
        elapsed_ms: started.elapsed().as_millis() as u64,
    };
    println!("{}", serde_json::to_string(&envelope).expect("serializable"));
}

fn quiet_print<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

#[derive(Serialize)]
struct RepresentPayload {
    found: bool,
    witness: Option<Representation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
}

#[derive(Serialize)]
struct PlanPayload {
    plan: floorform::ResiduePlan,
    verification: PlanVerification,
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    match cli.command {
        Command::Represent { form, n, all } => {
            let form = form.form;
            let witness = search_representation(form, n);
            let found = witness.is_some();
            let payload = RepresentPayload {
                found,
                witness,
                count: all.then(|| representation_count(form, n)),
            };
            if cli.quiet {
                quiet_print(&payload.witness);
            } else {
                let params = params(&[
                    ("form", form_str(form)),
                    ("n", n.to_string()),
                    ("all", all.to_string()),
                ]);
                emit("represent", params, payload, started);
            }
            if found {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Scan {
            form,
            from,
            to,
            jobs,
            out,
        } => {
            let form = form.form;
            let cap = std::env::var("FLOORFORM_MAX_N")
                .ok()
                .and_then(|v| v.parse::<u64>().ok())
                .unwrap_or(DEFAULT_MAX_N);
            if from > to || to > cap {
                return usage_error(&format!(
                    "scan range must satisfy from <= to <= {cap} (override with FLOORFORM_MAX_N)"
                ));
            }
            let params = params(&[
                ("form", form_str(form)),
                ("from", from.to_string()),
                ("to", to.to_string()),
                ("jobs", jobs.map_or_else(|| "auto".into(), |j| j.to_string())),
            ]);

            // A cache file produced by the same tool version for the same
            // scan is replayed verbatim.
            if let Some(path) = &out {
                if let Some(cached) = read_cache(path, form, from, to) {
                    if cli.quiet {
                        quiet_print(&cached.result.exceptions);
                    } else {
                        print!("{}", cached.raw);
                        if !cached.raw.ends_with('\n') {
                            println!();
                        }
                    }
                    return ExitCode::SUCCESS;
                }
            }

            let report = match jobs {
                Some(j) if j >= 1 => rayon::ThreadPoolBuilder::new()
                    .num_threads(j)
                    .build()
                    .expect("thread pool")
                    .install(|| scan_range(form, from, to)),
                Some(_) => return usage_error("--jobs must be at least 1"),
                None => scan_range(form, from, to),
            };
            if cli.quiet {
                quiet_print(&report.exceptions);
                return ExitCode::SUCCESS;
            }
            let envelope = ReportEnvelope {
                schema_version: "1",
                command: "scan",
                parameters: params,
                result: report,
                elapsed_ms: started.elapsed().as_millis() as u64,
            };
            let line = serde_json::to_string(&envelope).expect("serializable");
            if let Some(path) = &out {
                if let Err(e) = std::fs::File::create(path)
                    .and_then(|mut f| writeln!(f, "{line}"))
                {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            }
            println!("{line}");
            ExitCode::SUCCESS
        }
        Command::Plan { form, n } => {
            let form = form.form;
            let [a, b, c] = form.divisors();
            let planned = if form.is_equal_divisor() {
                plan_residues_m(a, n)
            } else {
                plan_residues_abc(a, b, c, n)
            };
            let plan = match planned {
                Ok(p) => p,
                Err(e) => return usage_error(&e.to_string()),
            };
            let verification = verify_plan(&plan);
            if cli.quiet {
                quiet_print(&verification.verdict);
                return ExitCode::SUCCESS;
            }
            let params = params(&[("form", form_str(form)), ("n", n.to_string())]);
            emit(
                "plan",
                params,
                PlanPayload { plan, verification },
                started,
            );
            ExitCode::SUCCESS
        }
        Command::Local {
            form,
            n,
            alpha,
            beta,
            gamma,
            prime,
        } => {
            let form = form.form;
            let [a, b, c] = form.divisors();
            let residues = ResidueTriple::new(form, alpha, beta, gamma);
            let target = localized_l_target(form, n, &residues);
            let terms = vec![
                (a as i64, 2 * alpha),
                (b as i64, 2 * beta),
                (c as i64, 2 * gamma),
            ];
            let primes = match prime {
                Some(p) => vec![p],
                None => floorform::arith::prime_factors(2 * a * b * c),
            };
            let mut statuses: Vec<LocalStatus> = Vec::new();
            for p in primes {
                let status = LocalProblem::new(p, terms.clone(), target)
                    .and_then(|problem| shifted_quadratic_solvable(&problem));
                match status {
                    Ok(s) => statuses.push(s),
                    Err(e) => return usage_error(&format!("prime {p}: {e}")),
                }
            }
            if cli.quiet {
                let solvable: Vec<bool> = statuses.iter().map(|s| s.solvable).collect();
                quiet_print(&solvable);
                return ExitCode::SUCCESS;
            }
            let params = params(&[
                ("form", form_str(form)),
                ("n", n.to_string()),
                ("alpha", alpha.to_string()),
                ("beta", beta.to_string()),
                ("gamma", gamma.to_string()),
                (
                    "prime",
                    prime.map_or_else(|| "all".into(), |p| p.to_string()),
                ),
            ]);
            emit("local", params, statuses, started);
            ExitCode::SUCCESS
        }
        Command::Theta {
            form,
            alpha,
            beta,
            gamma,
            max,
        } => {
            let form = form.form;
            // The all-ones form has no floor at all: its theta is the plain
            // sum-of-three-squares series rather than a rescaled coset.
            let series: ThetaSeries = if form.divisors() == [1, 1, 1] {
                coset_theta_coefficients(&CosetDescriptor::plain_diagonal([1, 1, 1]), max)
            } else {
                let residues = ResidueTriple::new(form, alpha, beta, gamma);
                coset_theta_coefficients(&build_coset(form, &residues), max)
            };
            if cli.quiet {
                quiet_print(&series.coefficients);
                return ExitCode::SUCCESS;
            }
            let params = params(&[
                ("form", form_str(form)),
                ("alpha", alpha.to_string()),
                ("beta", beta.to_string()),
                ("gamma", gamma.to_string()),
                ("max", max.to_string()),
            ]);
            emit("theta", params, series, started);
            ExitCode::SUCCESS
        }
        Command::Obstruct { form, from, to } => {
            let form = form.form;
            if from > to {
                return usage_error("obstruct range must satisfy from <= to");
            }
            let mode = if form.is_equal_divisor() {
                PlannerMode::MForm
            } else {
                PlannerMode::AbcForm
            };
            let report = match obstruction_scan(form, from, to, mode) {
                Ok(r) => r,
                Err(e) => return usage_error(&e.to_string()),
            };
            if cli.quiet {
                quiet_print(&report.entries);
                return ExitCode::SUCCESS;
            }
            let params = params(&[
                ("form", form_str(form)),
                ("from", from.to_string()),
                ("to", to.to_string()),
            ]);
            emit("obstruct", params, report, started);
            ExitCode::SUCCESS
        }
    }
}

fn form_str(form: FloorForm) -> String {
    let [a, b, c] = form.divisors();
    format!("{a},{b},{c}")
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

struct CachedScan {
    raw: String,
    result: ScanReport,
}

/// Parse a previous report and accept it when the form, the range and the
/// tool version all match.
fn read_cache(path: &PathBuf, form: FloorForm, from: u64, to: u64) -> Option<CachedScan> {
    let raw = std::fs::read_to_string(path).ok()?;
    let value: serde_json::Value = serde_json::from_str(&raw).ok()?;
    let result = value.get("result")?;
    let form_match = result.get("form")?
        == &serde_json::json!([form.divisors()[0], form.divisors()[1], form.divisors()[2]]);
    let range_match = result.get("n_lo")? == &serde_json::json!(from)
        && result.get("n_hi")? == &serde_json::json!(to);
    let version_match = result.get("tool_version")? == &serde_json::json!(TOOL_VERSION);
    if !(form_match && range_match && version_match) {
        return None;
    }
    let exceptions: Vec<u64> = serde_json::from_value(result.get("exceptions")?.clone()).ok()?;
    Some(CachedScan {
        raw,
        result: ScanReport {
            form,
            n_lo: from,
            n_hi: to,
            exceptions,
            wall_time_ms: 0,
            tool_version: TOOL_VERSION.to_string(),
        },
    })
}
