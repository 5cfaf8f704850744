//! `nadyn`: analyses of degenerating families of rational maps from the
//! command line. Reports are JSON on stdout or at `--out`.

mod report;

use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use nadyn::berkovich::{has_good_reduction, potential_good_reduction_search, PgrCertificate};
use nadyn::dynamics::{formal_cycle_count, periodic_cycles_with, PeriodicOptions, RationalMapFamily};
use nadyn::family::{bundled, parse_family_with_degree, FamilySpec, BUNDLED};
use nadyn::lab::{consistency_check, scaling_fit, SampleGrid};
use nadyn::newton::SolverOptions;
use nadyn::roots::AberthOptions;
use nadyn::spectra::{
    check_dichotomy, check_main2, check_main5_fraction, check_period2, check_period3, detect_blow_up,
    lambda_spectrum, milnor_quadratic_check, Verdict,
};
use nadyn::{Error, RatExp};

use report::{write_atomic, ErrorInfo, Metadata, Report, Status, SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(name = "nadyn", version, about = "Non-Archimedean analysis of degenerating families f_t")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Absolute precision of periodic points (integer exponent of t).
    #[arg(long, global = true, default_value_t = 8)]
    precision: i64,
    #[arg(long, global = true, default_value_t = nadyn::dynamics::N_MAX)]
    n_max: usize,
    #[arg(long, global = true, default_value_t = nadyn::berkovich::RAMIFICATION_CAP)]
    ramification_cap: i64,
    /// Iteration cap of the complex root finder.
    #[arg(long, global = true, default_value_t = 2000)]
    root_iterations: usize,
    /// Largest formal degree d^n of an iterate.
    #[arg(long, global = true, default_value_t = nadyn::dynamics::DEGREE_BUDGET)]
    degree_budget: usize,
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Expected map degree; a mismatch is an error.
    #[arg(long, global = true)]
    degree: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Good reduction, potential good reduction search and blow-up detection.
    Analyze {
        family: String,
        /// Largest period scanned for blow-up.
        #[arg(long, default_value_t = 3)]
        periods: usize,
    },
    /// Periodic cycles of period n over the Puiseux field.
    Periodic {
        family: String,
        #[arg(long)]
        n: usize,
    },
    /// Multiplier spectrum of the formal n-cycles.
    Spectrum {
        family: String,
        #[arg(long)]
        n: usize,
        /// Drop the point at infinity (polynomial fixed-point spectrum).
        #[arg(long)]
        exclude_infinity: bool,
    },
    /// Executable check of one theorem.
    Check {
        family: String,
        #[arg(long, value_enum)]
        theorem: Theorem,
        /// Period for main5 and the scan bound for main2 and dichotomy.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// `log A` for main5, as a rational like `-1/2`.
        #[arg(long, default_value = "0")]
        log_a: String,
        /// Period of the Lyapunov estimate used by main5 (defaults to n).
        #[arg(long)]
        lambda_period: Option<usize>,
    },
    /// Complex sampling over a grid of |t| with slope fits.
    Scan {
        family: String,
        #[arg(long)]
        n: usize,
        /// `hi:lo` range of |t|.
        #[arg(long, default_value = "1e-2:1e-6")]
        radii: String,
        #[arg(long, default_value_t = 2)]
        per_decade: usize,
        #[arg(long, default_value_t = 2)]
        angles: usize,
        /// CSV side file of (t, n, cycle id, |μ|^{1/n}) rows; rows are
        /// embedded in the report when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Series periodic points evaluated at t0 against numeric roots.
    Consistency {
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t0: f64,
        #[arg(long, default_value_t = 0.0)]
        t0_im: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Theorem {
    Period2,
    Period3,
    Main2,
    Main5,
    Milnor,
    Dichotomy,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Periodic { .. } => "periodic",
            Command::Spectrum { .. } => "spectrum",
            Command::Check { .. } => "check",
            Command::Scan { .. } => "scan",
            Command::Consistency { .. } => "consistency",
        }
    }

    fn family(&self) -> &str {
        match self {
            Command::Analyze { family, .. }
            | Command::Periodic { family, .. }
            | Command::Spectrum { family, .. }
            | Command::Check { family, .. }
            | Command::Scan { family, .. }
            | Command::Consistency { family, .. } => family,
        }
    }
}

struct Outcome {
    status: Status,
    payload: Value,
    warnings: Vec<String>,
}

fn ok(payload: Value) -> Outcome {
    Outcome {
        status: Status::Ok,
        payload,
        warnings: Vec::new(),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn parse_rational(s: &str) -> nadyn::Result<RatExp> {
    let bad = || Error::Precondition(format!("'{s}' is not a rational number like -3/2"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: i64 = n.parse().map_err(|_| bad())?;
    let d: i64 = d.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(RatExp::new(n, d))
}

fn parse_radii(s: &str) -> nadyn::Result<(f64, f64)> {
    let bad = || Error::Precondition(format!("'{s}' is not a radius range like 1e-2:1e-6"));
    let (hi, lo) = s.split_once(':').ok_or_else(bad)?;
    Ok((hi.trim().parse().map_err(|_| bad())?, lo.trim().parse().map_err(|_| bad())?))
}

fn load_family(text: &str, degree: Option<usize>) -> nadyn::Result<FamilySpec> {
    if BUNDLED.iter().any(|(name, _)| *name == text) {
        let spec = bundled(text)?;
        return parse_family_with_degree(&spec.source, degree);
    }
    parse_family_with_degree(text, degree)
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Inconclusive => Status::Inconclusive,
        _ => Status::Ok,
    }
}

fn analyze(f: &RationalMapFamily, periods: usize, opts: &PeriodicOptions) -> nadyn::Result<Outcome> {
    let mut warnings = Vec::new();
    let good = match has_good_reduction(f) {
        Ok(g) => Some(g),
        Err(e) => {
            warnings.push(format!("good reduction undecided: {e}"));
            None
        }
    };
    let pgr = potential_good_reduction_search(f, 6);
    let blow = match detect_blow_up(f, periods, opts) {
        Ok(b) => Some(b),
        Err(e) => {
            warnings.push(format!("blow-up scan stopped: {e}"));
            None
        }
    };
    let inconclusive = matches!(pgr, PgrCertificate::Inconclusive { .. }) && !matches!(blow, Some(Some(_)));
    Ok(Outcome {
        status: if inconclusive { Status::Inconclusive } else { Status::Ok },
        payload: json!({
            "good_reduction": good,
            "potential_good_reduction": to_value(&pgr),
            "blow_up": blow.map(|b| b.map(|b| json!({
                "period": b.period,
                "multiplier_valuation": to_value(&b.cycle.multiplier_valuation),
                "cycle": to_value(&b.cycle),
            }))),
            "blow_up_periods_scanned": periods,
        }),
        warnings,
    })
}

fn run(cli: &Cli, f: &RationalMapFamily, opts: &PeriodicOptions) -> nadyn::Result<Outcome> {
    match &cli.command {
        Command::Analyze { periods, .. } => analyze(f, *periods, opts),
        Command::Periodic { n, .. } => {
            let cycles = periodic_cycles_with(f, *n, opts)?;
            Ok(ok(json!({
                "period": n,
                "points_with_multiplicity": cycles.iter().map(|c| c.points.len() * c.multiplicity).sum::<usize>(),
                "formal_cycles": formal_cycle_count(&cycles),
                "cycles": to_value(&cycles),
            })))
        }
        Command::Spectrum { n, exclude_infinity, .. } => Ok(ok(to_value(&lambda_spectrum(f, *n, *exclude_infinity, opts)?))),
        Command::Check {
            theorem,
            n,
            log_a,
            lambda_period,
            ..
        } => {
            let cert = match theorem {
                Theorem::Period2 => check_period2(f, opts)?,
                Theorem::Period3 => check_period3(f, opts)?,
                Theorem::Main2 => check_main2(f, *n, opts)?,
                Theorem::Dichotomy => check_dichotomy(f, *n, opts)?,
                Theorem::Main5 => {
                    let r = check_main5_fraction(f, *n, parse_rational(log_a)?, lambda_period.unwrap_or(*n), opts)?;
                    return Ok(ok(to_value(&r)));
                }
                Theorem::Milnor => return Ok(ok(to_value(&milnor_quadratic_check(f, opts)?))),
            };
            Ok(Outcome {
                status: verdict_status(cert.verdict),
                payload: to_value(&cert),
                warnings: Vec::new(),
            })
        }
        Command::Scan {
            n,
            radii,
            per_decade,
            angles,
            csv,
            ..
        } => {
            let (hi, lo) = parse_radii(radii)?;
            let grid = SampleGrid::log_spaced(hi, lo, *per_decade, *angles, cli.seed)?;
            let fit = scaling_fit(f, *n, &grid, opts)?;
            let blown: Vec<f64> = fit
                .tracks
                .iter()
                .filter(|t| t.predicted.is_some_and(|p| p > 0.0))
                .map(|t| t.slope)
                .collect();
            let mean = (!blown.is_empty()).then(|| blown.iter().sum::<f64>() / blown.len() as f64);
            let mut payload = json!({
                "period": n,
                "grid": to_value(&grid),
                "tracks": to_value(&fit.tracks),
                "blow_up_slopes": blown,
                "mean_blow_up_slope": mean,
            });
            match csv {
                Some(path) => {
                    let mut w = ::csv::Writer::from_writer(Vec::new());
                    for row in &fit.rows {
                        w.serialize(row).map_err(|e| Error::Precondition(format!("csv: {e}")))?;
                    }
                    let bytes = w.into_inner().map_err(|e| Error::Precondition(format!("csv: {e}")))?;
                    write_atomic(path, &bytes)
                        .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display())))?;
                    payload["csv"] = json!(path.display().to_string());
                }
                None => payload["rows"] = to_value(&fit.rows),
            }
            Ok(ok(payload))
        }
        Command::Consistency { n, t0, t0_im, .. } => {
            let r = consistency_check(f, *n, Complex64::new(*t0, *t0_im), opts)?;
            Ok(ok(to_value(&r)))
        }
    }
}

fn configure_threads() -> Option<String> {
    let raw = std::env::var("NADYN_THREADS").ok()?;
    match raw.parse::<usize>() {
        Ok(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .err()
            .map(|e| format!("NADYN_THREADS ignored: {e}")),
        _ => Some(format!("NADYN_THREADS='{raw}' is not a positive integer; ignored")),
    }
}

fn main() {
    let cli = Cli::parse();
    let mut warnings: Vec<String> = configure_threads().into_iter().collect();
    let opts = PeriodicOptions {
        precision: RatExp::int(cli.precision),
        n_max: cli.n_max,
        degree_budget: cli.degree_budget,
        solver: SolverOptions {
            ramification_cap: cli.ramification_cap,
            aberth: AberthOptions {
                max_iterations: cli.root_iterations,
                seed: cli.seed,
                ..Default::default()
            },
            ..Default::default()
        },
    };
    let source = cli.command.family().to_string();
    let parsed = load_family(&source, cli.degree);
    let (family, degree) = match &parsed {
        Ok(spec) => (Some(spec.to_string()), Some(spec.degree)),
        Err(_) => (None, None),
    };
    let result = parsed
        .and_then(|spec| spec.family())
        .and_then(|f| run(&cli, &f, &opts));
    let (status, payload, error) = match result {
        Ok(o) => {
            warnings.extend(o.warnings);
            (o.status, o.payload, None)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (
                Status::Error,
                Value::Null,
                Some(ErrorInfo {
                    code: e.code().to_string(),
                    message: e.to_string(),
                }),
            )
        }
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name().to_string(),
        source,
        family,
        degree,
        metadata: Metadata {
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: cli.seed,
            precision: cli.precision,
            n_max: cli.n_max,
            ramification_cap: cli.ramification_cap,
            root_iterations: cli.root_iterations,
            degree_budget: cli.degree_budget,
        },
        status,
        payload,
        warnings,
        error,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, text.as_bytes()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                process::exit(1);
            }
        }
        None => print!("{text}"),
    }
    process::exit(status.exit_code());
}
