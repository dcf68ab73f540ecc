//! Command-line interface: signature computation, mode inference with
//! confidence statements, taut strings, and the simulation harness.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, conflicting
//! options), 2 on input errors (unreadable or malformed data files).

use clap::{Args, Parser, Subcommand, ValueEnum};
use modehunt::harness::{
    run_detection_comparison, run_error_control, run_table1, DetectionConfig, ErrorControlConfig,
    ExperimentReport, Table1Config,
};
use modehunt::kolmsig::kolmogorov_signatures;
use modehunt::persistence::persistence_signatures;
use modehunt::signal::{mode_count, StepSignal};
use modehunt::stats::{
    mode_ci_with_threshold, mode_estimate, tau, tau_gauss, GaussianModel, MomentModel,
};
use modehunt::tautstring::taut_string;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "modehunt",
    version,
    about = "Mode detection for 1D signals via Kolmogorov signatures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the signature sequence of a sampled signal.
    Signatures {
        /// CSV (one value per line, or t,value pairs) or a JSON array.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Metric::Kolmogorov)]
        metric: Metric,
    },
    /// Estimate the number of modes with a confidence band and interval.
    Modes {
        input: PathBuf,
        #[command(flatten)]
        opts: ModesOpts,
    },
    /// Compute the taut string through the tube of a given radius.
    Tautstring {
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Run a simulation experiment and write JSON + CSV reports.
    Simulate {
        #[arg(long, value_enum)]
        experiment: Experiment,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path for the JSON report; a CSV of per-replication
        /// metrics is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModesOpts {
    /// Confidence level parameter in (0,1).
    #[arg(long)]
    alpha: f64,
    /// Known Gaussian noise standard deviation (enables the sharper
    /// Gaussian threshold). Conflicts with --kappa/--v.
    #[arg(long)]
    sigma: Option<f64>,
    /// Bernstein moment parameters for general noise.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    /// Signature size of interest; adds a confidence interval for the
    /// number of modes at that scale.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Kolmogorov,
    Sup,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Table1,
    ErrorControl,
    Detection,
}

enum Failure {
    Usage(String),
    Input(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Failure::Input(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Signatures { input, metric } => {
            let signal = load_signal(&input)?;
            let sigs = match metric {
                Metric::Kolmogorov => kolmogorov_signatures(&signal),
                Metric::Sup => persistence_signatures(&signal),
            };
            let name = match metric {
                Metric::Kolmogorov => "kolmogorov",
                Metric::Sup => "sup",
            };
            let mut out = String::from("{\"schema\":1");
            let _ = write!(out, ",\"n\":{}", signal.n());
            let _ = write!(out, ",\"metric\":\"{name}\"");
            let _ = write!(out, ",\"signatures\":{}", float_array(sigs.as_slice()));
            let _ = write!(out, ",\"mode_count\":{}}}", mode_count(&signal));
            println!("{out}");
            Ok(())
        }
        Command::Modes { input, opts } => {
            let signal = load_signal(&input)?;
            let threshold = resolve_threshold(&opts, signal.n())?;
            let sigs = kolmogorov_signatures(&signal);
            let k_hat =
                mode_estimate(&sigs, threshold).map_err(|e| Failure::Usage(e.to_string()))?;
            let band = modehunt::stats::confidence_band(&sigs, threshold)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let mut out = String::from("{\"schema\":1");
            let _ = write!(out, ",\"n\":{}", signal.n());
            let _ = write!(out, ",\"alpha\":{}", fmt_float(opts.alpha));
            let _ = write!(out, ",\"tau\":{}", fmt_float(threshold));
            let _ = write!(out, ",\"k_hat\":{k_hat}");
            let rows: Vec<String> = band
                .iter()
                .map(|(lo, hi)| format!("[{},{}]", fmt_float(*lo), fmt_float(*hi)))
                .collect();
            let _ = write!(out, ",\"band\":[{}]", rows.join(","));
            if let Some(eps) = opts.epsilon {
                let ci = mode_ci_with_threshold(&sigs, eps, threshold)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                let upper = match ci.upper {
                    Some(u) => u.to_string(),
                    None => "\"inf\"".to_string(),
                };
                let _ = write!(out, ",\"mode_ci\":{{\"l\":{},\"u\":{}}}", ci.lower, upper);
            }
            out.push('}');
            println!("{out}");
            Ok(())
        }
        Command::Tautstring { input, alpha } => {
            let signal = load_signal(&input)?;
            let string = taut_string(&signal, alpha).map_err(|e| Failure::Usage(e.to_string()))?;
            let derivative = string.derivative();
            let mut out = String::from("{\"schema\":1");
            let _ = write!(out, ",\"n\":{}", signal.n());
            let _ = write!(out, ",\"alpha\":{}", fmt_float(alpha));
            let _ = write!(out, ",\"knots\":{}", float_array(string.knots()));
            let _ = write!(out, ",\"knot_values\":{}", float_array(string.values()));
            let _ = write!(
                out,
                ",\"derivative\":{}}}",
                float_array(derivative.values())
            );
            println!("{out}");
            Ok(())
        }
        Command::Simulate {
            experiment,
            reps,
            seed,
            out,
        } => {
            let report = with_thread_cap(|| -> Result<ExperimentReport, Failure> {
                let map_err = |e: modehunt::Error| Failure::Usage(e.to_string());
                match experiment {
                    Experiment::Table1 => run_table1(&Table1Config {
                        reps,
                        seed,
                        ..Default::default()
                    })
                    .map_err(map_err),
                    Experiment::ErrorControl => run_error_control(&ErrorControlConfig {
                        reps,
                        seed,
                        ..Default::default()
                    })
                    .map_err(map_err),
                    Experiment::Detection => run_detection_comparison(&DetectionConfig {
                        reps,
                        seed,
                        ..Default::default()
                    })
                    .map_err(map_err),
                }
            })?;
            let csv_path = out.with_extension("csv");
            write_report(&out, &csv_path, &report)?;
            let name = match experiment {
                Experiment::Table1 => "table1",
                Experiment::ErrorControl => "error-control",
                Experiment::Detection => "detection",
            };
            println!(
                "{{\"schema\":1,\"experiment\":\"{name}\",\"records\":{},\"out\":{},\"csv\":{}}}",
                report.records.len(),
                json_string(&out.display().to_string()),
                json_string(&csv_path.display().to_string()),
            );
            Ok(())
        }
    }
}

/// 17 significant digits: enough for an exact f64 round trip.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn float_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_float(x)).collect();
    format!("[{}]", items.join(","))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn resolve_threshold(opts: &ModesOpts, n: usize) -> Result<f64, Failure> {
    let usage = |msg: &str| Failure::Usage(msg.to_string());
    match (opts.sigma, opts.kappa, opts.v) {
        (Some(sigma), None, None) => {
            let g = GaussianModel::new(sigma).map_err(|e| Failure::Usage(e.to_string()))?;
            tau_gauss(n, opts.alpha, &g).map_err(|e| Failure::Usage(e.to_string()))
        }
        (None, Some(kappa), Some(v)) => {
            let m = MomentModel::new(kappa, v).map_err(|e| Failure::Usage(e.to_string()))?;
            tau(n, opts.alpha, &m).map_err(|e| Failure::Usage(e.to_string()))
        }
        (None, None, None) => Err(usage(
            "specify the noise model: --sigma, or --kappa together with --v",
        )),
        (None, _, _) => Err(usage("--kappa and --v must be given together")),
        (Some(_), _, _) => Err(usage("--sigma conflicts with --kappa/--v")),
    }
}

fn with_thread_cap<T>(job: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match std::env::var("MODEHUNT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(k) if k > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("thread pool")
            .install(job),
        _ => job(),
    }
}

fn write_report(
    json_path: &Path,
    csv_path: &Path,
    report: &ExperimentReport,
) -> Result<(), Failure> {
    let body = serde_json::json!({ "schema": 1, "records": report.records });
    let pretty = serde_json::to_string_pretty(&body).expect("report serializes");
    std::fs::write(json_path, pretty + "\n")
        .map_err(|e| Failure::Input(format!("{}: {e}", json_path.display())))?;
    let mut csv = String::from("experiment,n,rep,metric,value\n");
    for row in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.experiment,
            row.n,
            row.rep,
            row.metric,
            fmt_float(row.value)
        );
    }
    std::fs::write(csv_path, csv)
        .map_err(|e| Failure::Input(format!("{}: {e}", csv_path.display())))?;
    Ok(())
}

/// Accepts a JSON array of numbers, or CSV with one value per line (optional
/// `value` header) or `t,value` pairs whose abscissae must match the
/// equidistant grid `i/n`.
fn load_signal(path: &Path) -> Result<StepSignal, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let values = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<f64>>(&text)
            .map_err(|e| Failure::Input(format!("{}: invalid JSON array: {e}", path.display())))?
    } else {
        parse_csv(&text, path)?
    };
    StepSignal::new(values).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_csv(text: &str, path: &Path) -> Result<Vec<f64>, Failure> {
    let bad =
        |line: usize, msg: String| Failure::Input(format!("{}:{line}: {msg}", path.display()));
    let mut values = Vec::new();
    let mut abscissae: Vec<(usize, f64)> = Vec::new();
    let mut saw_pairs = false;
    let mut saw_bare = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if values.is_empty() && !saw_pairs {
            let lowered = row.to_ascii_lowercase().replace(' ', "");
            if lowered == "value" || lowered == "t,value" {
                continue;
            }
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        match fields.as_slice() {
            [v] => {
                saw_bare = true;
                values.push(
                    v.parse::<f64>()
                        .map_err(|e| bad(line, format!("bad value {v:?}: {e}")))?,
                );
            }
            [t, v] => {
                saw_pairs = true;
                let t = t
                    .parse::<f64>()
                    .map_err(|e| bad(line, format!("bad abscissa {t:?}: {e}")))?;
                abscissae.push((line, t));
                values.push(
                    v.parse::<f64>()
                        .map_err(|e| bad(line, format!("bad value {v:?}: {e}")))?,
                );
            }
            _ => {
                return Err(bad(
                    line,
                    format!("expected 1 or 2 fields, got {}", fields.len()),
                ))
            }
        }
        if saw_pairs && saw_bare {
            return Err(bad(line, "cannot mix bare values and t,value pairs".into()));
        }
    }
    if saw_pairs {
        let n = values.len() as f64;
        for (i, &(line, t)) in abscissae.iter().enumerate() {
            let expected = i as f64 / n;
            if (t - expected).abs() > 1e-9 {
                return Err(bad(
                    line,
                    format!("abscissa {t} is not on the equidistant grid (expected {expected})"),
                ));
            }
        }
    }
    Ok(values)
}
