//! Command-line front-end: evaluate mixture distributions on grids, solve
//! saturations, draw reproducible samples, run histogram fits, and classify
//! base-distribution shapes. Commands emit plot-ready CSV or JSON.
//!
//! Exit codes: 0 success, 2 usage/input error, 3 model-validity error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kies_mix::fitting::{bin_data, fit, rescale_divide, rescale_minmax, Family, FitConfig};
use kies_mix::kies::{classify_shape, Direction, KiesParams};
use kies_mix::mixture::{Endpoint, MixedKies, ModelSpec};
use kies_mix::sampling::sample;
use kies_mix::saturation::{saturation_algorithm1, saturation_fixed_point};

#[derive(Parser)]
#[command(name = "kies", version, about = "Kies mixture distributions: evaluation, saturation, sampling, fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Curve {
    Pdf,
    Cdf,
    Ccdf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate pdf/cdf/ccdf on a uniform interior grid, as CSV.
    Eval {
        /// Model JSON, inline or a file path.
        #[arg(long)]
        model: String,
        /// Number of interior grid points t = k/(grid+1).
        #[arg(long, default_value_t = 99)]
        grid: usize,
        #[arg(long, value_enum)]
        which: Curve,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the Hausdorff saturation by both methods, as JSON.
    Saturation {
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw reproducible samples, as CSV.
    Sample {
        #[arg(long)]
        model: String,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a mixture family to a single-column CSV of raw observations.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Family: A1..A8 or a name (kies, bimodal, multimodal, binomial,
        /// geometric, exponential, gamma, beta).
        #[arg(long)]
        family: String,
        /// Rescaling: `divide:<c>` or `minmax`.
        #[arg(long)]
        preprocess: String,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: u32,
        /// Upper end of the integer grid searched for the binomial n.
        #[arg(long, default_value_t = 100)]
        n_max: u32,
        /// Component count of the multimodal family.
        #[arg(long, default_value_t = 3)]
        components: usize,
        /// Output prefix: writes <out>.json and <out>.csv. Without it the
        /// fit JSON goes to stdout and the comparison table is skipped.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the shape of a single Kies density, as JSON.
    Shape {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// Bad input or I/O: exit 2.
    Usage(String),
    /// Structurally parseable but invalid model: exit 3.
    Model(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Model(msg) => {
                eprintln!("error: invalid model: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}

/// 15 significant digits, round-trip safe.
fn fmt15(v: f64) -> String {
    format!("{v:.14e}")
}

fn load_model(arg: &str) -> Result<MixedKies, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg)
            .map_err(|e| CliError::Usage(format!("cannot read model file '{arg}': {e}")))?
    };
    let spec: ModelSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid model JSON: {e}")))?;
    spec.build().map_err(|e| CliError::Model(e.to_string()))
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Usage(format!("cannot write '{}': {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn endpoint_json(e: Endpoint) -> serde_json::Value {
    match e {
        Endpoint::Zero => json!(0.0),
        Endpoint::Finite(v) => json!(v),
        Endpoint::Infinite => json!("inf"),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Eval { model, grid, which, out } => {
            let m = load_model(&model)?;
            if grid == 0 {
                return Err(CliError::Usage("grid size must be at least 1".into()));
            }
            let mut csv = String::new();
            if matches!(which, Curve::Pdf) {
                let _ = writeln!(csv, "# left_endpoint = {}", endpoint_json(m.left_endpoint()));
                let _ = writeln!(csv, "# right_endpoint = {}", endpoint_json(m.right_endpoint()));
            }
            csv.push_str("t,value\n");
            for k in 1..=grid {
                let t = k as f64 / (grid as f64 + 1.0);
                let v = match which {
                    Curve::Pdf => m.pdf(t),
                    Curve::Cdf => m.cdf(t),
                    Curve::Ccdf => m.ccdf(t),
                }
                .map_err(|e| CliError::Model(e.to_string()))?;
                let _ = writeln!(csv, "{},{}", fmt15(t), fmt15(v));
            }
            emit(out.as_deref(), &csv)
        }
        Command::Saturation { model, out } => {
            let m = load_model(&model)?;
            let alg = saturation_algorithm1(&m);
            let fp = saturation_fixed_point(&m);
            let mut doc = json!({
                "x_bar": alg.x_bar,
                "d": alg.d,
                "residual": alg.residual,
                "methods_agree": (alg.d - fp.d).abs() <= 1e-9,
            });
            if let Some(tau) = &alg.tau {
                doc["tau"] = json!(tau);
            }
            emit(
                out.as_deref(),
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("valid JSON")),
            )
        }
        Command::Sample { model, n, seed, out } => {
            let m = load_model(&model)?;
            if n == 0 {
                return Err(CliError::Usage("sample count must be at least 1".into()));
            }
            let batch = sample(&m, seed, n).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut csv = String::with_capacity(22 * n + 2);
            csv.push_str("x\n");
            for v in &batch.values {
                let _ = writeln!(csv, "{}", fmt15(*v));
            }
            emit(out.as_deref(), &csv)
        }
        Command::Fit {
            data,
            family,
            preprocess,
            bins,
            epsilon,
            seed,
            restarts,
            n_max,
            components,
            out,
        } => {
            let family = Family::from_str(&family).map_err(|e| CliError::Usage(e.to_string()))?;
            let raw = read_column(&data)?;
            let rescaled = apply_preprocess(&raw, &preprocess)?;
            let (_, emp) = bin_data(&rescaled, bins).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut config = FitConfig::new(family);
            config.epsilon = epsilon;
            config.seed = seed;
            config.restarts = restarts.max(1);
            config.integer_n_search = 1..=n_max.max(1);
            config.components = components.max(2);
            let result = fit(&emp, &config);
            let json_text = format!(
                "{}\n",
                serde_json::to_string_pretty(&result).expect("fit results always serialize")
            );
            match out {
                Some(prefix) => {
                    let json_path = prefix.with_extension("json");
                    fs::write(&json_path, &json_text).map_err(|e| {
                        CliError::Usage(format!("cannot write '{}': {e}", json_path.display()))
                    })?;
                    let mut csv = String::from("center,l_emp,l_th\n");
                    if let Ok(model) = result.model() {
                        for (&c, &l) in emp.centers.iter().zip(&emp.values) {
                            let th = model.pdf(c).unwrap_or(f64::NAN);
                            let _ = writeln!(csv, "{},{},{}", fmt15(c), fmt15(l), fmt15(th));
                        }
                    }
                    let csv_path = prefix.with_extension("csv");
                    fs::write(&csv_path, &csv).map_err(|e| {
                        CliError::Usage(format!("cannot write '{}': {e}", csv_path.display()))
                    })?;
                    Ok(())
                }
                None => {
                    print!("{json_text}");
                    Ok(())
                }
            }
        }
        Command::Shape { lambda, beta, out } => {
            let params =
                KiesParams::new(lambda, beta).map_err(|e| CliError::Usage(e.to_string()))?;
            let report = classify_shape(&params);
            let left = if report.left_value.is_finite() {
                json!(report.left_value)
            } else {
                json!("inf")
            };
            let segments: Vec<serde_json::Value> = report
                .monotone_segments
                .iter()
                .map(|(from, to, dir)| {
                    json!({
                        "from": from,
                        "to": to,
                        "direction": match dir {
                            Direction::Increasing => "increasing",
                            Direction::Decreasing => "decreasing",
                        },
                    })
                })
                .collect();
            let doc = json!({
                "case": format!("{:?}", report.case),
                "left_value": left,
                "critical_points": report.critical_points,
                "monotone_segments": segments,
            });
            emit(
                out.as_deref(),
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("valid JSON")),
            )
        }
    }
}

/// Read a single-column CSV of floats; one optional header row is skipped.
fn read_column(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read '{}': {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue, // header row
            Err(_) => {
                return Err(CliError::Usage(format!(
                    "'{}' line {}: not a number: '{field}'",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if values.is_empty() {
        return Err(CliError::Usage(format!(
            "'{}' contains no observations",
            path.display()
        )));
    }
    Ok(values)
}

fn apply_preprocess(raw: &[f64], spec: &str) -> Result<Vec<f64>, CliError> {
    if spec == "minmax" {
        return rescale_minmax(raw).map_err(|e| CliError::Usage(e.to_string()));
    }
    if let Some(c) = spec.strip_prefix("divide:") {
        let c: f64 = c
            .parse()
            .map_err(|_| CliError::Usage(format!("bad divisor in '--preprocess {spec}'")))?;
        return rescale_divide(raw, c).map_err(|e| CliError::Usage(e.to_string()));
    }
    Err(CliError::Usage(format!(
        "unknown preprocess '{spec}' (expected 'minmax' or 'divide:<c>')"
    )))
}
