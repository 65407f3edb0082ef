use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use sturm_glm::analysis::{
    isospectral_member, riesz_condition, roundtrip_report, stability_csv, stability_probe,
    RieszBasis,
};
use sturm_glm::direct::{direct_spectral_data, eigenvalues, norming_constants, CharParams};
use sturm_glm::glm::reconstruct;
use sturm_glm::io::{parse_real_list, to_json_string};
use sturm_glm::{
    shift_spectrum, validate_spectral_data, BoundaryKind, Category, Error, GridFunction,
    SpectralData,
};

pub const MIN_GRID: usize = 16;
pub const MAX_GRID: usize = 4096;
pub const MAX_COUNT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check spectral data JSON against the admissibility conditions
    Validate,
    /// Spectral data JSON from a sigma CSV
    Direct,
    /// sigma CSV and a diagnostics JSON from spectral data
    Inverse,
    /// direct, inverse, and a replay of the recovered spectrum
    Roundtrip,
    /// sigma CSV for the data's eigenvalues with its norming constants, plus a replay report
    Isospectral,
    /// sigma distance under seeded random perturbations of the data
    Stability,
    /// Gram-matrix condition number of the data's eigenvalues
    Riesz,
}

/// Direct and inverse spectral problems for Sturm-Liouville operators with
/// potentials q = sigma'.
#[derive(Debug, Parser)]
#[command(name = "sturm-glm", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// Spectral data JSON or `x,sigma` CSV, depending on the command
    #[arg(long)]
    pub input: PathBuf,

    /// Output file; standard output when omitted (required by `inverse`
    /// and `isospectral`)
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Number of grid intervals M
    #[arg(long = "grid", default_value_t = 256)]
    pub grid: usize,

    /// Number of eigenvalues K
    #[arg(long = "count", default_value_t = 64)]
    pub count: usize,

    #[arg(long, default_value = "DD")]
    pub kind: BoundaryKind,

    /// Third-type parameter in u^[1](1) + h u(1) = 0
    #[arg(long)]
    pub h: Option<f64>,

    /// Adds c*x to sigma (direct, roundtrip) or c to every eigenvalue (inverse)
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Perturbation sizes for `stability`, comma separated
    #[arg(long, default_value = "1e-3,1e-2")]
    pub eps: String,

    /// Also write the triangular kernel as `i,j,k` CSV (`inverse` only)
    #[arg(long)]
    pub kernel_csv: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Failure {
    pub status: u8,
    pub category: &'static str,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (status, category) = match e.category() {
            Category::Validation => (1, "validation"),
            Category::Numerical => (2, "numerical"),
            Category::Input => (3, "input"),
        };
        Failure {
            status,
            category,
            message: e.to_string(),
        }
    }
}

fn config(message: impl Into<String>) -> Failure {
    Failure {
        status: 3,
        category: "config",
        message: message.into(),
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| {
        Failure::from(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Outcome {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| {
        Failure::from(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(output: Option<&Path>, contents: &str) -> Outcome {
    match output {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn required_output(cli: &Cli) -> Outcome<&Path> {
    cli.output.as_deref().ok_or_else(|| {
        config(format!("{:?} needs --output for the sigma CSV", cli.command).to_lowercase())
    })
}

/// `out.json` next to a `out.csv`, or `out.report.json` when the output
/// already ends in `.json`.
pub fn report_path(output: &Path) -> PathBuf {
    if output.extension().is_some_and(|e| e == "json") {
        output.with_extension("report.json")
    } else {
        output.with_extension("json")
    }
}

fn check_bounds(cli: &Cli) -> Outcome {
    if !(MIN_GRID..=MAX_GRID).contains(&cli.grid) {
        return Err(config(format!(
            "--grid {} outside [{MIN_GRID}, {MAX_GRID}]",
            cli.grid
        )));
    }
    if !(1..=MAX_COUNT).contains(&cli.count) {
        return Err(config(format!(
            "--count {} outside [1, {MAX_COUNT}]",
            cli.count
        )));
    }
    for (name, v) in [("--h", cli.h), ("--shift", cli.shift)] {
        if v.is_some_and(|v| !v.is_finite()) {
            return Err(config(format!("{name} must be finite")));
        }
    }
    Ok(())
}

fn params(cli: &Cli) -> CharParams {
    CharParams::with_h(cli.kind, cli.h.unwrap_or(0.0))
}

fn read_sigma(cli: &Cli) -> Outcome<GridFunction> {
    let sigma = GridFunction::from_csv(&read(&cli.input)?)?;
    Ok(match cli.shift {
        Some(c) => sigma.add_linear(c)?,
        None => sigma,
    })
}

fn read_data(cli: &Cli) -> Outcome<SpectralData> {
    Ok(SpectralData::from_json(&read(&cli.input)?)?)
}

fn read_valid_data(cli: &Cli) -> Outcome<SpectralData> {
    let data = read_data(cli)?;
    let report = validate_spectral_data(&data);
    if !report.ok {
        return Err(Error::Invalid(report).into());
    }
    Ok(data)
}

#[derive(Serialize)]
struct ReplayReport {
    kind: BoundaryKind,
    grid: usize,
    count: usize,
    positivity_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    lambda_in: Vec<f64>,
    lambda_replay: Vec<f64>,
    lambda_errors: Vec<f64>,
    alpha_in: Vec<f64>,
    alpha_replay: Vec<f64>,
}

pub fn run(cli: &Cli) -> Outcome {
    check_bounds(cli)?;
    match cli.command {
        Command::Validate => {
            let data = read_data(cli)?;
            let report = validate_spectral_data(&data);
            emit(cli.output.as_deref(), &report.to_json())?;
            if !report.ok {
                return Err(Error::Invalid(report).into());
            }
        }
        Command::Direct => {
            let sigma = read_sigma(cli)?;
            let data = direct_spectral_data(&sigma, cli.count, params(cli))?;
            emit(cli.output.as_deref(), &data.to_json())?;
        }
        Command::Inverse => {
            let output = required_output(cli)?;
            let mut data = read_valid_data(cli)?;
            if let Some(c) = cli.shift {
                data = shift_spectrum(&data, c)?;
            }
            let result = reconstruct(&data, cli.grid)?;
            write_atomic(output, &result.sigma().to_csv())?;
            write_atomic(&report_path(output), &result.to_json())?;
            if let Some(path) = &cli.kernel_csv {
                write_atomic(path, &result.kernel.to_csv())?;
            }
        }
        Command::Roundtrip => {
            let sigma = read_sigma(cli)?;
            let report = roundtrip_report(&sigma, cli.count, params(cli), cli.grid)?;
            emit(cli.output.as_deref(), &report.to_json())?;
        }
        Command::Isospectral => {
            let output = required_output(cli)?;
            let data = read_valid_data(cli)?;
            let beta: Vec<f64> = data.alpha().iter().map(|a| a - 1.0).collect();
            let result = isospectral_member(data.lambda(), &beta, data.kind(), cli.grid)?;
            let sigma = result.sigma();
            let n = cli.count.min(data.len());
            let p = CharParams::with_h(data.kind(), result.h.unwrap_or(0.0));
            let lambda_replay = eigenvalues(&sigma, n, p)?;
            let alpha_replay = norming_constants(&sigma, &lambda_replay, p)?;
            let report = ReplayReport {
                kind: data.kind(),
                grid: cli.grid,
                count: n,
                positivity_margin: result.positivity_margin,
                h: result.h,
                lambda_errors: data.lambda()[..n]
                    .iter()
                    .zip(&lambda_replay)
                    .map(|(a, b)| (a - b).abs())
                    .collect(),
                lambda_in: data.lambda()[..n].to_vec(),
                lambda_replay,
                alpha_in: data.alpha()[..n].to_vec(),
                alpha_replay,
            };
            write_atomic(output, &sigma.to_csv())?;
            write_atomic(&report_path(output), &to_json_string(&report))?;
        }
        Command::Stability => {
            let data = read_valid_data(cli)?;
            let eps = parse_real_list(&cli.eps).map_err(|e| config(format!("--eps: {e}")))?;
            let rows = stability_probe(&data, &eps, cli.grid, cli.seed)?;
            emit(cli.output.as_deref(), &stability_csv(&rows))?;
        }
        Command::Riesz => {
            let data = read_data(cli)?;
            let basis = RieszBasis::for_kind(data.kind());
            let c = riesz_condition(data.lambda(), basis);
            emit(cli.output.as_deref(), &format!("{c:.16e}\n"))?;
        }
    }
    Ok(())
}
