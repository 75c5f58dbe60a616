//! `antextrap`: forward models, extrapolation and Monte Carlo studies from
//! the command line.
//!
//! Exit status: 0 on success, 1 on output I/O failure, 2 on malformed or
//! missing input, 3 on numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use antenna_extrap::harness::experiment::{order_rows, ORDER_HEADER};
use antenna_extrap::harness::io::{pattern_to_json, read_pattern, read_points, ResultFile};
use antenna_extrap::harness::{run_experiment, ExperimentConfig};
use antenna_extrap::metrics::{model_order_scan, Lattice};
use antenna_extrap::solver::{extrapolate, GridScheme, SolverParams, SpacingSchedule};
use antenna_extrap::{
    Complex64, ConfigurationPoint, DesignSpaceModel, Direction, Error, Excitation, MeasurementKind,
    SamplePoint, SampledPattern,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "antextrap", version, about = "Antenna pattern extrapolation from sparse measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a forward model at given directions or positions.
    Simulate(SimulateArgs),
    /// Fit a model to a sampled pattern and predict it elsewhere.
    Extrapolate(ExtrapolateArgs),
    /// Run a Monte Carlo experiment from a TOML config.
    Experiment(ExperimentArgs),
    /// Fit rectangular arrays of every shape and select the model order.
    OrderScan(OrderScanArgs),
    /// Print the smallest sample count for an injective pattern map.
    MinSamples(MinSamplesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rect,
    Array,
    Horn,
    Dish,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Complex,
    Mag,
    Db,
}

impl From<Kind> for MeasurementKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Complex => MeasurementKind::ComplexField,
            Kind::Mag => MeasurementKind::MagnitudeLinear,
            Kind::Db => MeasurementKind::MagnitudeDb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Auto,
    Factorial3,
    Compass,
}

impl From<Scheme> for GridScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Auto => GridScheme::Auto,
            Scheme::Factorial3 => GridScheme::Factorial3,
            Scheme::Compass => GridScheme::Compass,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    Geometric,
    Adaptive,
}

impl From<Schedule> for SpacingSchedule {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::Geometric => SpacingSchedule::Geometric,
            Schedule::Adaptive => SpacingSchedule::Adaptive,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Family,
    /// Rows of a rectangular array.
    #[arg(long, default_value_t = 3)]
    rows: usize,
    /// Columns of a rectangular array.
    #[arg(long, default_value_t = 3)]
    cols: usize,
    /// Elements of a general (near-field) array.
    #[arg(long, default_value_t = 4)]
    elements: usize,
    /// Coordinate bound of general-array elements, in wavelengths.
    #[arg(long, default_value_t = 2.0)]
    extent: f64,
}

impl ModelArgs {
    fn build(&self) -> antenna_extrap::Result<DesignSpaceModel> {
        match self.model {
            Family::Rect => DesignSpaceModel::rect_array(self.rows, self.cols),
            Family::Array => DesignSpaceModel::general_array(self.elements, self.extent),
            Family::Horn => Ok(DesignSpaceModel::eplane_horn()),
            Family::Dish => Ok(DesignSpaceModel::dish()),
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, value_enum, default_value = "auto")]
    scheme: Scheme,
    #[arg(long, value_enum, default_value = "geometric")]
    schedule: Schedule,
    /// Grid spacing factor per shrink.
    #[arg(long, default_value_t = 0.7)]
    decay: f64,
    /// Relative residual at which a start stops early.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

impl SolverArgs {
    fn params(&self) -> SolverParams {
        SolverParams {
            max_iterations: self.iterations,
            restarts: self.restarts,
            grid_scheme: self.scheme.into(),
            schedule: self.schedule.into(),
            decay: self.decay,
            convergence_tol: self.tolerance,
            ..SolverParams::default()
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Direction `AZ,EL` in degrees; repeatable. Defaults to boresight.
    #[arg(long = "at", value_parser = parse_pair, allow_hyphen_values = true)]
    at: Vec<(f64, f64)>,
    /// JSON file with a list of sample points (overrides --at).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Comma-separated configuration values. Defaults to the box center.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    config: Option<Vec<f64>>,
    /// Port amplitude `RE,IM`; repeat once per port. Defaults to all ones.
    #[arg(long = "amp", value_parser = parse_pair, allow_hyphen_values = true)]
    amps: Vec<(f64, f64)>,
    #[arg(long, value_enum, default_value = "complex")]
    kind: Kind,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ExtrapolateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sampled-pattern JSON file.
    #[arg(long)]
    pattern: PathBuf,
    /// JSON list of query points. Defaults to a regular lattice.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Lattice step in degrees when no query file is given.
    #[arg(long, default_value_t = 2.0)]
    step: f64,
    /// Expected measurement kind of the pattern file.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    /// Overrides `out.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `first_trial`.
    #[arg(long)]
    first_trial: Option<usize>,
    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct OrderScanArgs {
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long, default_value_t = 5)]
    max_rows: usize,
    #[arg(long, default_value_t = 5)]
    max_cols: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct MinSamplesArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "complex")]
    kind: Kind,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let a = a.trim().parse::<f64>().map_err(|e| format!("`{a}`: {e}"))?;
    let b = b.trim().parse::<f64>().map_err(|e| format!("`{b}`: {e}"))?;
    Ok((a, b))
}

/// Failure carrying the process exit status.
struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Numerical(_) => 3,
            Error::Io { .. } => 1,
            _ => 2,
        };
        Failure { code, error }
    }
}

/// Errors while reading a user-supplied input count as malformed input.
fn input<T>(r: antenna_extrap::Result<T>) -> Result<T, Failure> {
    r.map_err(|error| {
        let code = if matches!(error, Error::Numerical(_)) { 3 } else { 2 };
        Failure { code, error }
    })
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::from(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

fn values_csv(points: &[SamplePoint], values: &[Complex64]) -> String {
    let near = points.iter().any(|p| p.position().is_some());
    let mut s = String::from(if near { "x,y,z,value\n" } else { "azimuth_deg,elevation_deg,value\n" });
    for (p, v) in points.iter().zip(values) {
        match p {
            SamplePoint::Far(d) => s.push_str(&format!(
                "{},{},{}\n",
                d.azimuth.to_degrees(),
                d.elevation.to_degrees(),
                fmt_complex(*v)
            )),
            SamplePoint::Near { position: [x, y, z] } => s.push_str(&format!("{x},{y},{z},{}\n", fmt_complex(*v))),
        }
    }
    s
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let model = input(a.model.build())?;
    let points = match &a.points {
        Some(path) => input(read_points(path))?,
        None if a.at.is_empty() => vec![SamplePoint::Far(Direction::boresight())],
        None => a
            .at
            .iter()
            .map(|&(az, el)| Direction::from_degrees(az, el).map(SamplePoint::Far))
            .collect::<antenna_extrap::Result<_>>()
            .map_err(Failure::from)?,
    };
    let config = a.config.clone().map(ConfigurationPoint).unwrap_or_else(|| model.center());
    let excitation = if a.amps.is_empty() {
        Excitation::ones(model.excitation_dim())
    } else {
        Excitation(a.amps.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    };
    let kind = MeasurementKind::from(a.kind);
    let values: Vec<Complex64> = model
        .evaluate(&config, &excitation, &points)?
        .into_iter()
        .map(|f| kind.measure(f))
        .collect();
    let body = match a.format {
        Format::Csv => values_csv(&points, &values),
        Format::Json => pattern_to_json(&SampledPattern::new(points, values, kind)?) + "\n",
    };
    emit(None, &body)
}

fn run_extrapolate(a: ExtrapolateArgs) -> Result<(), Failure> {
    let model = input(a.model.build())?;
    let observed = input(read_pattern(&a.pattern))?;
    if let Some(k) = a.kind {
        let k = MeasurementKind::from(k);
        if k != observed.kind {
            return Err(Failure::from(Error::Malformed {
                field: "kind".into(),
                message: format!("pattern file holds `{}` values but --kind is `{k}`", observed.kind),
            }));
        }
    }
    let queries = match &a.queries {
        Some(path) => input(read_points(path))?,
        None => Lattice::regular(a.step)?.points(),
    };
    let result = extrapolate(&model, &observed, &queries, &a.solver.params(), a.seed)?;
    if result.undersampled {
        eprintln!(
            "warning: {} samples is below the {} needed for an injective {} pattern map",
            observed.len(),
            model.min_sample_count(observed.kind),
            model.name
        );
    }
    let body = match a.format {
        Format::Json => ResultFile::new(&model, observed.kind, &queries, &result).to_json() + "\n",
        Format::Csv => values_csv(&queries, &result.predicted),
    };
    emit(a.out.as_deref(), &body)
}

fn run_experiment_cmd(a: ExperimentArgs) -> Result<(), Failure> {
    let mut cfg = input(ExperimentConfig::from_file(&a.config))?;
    if let Some(out) = a.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(t) = a.first_trial {
        cfg.first_trial = t;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    let run = || run_experiment(&cfg);
    let output = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::from(Error::InvalidArgument(e.to_string())))?
            .install(run)?,
        None => run()?,
    };
    for f in &output.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn order_scan(a: OrderScanArgs) -> Result<(), Failure> {
    let observed = input(read_pattern(&a.pattern))?;
    let scan = model_order_scan(&observed, 1..=a.max_rows, 1..=a.max_cols, &a.solver.params(), a.seed)?;
    let body = match a.format {
        Format::Csv => format!("{ORDER_HEADER}\n{}", order_rows(0, &scan)),
        Format::Json => serde_json::to_string_pretty(&scan).expect("scan serializes") + "\n",
    };
    emit(a.out.as_deref(), &body)
}

fn min_samples(a: MinSamplesArgs) -> Result<(), Failure> {
    let model = input(a.model.build())?;
    println!("{}", model.min_sample_count(a.kind.into()));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Extrapolate(a) => run_extrapolate(a),
        Command::Experiment(a) => run_experiment_cmd(a),
        Command::OrderScan(a) => order_scan(a),
        Command::MinSamples(a) => min_samples(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code)
        }
    }
}
