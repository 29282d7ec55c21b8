use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use phasebound_core::extremals::{extremal_weight_gabor, extremal_weight_wavelet};
use phasebound_core::gabor::{field_spectrum, radial_eigenvalues, AssemblyOptions};
use phasebound_core::io as pio;
use phasebound_core::wavelet::{
    assemble_wavelet_operator, bergman_radial_eigenvalues, hyperbolic_symmetrize, WaveletAssemblyOptions,
};
use phasebound_core::{bound, schwarz_symmetrize, BoundReport, ConstraintSet, Error, Measure, Transform, Weight};

mod config;
mod verify;

const EXIT_USAGE: u8 = 1;
const EXIT_NO_EXTREMAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "phasebound", version, about = "Sharp norm bounds for Gabor and wavelet localization operators")]
#[command(args_override_self = true)]
struct Cli {
    /// `key = value` file presetting any flag of the subcommand; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the sharp bound for a constraint set.
    Bound(BoundArgs),
    /// Write the extremal weight profile for a constraint set.
    Extremal(ExtremalArgs),
    /// Operator norm of a weight file against the sharp bound for its own norms.
    Norm(NormArgs),
    /// Radially symmetric decreasing rearrangement of a weight field.
    Symmetrize(SymmetrizeArgs),
    /// Run invariant suites and print a JSON summary.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TransformKind {
    Gabor,
    Wavelet,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug)]
struct ConstraintArgs {
    #[arg(long, value_enum)]
    transform: TransformKind,
    #[arg(long)]
    p: f64,
    /// Sup-norm constraint; `inf` for none.
    #[arg(long = "A", value_name = "R|inf")]
    a: f64,
    #[arg(long = "B")]
    b: f64,
    /// Phase-space dimension (Gabor).
    #[arg(long, conflicts_with = "beta")]
    d: Option<u32>,
    /// Cauchy-wavelet parameter (wavelet).
    #[arg(long)]
    beta: Option<f64>,
}

impl ConstraintArgs {
    fn constraint_set(&self) -> Result<ConstraintSet, Error> {
        match self.transform {
            TransformKind::Gabor => ConstraintSet::gabor(self.p, self.a, self.b, self.d.unwrap_or(1)),
            TransformKind::Wavelet => {
                let beta = self.beta.ok_or_else(|| Error::InvalidInput("--beta is required for wavelets".into()))?;
                ConstraintSet::wavelet(self.p, self.a, self.b, beta)
            }
        }
    }
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    constraints: ConstraintArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct ExtremalArgs {
    #[command(flatten)]
    constraints: ConstraintArgs,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of sample points for closed-form profiles.
    #[arg(long, default_value_t = 4000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct NormArgs {
    /// Field (`x,omega,re,im` or `x,y,re,im`) or profile (`r,value` or `x,value`) CSV.
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    p: f64,
    /// Basis size K.
    #[arg(long, default_value_t = 48)]
    basis: usize,
    /// Cauchy-wavelet parameter for half-plane fields and disc profiles.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Gauss–Legendre nodes per axis in each grid cell.
    #[arg(long, default_value_t = 3)]
    nodes_per_cell: usize,
    /// Largest basis mass allowed outside the grid box (default depends on the transform).
    #[arg(long)]
    leak_tol: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct SymmetrizeArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Bounds,
    Gabor,
    Wavelet,
    Varprob,
    Rearrange,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 48)]
    basis: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Core(e @ Error::NoExtremal { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NO_EXTREMAL)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PHASEBOUND_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("PHASEBOUND_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("PHASEBOUND_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(command: Command) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Bound(args) => {
            let report = bound(&args.constraints.constraint_set()?)?;
            write_bound(&mut out, &report, args.format)?;
        }
        Command::Extremal(args) => cmd_extremal(&mut out, &args)?,
        Command::Norm(args) => {
            let report = cmd_norm(&args)?;
            write_norm(&mut out, &report, args.format)?;
        }
        Command::Symmetrize(args) => cmd_symmetrize(&mut out, &args)?,
        Command::Verify(args) => {
            let report = verify::run(args.suite, args.seed, args.basis);
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(out)?;
            if report.failed > 0 {
                return Err(Failure::Verify);
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn write_bound(out: &mut impl Write, r: &BoundReport, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, r).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "regime,bound,lambda,critical_ratio,threshold")?;
            writeln!(out, "{},{},{},{},{}", r.regime.as_str(), r.bound, fmt_opt(r.lambda), r.critical_ratio, r.threshold)?;
        }
        Format::Text => {
            writeln!(out, "regime          {}", r.regime.as_str())?;
            writeln!(out, "bound           {:.10}", r.bound)?;
            if let Some(l) = r.lambda {
                writeln!(out, "lambda          {l:.10}")?;
            }
            writeln!(out, "critical_ratio  {:.10}", r.critical_ratio)?;
            writeln!(out, "threshold       {:.10}", r.threshold)?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<String, Failure> {
    let mut s = String::new();
    File::open(path)
        .map(BufReader::new)
        .and_then(|mut r| r.read_to_string(&mut s))
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(s)
}

/// Writes to `--out` if given, otherwise to `stdout`.
fn with_sink(out: &mut impl Write, path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => f(out)?,
    }
    Ok(())
}

fn cmd_extremal(out: &mut impl Write, args: &ExtremalArgs) -> Result<(), Failure> {
    let c = args.constraints.constraint_set()?;
    match c.transform {
        Transform::Gabor { .. } => {
            let w = extremal_weight_gabor(&c, (0.0, 0.0))?;
            let samples = pio::profile_samples(&w, args.samples);
            with_sink(out, args.out.as_deref(), |s| pio::write_profile(s, &samples))
        }
        Transform::Wavelet { .. } => {
            let w = extremal_weight_wavelet(&c, (0.0, 1.0))?;
            let samples = pio::disc_profile_samples(&w, args.samples);
            with_sink(out, args.out.as_deref(), |s| pio::write_disc_profile(s, &samples))
        }
    }
}

#[derive(Debug, Serialize)]
struct NormReport {
    norm: f64,
    bound: f64,
    ratio: f64,
    #[serde(rename = "K")]
    k: usize,
    tail_bound: f64,
}

enum WeightInput {
    Field(phasebound_core::WeightField),
    Profile(phasebound_core::RadialProfile),
    Disc(phasebound_core::DiscProfile),
}

fn read_weight(path: &Path) -> Result<WeightInput, Failure> {
    let text = open(path)?;
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("")
        .replace(' ', "");
    Ok(match header.as_str() {
        "r,value" => WeightInput::Profile(pio::read_profile(text.as_bytes())?),
        "x,value" => WeightInput::Disc(pio::read_disc_profile(text.as_bytes())?),
        _ => WeightInput::Field(pio::read_field(text.as_bytes())?),
    })
}

fn cmd_norm(args: &NormArgs) -> Result<NormReport, Failure> {
    let p = args.p;
    let (norm, tail_bound, sup, lp, transform) = match read_weight(&args.weight)? {
        WeightInput::Profile(w) => {
            let spec = radial_eigenvalues(&w, args.basis)?;
            (spec.norm(), spec.tail_bound, w.sup_norm(), Weight::lp_norm(&w, p, Measure::Lebesgue)?, Transform::Gabor { d: 1 })
        }
        WeightInput::Disc(w) => {
            let spec = bergman_radial_eigenvalues(&w, args.beta, args.basis)?;
            (spec.norm(), spec.tail_bound, w.sup_norm(), w.lp_norm(p)?, Transform::Wavelet { beta: args.beta })
        }
        WeightInput::Field(f) if f.measure() == Measure::Lebesgue => {
            let mut opts = AssemblyOptions::with_basis(args.basis);
            opts.nodes_per_cell = args.nodes_per_cell;
            if let Some(t) = args.leak_tol {
                opts.leak_tol = t;
            }
            let spec = field_spectrum(&f, &opts)?;
            (spec.norm(), spec.tail_bound, f.sup_norm(), Weight::lp_norm(&f, p, Measure::Lebesgue)?, Transform::Gabor { d: 1 })
        }
        WeightInput::Field(f) => {
            let mut opts = WaveletAssemblyOptions::new(args.beta, args.basis);
            opts.nodes_per_cell = args.nodes_per_cell;
            if let Some(t) = args.leak_tol {
                opts.leak_tol = t;
            }
            let m = assemble_wavelet_operator(&f, &opts)?;
            // no closed-form truncation estimate on the half-plane: report the trivial one
            let spec = phasebound_core::gabor::spectrum(&m, f.sup_norm())?;
            (spec.norm(), spec.tail_bound, f.sup_norm(), Weight::lp_norm(&f, p, Measure::Hyperbolic)?, Transform::Wavelet { beta: args.beta })
        }
    };
    if lp == 0.0 {
        return Ok(NormReport { norm, bound: 0.0, ratio: 0.0, k: args.basis, tail_bound });
    }
    let bound = bound(&ConstraintSet::new(p, sup, lp, transform)?)?.bound;
    Ok(NormReport { norm, bound, ratio: norm / bound, k: args.basis, tail_bound })
}

fn write_norm(out: &mut impl Write, r: &NormReport, format: Format) -> Result<(), Failure> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, r).map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "norm,bound,ratio,K,tail_bound")?;
            writeln!(out, "{},{},{},{},{}", r.norm, r.bound, r.ratio, r.k, r.tail_bound)?;
        }
        Format::Text => {
            writeln!(out, "norm        {:.10}", r.norm)?;
            writeln!(out, "bound       {:.10}", r.bound)?;
            writeln!(out, "ratio       {:.10}", r.ratio)?;
            writeln!(out, "K           {}", r.k)?;
            writeln!(out, "tail_bound  {:.3e}", r.tail_bound)?;
        }
    }
    Ok(())
}

fn cmd_symmetrize(out: &mut impl Write, args: &SymmetrizeArgs) -> Result<(), Failure> {
    let WeightInput::Field(f) = read_weight(&args.weight)? else {
        return Err(Failure::Usage("symmetrize needs a field file (x,omega,re,im or x,y,re,im)".into()));
    };
    if f.measure() == Measure::Lebesgue {
        let star = schwarz_symmetrize(&f)?;
        let samples = pio::profile_samples(&star, 0);
        with_sink(out, args.out.as_deref(), |s| pio::write_profile(s, &samples))
    } else {
        let star = hyperbolic_symmetrize(&f)?;
        let samples = pio::disc_profile_samples(&star, 0);
        with_sink(out, args.out.as_deref(), |s| pio::write_disc_profile(s, &samples))
    }
}
