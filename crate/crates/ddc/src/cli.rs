//! Argument parsing and the four subcommands.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddc_core::capacity::{entropy_of_spectrum, von_neumann_entropy, OptimizerOptions};
use ddc_core::channel::{apply_kernel, coherent_input, gram_spectrum, DensityMatrix};
use ddc_core::kernel::{kernel_matrix, Convention};
use ddc_core::{ChannelParams, Dimension};
use serde::Deserialize;

use crate::error::CliError;
use crate::io::{self, ApplyReport, MatrixFile, StateSpec};
use crate::sweep::{self, CapacityGrid, KernelMapGrid};
use crate::validate::{self, ValidateOptions};

#[derive(Debug, Parser)]
#[command(
    name = "ddc",
    version,
    about = "Deformed bosonic dephasing channel: kernels, capacities and an oracle check",
    after_help = "Physical defaults: omega = 1, convention = proof. \
                  DDC_THREADS caps the number of worker threads for grid commands."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel K_nm over a (lambda, gamma) grid as CSV.
    KernelMap(KernelMapArgs),
    /// Optimal coherent information over diagonal inputs as CSV.
    Capacity(CapacityArgs),
    /// Apply the channel to a state; writes the output and entropies as JSON.
    Apply(ApplyArgs),
    /// Run the oracle and identity suites; exit 1 on any failure.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConventionArg {
    /// mu_n = sqrt(gamma) n (1 + y n)
    Proof,
    /// mu_n = sqrt(gamma) n
    Eq19,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Proof => Convention::Proof,
            ConventionArg::Eq19 => Convention::Eq19,
        }
    }
}

#[derive(Debug, Args)]
pub struct KernelMapArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 51)]
    pub lambda_steps: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 51)]
    pub gamma_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub omega: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Proof)]
    pub convention: ConventionArg,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Highest input index N (N + 1 levels); comma separated list.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Kerr parameters; comma separated list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    /// `min:max:steps` or a comma separated list [default: 0:6:25].
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_grid: Option<String>,
    /// [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Mean energy bound on the input levels (unconstrained if omitted).
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    /// [default: proof]
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Base level then gaps between levels, the last gap repeating [default: 0,1].
    #[arg(long, value_delimiter = ',')]
    pub offsets: Option<Vec<usize>>,
    /// [default: 8]
    #[arg(long)]
    pub multistarts: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with any of the above keys plus `max_iterations` and
    /// `tolerance`; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `--config` contents.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    pub lambda: Option<Vec<f64>>,
    pub gamma_grid: Option<GammaGrid>,
    pub omega: Option<f64>,
    pub energy: Option<f64>,
    pub convention: Option<String>,
    pub offsets: Option<Vec<usize>>,
    pub multistarts: Option<usize>,
    pub seed: Option<u64>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaGrid {
    List(Vec<f64>),
    Range { min: f64, max: f64, steps: usize },
    Spec(String),
}

impl GammaGrid {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GammaGrid::List(v) => Ok(v.clone()),
            GammaGrid::Range { min, max, steps } => Ok(sweep::linspace(*min, *max, *steps)),
            GammaGrid::Spec(s) => parse_gamma_grid(s),
        }
    }
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    /// JSON file `{"dim": d, "entries": [[re, im], ...]}` (row major) or
    /// `coherent:re[,im]`.
    #[arg(long, allow_hyphen_values = true)]
    pub state: String,
    /// Truncation for coherent inputs [default: the finite space for
    /// lambda < 0, else 32].
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub omega: f64,
    /// Output JSON (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Number of Fock levels checked (clipped to the lambda < 0 space).
    #[arg(long, default_value_t = 6)]
    pub max_dim: usize,
    /// Residual threshold applied to every identity.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Machine-readable JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the frozen oracle fixture CSV.
    #[arg(long)]
    pub fixtures_out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ddc: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::KernelMap(a) => kernel_map_cmd(a).map(|_| 0),
        Command::Capacity(a) => capacity_cmd(a).map(|_| 0),
        Command::Apply(a) => apply_cmd(a).map(|_| 0),
        Command::Validate(a) => validate_cmd(a),
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn require(cond: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::InvalidArgs(msg.into()))
    }
}

fn check_range(name: &str, min: f64, max: f64, steps: usize) -> Result<(), CliError> {
    require(min.is_finite() && max.is_finite(), format!("{name} bounds must be finite"))?;
    require(min <= max, format!("{name}-min must not exceed {name}-max"))?;
    require(steps >= 1, format!("{name}-steps must be at least 1"))
}

fn kernel_map_cmd(a: KernelMapArgs) -> Result<(), CliError> {
    check_range("lambda", a.lambda_min, a.lambda_max, a.lambda_steps)?;
    check_range("gamma", a.gamma_min, a.gamma_max, a.gamma_steps)?;
    require(a.gamma_min >= 0.0, "gamma must be >= 0")?;
    require(a.omega.is_finite() && a.omega > 0.0, "omega must be > 0")?;
    let grid = KernelMapGrid {
        lambdas: sweep::linspace(a.lambda_min, a.lambda_max, a.lambda_steps),
        gammas: sweep::linspace(a.gamma_min, a.gamma_max, a.gamma_steps),
        n: a.n,
        m: a.m,
        omega: a.omega,
        convention: a.convention.into(),
    };
    let rows = sweep::kernel_map(&grid)?;
    if rows.iter().all(|r| r.k.is_none()) {
        return Err(CliError::Dimension(format!(
            "levels n={} m={} lie outside the state space at every grid point",
            a.n, a.m
        )));
    }
    io::write_kernel_map(&rows, open_out(&a.out)?)
}

/// `min:max:steps` or a comma separated list.
pub fn parse_gamma_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::InvalidArgs(format!("bad gamma grid {s:?}; expected min:max:steps or a list"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts.as_slice() else {
            return Err(bad());
        };
        let steps: usize = steps.trim().parse().map_err(|_| bad())?;
        let (min, max) = (num(min)?, num(max)?);
        check_range("gamma", min, max, steps)?;
        Ok(sweep::linspace(min, max, steps))
    } else {
        s.split(',').map(num).collect()
    }
}

fn parse_convention(s: &str) -> Result<Convention, CliError> {
    ConventionArg::from_str(s, true)
        .map(Convention::from)
        .map_err(|_| CliError::InvalidArgs(format!("unknown convention {s:?}")))
}

fn load_config(path: &Path) -> Result<CapacityConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::InvalidArgs(format!("bad config {}: {e}", path.display())))
}

/// Merges flags over the config file over defaults.
pub fn capacity_grid(a: &CapacityArgs) -> Result<CapacityGrid, CliError> {
    let cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => CapacityConfig::default(),
    };
    let ns = a.n.clone().or(cfg.n).unwrap_or_else(|| vec![1]);
    let lambdas = a.lambda.clone().or(cfg.lambda).unwrap_or_else(|| vec![0.0]);
    let gammas = match (&a.gamma_grid, &cfg.gamma_grid) {
        (Some(s), _) => parse_gamma_grid(s)?,
        (None, Some(g)) => g.values()?,
        (None, None) => sweep::linspace(0.0, 6.0, 25),
    };
    let omega = a.omega.or(cfg.omega).unwrap_or(1.0);
    let energy = a.energy.or(cfg.energy);
    let convention = match (a.convention, &cfg.convention) {
        (Some(c), _) => c.into(),
        (None, Some(s)) => parse_convention(s)?,
        (None, None) => Convention::Proof,
    };
    let offsets = a.offsets.clone().or(cfg.offsets).unwrap_or_else(|| vec![0, 1]);
    let defaults = OptimizerOptions::default();
    let options = OptimizerOptions {
        multistarts: a.multistarts.or(cfg.multistarts).unwrap_or(defaults.multistarts),
        seed: a.seed.or(cfg.seed).unwrap_or(defaults.seed),
        max_iterations: cfg.max_iterations.unwrap_or(defaults.max_iterations),
        tolerance: cfg.tolerance.unwrap_or(defaults.tolerance),
        convention,
        levels: None,
        record_trace: false,
    };

    require(!ns.is_empty() && ns.iter().all(|&n| n >= 1), "N must be a nonempty list of integers >= 1")?;
    require(!lambdas.is_empty() && lambdas.iter().all(|l| l.is_finite()), "lambda must be a nonempty list of finite values")?;
    require(
        !gammas.is_empty() && gammas.iter().all(|g| g.is_finite() && *g >= 0.0),
        "gamma grid must be nonempty with finite values >= 0",
    )?;
    require(omega.is_finite() && omega > 0.0, "omega must be > 0")?;
    require(energy.is_none_or(|e| e.is_finite()), "energy must be finite")?;
    require(!offsets.is_empty() && offsets[1..].iter().all(|&g| g >= 1), "offset gaps must be >= 1")?;
    require(options.multistarts >= 1, "multistarts must be >= 1")?;
    require(options.max_iterations >= 1, "max_iterations must be >= 1")?;
    require(options.tolerance.is_finite() && options.tolerance > 0.0, "tolerance must be > 0")?;
    Ok(CapacityGrid {
        lambdas,
        gammas,
        ns,
        omega,
        energy,
        offsets,
        options,
    })
}

fn capacity_cmd(a: CapacityArgs) -> Result<(), CliError> {
    let grid = capacity_grid(&a)?;
    let rows = sweep::capacity_sweep(&grid)?;
    if rows.iter().all(|r| r.result.is_none()) {
        return Err(CliError::Dimension(
            "the input levels lie outside the state space for every lambda".into(),
        ));
    }
    io::write_capacity(&rows, open_out(&a.out)?)
}

fn apply_cmd(a: ApplyArgs) -> Result<(), CliError> {
    let p = ChannelParams::new(a.gamma, a.lambda, a.omega).map_err(|e| CliError::InvalidArgs(e.to_string()))?;
    let bound = p.max_dimension();
    let rho = match io::parse_state_spec(&a.state)? {
        StateSpec::File(path) => {
            let rho = io::density_from_file(&path)?;
            if let Some(d) = a.dim {
                require(d == rho.dim, format!("--dim {d} disagrees with the state file (dim {})", rho.dim))?;
            }
            rho
        }
        StateSpec::Coherent(alpha) => {
            let dim = a.dim.unwrap_or(match bound {
                Dimension::Finite(d) => d,
                Dimension::Unbounded => 32,
            });
            require(dim >= 1, "--dim must be at least 1")?;
            bound
                .check(dim)
                .map_err(|e| CliError::Dimension(e.to_string()))?;
            DensityMatrix::pure(&coherent_input(alpha, &p, dim)?)?
        }
    };
    bound
        .check(rho.dim)
        .map_err(|e| CliError::Dimension(e.to_string()))?;
    let k = kernel_matrix(&p, rho.dim)?;
    let out = apply_kernel(&rho, &k)?;
    let diag: Vec<f64> = rho.diagonal_values().iter().map(|x| x.max(0.0)).collect();
    let report = ApplyReport {
        gamma: p.gamma,
        lambda: p.lambda,
        omega: p.omega,
        entropy: von_neumann_entropy(&out)?,
        complementary_entropy: entropy_of_spectrum(&gram_spectrum(&diag, &k)?)?,
        output: MatrixFile::from_matrix(&out.entries),
    };
    let mut w = open_out(&a.out)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Result<i32, CliError> {
    require(a.max_dim >= 2, "--max-dim must be at least 2")?;
    require(a.tol.is_finite() && a.tol >= 0.0, "--tol must be finite and >= 0")?;
    let report = validate::run(&ValidateOptions {
        max_dim: a.max_dim,
        tol: a.tol,
    });
    eprint!("{}", report.summary());
    if let Some(path) = &a.report {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        w.flush()?;
    }
    if let Some(path) = &a.fixtures_out {
        let rows = crate::fixtures::oracle_fixtures()?;
        io::write_fixtures(&rows, BufWriter::new(File::create(path)?))?;
    }
    Ok(if report.passed { 0 } else { 1 })
}
