//! Command-line driver: derive surfaces, run the verification suites and
//! simulate 1+1 models. Exit codes are 0 on success, 1 when a verification
//! suite fails and 2 on configuration errors.

pub mod suites;

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use worldsheet::coords::Var;
use worldsheet::models::{self, derive, ModelSpec};
use worldsheet::poly::Polynomial;
use worldsheet::solver::{
    write_diagnostics_csv, write_trajectory_csv, HamiltonianSystem, InitialData,
};
use worldsheet::Error;

pub use suites::SuiteResult;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "worldsheet",
    version,
    about = "Worldsheet Hamiltonian formalism toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ModelArgs {
    /// kg1p1, scalar-ndim or ed1p1.
    #[arg(long)]
    pub model: String,
    /// Scalar mass, `Ψ = −½ m² φ²`.
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    /// Inverse metric of scalar-ndim, e.g. `diag:1,-1,-1`.
    #[arg(long)]
    pub metric: Option<String>,
    /// Electrodynamics coupling, `C = 2 C0`.
    #[arg(long, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    /// Electrodynamics potential `Φ = phi0 · φ¹`.
    #[arg(long, allow_negative_numbers = true)]
    pub phi0: Option<f64>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Derive the Hamiltonian surface and print it as JSON.
    Derive {
        #[command(flatten)]
        model: ModelArgs,
        /// Directory for surface.json and derivation.log.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded verification suites.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replaces every residual tolerance; the order-fit band stays 0.1.
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
        /// Directory for report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a 1+1 model on a periodic grid.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Grid spacing; defaults to one wavelength of `k` over the grid.
        #[arg(long, allow_negative_numbers = true)]
        h: Option<f64>,
        /// Wavenumber of the initial wave; defaults to one wavelength.
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        /// Defaults to h/2.
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
        #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
        t_end: f64,
        #[arg(long, default_value_t = 10)]
        stride: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        amplitude: f64,
        /// Start a traveling wave instead of a standing one.
        #[arg(long)]
        traveling: bool,
        /// Initial uniform field strength for electrodynamics.
        #[arg(long, default_value_t = 0.7, allow_negative_numbers = true)]
        f01: f64,
        /// Recorded in every output; the integration itself is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Verification report written by `verify`.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub model: ModelArgs,
    pub samples: usize,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

/// Summary written by `simulate`.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationSummary {
    pub model: ModelArgs,
    pub seed: u64,
    pub nodes: usize,
    pub h: f64,
    pub k: f64,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub max_eta: f64,
    pub final_max_eta: f64,
    pub energy_drift: f64,
    pub frequency: Option<f64>,
    pub expected_frequency: Option<f64>,
    pub f01_spread: Option<f64>,
    pub f01_spread_per_time: Option<f64>,
}

enum Failure {
    Config(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Configuration(_)
            | Error::Parse(_)
            | Error::Unsupported(_)
            | Error::DimensionMismatch { .. } => Failure::Config(e.to_string()),
            other => Failure::Verify(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("cannot write {}: {e}", path.display()))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))
}

/// Builds the model named by the flags, rejecting flags that do not apply.
pub fn build_model(args: &ModelArgs) -> worldsheet::Result<ModelSpec> {
    let reject = |flag: &str, set: bool| -> worldsheet::Result<()> {
        if set {
            Err(Error::Configuration(format!(
                "--{flag} does not apply to model {}",
                args.model
            )))
        } else {
            Ok(())
        }
    };
    match args.model.as_str() {
        "kg1p1" => {
            reject("metric", args.metric.is_some())?;
            reject("c0", args.c0.is_some())?;
            reject("phi0", args.phi0.is_some())?;
            models::kg_1p1(args.mass.unwrap_or(0.0))
        }
        "scalar-ndim" => {
            reject("c0", args.c0.is_some())?;
            reject("phi0", args.phi0.is_some())?;
            let g = models::parse_metric(args.metric.as_deref().unwrap_or("diag:1,-1,-1"))?;
            let m = args.mass.unwrap_or(0.0);
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::Configuration(format!(
                    "mass must be a finite nonnegative number, got {m}"
                )));
            }
            // a singular metric is a bad flag, not a failed check
            models::scalar_ndim(g, models::mass_potential(m)).map_err(|e| match e {
                Error::Degenerate { .. } => {
                    Error::Configuration(format!("metric is singular: {e}"))
                }
                other => other,
            })
        }
        "ed1p1" => {
            reject("mass", args.mass.is_some())?;
            reject("metric", args.metric.is_some())?;
            let phi = Polynomial::var(Var::Phi(1)) * args.phi0.unwrap_or(0.0);
            models::electrodynamics_1p1(args.c0.unwrap_or(0.25), phi)
        }
        other => Err(Error::Configuration(format!(
            "unknown model `{other}`; expected kg1p1, scalar-ndim or ed1p1"
        ))),
    }
}

fn cmd_derive(
    model: &ModelArgs,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let spec = build_model(model)?;
    let d = derive(&spec)?;
    let json = d.surface.to_json();
    let log = d.log.join("\n") + "\n";
    if let Some(dir) = out {
        write_file(dir, "surface.json", json.as_bytes())?;
        write_file(dir, "derivation.log", log.as_bytes())?;
    }
    let _ = stderr.write_all(log.as_bytes());
    let _ = writeln!(stdout, "{json}");
    Ok(())
}

/// Runs every suite for the model. Redundancy needs a recognized motion
/// system and runs for all three presets.
pub fn verify(
    model: &ModelArgs,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
) -> worldsheet::Result<VerifyReport> {
    if samples == 0 {
        return Err(Error::Configuration("--samples must be at least 1".into()));
    }
    if let Some(t) = tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Configuration(format!(
                "tolerance must be positive and finite, got {t}"
            )));
        }
    }
    let spec = build_model(model)?;
    let pick = |default: f64| tol.unwrap_or(default);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suites = vec![
        suites::crit1(&spec, samples, pick(suites::CRIT1_TOL), &mut rng)?,
        suites::crit2(&spec, samples, suites::ORDER_TOL, &mut rng)?,
        suites::double_dual(samples, pick(suites::DOUBLE_DUAL_TOL), &mut rng)?,
        suites::plucker(&spec, samples, pick(suites::PLUCKER_TOL), &mut rng)?,
        suites::membership(&spec, samples, pick(suites::MEMBERSHIP_TOL), &mut rng)?,
        suites::redundancy(&spec, samples, pick(suites::REDUNDANCY_TOL), &mut rng)?,
    ];
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport {
        model: model.clone(),
        samples,
        seed,
        suites,
        passed,
    })
}

fn cmd_verify(
    model: &ModelArgs,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let report = verify(model, samples, seed, tol)?;
    let json = serde_json::to_string_pretty(&report).expect("plain data serializes");
    if let Some(dir) = out {
        write_file(dir, "report.json", json.as_bytes())?;
    }
    let _ = writeln!(stdout, "{json}");
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name.as_str())
            .collect();
        Err(Failure::Verify(format!(
            "failed suites: {}",
            failed.join(", ")
        )))
    }
}

/// Settings of a simulation after defaults are filled in.
#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub nodes: usize,
    pub h: f64,
    pub k: f64,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub data: InitialData,
}

/// Fills in defaults and checks that the wave fits the periodic grid.
pub fn simulation_config(
    spec: &ModelSpec,
    nodes: usize,
    h: Option<f64>,
    k: Option<f64>,
    dt: Option<f64>,
    t_end: f64,
    stride: usize,
    amplitude: f64,
    traveling: bool,
    f01: f64,
) -> worldsheet::Result<SimulationConfig> {
    if nodes < 3 {
        return Err(Error::Configuration(format!(
            "--nodes must be at least 3, got {nodes}"
        )));
    }
    let (h, k) = match (h, k) {
        (Some(h), Some(k)) => (h, k),
        (Some(h), None) => (h, 2.0 * PI / (nodes as f64 * h)),
        (None, Some(k)) if k != 0.0 => (2.0 * PI / (k.abs() * nodes as f64), k),
        (None, _) => (1.0 / nodes as f64, 2.0 * PI),
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Configuration(format!(
            "--h must be positive, got {h}"
        )));
    }
    let waves = k * nodes as f64 * h / (2.0 * PI);
    if (waves - waves.round()).abs() > 1e-6 * waves.abs().max(1.0) {
        return Err(Error::Configuration(format!(
            "k = {k} does not fit the periodic grid of length {} ({waves} wavelengths)",
            nodes as f64 * h
        )));
    }
    let dt = dt.unwrap_or(0.5 * h);
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Configuration(format!(
            "--dt must be positive, got {dt}"
        )));
    }
    if dt > h * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "CFL violated: dt = {dt} exceeds h = {h}"
        )));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Configuration(format!(
            "--T must be nonnegative, got {t_end}"
        )));
    }
    let data = match spec.kind {
        models::ModelKind::Scalar => InitialData::PlaneWave {
            amplitude,
            k,
            traveling,
        },
        models::ModelKind::Electrodynamics { .. } => {
            InitialData::UniformField { f01, amplitude, k }
        }
    };
    Ok(SimulationConfig {
        nodes,
        h,
        k,
        dt,
        t_end,
        stride,
        data,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model: &ModelArgs,
    cfg: (
        usize,
        Option<f64>,
        Option<f64>,
        Option<f64>,
        f64,
        usize,
        f64,
        bool,
        f64,
    ),
    seed: u64,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let spec = build_model(model)?;
    let (nodes, h, k, dt, t_end, stride, amplitude, traveling, f01) = cfg;
    let c = simulation_config(
        &spec, nodes, h, k, dt, t_end, stride, amplitude, traveling, f01,
    )?;
    let hs = HamiltonianSystem::new(&spec)?;
    let initial = hs.initial_state(&c.data, c.nodes, c.h)?;
    let traj = hs.run(&initial, c.t_end, c.dt, c.stride)?;
    let mut tbuf = Vec::new();
    write_trajectory_csv(&mut tbuf, &traj, Some(seed))?;
    let mut dbuf = Vec::new();
    write_diagnostics_csv(&mut dbuf, &traj, Some(seed))?;
    let is_scalar = spec.kind == models::ModelKind::Scalar;
    let spread = traj.max_f01_spread();
    let summary = SimulationSummary {
        model: model.clone(),
        seed,
        nodes: c.nodes,
        h: c.h,
        k: c.k,
        dt: traj
            .diagnostics
            .get(1)
            .map_or(c.dt, |d| d.t - traj.diagnostics[0].t),
        t_end: c.t_end,
        steps: traj.diagnostics.len() - 1,
        max_eta: traj.max_eta(),
        final_max_eta: traj.last().max_eta(),
        energy_drift: traj.energy_drift(),
        frequency: if is_scalar { traj.frequency() } else { None },
        expected_frequency: if is_scalar {
            worldsheet::solver::plane_wave_frequency(&spec, c.k).ok()
        } else {
            None
        },
        f01_spread: spread,
        f01_spread_per_time: spread.map(|s| if c.t_end > 0.0 { s / c.t_end } else { s }),
    };
    let json = serde_json::to_string_pretty(&summary).expect("plain data serializes");
    write_file(out, "trajectory.csv", &tbuf)?;
    write_file(out, "diagnostics.csv", &dbuf)?;
    write_file(out, "summary.json", json.as_bytes())?;
    let _ = writeln!(stdout, "{json}");
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Derive { model, out } => cmd_derive(model, out.as_deref(), stdout, stderr),
        Command::Verify {
            model,
            samples,
            seed,
            tol,
            out,
        } => cmd_verify(model, *samples, *seed, *tol, out.as_deref(), stdout),
        Command::Simulate {
            model,
            nodes,
            h,
            k,
            dt,
            t_end,
            stride,
            amplitude,
            traveling,
            f01,
            seed,
            out,
        } => cmd_simulate(
            model,
            (
                *nodes, *h, *k, *dt, *t_end, *stride, *amplitude, *traveling, *f01,
            ),
            *seed,
            out,
            stdout,
        ),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_FAILED
        }
    }
}
