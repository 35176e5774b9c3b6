//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or usage, 3 a numerical tolerance
//! was not met. Each data file gets a `<file>.manifest.json` sidecar.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::discrete::{self, ChainState, OracleOptions};
use crate::io::{self, Cell, RunManifest};
use crate::meanfield::{self, Dispersion, MeanfieldError, MeanfieldOptions, Route, SpatialMethod, Trajectory};
use crate::modes::{self, ModeSpectrum, DEFAULT_Y_MAX};
use crate::params::{self, ParamsError, RegimeThresholds, SystemParams};
use crate::quad::QuadError;
use crate::quantum::evolve::{build_ndpa, first_order_amplitude, pair_space, Propagator, MODE};
use crate::quantum::{self, FullOptions, PerturbativeGuard, QuantumError, QuantumState, DETECTOR};
use crate::superpose::{self, BranchSpec, DetectorModel, SuperposeError};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "GINZBURG_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical tolerance not met: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            CliError::Validation(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<modes::ModesError> for CliError {
    fn from(e: modes::ModesError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MeanfieldError> for CliError {
    fn from(e: MeanfieldError) -> Self {
        match e {
            MeanfieldError::Quadrature { .. } => CliError::Numerical(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SuperposeError> for CliError {
    fn from(e: SuperposeError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<discrete::DiscreteError> for CliError {
    fn from(e: discrete::DiscreteError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "ginzburg", version, about = "Detector / dipole-chain Ginzburg-effect simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// JSON configuration; the paper-units default is used when absent.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Reserved; no stochastic path exists, so the value has no effect.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mode spectrum, couplings and cutoff flags.
    Modes(ModesArgs),
    /// Mean chain displacement on a grid.
    Meanfield(MeanfieldArgs),
    /// Discrete lattice integration against the closed form.
    OracleCompare(OracleArgs),
    /// Resonant mode(s) for one or two trajectories.
    Resonance(ResonanceArgs),
    /// Excitation of the resonant mode and the detector.
    Evolve(EvolveArgs),
    /// Reduced chain and detector states for a superposed trajectory.
    ReducedState(ReducedArgs),
    /// Regime diagnostics for a run window.
    Regime(RegimeArgs),
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub csv: PathBuf,
    /// Detector frequency; defaults to the configured one.
    #[arg(long)]
    pub omega_d: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_Y_MAX)]
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RouteArg {
    Closed,
    Series,
    Modesum,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DispersionArg {
    Linear,
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpatialArg {
    Quadrature,
    ByParts,
}

#[derive(Debug, Args)]
pub struct MeanfieldArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "closed")]
    pub route: RouteArg,
    #[arg(long, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// One or more times (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    /// Number of evenly spaced grid points spanning the chain.
    #[arg(long, default_value_t = 4001)]
    pub grid: usize,
    #[arg(long)]
    pub alpha_max: Option<usize>,
    #[arg(long, value_enum, default_value = "linear")]
    pub dispersion: DispersionArg,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub spatial: SpatialArg,
    /// Add the mirror packets to the closed form.
    #[arg(long)]
    pub image: bool,
    /// Output CSV; with several times, `_t<i>` is appended to the stem.
    #[arg(long, default_value = "meanfield.csv")]
    pub csv: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long)]
    pub t: f64,
    /// Time step; defaults to the largest stable step.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value = "oracle.csv")]
    pub csv: PathBuf,
}

#[derive(Debug, Args)]
pub struct ResonanceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub v: f64,
    #[arg(long)]
    pub omega_d: Option<f64>,
    /// Second (faster) trajectory for the selectivity check.
    #[arg(long)]
    pub v2: Option<f64>,
    #[arg(long)]
    pub omega_d2: Option<f64>,
    /// Selectivity guard band (frequency units).
    #[arg(long)]
    pub guard: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum MethodArg {
    Exact,
    Perturbative,
    Full,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Mode index; resolved from `--v` when absent.
    #[arg(long)]
    pub alpha: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Values of |g_α| t / ħ (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub gt: Vec<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    /// Neighbouring modes on each side included by `--method full`.
    #[arg(long, default_value_t = 2)]
    pub neighbours: usize,
    #[arg(long, default_value = "evolve.csv")]
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Single,
    TwoLevel,
}

#[derive(Debug, Args)]
pub struct ReducedArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "single")]
    pub model: ModelArg,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
    pub x0_1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub v1: f64,
    #[arg(long, default_value_t = -0.3, allow_hyphen_values = true)]
    pub x0_2: f64,
    #[arg(long, default_value_t = 3.0)]
    pub v2: f64,
    #[arg(long)]
    pub t: f64,
    /// Override |g_1| t / ħ for branch 1.
    #[arg(long)]
    pub gt1: Option<f64>,
    /// Override |g_2| t / ħ for branch 2.
    #[arg(long)]
    pub gt2: Option<f64>,
    #[arg(long, default_value = "reduced.json")]
    pub json: PathBuf,
    /// Optional θ sweep of the reduced populations.
    #[arg(long)]
    pub sweep_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long)]
    pub t1: f64,
    /// Initial positions (comma separated), paired with `--v`.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub x0: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub v: Vec<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Paper-units system used when no configuration file is given:
/// `N = 2001`, `w = 0.01 L`, `g = 1`, `m̃_d = 1`, `ω_d = 10π`.
pub fn default_params() -> SystemParams {
    SystemParams::paper_units(2001, 0.01, 10.0 * PI, 1.0).expect("valid defaults")
}

fn load_params(common: &Common) -> Result<SystemParams, CliError> {
    match &common.params {
        Some(p) => Ok(SystemParams::from_path(p)?),
        None => Ok(default_params()),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        // A pool may already exist when called from tests; the count then stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    configure_threads();
    let argv: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    match execute(cli.command, argv) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, argv: Vec<String>) -> Result<String, CliError> {
    let start = Instant::now();
    match command {
        Command::Modes(a) => cmd_modes(a, argv, start),
        Command::Meanfield(a) => cmd_meanfield(a, argv, start),
        Command::OracleCompare(a) => cmd_oracle(a, argv, start),
        Command::Resonance(a) => cmd_resonance(a, argv, start),
        Command::Evolve(a) => cmd_evolve(a, argv, start),
        Command::ReducedState(a) => cmd_reduced(a, argv, start),
        Command::Regime(a) => cmd_regime(a, argv, start),
    }
}

fn finish(mut manifest: RunManifest, outputs: &[&Path], start: Instant) -> Result<(), CliError> {
    manifest.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    for out in outputs {
        let path = io::manifest_path(out);
        io::write_json(&path, &manifest).map_err(io_err(&path))?;
    }
    Ok(())
}

fn cmd_modes(a: ModesArgs, argv: Vec<String>, start: Instant) -> Result<String, CliError> {
    let params = load_params(&a.common)?;
    let omega_d = a.omega_d.unwrap_or_else(|| params.detector.omega_d());
    let spectrum = ModeSpectrum::new(&params.chain, params.detector.w(), a.y_max);
    let rows = (1..=spectrum.len())
        .map(|alpha| {
            let c = modes::coupling_any(alpha, &params, omega_d)?;
            Ok(vec![
                Cell::from(alpha),
                c.omega.into(),
                c.g_alpha.into(),
                c.f_factor.into(),
                spectrum.is_retained(alpha).into(),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    io::write_csv(&a.csv, &["alpha", "omega", "g_alpha", "f_factor", "retained"], rows).map_err(io_err(&a.csv))?;
    let mut m = RunManifest::new("modes", argv, &params);
    m.tolerances = json!({ "y_max": a.y_max, "omega_d": omega_d });
    finish(m, &[&a.csv], start)?;
    Ok(format!(
        "modes: {} modes, {} retained (y_max = {}), written to {}",
        spectrum.len(),
        spectrum.retained_max(),
        a.y_max,
        a.csv.display()
    ))
}

fn suffixed(path: &Path, i: usize, n: usize) -> PathBuf {
    if n == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_t{i}{ext}"))
}

fn cmd_meanfield(a: MeanfieldArgs, argv: Vec<String>, start: Instant) -> Result<String, CliError> {
    let params = load_params(&a.common)?;
    let route = match a.route {
        RouteArg::Closed => Route::Closed,
        RouteArg::Series => Route::Series,
        RouteArg::Modesum => Route::Modesum,
    };
    let options = MeanfieldOptions {
        alpha_max: a.alpha_max,
        dispersion: match a.dispersion {
            DispersionArg::Linear => Dispersion::Linear,
            DispersionArg::Exact => Dispersion::Exact,
        },
        spatial: match a.spatial {
            SpatialArg::Quadrature => SpatialMethod::Quadrature,
            SpatialArg::ByParts => SpatialMethod::ByParts,
        },
        image: a.image,
        ..MeanfieldOptions::default()
    };
    let traj = Trajectory::new(a.x0, a.v);
    let grid = meanfield::uniform_grid(a.grid, &params);
    let mut outputs = Vec::new();
    let mut summary = Vec::new();
    for (i, &t) in a.t.iter().enumerate() {
        let prof = meanfield::profile(route, &grid, t, &traj, &params, &options)?;
        let rows = prof.grid.iter().enumerate().map(|(j, &x)| {
            let (c, r, l) = match &prof.packets {
                Some(p) => (p[j].comoving, p[j].ripple_right, p[j].ripple_left),
                None => (f64::NAN, f64::NAN, f64::NAN),
            };
            vec![x.into(), prof.values[j].into(), c.into(), r.into(), l.into()]
        });
        let path = suffixed(&a.csv, i, a.t.len());
        io::write_csv(
            &path,
            &["x", "phi_total", "phi_comoving", "phi_ripple_right", "phi_ripple_left"],
            rows,
        )
        .map_err(io_err(&path))?;
        summary.push(format!(
            "t = {t}: peak {:.6e}, constraint ratio {:.3e}",
            prof.peak(),
            prof.constraint.ratio
        ));
        outputs.push(path);
    }
    let mut m = RunManifest::new("meanfield", argv, &params);
    m.tolerances = serde_json::to_value(options).unwrap_or_default();
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    finish(m, &refs, start)?;
    Ok(format!("meanfield ({:?}): {}", route, summary.join("; ")))
}

fn cmd_oracle(a: OracleArgs, argv: Vec<String>, start: Instant) -> Result<String, CliError> {
    let params = load_params(&a.common)?;
    let traj = Trajectory::new(a.x0, a.v);
    traj.validate(&params)?;
    if !(a.t > 0.0 && a.t.is_finite()) {
        return Err(CliError::Validation(format!("t must be positive (got {})", a.t)));
    }
    let limit = discrete::max_step(&params);
    let steps = match a.dt {
        Some(dt) => (a.t / dt).round() as usize,
        None => (a.t / limit).ceil() as usize,
    };
    let dt = a.t / steps.max(1) as f64;
    let init = ChainState::rest(&params, a.x0, 0.0);
    let opts = OracleOptions::prescribed(traj);
    let run = discrete::integrate(&init, &params, dt, steps.max(1), &opts, steps.max(1))?;
    let last = run.last().expect("non-empty run");
    let xs = discrete::site_positions(&params);
    let closed = xs
        .iter()
        .map(|&x| meanfield::meanfield_closed(x, last.t, &traj, &params))
        .collect::<Result<Vec<_>, _>>()?;
    let err = rms_error(&last.phi, &closed);
    let peak = closed.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let rows = xs
        .iter()
        .zip(&last.phi)
        .zip(&closed)
        .map(|((&x, &d), &c)| vec![x.into(), d.into(), c.into()]);
    io::write_csv(&a.csv, &["x", "phi_discrete", "phi_closed"], rows).map_err(io_err(&a.csv))?;
    let mut m = RunManifest::new("oracle-compare", argv, &params);
    m.tolerances = json!({ "dt": dt, "steps": steps, "l2_over_peak": err / peak });
    finish(m, &[&a.csv], start)?;
    Ok(format!(
        "oracle-compare: {steps} steps of dt = {dt:.3e}, RMS error / peak = {:.3e}",
        err / peak
    ))
}

/// Root-mean-square difference.
pub fn rms_error(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()).max(1) as f64;
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt()
}

fn cmd_resonance(a: ResonanceArgs, argv: Vec<String>, start: Instant) -> Result<String, CliError> {
    let params = load_params(&a.common)?;
    let omega_d = a.omega_d.unwrap_or_else(|| params.detector.omega_d());
    let single = modes::resonance_mode(a.v, omega_d, &params)?;
    let coupling = modes::mode_coupling(single.alpha, &params, omega_d)?;
    let pair = match a.v2 {
        Some(v2) => {
            let om2 = a
                .omega_d2
                .or_else(|| params.detector.omegas().get(1).copied())
                .unwrap_or(omega_d);
            Some(modes::resonance_pair(a.v, v2, omega_d, om2, &params, a.guard)?)
        }
        None => None,
    };
    let report = json!({ "resonance": single, "coupling": coupling, "pair": pair });
    let mut summary = format!(
        "resonance: alpha = {} (alpha* = {:.4}), detuning {:.3e}",
        single.alpha, single.alpha_star, single.detuning
    );
    if let Some(p) = &pair {
        summary.push_str(&format!(
            "; pair alpha1 = {}, alpha2 = {}, selectivity {}",
            p.first.alpha,
            p.second.alpha,
            if p.selectivity_violated { "violated" } else { "clear" }
        ));
    }
    if let Some(path) = &a.json {
        io::write_json(path, &report).map_err(io_err(path))?;
        finish(RunManifest::new("resonance", argv, &params), &[path], start)?;
    } else {
        summary.push('\n');
        summary.push_str(&serde_json::to_string_pretty(&report).unwrap_or_default());
    }
    Ok(summary)
}

fn cmd_evolve(a: EvolveArgs, argv: Vec<String>, start: Instant) -> Result<String, CliError> {
    let params = load_params(&a.common)?;
    let omega_d = params.detector.omega_d();
    let alpha = match (a.alpha, a.v) {
        (Some(alpha), _) => alpha,
        (None, Some(v)) => modes::resonance_mode(v, omega_d, &params)?.alpha,
        (None, None) => return Err(CliError::Validation("give --alpha or --v".into())),
    };
    let coupling = modes::mode_coupling(alpha, &params, omega_d)?;
    let g = coupling.g_alpha;
    let hbar = params.hbar();
    if g == 0.0 {
        return Err(CliError::Validation("coupling vanishes; no dynamics".into()));
    }

    let space = pair_space(MODE, 1);
    let h = build_ndpa(g, &space, MODE, DETECTOR)?;
    let prop = Propagator::new(&h, hbar)?;
    let vac = QuantumState::vacuum(space.clone());
    let (i_vac, i_exc) = (space.index(&[0, 0])?, space.index(&[1, 1])?);

    let mut rows = Vec::new();
    for &gt in &a.gt {
        let t = gt * hbar / g.abs();
        let (p, vac_amp, exc_amp) = match a.method {
            MethodArg::Exact => {
                let psi = prop.apply(&vac, t)?;
                (psi.probability(i_exc), psi.amplitude(i_vac), psi.amplitude(i_exc))
            }
            MethodArg::Perturbative => {
                let psi = quantum::evolve_perturbative(g, t, hbar, PerturbativeGuard::default())?;
                let raw = first_order_amplitude(g, t, hbar);
                (psi.probability(i_exc), num_complex::Complex64::new(1.0, 0.0), raw)
            }
            MethodArg::Full => {
                let v = a.v.ok_or_else(|| CliError::Validation("--method full needs --v".into()))?;
                let lo = alpha.saturating_sub(a.neighbours).max(1);
                let hi = alpha + a.neighbours;
                let set: Vec<usize> = (lo..=hi).filter(|&m| m <= params.chain.mode_count()).collect();
                let run = quantum::evolve_full(&params, Trajectory::new(a.x0, v), &set, alpha, t, None, &FullOptions::default())?;
                let ex = run
                    .state
                    .space()
                    .index_of(&[(quantum::mode_label(alpha).as_str(), 1), (DETECTOR, 1)])?;
                (run.pair_probability, run.state.amplitude(0), run.state.amplitude(ex))
            }
        };
        rows.push(vec![
            gt.into(),
            t.into(),
            p.into(),
            vac_amp.re.into(),
            vac_amp.im.into(),
            exc_amp.re.into(),
            exc_amp.im.into(),
        ]);
    }
    io::write_csv(
        &a.csv,
        &["gt", "t", "p_excite", "amp_vacuum_re", "amp_vacuum_im", "amp_excited_re", "amp_excited_im"],
        rows,
    )
    .map_err(io_err(&a.csv))?;
    let mut m = RunManifest::new("evolve", argv, &params);
    m.tolerances = json!({ "method": format!("{:?}", a.method), "alpha": alpha, "g_alpha": g });
    finish(m, &[&a.csv], start)?;
    Ok(format!(
        "evolve: alpha = {alpha}, g_alpha = {g:.6e}, {} points written to {}",
        a.gt.len(),
        a.csv.display()
    ))
}

#[derive(Debug, Serialize)]
struct ReducedReport {
    model: DetectorModel,
    theta: f64,
    phi: f64,
    t: f64,
    alpha: [usize; 2],
    g: [f64; 2],
    normalization: f64,
    chain_labels: Vec<String>,
    chain_populations: Vec<f64>,
    detector_labels: Vec<String>,
    detector_populations: Vec<f64>,
    trace_distances: Vec<superpose::Comparison>,
}

fn cmd_reduced(a: ReducedArgs, argv: Vec<String>, start: Instant) -> Result<String, CliError> {
    let params = load_params(&a.common)?;
    let hbar = params.hbar();
    let model = match a.model {
        ModelArg::Single => DetectorModel::Single,
        ModelArg::TwoLevel => DetectorModel::TwoLevel,
    };
    let trajs = [Trajectory::new(a.x0_1, a.v1), Trajectory::new(a.x0_2, a.v2)];
    for tr in &trajs {
        tr.validate(&params)?;
    }
    let mut spec = BranchSpec::from_params(&params, trajs, a.theta, a.phi, model)?;
    if a.t <= 0.0 {
        return Err(CliError::Validation(format!("t must be positive (got {})", a.t)));
    }
    for (b, gt) in spec.branches.iter_mut().zip([a.gt1, a.gt2]) {
        if let Some(gt) = gt {
            b.g = -gt.abs() * hbar / a.t;
        }
    }
    let guard = PerturbativeGuard::default();
    let report_for = |spec: &BranchSpec| -> Result<(ReducedReport, superpose::BranchedState), CliError> {
        let st = superpose::evolve_superposed(spec, a.t, hbar, guard)?;
        let rho = superpose::density_matrix(&st);
        let alphas = [spec.branches[0].alpha, spec.branches[1].alpha];
        let chain = superpose::reduce_chain(&rho, &alphas)?;
        let det = superpose::reduce_detector(&rho, model)?;

        let localized = [spec.with_angles(0.0, 0.0)?, spec.with_angles(PI / 2.0, 0.0)?]
            .into_iter()
            .map(|s| superpose::evolve_superposed(&s, a.t, hbar, guard).map(|st| superpose::density_matrix(&st)))
            .collect::<Result<Vec<_>, _>>()?;
        let mixture = superpose::incoherent_mixture(&st)?;
        let chain_loc = [
            superpose::reduce_chain(&localized[0], &alphas)?,
            superpose::reduce_chain(&localized[1], &alphas)?,
        ];
        let chain_mix = superpose::reduce_chain(&mixture, &alphas)?;
        let det_mix = superpose::reduce_detector(&mixture, model)?;
        let mut comparisons = superpose::discriminate(
            &[
                ("chain_superposed", &chain),
                ("chain_localized_1", &chain_loc[0]),
                ("chain_localized_2", &chain_loc[1]),
                ("chain_mixture", &chain_mix),
            ],
            1e-10,
        )?
        .comparisons;
        comparisons.extend(
            superpose::discriminate(&[("detector_superposed", &det), ("detector_mixture", &det_mix)], 1e-10)?
                .comparisons,
        );

        let basis_labels = |rho: &quantum::DensityMatrix| -> Vec<String> {
            (0..rho.dim())
                .map(|i| {
                    let d = rho.space().digits(i);
                    d.iter().map(|x| x.to_string()).collect::<String>()
                })
                .collect()
        };
        Ok((
            ReducedReport {
                model,
                theta: spec.theta,
                phi: spec.phi,
                t: a.t,
                alpha: alphas,
                g: [spec.branches[0].g, spec.branches[1].g],
                normalization: st.normalization,
                chain_labels: basis_labels(&chain),
                chain_populations: chain.populations(),
                detector_labels: basis_labels(&det),
                detector_populations: det.populations(),
                trace_distances: comparisons,
            },
            st,
        ))
    };

    let (report, _) = report_for(&spec)?;
    io::write_json(&a.json, &report).map_err(io_err(&a.json))?;
    let mut outputs: Vec<PathBuf> = vec![a.json.clone()];
    if let Some(path) = &a.sweep_csv {
        let rows = (0..=32)
            .map(|i| {
                let theta = PI / 2.0 * i as f64 / 32.0;
                let s = spec.with_angles(theta, spec.phi)?;
                let st = superpose::evolve_superposed(&s, a.t, hbar, guard)?;
                let rho = superpose::density_matrix(&st);
                let chain = superpose::reduce_chain(&rho, &[s.branches[0].alpha, s.branches[1].alpha])?;
                let l = s.mode_labels();
                Ok(vec![
                    theta.into(),
                    chain.population(&[])?.into(),
                    chain.population(&[(l[0].as_str(), 1)])?.into(),
                    chain.population(&[(l[1].as_str(), 1)])?.into(),
                ])
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        io::write_csv(path, &["theta", "p_00", "p_10", "p_01"], rows).map_err(io_err(path))?;
        outputs.push(path.clone());
    }
    let mut m = RunManifest::new("reduced-state", argv, &params);
    m.tolerances = json!({ "perturbative_guard": guard.0, "distinguishable_above": 1e-10 });
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    finish(m, &refs, start)?;
    Ok(format!(
        "reduced-state: chain populations {:?}, detector populations {:?}",
        report.chain_populations, report.detector_populations
    ))
}

fn cmd_regime(a: RegimeArgs, argv: Vec<String>, start: Instant) -> Result<String, CliError> {
    let params = load_params(&a.common)?;
    if !(a.t0.is_finite() && a.t1.is_finite()) {
        return Err(CliError::Validation("window must be finite".into()));
    }
    let x0s: Vec<f64> = if a.x0.len() == 1 {
        vec![a.x0[0]; a.v.len()]
    } else {
        a.x0.clone()
    };
    if x0s.len() != a.v.len() {
        return Err(CliError::Validation("--x0 and --v lists differ in length".into()));
    }
    let trajs: Vec<Trajectory> = x0s.iter().zip(&a.v).map(|(&x, &v)| Trajectory::new(x, v)).collect();
    let report = params::regime_check(&params, (a.t0, a.t1), &trajs, RegimeThresholds::default());
    let verdict = if report.all_pass() { "all pass" } else { "some flags fail" };
    let mut summary = format!("regime: {verdict}");
    match &a.json {
        Some(path) => {
            io::write_json(path, &report).map_err(io_err(path))?;
            finish(RunManifest::new("regime", argv, &params), &[path], start)?;
        }
        None => {
            summary.push('\n');
            summary.push_str(&serde_json::to_string_pretty(&report).unwrap_or_default());
        }
    }
    Ok(summary)
}
