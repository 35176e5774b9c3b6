//! Classical mean chain displacement driven by a uniformly moving detector.
//!
//! Three routes are provided: a mode sum with both integrals done by
//! adaptive quadrature, the same mode sum with the time integral done in
//! closed form, and the three-packet closed form valid on an infinite line.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::modes::{self, ModeSpectrum, ModesError};
use crate::params::SystemParams;
use crate::quad::{QuadError, Quadrature};
use crate::specfun::{self, kernel_h, kernel_h_d2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanfieldError {
    #[error("|v| = c_s is a pole of the closed form; use the mode-sum route")]
    Pole { v: f64 },
    #[error("time must be finite and non-negative (got {0})")]
    Time(f64),
    #[error("initial position {x0} must satisfy |x0| < L/2 = {half}")]
    Trajectory { x0: f64, half: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("alpha_max = {alpha_max} exceeds the {modes} chain modes")]
    AlphaMax { alpha_max: usize, modes: usize },
    #[error("quadrature for mode {alpha} did not converge: {source}")]
    Quadrature {
        alpha: usize,
        #[source]
        source: QuadError,
    },
    #[error(transparent)]
    Modes(#[from] ModesError),
}

/// Prescribed detector path `x̄_d(t) = x₀ + v t`, switched on at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Trajectory {
    pub x0: f64,
    pub v: f64,
}

impl Trajectory {
    pub fn new(x0: f64, v: f64) -> Self {
        Self { x0, v }
    }

    pub fn position(&self, t: f64) -> f64 {
        self.x0 + self.v * t
    }

    pub fn validate(&self, params: &SystemParams) -> Result<(), MeanfieldError> {
        let half = 0.5 * params.chain.length();
        if self.x0.abs() < half && self.v.is_finite() {
            Ok(())
        } else {
            Err(MeanfieldError::Trajectory { x0: self.x0, half })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Closed,
    Series,
    Modesum,
}

/// Dispersion used by the analytic-time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dispersion {
    /// Wavenumber `Ω_α/c_s` and long-wavelength mode functions, so every
    /// mode travels at `c_s`; the three-cosine form.
    #[default]
    Linear,
    /// Wavenumber `απ/L` with the lattice `Ω_α`; exact driven-oscillator solution.
    Exact,
}

/// How the mode-sum route obtains `∫ ∂²h/∂x² u_α dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialMethod {
    /// Adaptive quadrature over the finite chain.
    #[default]
    Quadrature,
    /// Integration by parts on the infinite line, `−k² (2/w²) f(kw) √(2/L) cos(k(x_d + L/2))`.
    ByParts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanfieldOptions {
    /// Highest mode kept; `None` keeps the cutoff-retained set.
    pub alpha_max: Option<usize>,
    pub dispersion: Dispersion,
    pub spatial: SpatialMethod,
    /// Adds the mirror packets at `−L − x_c` and `L − x_c` to the closed form.
    pub image: bool,
    pub rel_tol: f64,
    /// Absolute tolerance of inner integrals relative to their peak scale.
    pub abs_tol_factor: f64,
}

impl Default for MeanfieldOptions {
    fn default() -> Self {
        Self {
            alpha_max: None,
            dispersion: Dispersion::Linear,
            spatial: SpatialMethod::Quadrature,
            image: false,
            rel_tol: 1e-10,
            abs_tol_factor: 1e-9,
        }
    }
}

fn check_time(t: f64) -> Result<(), MeanfieldError> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(MeanfieldError::Time(t))
    }
}

fn resolve_alpha_max(params: &SystemParams, alpha_max: Option<usize>) -> Result<usize, MeanfieldError> {
    let modes = params.chain.mode_count();
    match alpha_max {
        Some(a) if a > modes => Err(MeanfieldError::AlphaMax { alpha_max: a, modes }),
        Some(a) => Ok(a),
        None => Ok(ModeSpectrum::from_params(params).retained_max()),
    }
}

/// `g a_d / ρ_c`.
fn drive_strength(params: &SystemParams) -> f64 {
    params.coupling.g() * params.detector.a_d() / params.chain.density()
}

// ---------------------------------------------------------------------------
// Closed form
// ---------------------------------------------------------------------------

/// The closed-form field split into its travelling packets.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Packets {
    /// Packet riding with the detector at `x̄_d(t)`.
    pub comoving: f64,
    /// Sound packet leaving at `x₀ + c_s t`.
    pub ripple_right: f64,
    /// Sound packet leaving at `x₀ − c_s t`.
    pub ripple_left: f64,
    /// Mirror-packet correction; zero unless requested.
    pub image: f64,
}

impl Packets {
    pub fn total(&self) -> f64 {
        self.comoving + self.ripple_right + self.ripple_left + self.image
    }
}

/// Closed-form mean field at `(x, t)`.
pub fn meanfield_closed(
    x: f64,
    t: f64,
    traj: &Trajectory,
    params: &SystemParams,
) -> Result<f64, MeanfieldError> {
    closed_packets(x, t, traj, params, false).map(|p| p.total())
}

pub fn closed_packets(
    x: f64,
    t: f64,
    traj: &Trajectory,
    params: &SystemParams,
    image: bool,
) -> Result<Packets, MeanfieldError> {
    check_time(t)?;
    let c = params.chain.sound_speed();
    let v = traj.v;
    if (v.abs() - c).abs() <= 1e-12 * c {
        return Err(MeanfieldError::Pole { v });
    }
    let a = drive_strength(params);
    let w = params.detector.w();
    let l = params.chain.length();

    let centers = [traj.position(t), traj.x0 + c * t, traj.x0 - c * t];
    let coeffs = [
        a / (c * c - v * v),
        -a / (2.0 * c * (c - v)),
        -a / (2.0 * c * (c + v)),
    ];
    let [comoving, ripple_right, ripple_left] =
        [0, 1, 2].map(|i| coeffs[i] * kernel_h(x, centers[i], w));
    let image = if image {
        centers
            .iter()
            .zip(coeffs)
            .map(|(&xc, cf)| cf * (kernel_h(x, -l - xc, w) + kernel_h(x, l - xc, w)))
            .sum()
    } else {
        0.0
    };
    Ok(Packets {
        comoving,
        ripple_right,
        ripple_left,
        image,
    })
}

// ---------------------------------------------------------------------------
// Mode representations
// ---------------------------------------------------------------------------

/// Field as `Σ_α q_α(t) u_α(x)` for a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeAmplitudes {
    /// Wavenumber of each mode's spatial profile, `α = 1..`.
    pub k: Vec<f64>,
    pub q: Vec<f64>,
    pub length: f64,
}

impl ModeAmplitudes {
    pub fn alpha_max(&self) -> usize {
        self.q.len()
    }

    /// `Σ q_α √(2/L) cos(k_α (x + L/2))`, summed in increasing α.
    pub fn field(&self, x: f64) -> f64 {
        let half = 0.5 * self.length;
        let norm = (2.0 / self.length).sqrt();
        self.k
            .iter()
            .zip(&self.q)
            .map(|(&k, &q)| q * norm * (k * (x + half)).cos())
            .sum()
    }
}

/// Response `y(t)` of `ÿ + Ω² y = cos(θ₀ + κ t)` from rest.
fn driven_response(omega: f64, kappa: f64, theta0: f64, t: f64) -> f64 {
    let denom = omega * omega - kappa * kappa;
    if denom.abs() > 1e-9 * omega * omega {
        ((theta0 + kappa * t).cos() - theta0.cos() * (omega * t).cos()
            + kappa / omega * theta0.sin() * (omega * t).sin())
            / denom
    } else {
        // Resonant limit κ = ±Ω.
        let s = kappa.signum();
        0.5 * t * (s * omega * t + theta0).sin() / omega
            - s * theta0.sin() * (omega * t).sin() / (2.0 * omega * omega)
    }
}

/// Mode amplitudes of the analytic-time series.
pub fn series_amplitudes(
    t: f64,
    traj: &Trajectory,
    params: &SystemParams,
    alpha_max: Option<usize>,
    dispersion: Dispersion,
) -> Result<ModeAmplitudes, MeanfieldError> {
    check_time(t)?;
    traj.validate(params)?;
    let alpha_max = resolve_alpha_max(params, alpha_max)?;
    let chain = &params.chain;
    let l = chain.length();
    let c = chain.sound_speed();
    let w = params.detector.w();
    let a = drive_strength(params);
    let norm = (2.0 / l).sqrt();

    let rows: Vec<(f64, f64)> = (1..=alpha_max)
        .map(|alpha| {
            let omega = modes::mode_frequency(alpha, chain)?;
            let k = match dispersion {
                Dispersion::Linear => omega / c,
                Dispersion::Exact => alpha as f64 * PI / l,
            };
            let omega_eff = match dispersion {
                Dispersion::Linear => c * k,
                Dispersion::Exact => omega,
            };
            let drive = (2.0 / (w * w)) * norm * k * k * specfun::cutoff_f(k * w).map_err(ModesError::from)?;
            let theta0 = k * (traj.x0 + 0.5 * l);
            let y = driven_response(omega_eff, k * traj.v, theta0, t);
            Ok((k, a * drive * y))
        })
        .collect::<Result<_, MeanfieldError>>()?;
    let (k, q) = rows.into_iter().unzip();
    Ok(ModeAmplitudes { k, q, length: l })
}

/// Analytic-time series at a single point.
pub fn meanfield_series(
    x: f64,
    t: f64,
    traj: &Trajectory,
    params: &SystemParams,
    alpha_max: Option<usize>,
) -> Result<f64, MeanfieldError> {
    check_point(x, params)?;
    Ok(series_amplitudes(t, traj, params, alpha_max, Dispersion::Linear)?.field(x))
}

/// `∫ ∂²h/∂x² u_α dx` for the detector at `x_d`.
fn spatial_coefficient(
    alpha: usize,
    x_d: f64,
    params: &SystemParams,
    method: SpatialMethod,
    quad: &Quadrature,
) -> Result<f64, MeanfieldError> {
    let l = params.chain.length();
    let half = 0.5 * l;
    let w = params.detector.w();
    let k = alpha as f64 * PI / l;
    let norm = (2.0 / l).sqrt();
    match method {
        SpatialMethod::ByParts => {
            let f = specfun::cutoff_f(k * w).map_err(ModesError::from)?;
            Ok(-k * k * (2.0 / (w * w)) * f * norm * (k * (x_d + half)).cos())
        }
        SpatialMethod::Quadrature => {
            let mut points = vec![-half];
            for m in [-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0] {
                let p = x_d + m * w;
                if p > -half && p < half {
                    points.push(p);
                }
            }
            points.push(half);
            let integrand = |x: f64| kernel_h_d2(x, x_d, w) * norm * (k * (x + half)).cos();
            quad.integrate_with_breaks(integrand, &points)
                .map(|r| r.value)
                .map_err(|source| MeanfieldError::Quadrature { alpha, source })
        }
    }
}

/// Mode amplitudes with both integrals evaluated by quadrature. Modes are
/// processed in parallel; the result does not depend on the thread count.
pub fn modesum_amplitudes(
    t: f64,
    traj: &Trajectory,
    params: &SystemParams,
    options: &MeanfieldOptions,
) -> Result<ModeAmplitudes, MeanfieldError> {
    check_time(t)?;
    traj.validate(params)?;
    let alpha_max = resolve_alpha_max(params, options.alpha_max)?;
    let chain = &params.chain;
    let l = chain.length();
    let w = params.detector.w();
    let a = drive_strength(params);
    let norm = (2.0 / l).sqrt();

    let rows: Vec<(f64, f64)> = (1..=alpha_max)
        .into_par_iter()
        .map(|alpha| -> Result<(f64, f64), MeanfieldError> {
            let omega = modes::mode_frequency(alpha, chain)?;
            let k = alpha as f64 * PI / l;
            if t == 0.0 {
                return Ok((k, 0.0));
            }
            let peak = k * k * (2.0 / (w * w)) * norm;
            let inner = Quadrature::new(options.abs_tol_factor * peak, options.rel_tol);
            let outer = Quadrature::new(options.abs_tol_factor * peak * t / omega, options.rel_tol)
                .with_max_intervals(4000);
            // Split the time axis into quarter periods so every panel is smooth.
            let panels = ((4.0 * omega * t / (2.0 * PI)).ceil() as usize).max(1);
            let breaks: Vec<f64> = (0..=panels).map(|i| t * i as f64 / panels as f64).collect();

            let failure = std::cell::Cell::new(None);
            let integrand = |tp: f64| {
                match spatial_coefficient(alpha, traj.position(tp), params, options.spatial, &inner) {
                    Ok(s) => (omega * (t - tp)).sin() / omega * s,
                    Err(e) => {
                        failure.set(Some(e));
                        f64::NAN
                    }
                }
            };
            let result = outer.integrate_with_breaks(integrand, &breaks);
            if let Some(e) = failure.take() {
                return Err(e);
            }
            let value = result.map_err(|source| MeanfieldError::Quadrature { alpha, source })?.value;
            Ok((k, -a * value))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (k, q) = rows.into_iter().unzip();
    Ok(ModeAmplitudes { k, q, length: l })
}

/// Quadrature mode sum at a single point.
pub fn meanfield_modesum(
    x: f64,
    t: f64,
    traj: &Trajectory,
    params: &SystemParams,
    alpha_max: Option<usize>,
) -> Result<f64, MeanfieldError> {
    check_point(x, params)?;
    let options = MeanfieldOptions {
        alpha_max,
        ..MeanfieldOptions::default()
    };
    Ok(modesum_amplitudes(t, traj, params, &options)?.field(x))
}

fn check_point(x: f64, params: &SystemParams) -> Result<(), MeanfieldError> {
    let half = 0.5 * params.chain.length();
    if x.abs() <= half * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(MeanfieldError::Grid(format!("x = {x} outside [-{half}, {half}]")))
    }
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

/// Trapezoid `∫φ̄ dx` against `∫|φ̄| dx` on the profile grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub integral: f64,
    pub l1: f64,
    /// `|∫φ̄| / ∫|φ̄|`, zero for an identically vanishing field.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldProfile {
    pub route: Route,
    pub t: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Packet decomposition, closed route only.
    pub packets: Option<Vec<Packets>>,
    pub constraint: ConstraintReport,
}

impl FieldProfile {
    /// Largest `|φ̄|` on the grid.
    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `n` evenly spaced points spanning the chain, ends included.
pub fn uniform_grid(n: usize, params: &SystemParams) -> Vec<f64> {
    let half = 0.5 * params.chain.length();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| -half + params.chain.length() * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn validate_grid(grid: &[f64], params: &SystemParams) -> Result<(), MeanfieldError> {
    if grid.len() < 2 {
        return Err(MeanfieldError::Grid("need at least two points".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(MeanfieldError::Grid("non-finite position".into()));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(MeanfieldError::Grid("positions must be strictly increasing".into()));
    }
    grid.iter().try_for_each(|&x| check_point(x, params))
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

pub fn constraint_report(grid: &[f64], values: &[f64]) -> ConstraintReport {
    let integral = trapezoid(grid, values);
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let l1 = trapezoid(grid, &abs);
    let ratio = if l1 > 0.0 { integral.abs() / l1 } else { 0.0 };
    ConstraintReport { integral, l1, ratio }
}

/// Evaluates one route on a grid.
pub fn profile(
    route: Route,
    grid: &[f64],
    t: f64,
    traj: &Trajectory,
    params: &SystemParams,
    options: &MeanfieldOptions,
) -> Result<FieldProfile, MeanfieldError> {
    validate_grid(grid, params)?;
    check_time(t)?;
    traj.validate(params)?;
    let (values, packets): (Vec<f64>, _) = match route {
        Route::Closed => {
            let packets = grid
                .par_iter()
                .map(|&x| closed_packets(x, t, traj, params, options.image))
                .collect::<Result<Vec<_>, _>>()?;
            (packets.iter().map(Packets::total).collect(), Some(packets))
        }
        Route::Series | Route::Modesum => {
            let amps = if route == Route::Series {
                series_amplitudes(t, traj, params, options.alpha_max, options.dispersion)?
            } else {
                modesum_amplitudes(t, traj, params, options)?
            };
            (grid.par_iter().map(|&x| amps.field(x)).collect(), None)
        }
    };
    if let Some(i) = values.iter().position(|v: &f64| !v.is_finite()) {
        return Err(MeanfieldError::Grid(format!("non-finite field at x = {}", grid[i])));
    }
    let constraint = constraint_report(grid, &values);
    Ok(FieldProfile {
        route,
        t,
        grid: grid.to_vec(),
        values,
        packets,
        constraint,
    })
}
