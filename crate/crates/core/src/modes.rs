//! Normal modes of the free-ended chain, their couplings to the detector and
//! the supersonic resonance condition.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::params::{ChainParams, SystemParams};
use crate::specfun::{self, SpecfunError};

/// Modes with `Ω_α w / c_s` above this are dropped (`f(10) < 10⁻³`).
pub const DEFAULT_Y_MAX: f64 = 10.0;

/// Default selectivity guard band, as a fraction of the fundamental `π c_s / L`.
pub const DEFAULT_GUARD_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModesError {
    #[error("mode index {alpha} outside 1..={max}")]
    OutOfRange { alpha: usize, max: usize },
    #[error("mode {alpha} is truncated by the cutoff (Ω w/c_s = {y:.4} > {y_max})")]
    Truncated { alpha: usize, y: f64, y_max: f64 },
    #[error("position {x} lies outside the chain [-{half}, {half}]")]
    Position { x: f64, half: f64 },
    #[error("subsonic: no Ginzburg resonance for |v| = {v} <= c_s = {c_s}")]
    Subsonic { v: f64, c_s: f64 },
    #[error("detector frequency must be positive (got {0})")]
    DetectorFrequency(f64),
    #[error("velocities must satisfy c_s < v1 < v2 (got v1 = {v1}, v2 = {v2})")]
    VelocityOrder { v1: f64, v2: f64 },
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

fn check_index(alpha: usize, chain: &ChainParams) -> Result<(), ModesError> {
    let max = chain.mode_count();
    if alpha == 0 || alpha > max {
        Err(ModesError::OutOfRange { alpha, max })
    } else {
        Ok(())
    }
}

/// `Ω_α = 2√(k_c/m_c) sin(απ a_c / 2L)`, no small-angle approximation.
pub fn mode_frequency(alpha: usize, chain: &ChainParams) -> Result<f64, ModesError> {
    check_index(alpha, chain)?;
    Ok(frequency_unchecked(alpha, chain))
}

fn frequency_unchecked(alpha: usize, chain: &ChainParams) -> f64 {
    chain.omega_max() * (alpha as f64 * PI * chain.a_c() / (2.0 * chain.length())).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeShape {
    /// `√(2/L) cos[απ(x + L/2)/L]`.
    #[default]
    Exact,
    /// `√(2/L) cos[Ω_α (x + L/2)/c_s]`, the long-wavelength form.
    LongWavelength,
}

/// Normalized cosine eigenfunction `u_α(x)` of the free-ended chain.
pub fn mode_function(alpha: usize, x: f64, chain: &ChainParams) -> Result<f64, ModesError> {
    mode_function_with(alpha, x, chain, ModeShape::Exact)
}

pub fn mode_function_with(
    alpha: usize,
    x: f64,
    chain: &ChainParams,
    shape: ModeShape,
) -> Result<f64, ModesError> {
    check_index(alpha, chain)?;
    let l = chain.length();
    let half = 0.5 * l;
    if !(x.abs() <= half * (1.0 + 1e-12)) {
        return Err(ModesError::Position { x, half });
    }
    let k = match shape {
        ModeShape::Exact => alpha as f64 * PI / l,
        ModeShape::LongWavelength => frequency_unchecked(alpha, chain) / chain.sound_speed(),
    };
    Ok((2.0 / l).sqrt() * (k * (x + half)).cos())
}

/// Mode frequencies `α = 1..N−1` plus the cutoff-retained prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSpectrum {
    omegas: Vec<f64>,
    retained: usize,
    y_max: f64,
}

impl ModeSpectrum {
    pub fn new(chain: &ChainParams, w: f64, y_max: f64) -> Self {
        let scale = w / chain.sound_speed();
        let omegas: Vec<f64> = (1..=chain.mode_count())
            .map(|a| frequency_unchecked(a, chain))
            .collect();
        // Ω_α is increasing, so the retained set is a prefix.
        let retained = omegas.partition_point(|om| om * scale <= y_max);
        Self {
            omegas,
            retained,
            y_max,
        }
    }

    pub fn from_params(params: &SystemParams) -> Self {
        Self::new(&params.chain, params.detector.w(), DEFAULT_Y_MAX)
    }

    /// Number of modes, `N − 1`.
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// `Ω_α`, 1-based.
    pub fn omega(&self, alpha: usize) -> Option<f64> {
        alpha.checked_sub(1).and_then(|i| self.omegas.get(i)).copied()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Largest retained index (0 if none is retained).
    pub fn retained_max(&self) -> usize {
        self.retained
    }

    pub fn is_retained(&self, alpha: usize) -> bool {
        alpha >= 1 && alpha <= self.retained
    }

    pub fn retained(&self) -> impl Iterator<Item = usize> {
        1..=self.retained
    }
}

/// Renormalized mode–detector coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCoupling {
    pub alpha: usize,
    pub omega: f64,
    /// Signed coupling (energy).
    pub g_alpha: f64,
    pub f_factor: f64,
    pub omega_d: f64,
}

/// Coupling prefactor `(g ℏ Ω/(w² c_s²)) √(2Ω/(ρ_c L m̃_d ω_d))`, i.e. `|g_α|`
/// with the cutoff factor set to one.
pub fn coupling_prefactor(omega: f64, params: &SystemParams, omega_d: f64) -> f64 {
    let chain = &params.chain;
    let det = &params.detector;
    let w = det.w();
    let c = chain.sound_speed();
    params.coupling.g() * params.hbar() * omega / (w * w * c * c)
        * (2.0 * omega / (chain.density() * chain.length() * det.reduced_mass() * omega_d)).sqrt()
}

/// Signed `g_α` for a retained mode.
pub fn mode_coupling(
    alpha: usize,
    params: &SystemParams,
    omega_d: f64,
) -> Result<ModeCoupling, ModesError> {
    mode_coupling_with(alpha, params, omega_d, DEFAULT_Y_MAX)
}

pub fn mode_coupling_with(
    alpha: usize,
    params: &SystemParams,
    omega_d: f64,
    y_max: f64,
) -> Result<ModeCoupling, ModesError> {
    let c = coupling_any(alpha, params, omega_d)?;
    let y = c.omega * params.detector.w() / params.chain.sound_speed();
    if y > y_max {
        return Err(ModesError::Truncated { alpha, y, y_max });
    }
    Ok(c)
}

/// `g_α` without the cutoff-retention check; for tabulating the whole spectrum.
pub fn coupling_any(
    alpha: usize,
    params: &SystemParams,
    omega_d: f64,
) -> Result<ModeCoupling, ModesError> {
    if !(omega_d > 0.0) {
        return Err(ModesError::DetectorFrequency(omega_d));
    }
    let omega = mode_frequency(alpha, &params.chain)?;
    let y = omega * params.detector.w() / params.chain.sound_speed();
    let f_factor = specfun::cutoff_f(y)?;
    Ok(ModeCoupling {
        alpha,
        omega,
        g_alpha: -coupling_prefactor(omega, params, omega_d) * f_factor,
        f_factor,
        omega_d,
    })
}

/// Resonant mode for one (v, ω_d) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub alpha: usize,
    /// Continuous solution `α* = Ω* L / (π c_s)`.
    pub alpha_star: f64,
    /// `Ω* = ω_d c_s / (v − c_s)`.
    pub omega_star: f64,
    /// `|v Ω_α/c_s − Ω_α − ω_d|` with the exact dispersion.
    pub detuning: f64,
}

/// `|v Ω_α/c_s − Ω_α − ω_d|` with the exact lattice dispersion.
pub fn detuning(alpha: usize, v: f64, omega_d: f64, chain: &ChainParams) -> Result<f64, ModesError> {
    let om = mode_frequency(alpha, chain)?;
    Ok((v * om / chain.sound_speed() - om - omega_d).abs())
}

/// Solves the resonance condition in the linear-dispersion regime and rounds
/// to the nearest mode. `v` is the speed (its sign is ignored).
pub fn resonance_mode(v: f64, omega_d: f64, params: &SystemParams) -> Result<Resonance, ModesError> {
    let chain = &params.chain;
    let c = chain.sound_speed();
    let speed = v.abs();
    if !(speed > c) {
        return Err(ModesError::Subsonic { v: speed, c_s: c });
    }
    if !(omega_d > 0.0) {
        return Err(ModesError::DetectorFrequency(omega_d));
    }
    let omega_star = omega_d * c / (speed - c);
    let alpha_star = omega_star * chain.length() / (PI * c);
    let alpha = (alpha_star.round() as usize).max(1);
    check_index(alpha, chain)?;
    let omega = frequency_unchecked(alpha, chain);
    let y = omega * params.detector.w() / c;
    if y > DEFAULT_Y_MAX {
        return Err(ModesError::Truncated {
            alpha,
            y,
            y_max: DEFAULT_Y_MAX,
        });
    }
    Ok(Resonance {
        alpha,
        alpha_star,
        omega_star,
        detuning: detuning(alpha, speed, omega_d, chain)?,
    })
}

/// Detuning of one velocity / frequency combination at one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossDetuning {
    pub v: f64,
    pub omega_d: f64,
    pub alpha: usize,
    pub detuning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonancePair {
    pub first: Resonance,
    pub second: Resonance,
    /// `(v₁, ω_d2)` and `(v₂, ω_d1)`, each at `α₁` and `α₂`.
    pub cross: [CrossDetuning; 4],
    /// Closest approach of either cross condition over all retained modes.
    pub cross_scan_min: CrossDetuning,
    pub guard: f64,
    pub same_mode: bool,
    pub selectivity_violated: bool,
}

/// Resonant modes for two trajectories with distinct internal frequencies.
/// `guard` is the minimum acceptable cross detuning; `None` uses
/// [`DEFAULT_GUARD_FRACTION`] of the fundamental.
pub fn resonance_pair(
    v1: f64,
    v2: f64,
    omega_d1: f64,
    omega_d2: f64,
    params: &SystemParams,
    guard: Option<f64>,
) -> Result<ResonancePair, ModesError> {
    let chain = &params.chain;
    let c = chain.sound_speed();
    if !(c < v1 && v1 < v2) {
        return Err(ModesError::VelocityOrder { v1, v2 });
    }
    let first = resonance_mode(v1, omega_d1, params)?;
    let second = resonance_mode(v2, omega_d2, params)?;
    let guard = guard.unwrap_or(DEFAULT_GUARD_FRACTION * PI * c / chain.length());

    let at = |v: f64, om: f64, alpha: usize| -> Result<CrossDetuning, ModesError> {
        Ok(CrossDetuning {
            v,
            omega_d: om,
            alpha,
            detuning: detuning(alpha, v, om, chain)?,
        })
    };
    let cross = [
        at(v1, omega_d2, first.alpha)?,
        at(v1, omega_d2, second.alpha)?,
        at(v2, omega_d1, first.alpha)?,
        at(v2, omega_d1, second.alpha)?,
    ];

    let spectrum = ModeSpectrum::from_params(params);
    let mut scan_min = cross[0];
    for alpha in spectrum.retained() {
        for (v, om) in [(v1, omega_d2), (v2, omega_d1)] {
            let d = at(v, om, alpha)?;
            if d.detuning < scan_min.detuning {
                scan_min = d;
            }
        }
    }

    let same_mode = first.alpha == second.alpha;
    Ok(ResonancePair {
        first,
        second,
        cross,
        cross_scan_min: scan_min,
        guard,
        same_mode,
        selectivity_violated: same_mode || scan_min.detuning < guard,
    })
}
