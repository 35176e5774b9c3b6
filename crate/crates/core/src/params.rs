//! Physical parameters of the chain, the detector and their coupling, the
//! JSON configuration they are built from, and the regime diagnostics that
//! tell whether the continuum / weak-coupling approximations are trustworthy.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::meanfield::Trajectory;
use crate::modes;

/// Reduced Planck constant in SI units (J·s).
pub const HBAR_SI: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("N must be odd (got {0})")]
    EvenN(i64),
    #[error("N must be at least 3 (got {0})")]
    TooFewDipoles(i64),
    #[error("`{key}` must be strictly positive and finite (got {value})")]
    NonPositive { key: &'static str, value: f64 },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("`{0}` is fixed by the paper-units preset and must not be given")]
    PresetConflict(&'static str),
    #[error("reduced mass {reduced} must be smaller than the total mass {total}")]
    ReducedMass { reduced: f64, total: f64 },
    #[error("detector needs one or two internal frequencies (got {0})")]
    OmegaCount(usize),
    #[error("coupling g = {given} disagrees with the value {derived} derived from the dipole moments")]
    CouplingMismatch { given: f64, derived: f64 },
    #[error("coupling g must be finite (got {0})")]
    CouplingNotFinite(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Mass-spring chain of `n` dipoles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    n: usize,
    m_c: f64,
    k_c: f64,
    a_c: f64,
}

impl ChainParams {
    pub fn new(n: usize, m_c: f64, k_c: f64, a_c: f64) -> Result<Self, ParamsError> {
        let n_signed = i64::try_from(n).unwrap_or(i64::MAX);
        if n < 3 {
            return Err(ParamsError::TooFewDipoles(n_signed));
        }
        if n % 2 == 0 {
            return Err(ParamsError::EvenN(n_signed));
        }
        positive("chain.m_c", m_c)?;
        positive("chain.k_c", k_c)?;
        positive("chain.a_c", a_c)?;
        Ok(Self { n, m_c, k_c, a_c })
    }

    /// Chain with `c_s = L = ρ_c = 1`.
    pub fn paper_units(n: usize) -> Result<Self, ParamsError> {
        if n < 3 {
            return Self::new(n, 1.0, 1.0, 1.0);
        }
        let a_c = 1.0 / (n - 1) as f64;
        Self::new(n, a_c, 1.0 / a_c, a_c)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m_c(&self) -> f64 {
        self.m_c
    }
    pub fn k_c(&self) -> f64 {
        self.k_c
    }
    pub fn a_c(&self) -> f64 {
        self.a_c
    }
    /// `L = (N − 1) a_c`.
    pub fn length(&self) -> f64 {
        (self.n - 1) as f64 * self.a_c
    }
    /// `ρ_c = m_c / a_c`.
    pub fn density(&self) -> f64 {
        self.m_c / self.a_c
    }
    /// `Υ_c = k_c a_c`.
    pub fn young(&self) -> f64 {
        self.k_c * self.a_c
    }
    /// `c_s = a_c √(k_c/m_c)`.
    pub fn sound_speed(&self) -> f64 {
        self.a_c * (self.k_c / self.m_c).sqrt()
    }
    /// Upper edge of the lattice spectrum, `2√(k_c/m_c)`.
    pub fn omega_max(&self) -> f64 {
        2.0 * (self.k_c / self.m_c).sqrt()
    }
    pub fn mode_count(&self) -> usize {
        self.n - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    total_mass: f64,
    reduced_mass: f64,
    k_d: f64,
    a_d: f64,
    omega: Vec<f64>,
    w: f64,
}

impl DetectorParams {
    /// `omega` holds one internal frequency (single-level detector) or two
    /// (two-level detector).
    pub fn new(
        total_mass: f64,
        reduced_mass: f64,
        k_d: f64,
        a_d: f64,
        omega: Vec<f64>,
        w: f64,
    ) -> Result<Self, ParamsError> {
        positive("detector.total_mass", total_mass)?;
        positive("detector.reduced_mass", reduced_mass)?;
        positive("detector.k_d", k_d)?;
        positive("detector.a_d", a_d)?;
        positive("detector.w", w)?;
        if reduced_mass >= total_mass {
            return Err(ParamsError::ReducedMass {
                reduced: reduced_mass,
                total: total_mass,
            });
        }
        if omega.is_empty() || omega.len() > 2 {
            return Err(ParamsError::OmegaCount(omega.len()));
        }
        for &om in &omega {
            positive("detector.omega", om)?;
        }
        Ok(Self {
            total_mass,
            reduced_mass,
            k_d,
            a_d,
            omega,
            w,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }
    pub fn k_d(&self) -> f64 {
        self.k_d
    }
    pub fn a_d(&self) -> f64 {
        self.a_d
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn omegas(&self) -> &[f64] {
        &self.omega
    }
    /// First (or only) internal frequency.
    pub fn omega_d(&self) -> f64 {
        self.omega[0]
    }
    pub fn is_two_level(&self) -> bool {
        self.omega.len() == 2
    }
}

/// Electromagnetic inputs from which `g` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleMoments {
    pub p_d: f64,
    pub p_c: f64,
    pub epsilon0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    g: f64,
    hbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<DipoleMoments>,
}

impl CouplingParams {
    pub fn new(g: f64, hbar: f64) -> Result<Self, ParamsError> {
        if !g.is_finite() {
            return Err(ParamsError::CouplingNotFinite(g));
        }
        positive("units.hbar", hbar)?;
        Ok(Self { g, hbar, raw: None })
    }

    /// `g = 𝗉_d 𝗉_c w / (4π ε₀ a_d a_c)`.
    pub fn from_dipoles(
        raw: DipoleMoments,
        w: f64,
        a_d: f64,
        a_c: f64,
        hbar: f64,
    ) -> Result<Self, ParamsError> {
        positive("coupling.epsilon0", raw.epsilon0)?;
        let g = dipole_coupling(&raw, w, a_d, a_c);
        let mut c = Self::new(g, hbar)?;
        c.raw = Some(raw);
        Ok(c)
    }

    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn raw(&self) -> Option<&DipoleMoments> {
        self.raw.as_ref()
    }
}

fn dipole_coupling(raw: &DipoleMoments, w: f64, a_d: f64, a_c: f64) -> f64 {
    raw.p_d * raw.p_c * w / (4.0 * PI * raw.epsilon0 * a_d * a_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitPreset {
    /// `c_s = L = ρ_c = ℏ = 1`.
    Paper,
    Si,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub units: UnitPreset,
    pub chain: ChainParams,
    pub detector: DetectorParams,
    pub coupling: CouplingParams,
}

/// Derived constants, for reports and manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub length: f64,
    pub density: f64,
    pub young: f64,
    pub sound_speed: f64,
    pub omega_max: f64,
}

impl SystemParams {
    pub fn new(
        units: UnitPreset,
        chain: ChainParams,
        detector: DetectorParams,
        coupling: CouplingParams,
    ) -> Self {
        Self {
            units,
            chain,
            detector,
            coupling,
        }
    }

    /// Paper-units system with a single-frequency detector of unit masses.
    pub fn paper_units(n: usize, w: f64, omega_d: f64, g: f64) -> Result<Self, ParamsError> {
        let chain = ChainParams::paper_units(n)?;
        let detector = DetectorParams::new(1e3, 1.0, omega_d * omega_d, 1.0, vec![omega_d], w)?;
        Ok(Self::new(
            UnitPreset::Paper,
            chain,
            detector,
            CouplingParams::new(g, 1.0)?,
        ))
    }

    pub fn with_g(mut self, g: f64) -> Result<Self, ParamsError> {
        self.coupling = CouplingParams::new(g, self.coupling.hbar)?;
        Ok(self)
    }

    pub fn with_omegas(mut self, omega: Vec<f64>) -> Result<Self, ParamsError> {
        let d = &self.detector;
        self.detector = DetectorParams::new(d.total_mass, d.reduced_mass, d.k_d, d.a_d, omega, d.w)?;
        Ok(self)
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants {
            length: self.chain.length(),
            density: self.chain.density(),
            young: self.chain.young(),
            sound_speed: self.chain.sound_speed(),
            omega_max: self.chain.omega_max(),
        }
    }

    pub fn hbar(&self) -> f64 {
        self.coupling.hbar
    }

    pub fn from_json_str(text: &str) -> Result<Self, ParamsError> {
        let config: Config =
            serde_json::from_str(text).map_err(|e| ParamsError::Config(e.to_string()))?;
        build_params(&config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ParamsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ParamsError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

fn positive(key: &'static str, value: f64) -> Result<f64, ParamsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ParamsError::NonPositive { key, value })
    }
}

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub units: UnitsConfig,
    pub chain: ChainConfig,
    pub detector: DetectorConfig,
    pub coupling: CouplingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub preset: UnitPreset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub n: Option<i64>,
    pub m_c: Option<f64>,
    pub k_c: Option<f64>,
    pub a_c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub total_mass: Option<f64>,
    pub reduced_mass: Option<f64>,
    pub k_d: Option<f64>,
    pub a_d: Option<f64>,
    /// One or two internal frequencies; defaults to `√(k_d/m̃_d)`.
    pub omega: Option<Vec<f64>>,
    pub w: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub g: Option<f64>,
    pub p_d: Option<f64>,
    pub p_c: Option<f64>,
    pub epsilon0: Option<f64>,
}

fn require<T: Copy>(value: Option<T>, key: &'static str) -> Result<T, ParamsError> {
    value.ok_or(ParamsError::MissingKey(key))
}

/// Validates a configuration and fills in every derived constant.
pub fn build_params(config: &Config) -> Result<SystemParams, ParamsError> {
    let n = require(config.chain.n, "chain.n")?;
    if n < 3 {
        return Err(ParamsError::TooFewDipoles(n));
    }
    if n % 2 == 0 {
        return Err(ParamsError::EvenN(n));
    }
    let n = usize::try_from(n).map_err(|_| ParamsError::TooFewDipoles(n))?;

    let (chain, hbar) = match config.units.preset {
        UnitPreset::Paper => {
            if config.chain.m_c.is_some() {
                return Err(ParamsError::PresetConflict("chain.m_c"));
            }
            if config.chain.k_c.is_some() {
                return Err(ParamsError::PresetConflict("chain.k_c"));
            }
            if config.chain.a_c.is_some() {
                return Err(ParamsError::PresetConflict("chain.a_c"));
            }
            if config.units.hbar.is_some() {
                return Err(ParamsError::PresetConflict("units.hbar"));
            }
            (ChainParams::paper_units(n)?, 1.0)
        }
        preset => {
            let chain = ChainParams::new(
                n,
                require(config.chain.m_c, "chain.m_c")?,
                require(config.chain.k_c, "chain.k_c")?,
                require(config.chain.a_c, "chain.a_c")?,
            )?;
            let hbar = match preset {
                UnitPreset::Si => {
                    if config.units.hbar.is_some() {
                        return Err(ParamsError::PresetConflict("units.hbar"));
                    }
                    HBAR_SI
                }
                _ => require(config.units.hbar, "units.hbar")?,
            };
            (chain, hbar)
        }
    };

    let d = &config.detector;
    let reduced_mass = require(d.reduced_mass, "detector.reduced_mass")?;
    let k_d = require(d.k_d, "detector.k_d")?;
    let omega = match &d.omega {
        Some(list) => list.clone(),
        None => vec![(positive("detector.k_d", k_d)? / positive("detector.reduced_mass", reduced_mass)?).sqrt()],
    };
    let detector = DetectorParams::new(
        require(d.total_mass, "detector.total_mass")?,
        reduced_mass,
        k_d,
        require(d.a_d, "detector.a_d")?,
        omega,
        require(d.w, "detector.w")?,
    )?;

    let c = &config.coupling;
    let raw = match (c.p_d, c.p_c, c.epsilon0) {
        (Some(p_d), Some(p_c), Some(epsilon0)) => Some(DipoleMoments { p_d, p_c, epsilon0 }),
        (None, None, None) => None,
        (None, _, _) => return Err(ParamsError::MissingKey("coupling.p_d")),
        (_, None, _) => return Err(ParamsError::MissingKey("coupling.p_c")),
        (_, _, None) => return Err(ParamsError::MissingKey("coupling.epsilon0")),
    };
    let coupling = match (c.g, raw) {
        (Some(g), None) => CouplingParams::new(g, hbar)?,
        (given, Some(raw)) => {
            let derived = CouplingParams::from_dipoles(raw, detector.w, detector.a_d, chain.a_c, hbar)?;
            if let Some(g) = given {
                if (g - derived.g).abs() > 1e-12 * derived.g.abs().max(f64::MIN_POSITIVE) {
                    return Err(ParamsError::CouplingMismatch {
                        given: g,
                        derived: derived.g,
                    });
                }
            }
            derived
        }
        (None, None) => return Err(ParamsError::MissingKey("coupling.g")),
    };

    Ok(SystemParams::new(config.units.preset, chain, detector, coupling))
}

// ---------------------------------------------------------------------------
// Regime diagnostics
// ---------------------------------------------------------------------------

/// Numerical meaning of "≫" and "≪".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub much_greater: f64,
    pub much_less: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            much_greater: 10.0,
            much_less: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeFlag {
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl RegimeFlag {
    fn at_least(ratio: f64, threshold: f64) -> Self {
        Self {
            ratio,
            threshold,
            pass: ratio >= threshold,
            note: String::new(),
        }
    }

    fn at_most(ratio: f64, threshold: f64) -> Self {
        Self {
            ratio,
            threshold,
            pass: ratio <= threshold,
            note: String::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    /// `w / a_c ≥ ≫`.
    pub w_over_spacing: RegimeFlag,
    /// `L / w ≥ ≫`.
    pub length_over_w: RegimeFlag,
    /// Clearance of the detector from the nearer chain edge over the run,
    /// `(L/2 − max|x̄_d|) / w ≥ ≫`. The plain `max|x̄_d|/L` is in the note.
    pub edge_clearance: RegimeFlag,
    /// Shortest resonant wavelength over `w`, at least 1.
    pub wavelength: RegimeFlag,
    /// Largest `|g_α| t / ℏ` over the resonant modes, at most `≪`.
    pub weak_coupling: RegimeFlag,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.flags().iter().all(|(_, f)| f.pass)
    }

    pub fn flags(&self) -> [(&'static str, &RegimeFlag); 5] {
        [
            ("w_over_spacing", &self.w_over_spacing),
            ("length_over_w", &self.length_over_w),
            ("edge_clearance", &self.edge_clearance),
            ("wavelength", &self.wavelength),
            ("weak_coupling", &self.weak_coupling),
        ]
    }
}

/// Evaluates the regime assumptions for trajectories observed over
/// `window = (t_start, t_end)`. Never fails; only flags.
pub fn regime_check(
    params: &SystemParams,
    window: (f64, f64),
    trajectories: &[Trajectory],
    thresholds: RegimeThresholds,
) -> RegimeReport {
    let chain = &params.chain;
    let l = chain.length();
    let w = params.detector.w();
    let (t0, t1) = window;

    let w_over_spacing = RegimeFlag::at_least(w / chain.a_c(), thresholds.much_greater);
    let length_over_w = RegimeFlag::at_least(l / w, thresholds.much_greater);

    // |x̄_d| is piecewise linear in t, so the extremes sit at the window ends.
    let max_abs_x = trajectories
        .iter()
        .flat_map(|tr| [tr.position(t0).abs(), tr.position(t1).abs()])
        .fold(0.0_f64, f64::max);
    let edge_clearance = RegimeFlag::at_least((0.5 * l - max_abs_x) / w, thresholds.much_greater)
        .with_note(format!("max|x_d|/L = {:.6}", max_abs_x / l));

    let c_s = chain.sound_speed();
    let duration = (t1 - t0).abs();
    let mut min_lambda_ratio = f64::INFINITY;
    let mut max_gt = 0.0_f64;
    let mut problems = Vec::new();
    for tr in trajectories.iter().filter(|tr| tr.v.abs() > c_s) {
        for &omega_d in params.detector.omegas() {
            match modes::resonance_mode(tr.v.abs(), omega_d, params) {
                Ok(res) => {
                    let lambda = 2.0 * l / res.alpha as f64;
                    min_lambda_ratio = min_lambda_ratio.min(lambda / w);
                    if let Ok(cpl) = modes::mode_coupling(res.alpha, params, omega_d) {
                        max_gt = max_gt.max(cpl.g_alpha.abs() * duration / params.hbar());
                    }
                }
                Err(e) => problems.push(e.to_string()),
            }
        }
    }

    let (wavelength, weak_coupling) = if !problems.is_empty() {
        let note = problems.join("; ");
        (
            RegimeFlag {
                ratio: f64::NAN,
                threshold: 1.0,
                pass: false,
                note: note.clone(),
            },
            RegimeFlag {
                ratio: f64::NAN,
                threshold: thresholds.much_less,
                pass: false,
                note,
            },
        )
    } else if min_lambda_ratio.is_infinite() {
        let note = "no supersonic trajectory: no resonant mode";
        (
            RegimeFlag::at_least(f64::INFINITY, 1.0).with_note(note),
            RegimeFlag::at_most(0.0, thresholds.much_less).with_note(note),
        )
    } else {
        (
            RegimeFlag::at_least(min_lambda_ratio, 1.0),
            RegimeFlag::at_most(max_gt, thresholds.much_less),
        )
    };

    RegimeReport {
        w_over_spacing,
        length_over_w,
        edge_clearance,
        wavelength,
        weak_coupling,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_config(n: i64) -> Config {
        Config {
            units: UnitsConfig {
                preset: UnitPreset::Paper,
                hbar: None,
            },
            chain: ChainConfig {
                n: Some(n),
                ..Default::default()
            },
            detector: DetectorConfig {
                total_mass: Some(1000.0),
                reduced_mass: Some(1.0),
                k_d: Some(100.0),
                a_d: Some(1.0),
                omega: None,
                w: Some(0.01),
            },
            coupling: CouplingConfig {
                g: Some(1.0),
                ..Default::default()
            },
        }
    }

    #[test]
    fn unit_chain_derived_values() {
        let c = ChainParams::new(1001, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(c.sound_speed(), 1.0);
        assert_eq!(c.length(), 1000.0);
        assert_eq!(c.density(), 1.0);
        assert_eq!(c.young(), 1.0);
    }

    #[test]
    fn paper_preset() {
        let p = build_params(&paper_config(2001)).unwrap();
        let d = p.derived();
        assert_relative_eq!(d.length, 1.0, max_relative = 1e-14);
        assert_relative_eq!(d.density, 1.0, max_relative = 1e-14);
        assert_relative_eq!(d.sound_speed, 1.0, max_relative = 1e-14);
        assert_eq!(p.hbar(), 1.0);
        assert_eq!(p.detector.omega_d(), 10.0);
    }

    #[test]
    fn validation_errors_are_distinct() {
        assert_eq!(build_params(&paper_config(4)), Err(ParamsError::EvenN(4)));
        assert_eq!(
            ChainParams::new(4, 1.0, 1.0, 1.0).unwrap_err().to_string(),
            "N must be odd (got 4)"
        );
        assert_eq!(build_params(&paper_config(1)), Err(ParamsError::TooFewDipoles(1)));

        let mut c = paper_config(11);
        c.chain.n = None;
        assert_eq!(build_params(&c), Err(ParamsError::MissingKey("chain.n")));

        let mut c = paper_config(11);
        c.detector.w = Some(-1.0);
        assert!(matches!(
            build_params(&c),
            Err(ParamsError::NonPositive { key: "detector.w", .. })
        ));

        let mut c = paper_config(11);
        c.detector.reduced_mass = Some(2000.0);
        assert!(matches!(build_params(&c), Err(ParamsError::ReducedMass { .. })));

        let mut c = paper_config(11);
        c.coupling.g = None;
        assert_eq!(build_params(&c), Err(ParamsError::MissingKey("coupling.g")));

        let mut c = paper_config(11);
        c.chain.a_c = Some(1.0);
        assert_eq!(build_params(&c), Err(ParamsError::PresetConflict("chain.a_c")));

        let mut c = paper_config(11);
        c.units.preset = UnitPreset::Custom;
        c.chain = ChainConfig {
            n: Some(11),
            m_c: Some(1.0),
            k_c: Some(1.0),
            a_c: Some(1.0),
        };
        assert_eq!(build_params(&c), Err(ParamsError::MissingKey("units.hbar")));

        let mut c = paper_config(11);
        c.detector.omega = Some(vec![1.0, 2.0, 3.0]);
        assert_eq!(build_params(&c), Err(ParamsError::OmegaCount(3)));
    }

    #[test]
    fn coupling_from_dipole_moments() {
        let mut c = paper_config(101);
        c.coupling = CouplingConfig {
            g: None,
            p_d: Some(2.0),
            p_c: Some(3.0),
            epsilon0: Some(0.5),
        };
        let p = build_params(&c).unwrap();
        let expected = 2.0 * 3.0 * 0.01 / (4.0 * PI * 0.5 * 1.0 * p.chain.a_c());
        assert_relative_eq!(p.coupling.g(), expected, max_relative = 4.0 * f64::EPSILON);

        c.coupling.g = Some(expected * (1.0 + 1e-6));
        assert!(matches!(build_params(&c), Err(ParamsError::CouplingMismatch { .. })));

        c.coupling.epsilon0 = None;
        assert_eq!(build_params(&c), Err(ParamsError::MissingKey("coupling.epsilon0")));
    }

    #[test]
    fn json_roundtrip_rebuilds_identically() {
        let p = build_params(&paper_config(2001)).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: SystemParams = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
        assert_eq!(p.derived(), back.derived());
    }

    #[test]
    fn reference_regime_passes() {
        let p = build_params(&paper_config(2001)).unwrap();
        let tr = [Trajectory::new(0.0, 0.5)];
        let r = regime_check(&p, (0.0, 0.25), &tr, RegimeThresholds::default());
        assert!(r.all_pass(), "{r:#?}");
    }

    #[test]
    fn regime_failures() {
        let mut c = paper_config(2001);
        c.detector.w = Some(0.5);
        let p = build_params(&c).unwrap();
        let r = regime_check(&p, (0.0, 0.1), &[Trajectory::new(0.0, 0.5)], RegimeThresholds::default());
        assert!(!r.length_over_w.pass);

        let p = build_params(&paper_config(2001)).unwrap();
        // ends at 0.9 L/2
        let r = regime_check(&p, (0.0, 0.9), &[Trajectory::new(0.0, 0.5)], RegimeThresholds::default());
        assert!(!r.edge_clearance.pass);
        assert!(r.length_over_w.pass);
    }

    proptest! {
        #[test]
        fn sound_speed_consistency(m in 1e-3f64..1e3, k in 1e-3f64..1e3, a in 1e-3f64..1e3, half in 1usize..500) {
            let c = ChainParams::new(2 * half + 1, m, k, a).unwrap();
            let unity = c.sound_speed() * (c.density() / c.young()).sqrt();
            prop_assert!((unity - 1.0).abs() < 8.0 * f64::EPSILON);
            let cs2 = c.sound_speed().powi(2);
            prop_assert!((cs2 - c.young() / c.density()).abs() <= 8.0 * f64::EPSILON * cs2);
        }

        #[test]
        fn serialization_is_bit_exact(m in 1e-30f64..1e30, k in 1e-30f64..1e30, a in 1e-30f64..1e30, w in 1e-6f64..1.0) {
            let chain = ChainParams::new(21, m, k, a).unwrap();
            let det = DetectorParams::new(3.0, 1.0, 2.0, 0.7, vec![1.5], w).unwrap();
            let p = SystemParams::new(UnitPreset::Custom, chain, det, CouplingParams::new(0.3, 0.9).unwrap());
            let back: SystemParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
            prop_assert_eq!(p.derived(), back.derived());
            prop_assert_eq!(p, back);
        }
    }
}
