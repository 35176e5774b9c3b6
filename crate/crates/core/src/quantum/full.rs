//! Time-ordered evolution under the interaction-picture coupling of several
//! chain modes to the detector, without the rotating-wave approximation.
//! Used to check the parametric-amplifier reduction.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::density::QuantumState;
use super::evolve::{Hamiltonian, Propagator};
use super::fock::{Factor, FockSpace};
use super::{mode_label, QuantumError, DETECTOR};
use crate::meanfield::Trajectory;
use crate::modes;
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullOptions {
    /// Fock truncation of the resonant mode.
    pub resonant_n_max: usize,
    /// Fock truncation of every other included mode.
    pub other_n_max: usize,
    /// Steps per period of the fastest phase; at least 50.
    pub steps_per_period: f64,
}

impl Default for FullOptions {
    fn default() -> Self {
        Self {
            resonant_n_max: 2,
            other_n_max: 1,
            steps_per_period: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeOccupation {
    pub alpha: usize,
    pub g_alpha: f64,
    pub mean_n: f64,
    /// `|v Ω_α/c_s − Ω_α − ω_d|`.
    pub detuning: f64,
    /// First-order far-detuning bound `(g_α/ℏΔ)²`; infinite on resonance.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullEvolution {
    pub resonant: usize,
    pub state: QuantumState,
    /// Population of `|1_{α₀}, e⟩` with every other mode empty.
    pub pair_probability: f64,
    /// Marginal probability that the detector is excited.
    pub excited_probability: f64,
    pub occupations: Vec<ModeOccupation>,
    pub dt: f64,
    pub steps: usize,
}

/// Interaction-picture Hamiltonian for a fixed set of modes.
#[derive(Debug, Clone)]
pub struct FullModel {
    space: FockSpace,
    modes: Vec<ModeTerm>,
    b: DMatrix<Complex64>,
    omega_d: f64,
    c_s: f64,
    half_length: f64,
    trajectory: Trajectory,
}

#[derive(Debug, Clone)]
struct ModeTerm {
    alpha: usize,
    omega: f64,
    g_alpha: f64,
    a: DMatrix<Complex64>,
}

impl FullModel {
    /// `modes` lists the included indices; `resonant` gets the larger truncation.
    pub fn new(
        params: &SystemParams,
        trajectory: Trajectory,
        modes_in: &[usize],
        resonant: usize,
        options: &FullOptions,
    ) -> Result<Self, QuantumError> {
        let omega_d = params.detector.omega_d();
        let mut factors: Vec<Factor> = modes_in
            .iter()
            .map(|&a| {
                let n_max = if a == resonant {
                    options.resonant_n_max
                } else {
                    options.other_n_max
                };
                Factor::boson(mode_label(a), n_max)
            })
            .collect();
        factors.push(Factor::two_level(DETECTOR));
        let space = FockSpace::new(factors)?;
        let modes = modes_in
            .iter()
            .map(|&alpha| {
                let c = modes::mode_coupling(alpha, params, omega_d)?;
                Ok(ModeTerm {
                    alpha,
                    omega: c.omega,
                    g_alpha: c.g_alpha,
                    a: space.lowering(&mode_label(alpha))?,
                })
            })
            .collect::<Result<Vec<_>, QuantumError>>()?;
        let b = space.lowering(DETECTOR)?;
        Ok(Self {
            space,
            modes,
            b,
            omega_d,
            c_s: params.chain.sound_speed(),
            half_length: 0.5 * params.chain.length(),
            trajectory,
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// Fastest phase rate in the Hamiltonian, `Ω_max (1 + |v|/c_s) + ω_d`.
    pub fn fastest_rate(&self) -> f64 {
        let om = self.modes.iter().fold(0.0_f64, |m, t| m.max(t.omega));
        om * (1.0 + self.trajectory.v.abs() / self.c_s) + self.omega_d
    }

    /// `Σ_α g_α (a e^{−iΩt} + h.c.)(b e^{−iω_d t} + h.c.) cos[Ω_α(x̄_d(t) + L/2)/c_s]`.
    pub fn hamiltonian_at(&self, t: f64) -> Hamiltonian {
        let det = rotate(&self.b, self.omega_d * t);
        let x = self.trajectory.position(t);
        let dim = self.space.dim();
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for m in &self.modes {
            let weight = m.g_alpha * (m.omega / self.c_s * (x + self.half_length)).cos();
            h += rotate(&m.a, m.omega * t) * &det * Complex64::new(weight, 0.0);
        }
        let h = (&h + h.adjoint()).unscale(2.0);
        Hamiltonian::new(self.space.clone(), h).expect("dimensions match")
    }
}

/// `op e^{−iθ} + op† e^{iθ}`.
fn rotate(op: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
    let ph = Complex64::from_polar(1.0, -theta);
    op * ph + op.adjoint() * ph.conj()
}

/// Midpoint-exponential (second-order Magnus) integration from the vacuum
/// over `[0, t]`. `dt = None` picks the largest step allowed by the guard.
pub fn evolve_full(
    params: &SystemParams,
    trajectory: Trajectory,
    modes_in: &[usize],
    resonant: usize,
    t: f64,
    dt: Option<f64>,
    options: &FullOptions,
) -> Result<FullEvolution, QuantumError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(QuantumError::Time(t));
    }
    let model = FullModel::new(params, trajectory, modes_in, resonant, options)?;
    let limit = 2.0 * PI / (options.steps_per_period.max(50.0) * model.fastest_rate());
    let (dt, steps) = match dt {
        Some(dt) if !(dt > 0.0 && dt <= limit) => return Err(QuantumError::Step { dt, limit }),
        Some(dt) => (dt, (t / dt).round() as usize),
        None => {
            let steps = (t / limit).ceil() as usize;
            (if steps == 0 { 0.0 } else { t / steps as f64 }, steps)
        }
    };
    let hbar = params.hbar();
    let mut state = QuantumState::vacuum(model.space().clone());
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * dt;
        state = Propagator::new(&model.hamiltonian_at(mid), hbar)?.apply(&state, dt)?;
    }

    let space = model.space();
    let resonant_label = mode_label(resonant);
    let pair = space.index_of(&[(resonant_label.as_str(), 1), (DETECTOR, 1)])?;
    let excited_probability = state.marginal(DETECTOR, 1)?;
    let speed = trajectory.v.abs();
    let occupations = model
        .modes
        .iter()
        .map(|m| {
            let mean_n = state.expect_diagonal(&space.number(&mode_label(m.alpha))?);
            let detuning = modes::detuning(m.alpha, speed, model.omega_d, &params.chain)?;
            Ok(ModeOccupation {
                alpha: m.alpha,
                g_alpha: m.g_alpha,
                mean_n,
                detuning,
                bound: if m.alpha == resonant {
                    f64::INFINITY
                } else {
                    (m.g_alpha / (hbar * detuning)).powi(2)
                },
            })
        })
        .collect::<Result<Vec<_>, QuantumError>>()?;
    Ok(FullEvolution {
        resonant,
        pair_probability: state.probability(pair),
        excited_probability,
        state,
        occupations,
        dt,
        steps,
    })
}
