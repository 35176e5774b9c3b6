//! Direct integration of the N-dipole lattice equations of motion.
//!
//! The end dipoles carry half the bulk mass by default, so the lattice is the
//! lumped version of a free-ended rod and its normal modes are exactly the
//! cosine modes with frequencies `2√(k_c/m_c) sin(απ/2(N−1))`. Forcing on each
//! dipole is weighted the same way.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::meanfield::Trajectory;
use crate::params::SystemParams;
use crate::specfun::{kernel_h_d1, kernel_h_d2, kernel_h_d3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscreteError {
    #[error("time step {dt} exceeds the stability limit {limit} (0.1 × 2π/Ω_max)")]
    Step { dt: f64, limit: f64 },
    #[error("state has {got} dipoles, params expect {expected}")]
    Size { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EndMass {
    /// End dipoles weigh `m_c/2` (free-free rod discretization).
    #[default]
    Half,
    /// All dipoles weigh `m_c`.
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorMode {
    /// `x_d = x₀ + v t` is imposed; no back-action.
    Prescribed(Trajectory),
    /// The detector moves under the lattice force.
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    pub end_mass: EndMass,
    pub mode: DetectorMode,
}

impl OracleOptions {
    pub fn prescribed(trajectory: Trajectory) -> Self {
        Self {
            end_mass: EndMass::Half,
            mode: DetectorMode::Prescribed(trajectory),
        }
    }
}

/// Dipole displacements and momenta, `n = −(N−1)/2 .. (N−1)/2`, plus the
/// detector's center of mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainState {
    pub phi: Vec<f64>,
    pub p: Vec<f64>,
    pub x_d: f64,
    pub p_d: f64,
    pub t: f64,
}

impl ChainState {
    /// Chain at rest with the detector at `x_d` carrying momentum `p_d`.
    pub fn rest(params: &SystemParams, x_d: f64, p_d: f64) -> Self {
        let n = params.chain.n();
        Self {
            phi: vec![0.0; n],
            p: vec![0.0; n],
            x_d,
            p_d,
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// Equilibrium positions `n a_c`.
pub fn site_positions(params: &SystemParams) -> Vec<f64> {
    let n = params.chain.n();
    let a = params.chain.a_c();
    let offset = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| (i as f64 - offset) * a).collect()
}

/// Mass weight of each dipole relative to `m_c`.
pub fn mass_weights(n: usize, end_mass: EndMass) -> Vec<f64> {
    let mut w = vec![1.0; n];
    if end_mass == EndMass::Half && n >= 2 {
        w[0] = 0.5;
        w[n - 1] = 0.5;
    }
    w
}

/// Displacement pattern of lattice mode `α`, `cos(απ i/(N−1))` for `i = 0..N`.
pub fn mode_pattern(alpha: usize, n: usize) -> Vec<f64> {
    let denom = (n - 1) as f64;
    (0..n).map(|i| (alpha as f64 * PI * i as f64 / denom).cos()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forces {
    pub dp: Vec<f64>,
    pub dp_d: f64,
}

/// Elastic nearest-neighbour forces with free ends plus the detector
/// forcing `−g a_d a_c ∂²h/∂x²` (weighted at the ends); the detector force is
/// zero in prescribed mode.
pub fn force_field(state: &ChainState, params: &SystemParams, options: &OracleOptions) -> Forces {
    let positions = site_positions(params);
    let weights = mass_weights(state.len(), options.end_mass);
    let mut dp = vec![0.0; state.len()];
    let mut dp_d = 0.0;
    elastic_into(&state.phi, params.chain.k_c(), &mut dp);
    let strength = interaction_strength(params);
    if strength != 0.0 {
        let w = params.detector.w();
        for ((f, &x), &wt) in dp.iter_mut().zip(&positions).zip(&weights) {
            *f -= strength * wt * kernel_h_d2(x, state.x_d, w);
        }
        if matches!(options.mode, DetectorMode::Dynamic) {
            dp_d = positions
                .iter()
                .zip(&weights)
                .zip(&state.phi)
                .map(|((&x, &wt), &phi)| {
                    wt * (-kernel_h_d2(x, state.x_d, w) + phi * kernel_h_d3(x, state.x_d, w))
                })
                .sum::<f64>()
                * strength;
        }
    }
    Forces { dp, dp_d }
}

/// `g a_d a_c`.
fn interaction_strength(params: &SystemParams) -> f64 {
    params.coupling.g() * params.detector.a_d() * params.chain.a_c()
}

fn elastic_into(phi: &[f64], k_c: f64, out: &mut [f64]) {
    let n = phi.len();
    for i in 0..n {
        let left = if i > 0 { phi[i - 1] - phi[i] } else { 0.0 };
        let right = if i + 1 < n { phi[i + 1] - phi[i] } else { 0.0 };
        out[i] = k_c * (left + right);
    }
}

/// Kinetic plus elastic energy of the chain alone.
pub fn chain_energy(state: &ChainState, params: &SystemParams, end_mass: EndMass) -> f64 {
    let m_c = params.chain.m_c();
    let k_c = params.chain.k_c();
    let kinetic: f64 = state
        .p
        .iter()
        .zip(mass_weights(state.len(), end_mass))
        .map(|(p, wt)| p * p / (2.0 * m_c * wt))
        .sum();
    let elastic: f64 = state.phi.windows(2).map(|d| 0.5 * k_c * (d[1] - d[0]).powi(2)).sum();
    kinetic + elastic
}

/// Chain energy plus detector kinetic and interaction energy; conserved in
/// dynamic mode.
pub fn total_energy(state: &ChainState, params: &SystemParams, end_mass: EndMass) -> f64 {
    let w = params.detector.w();
    let interaction: f64 = site_positions(params)
        .iter()
        .zip(mass_weights(state.len(), end_mass))
        .zip(&state.phi)
        .map(|((&x, wt), &phi)| wt * (-kernel_h_d1(x, state.x_d, w) + phi * kernel_h_d2(x, state.x_d, w)))
        .sum::<f64>()
        * interaction_strength(params);
    chain_energy(state, params, end_mass)
        + state.p_d * state.p_d / (2.0 * params.detector.total_mass())
        + interaction
}

/// Largest stable step accepted, `0.1 × 2π/Ω_max`.
pub fn max_step(params: &SystemParams) -> f64 {
    0.1 * 2.0 * PI / params.chain.omega_max()
}

/// Kick-drift-kick leapfrog. Returns the states after every `record_every`
/// steps (the initial state first, the final state last).
pub fn integrate(
    state: &ChainState,
    params: &SystemParams,
    dt: f64,
    steps: usize,
    options: &OracleOptions,
    record_every: usize,
) -> Result<Vec<ChainState>, DiscreteError> {
    let limit = max_step(params);
    if !(dt.abs() <= limit) {
        return Err(DiscreteError::Step { dt, limit });
    }
    if state.len() != params.chain.n() {
        return Err(DiscreteError::Size {
            got: state.len(),
            expected: params.chain.n(),
        });
    }
    let m_c = params.chain.m_c();
    let inv_mass: Vec<f64> = mass_weights(state.len(), options.end_mass)
        .into_iter()
        .map(|wt| 1.0 / (m_c * wt))
        .collect();
    let big_m = params.detector.total_mass();
    let record_every = record_every.max(1);
    let t0 = state.t;

    let mut s = state.clone();
    if let DetectorMode::Prescribed(tr) = options.mode {
        s.x_d = tr.position(s.t);
    }
    let mut out = vec![s.clone()];
    let mut f = force_field(&s, params, options);
    for step in 1..=steps {
        for (p, dp) in s.p.iter_mut().zip(&f.dp) {
            *p += 0.5 * dt * dp;
        }
        s.p_d += 0.5 * dt * f.dp_d;
        for ((phi, p), im) in s.phi.iter_mut().zip(&s.p).zip(&inv_mass) {
            *phi += dt * p * im;
        }
        // Time from the step count so long runs do not accumulate rounding.
        s.t = t0 + dt * step as f64;
        s.x_d = match options.mode {
            DetectorMode::Prescribed(tr) => tr.position(s.t),
            DetectorMode::Dynamic => s.x_d + dt * s.p_d / big_m,
        };
        f = force_field(&s, params, options);
        for (p, dp) in s.p.iter_mut().zip(&f.dp) {
            *p += 0.5 * dt * dp;
        }
        s.p_d += 0.5 * dt * f.dp_d;
        if step % record_every == 0 || step == steps {
            out.push(s.clone());
        }
    }
    Ok(out)
}
