//! Detector prepared in a superposition of two trajectories: branch-labelled
//! first-order states, their density matrices, reduced states and the
//! observables that separate superposed from localized motion.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::meanfield::Trajectory;
use crate::modes::{self, ModesError};
use crate::params::SystemParams;
use crate::quantum::evolve::{build_ndpa, check_guard, evolve_exact, pair_space, MODE};
use crate::quantum::{
    mode_label, DensityMatrix, Factor, FockSpace, PerturbativeGuard, QuantumError, QuantumState, DETECTOR,
};

/// Label of the two-dimensional branch factor.
pub const BRANCH: &str = "branch";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuperposeError {
    #[error("theta = {0} outside [0, π/2]")]
    Theta(f64),
    #[error("phi = {0} outside [0, π)")]
    Phi(f64),
    #[error("both branches resonate with mode {0}; the branch modes must differ")]
    DegenerateModes(usize),
    #[error("resonance selectivity violated: cross detuning {detuning} below guard {guard}")]
    Selectivity { detuning: f64, guard: f64 },
    #[error("the two-level detector needs two internal frequencies")]
    MissingFrequency,
    #[error("need at least two states to compare")]
    TooFewStates,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Modes(#[from] ModesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorModel {
    /// One internal frequency shared by both branches.
    Single,
    /// Two internal frequencies; branch 1 excites the first, branch 2 the second.
    TwoLevel,
}

impl DetectorModel {
    /// Factor labels of the detector levels.
    pub fn labels(&self) -> Vec<String> {
        match self {
            DetectorModel::Single => vec![DETECTOR.to_string()],
            DetectorModel::TwoLevel => vec![format!("{DETECTOR}1"), format!("{DETECTOR}2")],
        }
    }
}

/// One trajectory branch and the mode it excites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    pub trajectory: Trajectory,
    pub alpha: usize,
    /// Signed coupling to `alpha`.
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSpec {
    pub branches: [Branch; 2],
    pub theta: f64,
    pub phi: f64,
    pub model: DetectorModel,
}

impl BranchSpec {
    pub fn new(
        branches: [Branch; 2],
        theta: f64,
        phi: f64,
        model: DetectorModel,
    ) -> Result<Self, SuperposeError> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(SuperposeError::Theta(theta));
        }
        if !(0.0..PI).contains(&phi) {
            return Err(SuperposeError::Phi(phi));
        }
        if branches[0].alpha == branches[1].alpha {
            return Err(SuperposeError::DegenerateModes(branches[0].alpha));
        }
        Ok(Self {
            branches,
            theta,
            phi,
            model,
        })
    }

    /// Resolves each branch's resonant mode and coupling from the physical
    /// parameters. The two-level model also enforces resonance selectivity.
    pub fn from_params(
        params: &SystemParams,
        trajectories: [Trajectory; 2],
        theta: f64,
        phi: f64,
        model: DetectorModel,
    ) -> Result<Self, SuperposeError> {
        let omegas = match model {
            DetectorModel::Single => [params.detector.omega_d(); 2],
            DetectorModel::TwoLevel => match params.detector.omegas() {
                &[w1, w2] => [w1, w2],
                _ => return Err(SuperposeError::MissingFrequency),
            },
        };
        if model == DetectorModel::TwoLevel {
            let (v1, v2) = (trajectories[0].v.abs(), trajectories[1].v.abs());
            let (lo, hi, om_lo, om_hi) = if v1 < v2 {
                (v1, v2, omegas[0], omegas[1])
            } else {
                (v2, v1, omegas[1], omegas[0])
            };
            let pair = modes::resonance_pair(lo, hi, om_lo, om_hi, params, None)?;
            if pair.same_mode {
                return Err(SuperposeError::DegenerateModes(pair.first.alpha));
            }
            if pair.selectivity_violated {
                return Err(SuperposeError::Selectivity {
                    detuning: pair.cross_scan_min.detuning,
                    guard: pair.guard,
                });
            }
        }
        let branch = |i: usize| -> Result<Branch, SuperposeError> {
            let res = modes::resonance_mode(trajectories[i].v, omegas[i], params)?;
            let c = modes::mode_coupling(res.alpha, params, omegas[i])?;
            Ok(Branch {
                trajectory: trajectories[i],
                alpha: res.alpha,
                g: c.g_alpha,
            })
        };
        Self::new([branch(0)?, branch(1)?], theta, phi, model)
    }

    /// `cos θ` and `e^{iφ} sin θ`.
    pub fn weights(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.theta.cos(), 0.0),
            Complex64::from_polar(self.theta.sin(), self.phi),
        ]
    }

    pub fn with_angles(&self, theta: f64, phi: f64) -> Result<Self, SuperposeError> {
        Self::new(self.branches, theta, phi, self.model)
    }

    /// Branch label ⊗ detector level(s) ⊗ mode α₁ ⊗ mode α₂, one quantum each.
    pub fn space(&self) -> FockSpace {
        let mut factors = vec![Factor::label(BRANCH, 2)];
        factors.extend(self.model.labels().into_iter().map(Factor::two_level));
        factors.extend(self.branches.iter().map(|b| Factor::boson(mode_label(b.alpha), 1)));
        FockSpace::new(factors).expect("distinct labels")
    }

    pub fn mode_labels(&self) -> [String; 2] {
        [mode_label(self.branches[0].alpha), mode_label(self.branches[1].alpha)]
    }

    /// Detector factor excited along branch `i`.
    fn detector_label(&self, i: usize) -> String {
        match self.model {
            DetectorModel::Single => DETECTOR.to_string(),
            DetectorModel::TwoLevel => format!("{DETECTOR}{}", i + 1),
        }
    }
}

/// Branch-labelled state. `raw` keeps the first-order amplitudes
/// unnormalized; `normalization` is its squared norm `𝒩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchedState {
    pub spec: BranchSpec,
    pub t: f64,
    pub raw: QuantumState,
    pub normalization: f64,
}

impl BranchedState {
    /// Unit-norm version of the state.
    pub fn state(&self) -> QuantumState {
        self.raw.clone().normalized()
    }

    /// Unnormalized excitation amplitude of branch `i` (weight included).
    pub fn excitation_amplitude(&self, i: usize) -> Result<Complex64, SuperposeError> {
        let idx = excitation_index(&self.spec, i)?;
        Ok(self.raw.amplitude(idx))
    }
}

fn vacuum_index(spec: &BranchSpec, i: usize) -> Result<usize, QuantumError> {
    spec.space().index_of(&[(BRANCH, i)])
}

fn excitation_index(spec: &BranchSpec, i: usize) -> Result<usize, QuantumError> {
    let det = spec.detector_label(i);
    let mode = spec.mode_labels()[i].clone();
    spec.space().index_of(&[(BRANCH, i), (det.as_str(), 1), (mode.as_str(), 1)])
}

/// Per-branch amplitudes `(vacuum, excitation)` placed into the branch space.
fn assemble(spec: &BranchSpec, t: f64, per_branch: [(Complex64, Complex64); 2]) -> Result<BranchedState, SuperposeError> {
    let space = spec.space();
    let mut amps = DVector::zeros(space.dim());
    for (i, (w, (vac, exc))) in spec.weights().into_iter().zip(per_branch).enumerate() {
        amps[vacuum_index(spec, i)?] += w * vac;
        amps[excitation_index(spec, i)?] += w * exc;
    }
    let raw = QuantumState::new(space, amps)?;
    let normalization = raw.norm().powi(2);
    Ok(BranchedState {
        spec: spec.clone(),
        t,
        raw,
        normalization,
    })
}

/// First-order state: each branch carries `w_i [|vac, g⟩ − i(g_i t/2ℏ)|1_{α_i}, e_i⟩]`.
pub fn evolve_superposed(
    spec: &BranchSpec,
    t: f64,
    hbar: f64,
    guard: PerturbativeGuard,
) -> Result<BranchedState, SuperposeError> {
    for b in &spec.branches {
        check_guard(b.g, t, hbar, guard)?;
    }
    let one = Complex64::new(1.0, 0.0);
    let amp = |b: &Branch| Complex64::new(0.0, -0.5 * b.g * t / hbar);
    assemble(spec, t, [(one, amp(&spec.branches[0])), (one, amp(&spec.branches[1]))])
}

/// Same branch structure, each branch evolved exactly under its own
/// parametric-amplifier Hamiltonian. Used as the oracle for the
/// first-order state.
pub fn evolve_superposed_exact(spec: &BranchSpec, t: f64, hbar: f64) -> Result<BranchedState, SuperposeError> {
    let per_branch = |b: &Branch| -> Result<(Complex64, Complex64), QuantumError> {
        let space = pair_space(MODE, 1);
        let h = build_ndpa(b.g, &space, MODE, DETECTOR)?;
        let psi = evolve_exact(&h, &QuantumState::vacuum(space.clone()), t, hbar)?;
        Ok((psi.amplitude(space.index(&[0, 0])?), psi.amplitude(space.index(&[1, 1])?)))
    };
    assemble(spec, t, [per_branch(&spec.branches[0])?, per_branch(&spec.branches[1])?])
}

/// `ρ = |ψ⟩⟨ψ|`, normalized once by its trace.
pub fn density_matrix(state: &BranchedState) -> DensityMatrix {
    DensityMatrix::from_state(&state.raw)
}

/// Classical mixture of the two localized runs with probabilities
/// `cos²θ` and `sin²θ`, normalized once by the trace.
pub fn incoherent_mixture(state: &BranchedState) -> Result<DensityMatrix, SuperposeError> {
    let spec = &state.spec;
    let space = spec.space();
    let mut mat = nalgebra::DMatrix::zeros(space.dim(), space.dim());
    for i in 0..2 {
        let mut branch = DVector::zeros(space.dim());
        for idx in [vacuum_index(spec, i)?, excitation_index(spec, i)?] {
            branch[idx] = state.raw.amplitude(idx);
        }
        mat += &branch * branch.adjoint();
    }
    Ok(DensityMatrix::new(space, mat)?.normalized())
}

/// Reduced phonon state of modes `keep`, tracing branch and detector.
pub fn reduce_chain(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, SuperposeError> {
    let labels: Vec<String> = keep.iter().map(|&a| mode_label(a)).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(rho.partial_trace(&refs)?)
}

/// Reduced detector state, tracing branch and phonon modes.
pub fn reduce_detector(rho: &DensityMatrix, model: DetectorModel) -> Result<DensityMatrix, SuperposeError> {
    let labels = model.labels();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(rho.partial_trace(&refs)?)
}

/// First-order populations of `{|00⟩, |10⟩, |01⟩}` (chain) and of
/// `{g, e}` / `{gg, eg, ge}` (detector), from the closed-form weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderPopulations {
    pub normalization: f64,
    pub vacuum: f64,
    pub first: f64,
    pub second: f64,
}

pub fn first_order_populations(spec: &BranchSpec, t: f64, hbar: f64) -> FirstOrderPopulations {
    let c = spec.theta.cos();
    let s = spec.theta.sin();
    let x1 = (spec.branches[0].g * t / hbar * c).powi(2) / 4.0;
    let x2 = (spec.branches[1].g * t / hbar * s).powi(2) / 4.0;
    let n = 1.0 + x1 + x2;
    FirstOrderPopulations {
        normalization: n,
        vacuum: 1.0 / n,
        first: x1 / n,
        second: x2 / n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub first: String,
    pub second: String,
    pub trace_distance: f64,
    pub distinguishable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminationReport {
    pub threshold: f64,
    pub comparisons: Vec<Comparison>,
}

/// Pairwise trace distances; a pair counts as distinguishable when its
/// distance exceeds `threshold`.
pub fn discriminate(states: &[(&str, &DensityMatrix)], threshold: f64) -> Result<DiscriminationReport, SuperposeError> {
    if states.len() < 2 {
        return Err(SuperposeError::TooFewStates);
    }
    let mut comparisons = Vec::new();
    for (i, (na, a)) in states.iter().enumerate() {
        for (nb, b) in &states[i + 1..] {
            let d = a.trace_distance(b)?;
            comparisons.push(Comparison {
                first: na.to_string(),
                second: nb.to_string(),
                trace_distance: d,
                distinguishable: d > threshold,
            });
        }
    }
    Ok(DiscriminationReport { threshold, comparisons })
}
