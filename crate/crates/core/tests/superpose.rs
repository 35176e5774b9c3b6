
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use approx::assert_relative_eq;
use ginzburg::meanfield::Trajectory;
use ginzburg::quantum::{evolve_perturbative, PerturbativeGuard, DETECTOR};
use ginzburg::superpose::{
    density_matrix, discriminate, evolve_superposed, evolve_superposed_exact, first_order_populations,
    incoherent_mixture, reduce_chain, reduce_detector, Branch, BranchSpec, DetectorModel, BRANCH,
};
use num_complex::Complex64;
use proptest::prelude::*;

const G1: f64 = 0.1;
const G2: f64 = 0.2;

fn spec(theta: f64, phi: f64, model: DetectorModel) -> BranchSpec {
    BranchSpec::new(
        [
            Branch { trajectory: Trajectory::new(-0.2, 2.0), alpha: 10, g: G1 },
            Branch { trajectory: Trajectory::new(-0.3, 3.0), alpha: 5, g: G2 },
        ],
        theta,
        phi,
        model,
    )
    .unwrap()
}

fn state(theta: f64, phi: f64, model: DetectorModel) -> ginzburg::superpose::BranchedState {
    evolve_superposed(&spec(theta, phi, model), 1.0, 1.0, PerturbativeGuard::default()).unwrap()
}

#[test]
fn excitation_amplitudes_at_pi_over_three() {
    let phi = 0.7;
    let s = state(FRAC_PI_3, phi, DetectorModel::Single);
    let a1 = s.excitation_amplitude(0).unwrap();
    let a2 = s.excitation_amplitude(1).unwrap();
    let e1 = Complex64::new(0.0, -FRAC_PI_3.cos() * 0.05);
    let e2 = Complex64::new(0.0, -1.0) * Complex64::from_polar(FRAC_PI_3.sin(), phi) * 0.1;
    assert!((a1 - e1).norm() < 1e-15);
    assert!((a2 - e2).norm() < 1e-15);
}

#[test]
fn theta_zero_reduces_to_single_trajectory() {
    let s = state(0.0, 0.0, DetectorModel::Single);
    let single = evolve_perturbative(G1, 1.0, 1.0, PerturbativeGuard::default()).unwrap();
    let pair = single.space().index(&[1, 1]).unwrap();
    let psi = s.state();
    let space = psi.space().clone();
    let idx = space
        .index_of(&[(BRANCH, 0), (DETECTOR, 1), ("mode10", 1)])
        .unwrap();
    assert!((psi.amplitude(idx) - single.amplitude(pair)).norm() < 1e-15);
    assert!((psi.amplitude(space.index_of(&[(BRANCH, 0)]).unwrap()) - single.amplitude(0)).norm() < 1e-15);
}

#[test]
fn joint_state_is_pure() {
    for model in [DetectorModel::Single, DetectorModel::TwoLevel] {
        let rho = density_matrix(&state(0.6, 1.1, model));
        assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-13);
        let eig = rho.eigenvalues();
        let big = eig.iter().filter(|&&e| e > 1e-12).count();
        assert_eq!(big, 1);
        assert!(rho.hermiticity_error() < 1e-16);
    }
}

#[test]
fn two_level_sectors_pair_detector_with_mode() {
    let s = state(0.9, 0.4, DetectorModel::TwoLevel);
    let rho = density_matrix(&s);
    // each detector level is excited together with its own mode only
    for (det, mode, other) in [("detector1", "mode10", "mode5"), ("detector2", "mode5", "mode10")] {
        let sub = rho.partial_trace(&[det, mode, other]).unwrap();
        let excited: f64 = (0..sub.dim())
            .filter(|&i| sub.space().digits(i)[0] == 1)
            .map(|i| sub.populations()[i])
            .sum();
        assert!(excited > 0.0);
        assert_relative_eq!(sub.population(&[(det, 1), (mode, 1)]).unwrap(), excited, epsilon = 1e-16);
        assert_eq!(sub.population(&[(det, 1), (other, 1)]).unwrap(), 0.0);
    }
    let pops = first_order_populations(&s.spec, 1.0, 1.0);
    let det = reduce_detector(&rho, DetectorModel::TwoLevel).unwrap();
    assert_relative_eq!(det.population(&[("detector1", 1)]).unwrap(), pops.first, epsilon = 1e-15);
    assert_relative_eq!(det.population(&[("detector2", 1)]).unwrap(), pops.second, epsilon = 1e-15);
}

#[test]
fn theta_limits_select_one_branch() {
    let s0 = density_matrix(&state(0.0, 0.0, DetectorModel::Single));
    let chain0 = reduce_chain(&s0, &[10, 5]).unwrap();
    assert_eq!(chain0.population(&[("mode5", 1)]).unwrap(), 0.0);
    assert_relative_eq!(chain0.population(&[("mode10", 1)]).unwrap(), 0.0025 / 1.0025, max_relative = 1e-13);

    let s1 = density_matrix(&state(FRAC_PI_2, 0.0, DetectorModel::Single));
    let chain1 = reduce_chain(&s1, &[10, 5]).unwrap();
    // cos(π/2) rounds to 6e-17 in f64
    assert!(chain1.population(&[("mode10", 1)]).unwrap() < 1e-30);
    assert_relative_eq!(chain1.population(&[("mode5", 1)]).unwrap(), 0.01 / 1.01, max_relative = 1e-13);
}

#[test]
fn coherent_and_incoherent_agree_on_reduced_states() {
    for model in [DetectorModel::Single, DetectorModel::TwoLevel] {
        let s = state(1.0, 2.2, model);
        let pure = density_matrix(&s);
        let mixed = incoherent_mixture(&s).unwrap();
        let chains = [reduce_chain(&pure, &[10, 5]).unwrap(), reduce_chain(&mixed, &[10, 5]).unwrap()];
        let dets = [reduce_detector(&pure, model).unwrap(), reduce_detector(&mixed, model).unwrap()];
        let report = discriminate(&[("coherent", &chains[0]), ("incoherent", &chains[1])], 1e-10).unwrap();
        assert!(!report.comparisons[0].distinguishable, "{model:?}");
        assert!(dets[0].trace_distance(&dets[1]).unwrap() < 1e-15);
        // the branch label itself does tell them apart
        let joint = discriminate(&[("coherent", &pure), ("incoherent", &mixed)], 1e-10).unwrap();
        assert!(joint.comparisons[0].distinguishable);
    }
}

#[test]
fn first_order_tracks_exact_branches() {
    let mut errs = Vec::new();
    for scale in [1.0, 0.5, 0.25] {
        let sp = BranchSpec::new(
            [
                Branch { trajectory: Trajectory::new(-0.2, 2.0), alpha: 10, g: G1 * scale },
                Branch { trajectory: Trajectory::new(-0.3, 3.0), alpha: 5, g: G2 * scale },
            ],
            0.8,
            0.3,
            DetectorModel::Single,
        )
        .unwrap();
        let approx = density_matrix(&evolve_superposed(&sp, 1.0, 1.0, PerturbativeGuard::default()).unwrap());
        let exact = density_matrix(&evolve_superposed_exact(&sp, 1.0, 1.0).unwrap());
        let a = reduce_chain(&approx, &[10, 5]).unwrap();
        let b = reduce_chain(&exact, &[10, 5]).unwrap();
        errs.push(a.trace_distance(&b).unwrap());
    }
    // populations differ at (gt)⁴, so halving gt cuts the distance by ~16
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((12.0..20.0).contains(&ratio), "{errs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reduced_states_ignore_phase(theta in 0.0f64..FRAC_PI_2, phi in 0.0f64..PI) {
        for model in [DetectorModel::Single, DetectorModel::TwoLevel] {
            let base = density_matrix(&state(theta, 0.0, model));
            let rot = density_matrix(&state(theta, phi, model));
            let d = reduce_chain(&base, &[10, 5]).unwrap().trace_distance(&reduce_chain(&rot, &[10, 5]).unwrap()).unwrap();
            prop_assert!(d < 1e-15);
            let e = reduce_detector(&base, model).unwrap().trace_distance(&reduce_detector(&rot, model).unwrap()).unwrap();
            prop_assert!(e < 1e-15);
        }
    }
}
