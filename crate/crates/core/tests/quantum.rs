mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use ginzburg::meanfield::Trajectory;
use ginzburg::quantum::evolve::{pair_space, Propagator, MODE};
use ginzburg::quantum::{
    build_ndpa, evolve_exact, evolve_full, evolve_perturbative, DensityMatrix, Factor, FockSpace, FullOptions,
    PerturbativeGuard, QuantumError, QuantumState, DETECTOR,
};
use nalgebra::DVector;
use proptest::prelude::*;

fn bosonic(n_max: usize) -> FockSpace {
    FockSpace::new(vec![Factor::boson(MODE, n_max), Factor::boson(DETECTOR, n_max)]).unwrap()
}

#[test]
fn fock_dimensions() {
    assert_eq!(pair_space(MODE, 1).dim(), 4);
    assert_eq!(pair_space(MODE, 5).dims(), vec![6, 2]);
    assert_eq!(bosonic(10).dim(), 121);
    assert!(matches!(
        FockSpace::new(vec![Factor::boson(MODE, 1), Factor::two_level(MODE)]),
        Err(QuantumError::DuplicateLabel(_))
    ));
}

#[test]
fn two_level_pair_oscillation() {
    let g = 1.3;
    let s = pair_space(MODE, 4);
    let h = build_ndpa(g, &s, MODE, DETECTOR).unwrap();
    let prop = Propagator::new(&h, 1.0).unwrap();
    let vac = QuantumState::vacuum(s.clone());
    let pair = s.index(&[1, 1]).unwrap();
    for t in [0.0, 0.1, 0.7, 2.0, 5.0] {
        let psi = prop.apply(&vac, t).unwrap();
        let expected = common::pair_block(g, t, 1.0);
        assert!((psi.amplitude(0) - expected[0]).norm() < 1e-13);
        assert!((psi.amplitude(pair) - expected[1]).norm() < 1e-13);
        assert_relative_eq!(psi.probability(pair), (0.5 * g * t).sin().powi(2), epsilon = 1e-13);
        assert!((psi.norm() - 1.0).abs() < 1e-13);
    }
}

#[test]
fn bosonic_detector_squeezes_in_pairs() {
    let g = 0.6;
    let s = bosonic(12);
    let h = build_ndpa(g, &s, MODE, DETECTOR).unwrap();
    let prop = Propagator::new(&h, 1.0).unwrap();
    let vac = QuantumState::vacuum(s.clone());
    let n_mode = s.number(MODE).unwrap();
    let n_det = s.number(DETECTOR).unwrap();
    let mut last = 0.0;
    for t in [0.2, 0.5, 1.0, 1.5, 2.0] {
        let psi = prop.apply(&vac, t).unwrap();
        // support only on |n, n⟩
        let off: f64 = (0..s.dim())
            .filter(|&i| {
                let d = s.digits(i);
                d[0] != d[1]
            })
            .map(|i| psi.probability(i))
            .sum();
        assert!(off < 1e-24);
        let mean = psi.expect_diagonal(&n_mode);
        assert_relative_eq!(mean, psi.expect_diagonal(&n_det), epsilon = 1e-12);
        assert_relative_eq!(mean, (0.5 * g * t).sinh().powi(2), max_relative = 1e-6);
        // free energy ℏ(Ω n_a + ω n_b) grows monotonically
        let h0 = 3.0 * mean + 2.0 * psi.expect_diagonal(&n_det);
        assert!(h0 > last);
        last = h0;
    }
}

#[test]
fn perturbative_state_values() {
    let psi = evolve_perturbative(0.1, 1.0, 1.0, PerturbativeGuard::default()).unwrap();
    let s = psi.space().clone();
    let pair = s.index(&[1, 1]).unwrap();
    assert_relative_eq!(psi.probability(pair), 0.0025 / 1.0025, max_relative = 1e-14);
    assert_relative_eq!(psi.probability(0), 1.0 / 1.0025, max_relative = 1e-14);
    let h = build_ndpa(0.1, &s, MODE, DETECTOR).unwrap();
    let exact = evolve_exact(&h, &QuantumState::vacuum(s.clone()), 1.0, 1.0).unwrap();
    assert!((exact.probability(pair) - psi.probability(pair)).abs() < 1e-5);
    assert!(matches!(
        evolve_perturbative(1.0, 1.0, 1.0, PerturbativeGuard::default()),
        Err(QuantumError::Guard { .. })
    ));
}

#[test]
fn density_of_evolved_state_is_valid() {
    let s = pair_space(MODE, 2);
    let h = build_ndpa(0.9, &s, MODE, DETECTOR).unwrap();
    let psi = evolve_exact(&h, &QuantumState::vacuum(s), 1.1, 1.0).unwrap();
    let rho = DensityMatrix::from_state(&psi);
    assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-14);
    assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-13);
    let det = rho.partial_trace(&[DETECTOR]).unwrap();
    let pe = (0.45_f64 * 1.1).sin().powi(2);
    assert_relative_eq!(det.populations()[1], pe, epsilon = 1e-13);
    assert_relative_eq!(det.purity(), pe * pe + (1.0 - pe).powi(2), epsilon = 1e-13);
}

#[test]
fn full_evolution_starts_in_vacuum() {
    let p = common::paper(2001).with_omegas(vec![20.0 * PI]).unwrap();
    let r = evolve_full(&p, Trajectory::new(-0.4, 5.0), &[4, 5, 6], 5, 0.0, None, &FullOptions::default()).unwrap();
    assert_eq!(r.steps, 0);
    assert_eq!(r.pair_probability, 0.0);
    assert_eq!(r.excited_probability, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_evolution_preserves_norm(g in -3.0f64..3.0, t in 0.0f64..10.0, n_max in 1usize..6, seed in 0u64..1000) {
        let s = pair_space(MODE, n_max);
        let h = build_ndpa(g, &s, MODE, DETECTOR).unwrap();
        let amps = DVector::from_iterator(
            s.dim(),
            (0..s.dim()).map(|i| {
                let x = (seed as f64 + 1.0) * (i as f64 + 0.5);
                num_complex::Complex64::new(x.sin(), (1.7 * x).cos())
            }),
        );
        let psi0 = QuantumState::new(s, amps).unwrap().normalized();
        let psi = evolve_exact(&h, &psi0, t, 1.0).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }
}
