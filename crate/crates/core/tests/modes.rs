mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use ginzburg::modes::{
    self, coupling_any, coupling_prefactor, mode_coupling, mode_frequency, resonance_mode, resonance_pair,
    ModeSpectrum, ModesError,
};
use ginzburg::params::{ChainParams, DetectorParams, SystemParams};
use proptest::prelude::*;

#[test]
fn alpha_ten_coupling_frozen() {
    // 30-digit evaluation of the coupling formula, K₁ from a reference library.
    let p = common::paper(2001);
    let c = mode_coupling(10, &p, 10.0 * PI).unwrap();
    assert_relative_eq!(c.omega, 31.415_603_554_845_335_627, max_relative = 1e-15);
    assert_relative_eq!(c.f_factor, 0.910_924_606_605_770_086_17, max_relative = 1e-14);
    assert_relative_eq!(c.g_alpha, -404_706.898_113_748_247_42, max_relative = 1e-13);
    let c1 = mode_coupling(1, &p, 10.0 * PI).unwrap();
    assert_relative_eq!(c1.g_alpha, -14_021.360_817_369_469_835, max_relative = 1e-13);
}

#[test]
fn spectrum_matches_dense_eigensolve() {
    for n in [3, 5, 21, 41] {
        let chain = ChainParams::new(n, 0.7, 2.3, 0.4).unwrap();
        let eig = common::spring_spectrum(n, chain.m_c(), chain.k_c());
        assert_eq!(eig.len(), n - 1);
        for (i, om2) in eig.iter().enumerate() {
            let om = mode_frequency(i + 1, &chain).unwrap();
            assert_relative_eq!(om2.sqrt(), om, max_relative = 1e-10);
        }
    }
}

#[test]
fn spectrum_monotone_and_bounded_exhaustive() {
    for n in [3, 11, 101, 1001, 2001, 4001] {
        let chain = ChainParams::paper_units(n).unwrap();
        let top = chain.omega_max();
        let om: Vec<f64> = (1..n).map(|a| mode_frequency(a, &chain).unwrap()).collect();
        assert!(om.windows(2).all(|w| w[1] > w[0]), "N = {n}");
        assert!(om.iter().all(|&o| o <= top));
        assert_relative_eq!(om[n - 2], top, max_relative = 1e-15);
    }
}

#[test]
fn fundamental_small_angle() {
    let chain = ChainParams::paper_units(1001).unwrap();
    assert_relative_eq!(mode_frequency(1, &chain).unwrap(), PI, max_relative = 1e-5);
    assert!(matches!(mode_frequency(0, &chain), Err(ModesError::OutOfRange { .. })));
    assert!(matches!(mode_frequency(1000, &chain), Ok(_)));
    assert!(matches!(mode_frequency(1001, &chain), Err(ModesError::OutOfRange { .. })));
}

#[test]
fn truncation_is_a_distinct_error() {
    let p = common::paper(2001);
    let s = ModeSpectrum::from_params(&p);
    let beyond = s.retained_max() + 1;
    assert!(matches!(mode_coupling(beyond, &p, 10.0 * PI), Err(ModesError::Truncated { .. })));
    assert!(coupling_any(beyond, &p, 10.0 * PI).is_ok());
}

#[test]
fn reduced_mass_scaling() {
    let p = common::paper(2001);
    let d = &p.detector;
    let heavy = DetectorParams::new(d.total_mass(), 2.0 * d.reduced_mass(), d.k_d(), d.a_d(), d.omegas().to_vec(), d.w())
        .unwrap();
    let q = SystemParams::new(p.units, p.chain, heavy, p.coupling.clone());
    let a = mode_coupling(7, &p, 10.0 * PI).unwrap().g_alpha;
    let b = mode_coupling(7, &q, 10.0 * PI).unwrap().g_alpha;
    assert_relative_eq!(b / a, 1.0 / 2f64.sqrt(), max_relative = 1e-14);
}

#[test]
fn cutoff_suppression_at_y_ten() {
    let p = common::paper(2001);
    let s = ModeSpectrum::from_params(&p);
    let alpha = s.retained_max();
    let c = mode_coupling(alpha, &p, 10.0 * PI).unwrap();
    let pre = coupling_prefactor(c.omega, &p, 10.0 * PI);
    assert!(c.g_alpha < 0.0);
    assert!(c.g_alpha.abs() < 1e-3 * pre);
}

#[test]
fn resonance_examples() {
    let p = common::paper(2001);
    let r = resonance_mode(2.0, 10.0 * PI, &p).unwrap();
    assert_eq!(r.alpha, 10);
    assert_relative_eq!(r.omega_star, 10.0 * PI, max_relative = 1e-15);
    assert_eq!(resonance_mode(1.5, 10.0 * PI, &p).unwrap().alpha, 20);
    assert!(matches!(resonance_mode(1.0, 10.0 * PI, &p), Err(ModesError::Subsonic { .. })));
    assert!(matches!(resonance_mode(0.3, 10.0 * PI, &p), Err(ModesError::Subsonic { .. })));
}

#[test]
fn pair_selectivity_flags() {
    let p = common::paper(2001);
    let bad = resonance_pair(2.0, 3.0, 10.0 * PI, 10.0 * PI, &p, None).unwrap();
    assert_eq!((bad.first.alpha, bad.second.alpha), (10, 5));
    assert!(bad.selectivity_violated);

    let good = resonance_pair(2.0, 3.5, 11.0 * PI, 12.5 * PI, &p, None).unwrap();
    assert_eq!((good.first.alpha, good.second.alpha), (11, 5));
    assert!(!good.selectivity_violated);
    // scan oracle: no retained mode satisfies either cross condition within the guard
    let chain = &p.chain;
    for alpha in ModeSpectrum::from_params(&p).retained() {
        for (v, om) in [(2.0, 12.5 * PI), (3.5, 11.0 * PI)] {
            assert!(modes::detuning(alpha, v, om, chain).unwrap() >= good.guard);
        }
    }
    assert!(matches!(
        resonance_pair(2.0, 2.0, 10.0 * PI, 11.0 * PI, &p, None),
        Err(ModesError::VelocityOrder { .. })
    ));
}

proptest! {
    #[test]
    fn resonant_mode_minimizes_detuning(alpha_star in 1.0f64..100.0, v in 1.3f64..8.0) {
        // Below α ≈ 100 the lattice correction moves the optimum by < 0.1 of a
        // mode, so away from half-integers the rounded α is the exact minimizer.
        prop_assume!((alpha_star - alpha_star.round()).abs() < 0.4);
        let p = common::paper(2001);
        let omega_d = alpha_star * PI * (v - 1.0);
        let r = resonance_mode(v, omega_d, &p).unwrap();
        let best = ModeSpectrum::from_params(&p)
            .retained()
            .min_by(|&a, &b| {
                let da = modes::detuning(a, v, omega_d, &p.chain).unwrap();
                let db = modes::detuning(b, v, omega_d, &p.chain).unwrap();
                da.total_cmp(&db)
            })
            .unwrap();
        prop_assert_eq!(r.alpha, best);
    }
}
