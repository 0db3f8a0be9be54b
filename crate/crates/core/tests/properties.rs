use num_complex::Complex64;
use proptest::prelude::*;

use nbs_core::dynamics::fidelity;
use nbs_core::fock::{apply_annihilation, apply_creation, tail_mass_nbs};
use nbs_core::phasespace::{
    displaced_number_state_adaptive, grid_evaluate, q_function, wigner, Distribution, GridSpec,
    PhaseSpacePoint, SeriesOptions,
};
use nbs_core::states::nbs;
use nbs_core::stats::{factorial_moments, generating_function, mandel_q, mandel_q_numeric};
use nbs_core::su11::commutator_residuals;
use nbs_core::{Exec, FockVector, NbsParams, TruncationPolicy};

fn vector(max_len: usize) -> impl Strategy<Value = FockVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..max_len).prop_map(|c| {
        let amps = c.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        FockVector::new(amps, 0.0).unwrap()
    })
}

fn params() -> impl Strategy<Value = NbsParams> {
    (0.05f64..=1.0, 0usize..12).prop_map(|(eta, m)| NbsParams::new(eta, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_commutator_on_interior(v in vector(40)) {
        let a_ad = apply_annihilation(&apply_creation(&v));
        let ad_a = apply_creation(&apply_annihilation(&v));
        let top = v.n_max();
        let scale = v.norm().max(1.0) * (top as f64 + 1.0);
        for n in 0..top {
            let c = a_ad.amplitudes()[n] - ad_a.amplitudes()[n] - v.amplitudes()[n];
            prop_assert!(c.norm() <= 1e-13 * scale, "n={} residual {}", n, c.norm());
        }
    }

    #[test]
    fn su11_commutators(v in vector(40), m in 0usize..6) {
        prop_assume!(v.n_max() >= m + 4);
        let mut amps = v.into_amplitudes();
        amps[..m].fill(Complex64::new(0.0, 0.0));
        let v = FockVector::new(amps, 0.0).unwrap();
        let [a, b, c] = commutator_residuals(&v, m).unwrap();
        prop_assert!(a < 1e-12 && b < 1e-12 && c < 1e-12, "{} {} {}", a, b, c);
    }

    #[test]
    fn tail_mass_decreases(p in params(), n in 0usize..200, step in 1usize..50) {
        let t0 = tail_mass_nbs(p, n);
        let t1 = tail_mass_nbs(p, n + step);
        prop_assert!((0.0..=1.0).contains(&t0));
        prop_assert!(t1 <= t0 + 1e-15, "{} -> {}", t0, t1);
    }

    #[test]
    fn nbs_is_normalized_with_known_mean(p in params()) {
        let v = nbs(p, &TruncationPolicy::default()).unwrap();
        prop_assert!((v.norm_sqr() - 1.0).abs() < 1e-11);
        prop_assert!(v.tail_bound() < 1e-12);
        let (f1, _) = factorial_moments(p);
        prop_assert!((v.mean_number() - f1).abs() < 1e-8 * (1.0 + f1));
    }

    #[test]
    fn generating_function_is_normalized(p in params()) {
        prop_assert!((generating_function(1.0, p).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mandel_routes_agree(p in params()) {
        let q = mandel_q(p);
        prop_assume!(!q.vacuum);
        let v = nbs(p, &TruncationPolicy::default()).unwrap();
        let numeric = mandel_q_numeric(&v).unwrap();
        prop_assert!((q.value - numeric).abs() < 1e-7 * (1.0 + q.value.abs()), "{} vs {}", q.value, numeric);
        prop_assert!(q.value >= -1.0 - 1e-12);
    }

    #[test]
    fn displaced_number_states_are_unit_vectors(re in -3.0f64..3.0, im in -3.0f64..3.0, k in 0usize..12) {
        let v = displaced_number_state_adaptive(Complex64::new(re, im), k, 1e-13, 1 << 12).unwrap();
        prop_assert!((v.norm_sqr() - 1.0).abs() < 1e-12, "norm {}", v.norm_sqr());
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in vector(30), b in vector(30)) {
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-14);
        prop_assert!((0.0..=1.0 + 1e-14).contains(&ab));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q_is_bounded(p in params(), x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let v = nbs(p, &TruncationPolicy::default()).unwrap();
        let q = q_function(&v, PhaseSpacePoint::new(x, y).unwrap());
        prop_assert!((0.0..=1.0 / std::f64::consts::PI + 1e-15).contains(&q));
    }

    #[test]
    fn wigner_is_bounded(p in params(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let v = nbs(p, &TruncationPolicy::default()).unwrap();
        let w = wigner(&v, PhaseSpacePoint::new(x, y).unwrap(), &SeriesOptions::default()).unwrap();
        prop_assert!(w.abs() <= 2.0 / std::f64::consts::PI + 1e-9, "{}", w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn grid_modes_agree_bitwise(p in params(), n in 2usize..9, s in -1.0f64..=0.0) {
        let v = nbs(p, &TruncationPolicy::default()).unwrap();
        let spec = GridSpec::square(2.5, n);
        let opts = SeriesOptions::default();
        let seq = grid_evaluate(&v, &spec, Distribution::S(s), &opts, Exec::Sequential).unwrap();
        let par = grid_evaluate(&v, &spec, Distribution::S(s), &opts, Exec::Parallel).unwrap();
        prop_assert_eq!(seq, par);
    }
}
