use dkg_core::dirac_algebra::{algebra_suite, Sign};
use dkg_core::exec::Exec;
use dkg_core::resonance::{check_d_identity, lemma_predicts_empty, mu, vanishing_support_check, LemmaCase, VanishingQuery};
use dkg_core::solver::{generate_initial_data, split_state, Dkgf, InitialDataConfig, SolveOptions};
use dkg_core::spectral_grid::io::{read_snapshot, write_snapshot, FieldRef};
use dkg_core::spectral_grid::{FrequencyLattice, MassParams, Repr, ScalarField};
use dkg_core::vec3::{self, Vec3};
use num_complex::Complex64;
use proptest::prelude::*;

fn frequency() -> impl Strategy<Value = Vec3> {
    (-6.0f64..10.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(l, u, v)| vec3::scale(l.exp2(), vec3::uniform_direction(u, v)))
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

proptest! {
    #[test]
    fn projector_identities(xi in frequency(), mass in 0.0f64..4.0) {
        prop_assert!(algebra_suite(mass, &[xi]).worst() <= 1e-13);
    }

    #[test]
    fn resonance_function_swaps(a in frequency(), b in frequency()) {
        let m = MassParams::unit();
        let lhs = mu(Sign::Plus, Sign::Plus, a, b, &m);
        let rhs = mu(Sign::Minus, Sign::Minus, b, a, &m);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn nonresonant_masses_bound_mu(a in frequency(), b in frequency(), s1 in sign(), s2 in sign()) {
        let m = MassParams::unit();
        let floor = vec3::bracket(1.0, a).min(vec3::bracket(1.0, b)).min(vec3::bracket(1.0, vec3::sub(a, b)));
        prop_assert!(mu(s1, s2, a, b, &m).abs() * floor >= 0.1);
    }

    #[test]
    fn d_identity_holds(a in frequency(), b in frequency(), big in 0.1f64..4.0) {
        prop_assert!(check_d_identity(a, b, big) <= 1e-12);
    }

    #[test]
    fn snapshot_round_trip(seed in 0u64..1000) {
        let lat = FrequencyLattice::new(4, 3.0).unwrap();
        let data: Vec<Complex64> = (0..64u64)
            .map(|i| Complex64::new(((seed * 31 + i) % 17) as f64 - 8.0, ((seed * 7 + 3 * i) % 13) as f64 / 3.0))
            .collect();
        let f = ScalarField::from_data(lat, Repr::Physical, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (bin, _) = write_snapshot(&dir.path().join("f"), "f", 0.5, FieldRef::Scalar(&f)).unwrap();
        let back = read_snapshot(&bin).unwrap().into_scalar().unwrap();
        prop_assert_eq!(back.data(), f.data());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn low_modulation_support_is_empty(k1 in 0u32..6, dk in 0u32..2, k in 0u32..7, gap in 0i32..3, s1 in sign(), s2 in sign()) {
        let k2 = k1 + dk;
        let kmin = k.min(k1) as i32;
        let j = -kmin - 10 - gap;
        let q = VanishingQuery { k, k1, k2, j, j1: j - 1, j2: j, s1, s2, masses: MassParams::unit() };
        prop_assert_eq!(lemma_predicts_empty(&q, None), Some(LemmaCase::LowModulation));
        prop_assert!(vanishing_support_check(&q).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn charge_conserved_and_exec_independent(seed in 0u64..10_000, delta in 0.0f64..0.3) {
        let lat = FrequencyLattice::new(8, 4.0 * std::f64::consts::PI).unwrap();
        let init = generate_initial_data(lat, &InitialDataConfig { delta, seed, ..Default::default() });
        let opts = |exec| SolveOptions { t_end: 0.5, dt: 0.05, output_every: 5, exec, ..Default::default() };
        let masses = MassParams::unit();
        let a = Dkgf::new(lat, masses, true, Exec::Parallel).solve(&init, &opts(Exec::Parallel)).unwrap();
        let b = Dkgf::new(lat, masses, true, Exec::Sequential).solve(&init, &opts(Exec::Sequential)).unwrap();
        prop_assert!(a.max_charge_drift() <= 1e-12 * (1.0 + a.diagnostics[0].charge));
        prop_assert_eq!(&a.diagnostics, &b.diagnostics);
        let s = split_state(&init, masses).unwrap();
        prop_assert!(s.projector_defect() <= 1e-12);
    }
}
