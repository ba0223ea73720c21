use elliptic_lab::anticonc::{
    cofactor_bilinear_identity_exact, det_bareiss, gap_enumerate, small_ball_exact, GapProgression, IntMatrix,
    SmallBallQuery,
};
use elliptic_lab::atoms::{AtomPairSpec, ScalarAtomSpec};
use elliptic_lab::elliptic::EllipticLaw;
use elliptic_lab::ensemble::EnsembleSpec;
use elliptic_lab::Complex64;
use num_bigint::BigInt;
use proptest::prelude::*;

fn coeffs(max: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b)), 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn small_ball_is_monotone_in_radius(a in coeffs(7), beta in 0.01f64..2.0, grow in 1.0f64..3.0) {
        let lo = small_ball_exact(&SmallBallQuery::scalar(a.clone(), ScalarAtomSpec::Bernoulli, beta)).unwrap();
        let hi = small_ball_exact(&SmallBallQuery::scalar(a, ScalarAtomSpec::Bernoulli, beta * grow)).unwrap();
        prop_assert!(lo.gamma <= hi.gamma + 1e-12);
        prop_assert!(lo.gamma > 0.0 && hi.gamma <= 1.0 + 1e-12);
    }

    #[test]
    fn small_ball_is_scale_invariant(a in coeffs(7), beta in 0.05f64..2.0, c in 0.1f64..10.0) {
        let base = small_ball_exact(&SmallBallQuery::scalar(a.clone(), ScalarAtomSpec::Bernoulli, beta)).unwrap();
        let scaled: Vec<Complex64> = a.iter().map(|z| z * c).collect();
        let other = small_ball_exact(&SmallBallQuery::scalar(scaled, ScalarAtomSpec::Bernoulli, beta * c)).unwrap();
        prop_assert!((base.gamma - other.gamma).abs() < 1e-12, "{} vs {}", base.gamma, other.gamma);
    }

    #[test]
    fn symmetric_gap_is_closed_under_negation(
        gens in prop::collection::vec((-2i32..=2, -2i32..=2), 1..3),
        dims in prop::collection::vec(0i64..3, 3),
    ) {
        let generators: Vec<Complex64> = gens.iter().map(|&(a, b)| Complex64::new(a as f64, b as f64 * 0.5)).collect();
        let q = GapProgression::symmetric(generators.clone(), &dims[..generators.len()]).unwrap();
        prop_assert!(q.symmetric);
        let img = gap_enumerate(&q).unwrap();
        for &(z, mult) in &img.elements {
            let neg = img.elements.iter().find(|(w, _)| (w + z).norm() < 1e-9);
            prop_assert!(neg.is_some_and(|&(_, m)| m == mult), "{z} has no mirror");
        }
        prop_assert_eq!(img.elements.iter().map(|e| e.1 as u128).sum::<u128>(), q.box_size());
    }

    #[test]
    fn cofactor_defect_is_zero(n in 2usize..=6, entries in prop::collection::vec(-20i64..=20, 36)) {
        let m = IntMatrix::from_i64(n, &entries[..n * n]).unwrap();
        let chk = cofactor_bilinear_identity_exact(&m).unwrap();
        prop_assert_eq!(chk.defect, BigInt::from(0));
        let det = det_bareiss(n, &m.data);
        prop_assert_eq!(chk.lhs, det);
    }

    #[test]
    fn elliptic_support_contains_its_boundary_only_after_inflation(rho in -0.95f64..0.95, t in 0.0f64..6.3) {
        let law = EllipticLaw::real(rho).unwrap();
        let (a, b) = (1.0 + rho, 1.0 - rho);
        let just_out = Complex64::new(1.01 * a * t.cos(), 1.01 * b * t.sin());
        prop_assert!(!law.contains(just_out, 1.0));
        prop_assert!(law.contains(just_out, 1.02));
    }

    #[test]
    fn generation_is_a_pure_function_of_seed(seed in any::<u64>(), trial in 0u64..4) {
        let spec = EnsembleSpec::new(5, AtomPairSpec::discrete_mix(0.3), seed);
        prop_assert_eq!(spec.generate_trial(trial).unwrap(), spec.generate_trial(trial).unwrap());
    }
}
