use proptest::prelude::*;

use regint_core::calderon::dual_pairing;
use regint_core::extension::{extension_bracket_seeded, Budget, ExtensionProblem};
use regint_core::gen::{random_dual_witness, random_extension_problem, rng_from_seed};
use regint_core::model::transpose;
use regint_core::norms::{a0_norm, a1_norm, family_ratio, regular_norm};
use regint_core::{io, Complex64, ExponentSpec, FamilyWitness, MatrixOperator};

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = MatrixOperator> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64), r * c).prop_map(move |v| {
            MatrixOperator::new(r, c, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
        })
    })
}

fn interior_p() -> impl Strategy<Value = ExponentSpec> {
    (1.05..8.0f64).prop_map(|p| ExponentSpec::from_p(p).unwrap())
}

fn norm(a: &MatrixOperator, p: ExponentSpec) -> f64 {
    regular_norm(a, p, 1e-12).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn endpoints_are_closed_forms(a in matrix(6, 6)) {
        prop_assert_eq!(norm(&a, ExponentSpec::ONE), a1_norm(&a));
        prop_assert_eq!(norm(&a, ExponentSpec::INFINITY), a0_norm(&a));
    }

    #[test]
    fn transpose_swaps_exponents(a in matrix(5, 5), p in interior_p()) {
        let r = norm(&a, p);
        let rt = norm(&transpose(&a), p.conjugate());
        prop_assert!((r - rt).abs() <= 1e-7 * r.max(1e-300), "{} vs {}", r, rt);
    }

    #[test]
    fn absolutely_homogeneous(a in matrix(4, 4), p in interior_p(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let c = Complex64::new(re, im);
        let lhs = norm(&a.scaled(c), p);
        let rhs = c.norm() * norm(&a, p);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-12));
    }

    #[test]
    fn zero_column_changes_nothing(a in matrix(4, 4), p in interior_p()) {
        let widened = a.with_column(&vec![Complex64::new(0.0, 0.0); a.rows()]);
        prop_assert!((norm(&widened, p) - norm(&a, p)).abs() <= 1e-9 * norm(&a, p).max(1e-12));
    }

    #[test]
    fn monotone_under_entrywise_domination(a in matrix(4, 4), p in interior_p(), mask in prop::collection::vec(0.0..1.0f64, 16)) {
        let shrunk: Vec<Complex64> = a.entries().iter().zip(&mask).map(|(z, s)| z * s).collect();
        let b = MatrixOperator::new(a.rows(), a.cols(), shrunk).unwrap();
        prop_assert!(norm(&b, p) <= norm(&a, p) * (1.0 + 1e-9));
    }

    #[test]
    fn midpoint_convexity(a in matrix(4, 4), seed in any::<u64>(), p in interior_p()) {
        let b = regint_core::gen::random_complex_matrix(a.rows(), a.cols(), &mut rng_from_seed(seed)).unwrap();
        let mid: Vec<Complex64> = a.entries().iter().zip(b.entries()).map(|(x, y)| (x + y) * 0.5).collect();
        let mid = MatrixOperator::new(a.rows(), a.cols(), mid).unwrap();
        let avg = 0.5 * (norm(&a, p) + norm(&b, p));
        prop_assert!(norm(&mid, p) <= avg * (1.0 + 1e-8));
    }

    #[test]
    fn family_ratio_never_exceeds_norm(a in matrix(4, 3), p in interior_p(), seed in any::<u64>(), size in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let members = (0..size).map(|_| regint_core::gen::complex_vector(a.cols(), &mut rng)).collect();
        let family = FamilyWitness::new(members).unwrap();
        prop_assert!(family_ratio(&a, &family, p).unwrap() <= norm(&a, p) * (1.0 + 1e-9));
    }

    #[test]
    fn sampled_dual_witnesses_are_sound(a in matrix(4, 4), seed in any::<u64>(), theta in 0.05..0.95f64) {
        let dw = random_dual_witness(a.rows(), a.cols(), theta, &mut rng_from_seed(seed)).unwrap();
        let r = norm(&a, ExponentSpec::from_theta(theta).unwrap());
        prop_assert!(dual_pairing(&a, &dw).unwrap() <= r * (1.0 + 1e-9));
    }

    #[test]
    fn matrix_json_round_trips(a in matrix(5, 5)) {
        let back = io::parse_matrix(&io::matrix_to_json(&a)).unwrap();
        prop_assert_eq!(back, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bracket_is_ordered(seed in any::<u64>(), n in 2usize..5, m in 1usize..4, q in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY])) {
        let mut rng = rng_from_seed(seed);
        let k = 1 + (seed as usize) % (n - 1);
        let prob = random_extension_problem(n, k, m, ExponentSpec::from_p(q).unwrap(), &mut rng).unwrap();
        let report = extension_bracket_seeded(&prob, 1e-6, Budget(2), seed).unwrap();
        prop_assert!(report.subspace_lower_bound <= report.min_extension_norm * (1.0 + 1e-9));
        prop_assert!(prob.feasibility_residual(&report.minimizer) <= 1e-8);
        // any feasible extension bounds the minimum from above
        let r = norm(&report.minimizer, prob.p());
        prop_assert!((r - report.min_extension_norm).abs() <= 1e-9 * r.max(1e-12));
    }

    #[test]
    fn restriction_of_a_matrix_extends_no_worse(a in matrix(3, 4), seed in any::<u64>(), q in prop::sample::select(vec![1.0, 2.0, f64::INFINITY])) {
        let p = ExponentSpec::from_p(q).unwrap();
        let mut rng = rng_from_seed(seed);
        let basis = vec![regint_core::gen::complex_vector(a.cols(), &mut rng)];
        let prob = ExtensionProblem::restriction(&a, basis, p).unwrap();
        let report = extension_bracket_seeded(&prob, 1e-6, Budget(2), seed).unwrap();
        prop_assert!(report.min_extension_norm <= norm(&a, p) * (1.0 + 1e-9));
    }
}
