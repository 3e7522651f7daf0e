//! Seeded instances shared by the benchmarks.

use regint_core::extension::ExtensionProblem;
use regint_core::gen::{random_complex_matrix, random_extension_problem, rng_from_seed};
use regint_core::{entrywise_abs, ExponentSpec, MatrixOperator};

pub fn complex_matrix(n: usize, seed: u64) -> MatrixOperator {
    random_complex_matrix(n, n, &mut rng_from_seed(seed)).expect("positive size")
}

pub fn nonneg_matrix(n: usize, seed: u64) -> MatrixOperator {
    entrywise_abs(&complex_matrix(n, seed))
}

pub fn extension_problem(n: usize, k: usize, m: usize, p: f64, seed: u64) -> ExtensionProblem {
    let p = ExponentSpec::from_p(p).expect("valid exponent");
    random_extension_problem(n, k, m, p, &mut rng_from_seed(seed)).expect("valid sizes")
}
