//! Seeded random instances.
//!
//! Complex entries have independent standard normal real and imaginary
//! parts; nonnegative entries are uniform on `[0, 1]`. All generators draw
//! from a caller-provided [`ChaCha8Rng`], so a seed fixes every value.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calderon::DualWitness;
use crate::error::{Error, Result};
use crate::extension::ExtensionProblem;
use crate::model::{ExponentSpec, MatrixOperator};
use crate::norms::real_p_norm;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn complex_vector(len: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Domain(format!("dimensions must be positive, got {rows}x{cols}")));
    }
    Ok(())
}

pub fn random_complex_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<MatrixOperator> {
    check_dims(rows, cols)?;
    MatrixOperator::new(rows, cols, complex_vector(rows * cols, rng))
}

pub fn random_nonneg_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<MatrixOperator> {
    check_dims(rows, cols)?;
    let entries = (0..rows * cols).map(|_| Complex64::new(rng.random::<f64>(), 0.0)).collect();
    MatrixOperator::new(rows, cols, entries)
}

/// Gaussian basis and images; redraws the basis in the (probability zero)
/// event that it fails the rank check.
pub fn random_extension_problem(
    n: usize,
    k: usize,
    m: usize,
    p: ExponentSpec,
    rng: &mut ChaCha8Rng,
) -> Result<ExtensionProblem> {
    check_dims(n, m)?;
    if k == 0 || k > n {
        return Err(Error::Domain(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    loop {
        let basis = (0..k).map(|_| complex_vector(n, rng)).collect();
        let images = (0..k).map(|_| complex_vector(m, rng)).collect();
        match ExtensionProblem::new(p, n, m, basis, images) {
            Err(Error::Domain(_)) => continue,
            other => return other,
        }
    }
}

/// A dual witness for `rows × cols` matrices at `theta`: uniform factors
/// rescaled so that both unit-ball constraints hold, on the boundary with
/// probability one half, and random phases on `b`.
pub fn random_dual_witness(rows: usize, cols: usize, theta: f64, rng: &mut ChaCha8Rng) -> Result<DualWitness> {
    check_dims(rows, cols)?;
    let p = ExponentSpec::from_theta(theta)?;
    if p.is_endpoint() {
        return Err(Error::Domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    let mut b0: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    let mut b1: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    let row_max: Vec<f64> = (0..rows)
        .map(|i| b0[i * cols..(i + 1) * cols].iter().fold(0.0_f64, |a, &b| a.max(b)))
        .collect();
    let col_max: Vec<f64> = (0..cols)
        .map(|j| (0..rows).fold(0.0_f64, |a, i| a.max(b1[i * cols + j])))
        .collect();
    let shrink = |mass: f64, q: f64, rng: &mut ChaCha8Rng| {
        let target = if rng.random::<bool>() { 1.0 } else { rng.random::<f64>().powf(1.0 / q) };
        if mass == 0.0 {
            0.0
        } else {
            target / mass
        }
    };
    let s0 = shrink(real_p_norm(&row_max, p.conjugate()), p.p_conj(), rng);
    let s1 = shrink(real_p_norm(&col_max, p), p.p(), rng);
    b0.iter_mut().for_each(|v| *v *= s0);
    b1.iter_mut().for_each(|v| *v *= s1);
    let b = b0
        .iter()
        .zip(&b1)
        .map(|(x, y)| Complex64::from_polar(x * y, rng.random::<f64>() * std::f64::consts::TAU))
        .collect();
    let real = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    Ok(DualWitness {
        b: MatrixOperator::new(rows, cols, b)?,
        b0: MatrixOperator::new(rows, cols, real(&b0))?,
        b1: MatrixOperator::new(rows, cols, real(&b1))?,
        theta,
        pairing: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = random_complex_matrix(3, 2, &mut rng_from_seed(1)).unwrap();
        let b = random_complex_matrix(3, 2, &mut rng_from_seed(1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_complex_matrix(3, 2, &mut rng_from_seed(2)).unwrap());
    }

    #[test]
    fn nonneg_entries_in_unit_interval() {
        let a = random_nonneg_matrix(4, 4, &mut rng_from_seed(3)).unwrap();
        assert!(a.entries().iter().all(|z| z.im == 0.0 && (0.0..=1.0).contains(&z.re)));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(random_complex_matrix(0, 3, &mut rng_from_seed(0)).is_err());
        let p = ExponentSpec::from_p(2.0).unwrap();
        assert!(random_extension_problem(2, 3, 2, p, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn dual_witnesses_validate() {
        let mut rng = rng_from_seed(9);
        for theta in [0.25, 0.5, 0.8] {
            for _ in 0..50 {
                random_dual_witness(3, 4, theta, &mut rng).unwrap().validate().unwrap();
            }
        }
    }
}
