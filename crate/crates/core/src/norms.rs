//! Vector, lattice and matrix norms on finite `ℓ_p` spaces, including the
//! regular norm `‖A‖_r = ‖ |A| ‖_{ℓ_p → ℓ_p}` with a certified bracket.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{entrywise_abs, ExponentSpec, FamilyWitness, MatrixOperator, NonnegVector};

/// Default relative bracket width for [`nonneg_operator_p_norm`].
pub const DEFAULT_NORM_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
pub const DEFAULT_RANDOM_STARTS: usize = 8;
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// `‖x‖_p` of a real vector; entries are taken in absolute value.
pub fn real_p_norm(x: &[f64], p: ExponentSpec) -> f64 {
    if p.is_infinite() {
        return x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    }
    if p.is_one() {
        return x.iter().map(|v| v.abs()).sum();
    }
    let scale = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(p.p())).sum();
    scale * s.powf(1.0 / p.p())
}

pub fn vector_p_norm(x: &[Complex64], p: ExponentSpec) -> f64 {
    let moduli: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    real_p_norm(&moduli, p)
}

/// `‖ sup_i |x_i| ‖_p`, the lattice norm of a finite family.
pub fn family_sup_norm(family: &FamilyWitness, p: ExponentSpec) -> f64 {
    real_p_norm(&family.pointwise_sup(), p)
}

fn row_sums(a: &MatrixOperator) -> Vec<f64> {
    (0..a.rows()).map(|i| a.row(i).iter().map(|z| z.norm()).sum()).collect()
}

fn col_sums(a: &MatrixOperator) -> Vec<f64> {
    let mut s = vec![0.0; a.cols()];
    for i in 0..a.rows() {
        for (acc, z) in s.iter_mut().zip(a.row(i)) {
            *acc += z.norm();
        }
    }
    s
}

/// Index and value of the maximum; the lowest index wins ties.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// Maximal absolute row sum (the `ℓ_∞ → ℓ_∞` norm).
pub fn a0_norm(a: &MatrixOperator) -> f64 {
    argmax(&row_sums(a)).1
}

/// Maximal absolute column sum (the `ℓ_1 → ℓ_1` norm).
pub fn a1_norm(a: &MatrixOperator) -> f64 {
    argmax(&col_sums(a)).1
}

/// Sum over rows of the largest entry modulus in each row.
pub fn b0_norm(b: &MatrixOperator) -> f64 {
    (0..b.rows())
        .map(|i| b.row(i).iter().fold(0.0_f64, |m, z| m.max(z.norm())))
        .sum()
}

/// Sum over columns of the largest entry modulus in each column.
pub fn b1_norm(b: &MatrixOperator) -> f64 {
    let mut maxes = vec![0.0_f64; b.cols()];
    for i in 0..b.rows() {
        for (m, z) in maxes.iter_mut().zip(b.row(i)) {
            *m = m.max(z.norm());
        }
    }
    maxes.iter().sum()
}

/// Extremal objects certifying `‖M‖_{p→p}` for a nonnegative matrix `M`.
///
/// `value` is attained: `‖M·maximizer‖_p = value` with `‖maximizer‖_p = 1`,
/// and `⟨dual, M·maximizer⟩ = value` with `‖dual‖_{p′} = 1`. The true norm
/// lies in `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormWitness {
    pub value: f64,
    pub maximizer: NonnegVector,
    pub dual: NonnegVector,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

impl NormWitness {
    /// `⟨y, M x⟩` recomputed from the stored vectors.
    pub fn pairing(&self, m: &MatrixOperator) -> f64 {
        let x = self.maximizer.coords();
        let y = self.dual.coords();
        (0..m.rows())
            .map(|i| y[i] * m.row(i).iter().zip(x).map(|(a, xj)| a.norm() * xj).sum::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_NORM_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            random_starts: DEFAULT_RANDOM_STARTS,
            seed: DEFAULT_SEED,
        }
    }
}

impl NormOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// `‖M‖_{ℓ_p → ℓ_p}` for a nonnegative real matrix, with witnesses.
pub fn nonneg_operator_p_norm(m: &MatrixOperator, p: ExponentSpec, tol: f64) -> Result<NormWitness> {
    nonneg_operator_p_norm_with(m, p, &NormOptions::with_tol(tol), None)
}

/// As [`nonneg_operator_p_norm`], with explicit options and an optional
/// warm-start vector (length `cols`) tried before the default starts.
pub fn nonneg_operator_p_norm_with(
    m: &MatrixOperator,
    p: ExponentSpec,
    opts: &NormOptions,
    warm: Option<&[f64]>,
) -> Result<NormWitness> {
    if !m.is_nonneg_real() {
        return Err(Error::Domain("operator norm route needs a nonnegative real matrix".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let (rows, cols) = m.shape();
    if m.is_zero() {
        return Ok(NormWitness {
            value: 0.0,
            maximizer: NonnegVector::basis(cols, 0),
            dual: NonnegVector::basis(rows, 0),
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
        });
    }
    if p.is_one() {
        let (j, value) = argmax(&col_sums(m));
        return Ok(NormWitness {
            value,
            maximizer: NonnegVector::basis(cols, j),
            dual: NonnegVector::new(vec![1.0; rows])?,
            lower: value,
            upper: value,
            iterations: 0,
        });
    }
    if p.is_infinite() {
        let (i, value) = argmax(&row_sums(m));
        return Ok(NormWitness {
            value,
            maximizer: NonnegVector::new(vec![1.0; cols])?,
            dual: NonnegVector::basis(rows, i),
            lower: value,
            upper: value,
            iterations: 0,
        });
    }
    PowerIteration::new(m, p).run(opts, warm, true)
}

/// As [`nonneg_operator_p_norm_with`], but returns the best witness found
/// even when the bracket `[lower, upper]` stays wider than `tol`.
pub fn nonneg_operator_p_norm_best_effort(
    m: &MatrixOperator,
    p: ExponentSpec,
    opts: &NormOptions,
    warm: Option<&[f64]>,
) -> Result<NormWitness> {
    if p.is_endpoint() || m.is_zero() || !m.is_nonneg_real() || !(opts.tol > 0.0) {
        return nonneg_operator_p_norm_with(m, p, opts, warm);
    }
    PowerIteration::new(m, p).run(opts, warm, false)
}

/// `‖A‖_r`, computed as the `ℓ_p` operator norm of `|A|`.
pub fn regular_norm(a: &MatrixOperator, p: ExponentSpec, tol: f64) -> Result<NormWitness> {
    nonneg_operator_p_norm(&entrywise_abs(a), p, tol)
}

pub fn regular_norm_with(
    a: &MatrixOperator,
    p: ExponentSpec,
    opts: &NormOptions,
    warm: Option<&[f64]>,
) -> Result<NormWitness> {
    nonneg_operator_p_norm_with(&entrywise_abs(a), p, opts, warm)
}

/// `‖ sup_i |A x_i| ‖_p / ‖ sup_i |x_i| ‖_p` for a family `(x_i)`.
pub fn family_ratio(a: &MatrixOperator, family: &FamilyWitness, p: ExponentSpec) -> Result<f64> {
    let images = family.mapped(a)?;
    let denominator = family_sup_norm(family, p);
    if denominator == 0.0 {
        return Err(Error::Domain("family has zero lattice norm".into()));
    }
    Ok(family_sup_norm(&images, p) / denominator)
}

/// Nonlinear power iteration `x ← (Mᵀ (Mx)^{p−1})^{1/(p−1)}` on the
/// submatrix of nonzero rows and columns, bracketed by the Schur test
/// `‖M‖^p ≤ max_j (Mᵀ(Mx)^{p−1})_j / x_j^{p−1}`.
struct PowerIteration {
    p: f64,
    row_index: Vec<usize>,
    col_index: Vec<usize>,
    full_rows: usize,
    full_cols: usize,
    // reduced matrix, row-major
    data: Vec<f64>,
}

struct Step {
    lower: f64,
    upper: f64,
    next: Vec<f64>,
}

impl PowerIteration {
    fn new(m: &MatrixOperator, p: ExponentSpec) -> Self {
        let (rows, cols) = m.shape();
        let entry = |i: usize, j: usize| m.get(i, j).re;
        let row_index: Vec<usize> = (0..rows).filter(|&i| (0..cols).any(|j| entry(i, j) > 0.0)).collect();
        let col_index: Vec<usize> = (0..cols).filter(|&j| (0..rows).any(|i| entry(i, j) > 0.0)).collect();
        let data = row_index
            .iter()
            .flat_map(|&i| col_index.iter().map(move |&j| entry(i, j)))
            .collect();
        Self {
            p: p.p(),
            row_index,
            col_index,
            full_rows: rows,
            full_cols: cols,
            data,
        }
    }

    fn nr(&self) -> usize {
        self.row_index.len()
    }

    fn nc(&self) -> usize {
        self.col_index.len()
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        let nc = self.nc();
        (0..self.nr())
            .map(|i| self.data[i * nc..(i + 1) * nc].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn mul_t(&self, w: &[f64]) -> Vec<f64> {
        let nc = self.nc();
        let mut v = vec![0.0; nc];
        for (i, wi) in w.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            for (acc, a) in v.iter_mut().zip(&self.data[i * nc..(i + 1) * nc]) {
                *acc += a * wi;
            }
        }
        v
    }

    fn normalize(&self, x: &mut [f64]) -> bool {
        let n = real_p_norm(x, ExponentSpec::from_p(self.p).expect("p > 1"));
        if !(n > 0.0 && n.is_finite()) {
            return false;
        }
        x.iter_mut().for_each(|v| *v /= n);
        true
    }

    /// One bracket evaluation at a normalized `x` plus the next iterate.
    fn step(&self, x: &[f64]) -> Step {
        let p = self.p;
        let z = self.mul(x);
        let lower = real_p_norm(&z, ExponentSpec::from_p(p).expect("p > 1"));
        let sz = z.iter().fold(0.0_f64, |a, &b| a.max(b));
        if sz == 0.0 {
            return Step {
                lower: 0.0,
                upper: f64::INFINITY,
                next: vec![1.0; self.nc()],
            };
        }
        let w: Vec<f64> = z.iter().map(|&zi| (zi / sz).powf(p - 1.0)).collect();
        let v = self.mul_t(&w);
        let sx = x.iter().fold(0.0_f64, |a, &b| a.max(b));
        let mut worst = 0.0_f64;
        for (vj, xj) in v.iter().zip(x) {
            let ratio = if *xj == 0.0 {
                if *vj == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                vj / (xj / sx).powf(p - 1.0)
            };
            worst = worst.max(ratio);
        }
        let upper = (sz / sx).powf((p - 1.0) / p) * worst.powf(1.0 / p);
        let vmax = v.iter().fold(0.0_f64, |a, &b| a.max(b));
        let next = if vmax > 0.0 {
            v.iter().map(|&vj| (vj / vmax).powf(1.0 / (p - 1.0))).collect()
        } else {
            vec![1.0; self.nc()]
        };
        Step { lower, upper, next }
    }

    fn starts(&self, opts: &NormOptions, warm: Option<&[f64]>) -> Vec<Vec<f64>> {
        let mut starts = Vec::with_capacity(opts.random_starts + 2);
        if let Some(w) = warm {
            let reduced: Vec<f64> = self.col_index.iter().map(|&j| w[j].max(0.0)).collect();
            if reduced.iter().any(|&v| v > 0.0) {
                // keep the warm start strictly positive so the Schur bound stays finite
                let top = reduced.iter().fold(0.0_f64, |a, &b| a.max(b));
                starts.push(reduced.iter().map(|&v| v.max(top * 1e-12)).collect());
            }
        }
        starts.push(vec![1.0; self.nc()]);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.random_starts {
            starts.push((0..self.nc()).map(|_| rng.random_range(0.05..1.0)).collect());
        }
        starts
    }

    fn run(&self, opts: &NormOptions, warm: Option<&[f64]>, require_closed: bool) -> Result<NormWitness> {
        let mut best_lower = 0.0_f64;
        let mut best_x: Vec<f64> = Vec::new();
        let mut best_upper = f64::INFINITY;
        let mut iterations = 0;
        let closed = |lo: f64, up: f64| up - lo <= opts.tol * lo;

        'starts: for mut x in self.starts(opts, warm) {
            if !self.normalize(&mut x) {
                continue;
            }
            loop {
                if iterations >= opts.max_iterations {
                    break 'starts;
                }
                iterations += 1;
                let Step { lower, upper, mut next } = self.step(&x);
                if lower > best_lower {
                    best_lower = lower;
                    best_x.clone_from(&x);
                }
                best_upper = best_upper.min(upper);
                if closed(best_lower, best_upper) {
                    break 'starts;
                }
                if !self.normalize(&mut next) {
                    break;
                }
                let moved = next.iter().zip(&x).fold(0.0_f64, |a, (u, v)| a.max((u - v).abs()));
                x = next;
                if moved <= 1e-15 {
                    // fixed point that does not close the bracket: try the next start
                    break;
                }
            }
        }

        if require_closed && !closed(best_lower, best_upper) {
            return Err(Error::NormBudget {
                lower: best_lower,
                upper: best_upper,
                iterations,
            });
        }
        Ok(self.witness(best_lower, best_upper, &best_x, iterations))
    }

    fn witness(&self, lower: f64, upper: f64, x: &[f64], iterations: usize) -> NormWitness {
        let p = self.p;
        let z = self.mul(x);
        let sz = z.iter().fold(0.0_f64, |a, &b| a.max(b));
        let mut y: Vec<f64> = z.iter().map(|&zi| (zi / sz).powf(p - 1.0)).collect();
        let yn = real_p_norm(&y, ExponentSpec::from_p(p).expect("p > 1").conjugate());
        y.iter_mut().for_each(|v| *v /= yn);

        let mut x_full = vec![0.0; self.full_cols];
        for (&j, &v) in self.col_index.iter().zip(x) {
            x_full[j] = v;
        }
        let mut y_full = vec![0.0; self.full_rows];
        for (&i, &v) in self.row_index.iter().zip(&y) {
            y_full[i] = v;
        }
        NormWitness {
            value: lower,
            maximizer: NonnegVector::new(x_full).expect("nonnegative iterate"),
            dual: NonnegVector::new(y_full).expect("nonnegative dual"),
            lower,
            upper,
            iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> ExponentSpec {
        ExponentSpec::from_p(v).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sample() -> MatrixOperator {
        MatrixOperator::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap()
    }

    #[test]
    fn vector_norm_examples() {
        assert_eq!(vector_p_norm(&[c(3.0), c(4.0)], p(2.0)), 5.0);
        assert_eq!(vector_p_norm(&[c(1.0), c(1.0), c(1.0)], ExponentSpec::INFINITY), 1.0);
        assert_eq!(vector_p_norm(&[c(1.0), c(-2.0), c(2.0)], ExponentSpec::ONE), 5.0);
    }

    #[test]
    fn family_norm_examples() {
        let e1 = vec![c(1.0), c(0.0)];
        let e2 = vec![c(0.0), c(1.0)];
        let f = FamilyWitness::new(vec![e1, e2]).unwrap();
        assert_eq!(family_sup_norm(&f, ExponentSpec::ONE), 2.0);

        let x = vec![c(3.0), c(-4.0)];
        let single = FamilyWitness::new(vec![x.clone()]).unwrap();
        assert_eq!(family_sup_norm(&single, p(2.0)), vector_p_norm(&x, p(2.0)));

        let f = FamilyWitness::new(vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(-1.0)], vec![c(1.0), c(1.0)]])
            .unwrap();
        assert_eq!(family_sup_norm(&f, ExponentSpec::INFINITY), 1.0);
    }

    #[test]
    fn lattice_matrix_norms() {
        let a = sample();
        assert_eq!(a0_norm(&a), 7.0);
        assert_eq!(a1_norm(&a), 6.0);
        assert_eq!(a0_norm(&MatrixOperator::identity(4)), 1.0);
        assert_eq!(a1_norm(&MatrixOperator::identity(4)), 1.0);
        assert_eq!(a0_norm(&MatrixOperator::zeros(3, 2)), 0.0);

        let b = MatrixOperator::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(b0_norm(&b), 6.0);
        assert_eq!(b1_norm(&b), 7.0);
        assert_eq!(b0_norm(&MatrixOperator::identity(5)), 5.0);
        assert_eq!(b1_norm(&MatrixOperator::identity(5)), 5.0);
        assert_eq!(b0_norm(&b), b1_norm(&crate::model::transpose(&b)));
    }

    #[test]
    fn endpoint_regular_norms() {
        let a = sample();
        let one = regular_norm(&a, ExponentSpec::ONE, 1e-9).unwrap();
        assert_eq!(one.value, 6.0);
        assert_eq!(one.maximizer.coords(), &[0.0, 1.0]);
        let inf = regular_norm(&a, ExponentSpec::INFINITY, 1e-9).unwrap();
        assert_eq!(inf.value, 7.0);
        assert_eq!(inf.dual.coords(), &[0.0, 1.0]);
    }

    #[test]
    fn endpoint_ties_pick_lowest_index() {
        let m = MatrixOperator::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let w = nonneg_operator_p_norm(&m, ExponentSpec::ONE, 1e-9).unwrap();
        assert_eq!(w.maximizer.coords(), &[1.0, 0.0]);
        let w = nonneg_operator_p_norm(&m, ExponentSpec::INFINITY, 1e-9).unwrap();
        assert_eq!(w.dual.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn identity_and_diagonal() {
        for q in [1.0, 1.5, 2.0, 3.0, 7.0, f64::INFINITY] {
            let w = regular_norm(&MatrixOperator::identity(3), p(q), 1e-9).unwrap();
            assert!((w.value - 1.0).abs() < 1e-9, "p={q}: {}", w.value);
            let d = MatrixOperator::diagonal(&[0.5, -3.0, 2.0]);
            let w = regular_norm(&d, p(q), 1e-9).unwrap();
            assert!((w.value - 3.0).abs() < 3e-9, "p={q}: {}", w.value);
        }
    }

    #[test]
    fn all_ones_has_norm_n() {
        for n in 1..5 {
            let m = MatrixOperator::from_real(n, n, &vec![1.0; n * n]).unwrap();
            for q in [1.0, 1.3, 2.0, 4.0, f64::INFINITY] {
                let w = nonneg_operator_p_norm(&m, p(q), 1e-10).unwrap();
                assert!((w.value - n as f64).abs() < 1e-8, "n={n} p={q}: {}", w.value);
            }
        }
    }

    #[test]
    fn zero_rows_and_columns() {
        let m = MatrixOperator::from_rows(&[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 1.0]]).unwrap();
        let w = nonneg_operator_p_norm(&m, p(2.0), 1e-10).unwrap();
        assert!((w.value - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(w.maximizer.coords()[1], 0.0);
        assert_eq!(w.dual.coords()[0], 0.0);

        let z = MatrixOperator::zeros(2, 3);
        let w = nonneg_operator_p_norm(&z, p(3.0), 1e-9).unwrap();
        assert_eq!(w.value, 0.0);
        assert_eq!(w.maximizer.coords(), &[1.0, 0.0, 0.0]);
        assert_eq!(w.dual.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn rejects_negative_entries() {
        assert!(matches!(
            nonneg_operator_p_norm(&sample(), p(2.0), 1e-9),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn budget_error_carries_bracket() {
        let m = MatrixOperator::from_rows(&[vec![1.0, 0.3], vec![0.2, 0.9]]).unwrap();
        let opts = NormOptions {
            tol: 1e-15,
            max_iterations: 2,
            random_starts: 0,
            seed: 1,
        };
        match nonneg_operator_p_norm_with(&m, p(3.0), &opts, None) {
            Err(Error::NormBudget { lower, upper, iterations }) => {
                assert_eq!(iterations, 2);
                assert!(lower > 0.0 && lower <= upper);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn witness_is_normalized_and_tight() {
        let m = MatrixOperator::from_rows(&[vec![0.2, 1.0, 0.4], vec![0.7, 0.1, 0.9], vec![0.3, 0.3, 0.0]])
            .unwrap();
        for q in [1.5, 2.0, 3.0, 7.0] {
            let w = nonneg_operator_p_norm(&m, p(q), 1e-10).unwrap();
            let e = p(q);
            assert!((real_p_norm(w.maximizer.coords(), e) - 1.0).abs() < 1e-12);
            assert!((real_p_norm(w.dual.coords(), e.conjugate()) - 1.0).abs() < 1e-12);
            assert!(w.pairing(&m) >= w.value * (1.0 - 1e-9));
            assert!(w.upper - w.lower <= 1e-10 * w.lower);
        }
    }

    #[test]
    fn family_ratio_cases() {
        let id = MatrixOperator::identity(2);
        let f = FamilyWitness::new(vec![vec![c(1.0), c(-2.0)], vec![c(0.5), c(0.0)]]).unwrap();
        assert!((family_ratio(&id, &f, p(3.0)).unwrap() - 1.0).abs() < 1e-15);

        let zero = FamilyWitness::new(vec![vec![c(0.0), c(0.0)]]).unwrap();
        assert!(matches!(family_ratio(&id, &zero, p(2.0)), Err(Error::Domain(_))));
    }
}
