//! Shared domain types: complex matrices acting between finite `ℓ_p` spaces,
//! exponent bookkeeping with explicit endpoints, and the vector/family types
//! used as norm witnesses.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex `rows × cols` matrix, identified with an operator
/// `ℓ_p^cols → ℓ_p^rows`. Entries are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl MatrixOperator {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Structure(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Structure(format!(
                "{rows}x{cols} matrix needs {} entries, found {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Structure(format!(
                "entry {k} (row {}, col {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a real matrix from row-major values.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Structure("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_real(rows.len(), cols, &flat)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.entries[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(value.re.is_finite() && value.im.is_finite());
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Entry moduli in row-major order.
    pub fn moduli(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.norm()).collect()
    }

    /// True when every entry is real (zero imaginary part) and nonnegative.
    pub fn is_nonneg_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let entries: Vec<_> = self.entries.iter().map(|z| z * factor).collect();
        Self::new(self.rows, self.cols, entries).expect("scaling by a finite factor")
    }

    /// `self · x` for a complex vector of length `cols`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Appends a column, used by the zero-fill monotonicity checks.
    pub fn with_column(&self, column: &[Complex64]) -> Self {
        assert_eq!(column.len(), self.rows);
        let cols = self.cols + 1;
        let mut entries = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            entries.extend_from_slice(self.row(i));
            entries.push(column[i]);
        }
        Self::new(self.rows, cols, entries).expect("finite column")
    }
}

/// `|A|`: the matrix of entry moduli.
pub fn entrywise_abs(a: &MatrixOperator) -> MatrixOperator {
    MatrixOperator {
        rows: a.rows,
        cols: a.cols,
        entries: a.entries.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect(),
    }
}

pub fn transpose(a: &MatrixOperator) -> MatrixOperator {
    let mut entries = Vec::with_capacity(a.entries.len());
    for j in 0..a.cols {
        for i in 0..a.rows {
            entries.push(a.get(i, j));
        }
    }
    MatrixOperator {
        rows: a.cols,
        cols: a.rows,
        entries,
    }
}

/// An exponent `p ∈ [1, ∞]` together with `θ = 1/p` and the conjugate `p′`.
///
/// The endpoints are stored exactly (`θ = 0 ⇔ p = ∞`, `θ = 1 ⇔ p = 1`) so
/// that callers can route them to closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSpec {
    theta: f64,
    p: f64,
    p_conj: f64,
}

impl ExponentSpec {
    pub const ONE: ExponentSpec = ExponentSpec {
        theta: 1.0,
        p: 1.0,
        p_conj: f64::INFINITY,
    };

    pub const INFINITY: ExponentSpec = ExponentSpec {
        theta: 0.0,
        p: f64::INFINITY,
        p_conj: 1.0,
    };

    pub fn from_p(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("exponent p must lie in [1, inf], got {p}")));
        }
        if p == 1.0 {
            return Ok(Self::ONE);
        }
        if p.is_infinite() {
            return Ok(Self::INFINITY);
        }
        Ok(Self {
            theta: 1.0 / p,
            p,
            p_conj: p / (p - 1.0),
        })
    }

    pub fn from_theta(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta must lie in [0, 1], got {theta}")));
        }
        if theta == 0.0 {
            return Ok(Self::INFINITY);
        }
        if theta == 1.0 {
            return Ok(Self::ONE);
        }
        Ok(Self {
            theta,
            p: 1.0 / theta,
            p_conj: 1.0 / (1.0 - theta),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }

    pub fn is_one(&self) -> bool {
        self.p == 1.0
    }

    pub fn is_infinite(&self) -> bool {
        self.p.is_infinite()
    }

    pub fn is_endpoint(&self) -> bool {
        self.is_one() || self.is_infinite()
    }

    /// The exponent `p′` with `1/p + 1/p′ = 1`.
    pub fn conjugate(&self) -> Self {
        if self.p.is_infinite() {
            Self::ONE
        } else if self.p == 1.0 {
            Self::INFINITY
        } else {
            Self {
                theta: 1.0 / self.p_conj,
                p: self.p_conj,
                p_conj: self.p,
            }
        }
    }

    /// Parses `"inf"`/`"infinity"` or a decimal number.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Self::INFINITY);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| Error::Domain(format!("cannot parse exponent {t:?}")))?;
        Self::from_p(p)
    }
}

impl fmt::Display for ExponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.p)
        }
    }
}

/// A vector with nonnegative finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegVector(Vec<f64>);

impl NonnegVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|&c| !(c.is_finite() && c >= 0.0)) {
            return Err(Error::Domain("coordinates must be finite and nonnegative".into()));
        }
        Ok(Self(coords))
    }

    /// The unit vector `e_k` of length `len`.
    pub fn basis(len: usize, k: usize) -> Self {
        let mut v = vec![0.0; len];
        v[k] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.0.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

/// A finite family `(x_i)` of vectors in a common `ℓ_p^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyWitness {
    members: Vec<Vec<Complex64>>,
}

impl FamilyWitness {
    pub fn new(members: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Domain("family must be nonempty".into()));
        };
        let len = first.len();
        if members.iter().any(|m| m.len() != len) {
            return Err(Error::Structure("family members have unequal lengths".into()));
        }
        if members.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("family members must be finite".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Vec<Complex64>] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Pointwise `sup_i |x_i(j)|`.
    pub fn pointwise_sup(&self) -> Vec<f64> {
        let mut s = vec![0.0_f64; self.dim()];
        for m in &self.members {
            for (acc, z) in s.iter_mut().zip(m) {
                *acc = acc.max(z.norm());
            }
        }
        s
    }

    /// The image family `(A x_i)`.
    pub fn mapped(&self, a: &MatrixOperator) -> Result<Self> {
        if a.cols() != self.dim() {
            return Err(Error::Shape {
                expected: (a.rows(), self.dim()),
                found: a.shape(),
            });
        }
        Ok(Self {
            members: self.members.iter().map(|x| a.apply(x)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn abs_of_signed_matrix() {
        let a = MatrixOperator::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        let expected = MatrixOperator::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(entrywise_abs(&a), expected);
    }

    #[test]
    fn abs_of_imaginary_unit() {
        let a = MatrixOperator::new(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(entrywise_abs(&a).get(0, 0), c(1.0, 0.0));
    }

    #[test]
    fn abs_of_zero() {
        let z = MatrixOperator::zeros(2, 3);
        assert_eq!(entrywise_abs(&z), z);
    }

    #[test]
    fn transpose_cases() {
        let a = MatrixOperator::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let at = MatrixOperator::from_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(transpose(&a), at);

        let row = MatrixOperator::from_real(1, 3, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(transpose(&row).shape(), (3, 1));

        let sym = MatrixOperator::from_rows(&[vec![1.0, 5.0], vec![5.0, 2.0]]).unwrap();
        assert_eq!(transpose(&sym), sym);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            MatrixOperator::new(2, 2, vec![c(1.0, 0.0); 3]),
            Err(Error::Structure(_))
        ));
        assert!(MatrixOperator::new(0, 2, vec![]).is_err());
        assert!(MatrixOperator::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn exponent_endpoints_are_exact() {
        let one = ExponentSpec::from_p(1.0).unwrap();
        assert!(one.is_one() && one.theta() == 1.0 && one.p_conj().is_infinite());
        let inf = ExponentSpec::from_theta(0.0).unwrap();
        assert!(inf.is_infinite() && inf.p_conj() == 1.0);
        let half = ExponentSpec::from_theta(0.5).unwrap();
        assert_eq!((half.p(), half.p_conj()), (2.0, 2.0));
        let three = ExponentSpec::from_p(3.0).unwrap();
        assert!((1.0 / three.p() + 1.0 / three.p_conj() - 1.0).abs() < 1e-15);
        assert_eq!(three.conjugate().conjugate(), three);
        assert!(ExponentSpec::from_p(0.5).is_err());
        assert!(ExponentSpec::from_theta(1.5).is_err());
        assert_eq!(ExponentSpec::parse("inf").unwrap(), ExponentSpec::INFINITY);
        assert_eq!(ExponentSpec::parse("2").unwrap().p(), 2.0);
    }

    #[test]
    fn family_requires_equal_lengths() {
        assert!(FamilyWitness::new(vec![]).is_err());
        assert!(FamilyWitness::new(vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).is_err());
        let f = FamilyWitness::new(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, -2.0)]])
            .unwrap();
        assert_eq!(f.pointwise_sup(), vec![1.0, 2.0]);
    }

    #[test]
    fn nonneg_vector_rejects_negative() {
        assert!(NonnegVector::new(vec![1.0, -0.1]).is_err());
        assert!(NonnegVector::new(vec![0.0, 2.0]).is_ok());
    }
}
