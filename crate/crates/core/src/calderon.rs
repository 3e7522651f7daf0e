//! Calderón-product norms for the couple of row-sum / column-sum matrix
//! norms, factorization certificates, and dual-pairing lower bounds.
//!
//! For `θ ∈ (0,1)` and `p = 1/θ` the product norm
//! `inf { a0(f0)^{1−θ} a1(f1)^θ : |a_ij| ≤ f0_ij^{1−θ} f1_ij^θ }`
//! coincides with the regular norm on `ℓ_p`. The solver here computes the
//! product side independently (log-space convex minimization over `f0` on the
//! support of `A`) and [`verify_interpolation`] compares both routes together with
//! the dual pairing.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, MatrixRecord};
use crate::model::{entrywise_abs, ExponentSpec, MatrixOperator};
use crate::norms::{a0_norm, a1_norm, real_p_norm, regular_norm_with, NormOptions, NormWitness};

/// Relative slack accepted on the entrywise constraint and on the bound.
pub const CERT_SLACK: f64 = 1e-9;
pub const DEFAULT_CALDERON_TOL: f64 = 1e-6;
/// Slack on the dual-ball constraints of a [`DualWitness`].
pub const DUAL_SLACK: f64 = 1e-12;

/// Certificate `|a_ij| ≤ f0_ij^{1−θ} f1_ij^θ` with
/// `bound = a0(f0)^{1−θ} · a1(f1)^θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub theta: f64,
    pub f0: MatrixOperator,
    pub f1: MatrixOperator,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationCheck {
    /// `max (log|a_ij| − (1−θ) log f0_ij − θ log f1_ij)₊` over the support.
    pub residual: f64,
    pub recomputed_bound: f64,
    pub accepted: bool,
}

/// A matrix `b` with `|b_ij| = b0_ij · b1_ij`,
/// `Σ_i (max_j b0_ij)^{p′} ≤ 1` and `Σ_j (max_i b1_ij)^p ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWitness {
    pub b: MatrixOperator,
    pub b0: MatrixOperator,
    pub b1: MatrixOperator,
    pub theta: f64,
    pub pairing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalderonOptions {
    pub tol: f64,
    /// Smoothing temperatures, applied in order.
    pub temperatures: [f64; 4],
    pub steps_per_stage: usize,
    pub norm: NormOptions,
}

impl Default for CalderonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_CALDERON_TOL,
            temperatures: [1e-1, 1e-2, 1e-3, 1e-4],
            steps_per_stage: 200,
            norm: NormOptions::with_tol(1e-11),
        }
    }
}

fn check_theta(theta: f64) -> Result<ExponentSpec> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    ExponentSpec::from_theta(theta)
}

/// The Calderón-product norm of `A` and a certificate attaining it.
pub fn calderon_norm(a: &MatrixOperator, theta: f64, tol: f64) -> Result<(f64, Factorization)> {
    calderon_norm_with(
        a,
        theta,
        &CalderonOptions {
            tol,
            ..CalderonOptions::default()
        },
    )
}

pub fn calderon_norm_with(a: &MatrixOperator, theta: f64, opts: &CalderonOptions) -> Result<(f64, Factorization)> {
    let p = check_theta(theta)?;
    let abs = entrywise_abs(a);
    let (rows, cols) = a.shape();
    if abs.is_zero() {
        let zero = MatrixOperator::zeros(rows, cols);
        let cert = Factorization {
            theta,
            f0: zero.clone(),
            f1: zero,
            bound: 0.0,
        };
        return Ok((0.0, cert));
    }

    let witness = regular_norm_with(&abs, p, &opts.norm, None)?;
    let problem = LogProblem::new(&abs, theta);
    let mut best = problem.warm_start(&abs, &witness);
    let mut best_value = problem.objective(&best);

    for &tau in &opts.temperatures {
        let mut u = best.clone();
        let mut step = 1.0;
        for _ in 0..opts.steps_per_stage {
            let (fu, grad) = problem.smoothed(&u, tau);
            let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
            if gnorm2 < 1e-24 {
                break;
            }
            step *= 2.0;
            let accepted = loop {
                let trial: Vec<f64> = u.iter().zip(&grad).map(|(ui, gi)| ui - step * gi).collect();
                let (ft, _) = problem.smoothed(&trial, tau);
                if ft <= fu - 1e-4 * step * gnorm2 {
                    break Some(trial);
                }
                step *= 0.5;
                if step < 1e-14 {
                    break None;
                }
            };
            let Some(next) = accepted else { break };
            u = next;
            let value = problem.objective(&u);
            if value < best_value {
                best_value = value;
                best.clone_from(&u);
            }
        }
    }

    let cert = problem.certificate(&best, rows, cols);
    let value = cert.bound;
    if value > witness.lower * (1.0 + opts.tol) {
        return Err(Error::CalderonBudget { best: Box::new(cert) });
    }
    Ok((value, cert))
}

/// `g(u) = (1−θ)·log max_i Σ_j e^{u_ij} + θ·log max_j Σ_i e^{(log a_ij − (1−θ) u_ij)/θ}`
/// over `u = log f0` on the support of `A`; `f1` is eliminated by equality.
struct LogProblem {
    theta: f64,
    // (row, col, log a_ij) for every nonzero entry
    support: Vec<(usize, usize, f64)>,
    rows: usize,
    cols: usize,
}

fn logsumexp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

impl LogProblem {
    fn new(abs: &MatrixOperator, theta: f64) -> Self {
        let (rows, cols) = abs.shape();
        let mut support = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let v = abs.get(i, j).re;
                if v > 0.0 {
                    support.push((i, j, v.ln()));
                }
            }
        }
        Self {
            theta,
            support,
            rows,
            cols,
        }
    }

    /// The Schur-test factorization `f0_ij = a_ij x_j / (|A|x)_i` built from
    /// the norm maximizer.
    fn warm_start(&self, abs: &MatrixOperator, witness: &NormWitness) -> Vec<f64> {
        let x = witness.maximizer.coords();
        let top = x.iter().fold(0.0_f64, |a, &b| a.max(b));
        let x: Vec<f64> = x.iter().map(|&v| v.max(top * 1e-150)).collect();
        let z: Vec<f64> = (0..self.rows)
            .map(|i| abs.row(i).iter().zip(&x).map(|(a, xj)| a.re * xj).sum())
            .collect();
        self.support
            .iter()
            .map(|&(i, j, la)| la + x[j].ln() - z[i].ln())
            .collect()
    }

    fn row_col_lse(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut row_terms: Vec<Vec<f64>> = vec![Vec::new(); self.rows];
        let mut col_terms: Vec<Vec<f64>> = vec![Vec::new(); self.cols];
        let w: Vec<f64> = self
            .support
            .iter()
            .zip(u)
            .map(|(&(_, _, la), &ui)| (la - (1.0 - self.theta) * ui) / self.theta)
            .collect();
        for (k, &(i, j, _)) in self.support.iter().enumerate() {
            row_terms[i].push(u[k]);
            col_terms[j].push(w[k]);
        }
        let r = row_terms.iter().map(|t| logsumexp(t.iter().copied())).collect();
        let c = col_terms.iter().map(|t| logsumexp(t.iter().copied())).collect();
        (r, c, w)
    }

    fn objective(&self, u: &[f64]) -> f64 {
        let (r, c, _) = self.row_col_lse(u);
        let rmax = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cmax = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (1.0 - self.theta) * rmax + self.theta * cmax
    }

    /// Softmax-smoothed objective at temperature `tau` and its gradient.
    fn smoothed(&self, u: &[f64], tau: f64) -> (f64, Vec<f64>) {
        let th = self.theta;
        let (r, c, w) = self.row_col_lse(u);
        let finite = |v: &Vec<f64>| v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>();
        let (rf, cf) = (finite(&r), finite(&c));
        let lr = tau * logsumexp(rf.iter().map(|v| v / tau));
        let lc = tau * logsumexp(cf.iter().map(|v| v / tau));
        let value = (1.0 - th) * lr + th * lc;
        let pi: Vec<f64> = r.iter().map(|&ri| ((ri - lr) / tau).exp()).collect();
        let sigma: Vec<f64> = c.iter().map(|&cj| ((cj - lc) / tau).exp()).collect();
        let grad = self
            .support
            .iter()
            .enumerate()
            .map(|(k, &(i, j, _))| {
                let rho = (u[k] - r[i]).exp();
                let kappa = (w[k] - c[j]).exp();
                (1.0 - th) * (pi[i] * rho - sigma[j] * kappa)
            })
            .collect();
        (value, grad)
    }

    fn certificate(&self, u: &[f64], rows: usize, cols: usize) -> Factorization {
        let th = self.theta;
        let mut f0 = vec![0.0; rows * cols];
        let mut f1 = vec![0.0; rows * cols];
        for (&(i, j, la), &ui) in self.support.iter().zip(u) {
            f0[i * cols + j] = ui.exp();
            f1[i * cols + j] = ((la - (1.0 - th) * ui) / th).exp();
        }
        let f0 = MatrixOperator::from_real(rows, cols, &f0).expect("finite factor");
        let f1 = MatrixOperator::from_real(rows, cols, &f1).expect("finite factor");
        normalized_factorization(th, f0, f1)
    }
}

/// Rescales `f0 → λ f0`, `f1 → λ^{−(1−θ)/θ} f1` so that `a0(f0) = a1(f1)`.
fn normalized_factorization(theta: f64, f0: MatrixOperator, f1: MatrixOperator) -> Factorization {
    let (n0, n1) = (a0_norm(&f0), a1_norm(&f1));
    let (f0, f1) = if n0 > 0.0 && n1 > 0.0 {
        let lambda = (n1 / n0).powf(theta);
        let mu = lambda.powf(-(1.0 - theta) / theta);
        (scale_real(&f0, lambda), scale_real(&f1, mu))
    } else {
        (f0, f1)
    };
    let bound = a0_norm(&f0).powf(1.0 - theta) * a1_norm(&f1).powf(theta);
    Factorization { theta, f0, f1, bound }
}

fn scale_real(m: &MatrixOperator, s: f64) -> MatrixOperator {
    let v: Vec<f64> = m.entries().iter().map(|z| z.re * s).collect();
    MatrixOperator::from_real(m.rows(), m.cols(), &v).expect("finite scaling")
}

pub fn verify_factorization(a: &MatrixOperator, cert: &Factorization) -> Result<FactorizationCheck> {
    for f in [&cert.f0, &cert.f1] {
        if f.shape() != a.shape() {
            return Err(Error::Shape {
                expected: a.shape(),
                found: f.shape(),
            });
        }
    }
    check_theta(cert.theta)?;
    let th = cert.theta;
    let mut residual = 0.0_f64;
    for ((za, z0), z1) in a.entries().iter().zip(cert.f0.entries()).zip(cert.f1.entries()) {
        let m = za.norm();
        if m == 0.0 {
            continue;
        }
        let (f0, f1) = (z0.norm(), z1.norm());
        let excess = if f0 == 0.0 || f1 == 0.0 {
            f64::INFINITY
        } else {
            m.ln() - (1.0 - th) * f0.ln() - th * f1.ln()
        };
        residual = residual.max(excess);
    }
    let recomputed_bound = a0_norm(&cert.f0).powf(1.0 - th) * a1_norm(&cert.f1).powf(th);
    let accepted = residual <= CERT_SLACK && recomputed_bound <= cert.bound * (1.0 + CERT_SLACK);
    Ok(FactorizationCheck {
        residual,
        recomputed_bound,
        accepted,
    })
}

/// The witness `b_ij = y_i x_j` with `b0_ij = y_i`, `b1_ij = x_j`, built
/// from a norm witness for `|A|` at `p = 1/θ`.
pub fn dual_witness_from_norm_witness(a: &MatrixOperator, w: &NormWitness, theta: f64) -> Result<DualWitness> {
    let p = check_theta(theta)?;
    let (x, y) = (w.maximizer.coords(), w.dual.coords());
    let (rows, cols) = a.shape();
    if x.len() != cols || y.len() != rows {
        return Err(Error::Shape {
            expected: (rows, cols),
            found: (y.len(), x.len()),
        });
    }
    let xn = real_p_norm(x, p);
    let yn = real_p_norm(y, p.conjugate());
    if (xn - 1.0).abs() > 1e-9 || (yn - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "norm witness is not normalized: |x|_p = {xn}, |y|_p' = {yn}"
        )));
    }
    let mut b = Vec::with_capacity(rows * cols);
    let mut b0 = Vec::with_capacity(rows * cols);
    let mut b1 = Vec::with_capacity(rows * cols);
    for &yi in y {
        for &xj in x {
            b.push(yi * xj);
            b0.push(yi);
            b1.push(xj);
        }
    }
    let b = MatrixOperator::from_real(rows, cols, &b)?;
    let pairing = pairing_sum(a, &b);
    Ok(DualWitness {
        b,
        b0: MatrixOperator::from_real(rows, cols, &b0)?,
        b1: MatrixOperator::from_real(rows, cols, &b1)?,
        theta,
        pairing,
    })
}

fn pairing_sum(a: &MatrixOperator, b: &MatrixOperator) -> f64 {
    a.entries().iter().zip(b.entries()).map(|(x, y)| x.norm() * y.norm()).sum()
}

impl DualWitness {
    /// Checks the split and the two dual-ball constraints.
    pub fn validate(&self) -> Result<()> {
        let p = check_theta(self.theta)?;
        let shape = self.b.shape();
        for m in [&self.b0, &self.b1] {
            if m.shape() != shape {
                return Err(Error::Shape {
                    expected: shape,
                    found: m.shape(),
                });
            }
        }
        if !(self.b0.is_nonneg_real() && self.b1.is_nonneg_real()) {
            return Err(Error::Domain("b0 and b1 must be nonnegative".into()));
        }
        for ((b, b0), b1) in self.b.entries().iter().zip(self.b0.entries()).zip(self.b1.entries()) {
            let split = b0.re * b1.re;
            if (b.norm() - split).abs() > DUAL_SLACK * split.max(1.0) {
                return Err(Error::Domain("|b_ij| differs from b0_ij * b1_ij".into()));
            }
        }
        let (rows, cols) = shape;
        let beta: Vec<f64> = (0..rows)
            .map(|i| self.b0.row(i).iter().fold(0.0_f64, |m, z| m.max(z.re)))
            .collect();
        let alpha: Vec<f64> = (0..cols)
            .map(|j| (0..rows).fold(0.0_f64, |m, i| m.max(self.b1.get(i, j).re)))
            .collect();
        let beta_mass: f64 = beta.iter().map(|v| v.powf(p.p_conj())).sum();
        let alpha_mass: f64 = alpha.iter().map(|v| v.powf(p.p())).sum();
        if beta_mass > 1.0 + DUAL_SLACK || alpha_mass > 1.0 + DUAL_SLACK {
            return Err(Error::Domain(format!(
                "dual witness outside the unit ball: row mass {beta_mass}, column mass {alpha_mass}"
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        assert!(s >= 0.0);
        Self {
            b: scale_real_or_complex(&self.b, s),
            b0: scale_real(&self.b0, s),
            b1: self.b1.clone(),
            theta: self.theta,
            pairing: self.pairing * s,
        }
    }
}

fn scale_real_or_complex(m: &MatrixOperator, s: f64) -> MatrixOperator {
    m.scaled(num_complex::Complex64::new(s, 0.0))
}

/// `Σ_ij |a_ij b_ij|` for a validated dual witness.
pub fn dual_pairing(a: &MatrixOperator, dw: &DualWitness) -> Result<f64> {
    dw.validate()?;
    if dw.b.shape() != a.shape() {
        return Err(Error::Shape {
            expected: a.shape(),
            found: dw.b.shape(),
        });
    }
    Ok(pairing_sum(a, &dw.b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationReport {
    pub theta: f64,
    pub regular: f64,
    pub calderon: f64,
    pub pairing: f64,
    pub upper_product: f64,
    /// `|calderon − regular| / regular`.
    pub relative_gap: f64,
    pub pass: bool,
    pub certificate: Factorization,
    pub dual: DualWitness,
}

/// Computes the regular norm, the Calderón-product norm and the pairing of
/// the constructed dual witness, and checks the sandwich
/// `pairing ≤ regular ≤ calderon ≤ a0^{1−θ} a1^θ` with `calderon ≈ regular`.
pub fn verify_interpolation(a: &MatrixOperator, theta: f64, tol: f64) -> Result<InterpolationReport> {
    let p = check_theta(theta)?;
    let opts = CalderonOptions {
        tol,
        ..CalderonOptions::default()
    };
    let witness = regular_norm_with(a, p, &opts.norm, None)?;
    let regular = witness.value;
    let (calderon, certificate) = calderon_norm_with(a, theta, &opts)?;
    let dual = dual_witness_from_norm_witness(a, &witness, theta)?;
    let pairing = dual_pairing(a, &dual)?;
    let upper_product = a0_norm(a).powf(1.0 - theta) * a1_norm(a).powf(theta);
    let relative_gap = if regular > 0.0 {
        (calderon - regular).abs() / regular
    } else {
        calderon.abs()
    };
    let pass = pairing <= regular * (1.0 + tol)
        && calderon >= regular * (1.0 - tol)
        && calderon <= upper_product * (1.0 + tol)
        && (calderon - regular).abs() <= tol * regular;
    Ok(InterpolationReport {
        theta,
        regular,
        calderon,
        pairing,
        upper_product,
        relative_gap,
        pass,
        certificate,
        dual,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizationRecord {
    pub theta: f64,
    pub f0: MatrixRecord,
    pub f1: MatrixRecord,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualWitnessRecord {
    pub theta: f64,
    pub b0: MatrixRecord,
    pub b1: MatrixRecord,
    pub pairing: f64,
}

impl From<&Factorization> for FactorizationRecord {
    fn from(f: &Factorization) -> Self {
        Self {
            theta: f.theta,
            f0: (&f.f0).into(),
            f1: (&f.f1).into(),
            bound: f.bound,
        }
    }
}

impl TryFrom<FactorizationRecord> for Factorization {
    type Error = Error;

    fn try_from(r: FactorizationRecord) -> Result<Self> {
        Ok(Self {
            theta: r.theta,
            f0: r.f0.try_into()?,
            f1: r.f1.try_into()?,
            bound: r.bound,
        })
    }
}

impl From<&DualWitness> for DualWitnessRecord {
    fn from(d: &DualWitness) -> Self {
        Self {
            theta: d.theta,
            b0: (&d.b0).into(),
            b1: (&d.b1).into(),
            pairing: d.pairing,
        }
    }
}

impl TryFrom<DualWitnessRecord> for DualWitness {
    type Error = Error;

    /// Rebuilds `b = b0 ∘ b1` (the stored split has real nonnegative factors).
    fn try_from(r: DualWitnessRecord) -> Result<Self> {
        let b0: MatrixOperator = r.b0.try_into()?;
        let b1: MatrixOperator = r.b1.try_into()?;
        if b0.shape() != b1.shape() {
            return Err(Error::Shape {
                expected: b0.shape(),
                found: b1.shape(),
            });
        }
        let b: Vec<f64> = b0.entries().iter().zip(b1.entries()).map(|(x, y)| x.re * y.re).collect();
        Ok(Self {
            b: MatrixOperator::from_real(b0.rows(), b0.cols(), &b)?,
            b0,
            b1,
            theta: r.theta,
            pairing: r.pairing,
        })
    }
}

pub fn write_factorization(path: impl AsRef<Path>, cert: &Factorization) -> Result<()> {
    fs::write(path, io::to_json(&FactorizationRecord::from(cert)))?;
    Ok(())
}

pub fn read_factorization(path: impl AsRef<Path>) -> Result<Factorization> {
    io::parse_json::<FactorizationRecord>(&fs::read_to_string(path)?)?.try_into()
}

pub fn write_dual_witness(path: impl AsRef<Path>, dw: &DualWitness) -> Result<()> {
    fs::write(path, io::to_json(&DualWitnessRecord::from(dw)))?;
    Ok(())
}

pub fn read_dual_witness(path: impl AsRef<Path>) -> Result<DualWitness> {
    io::parse_json::<DualWitnessRecord>(&fs::read_to_string(path)?)?.try_into()
}
