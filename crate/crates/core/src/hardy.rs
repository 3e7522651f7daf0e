//! Analytic trigonometric subspaces on a discretized torus and the
//! interpolation behavior of their regular norms.
//!
//! A function on the `N`-point grid with weights `1/N` is stored with its
//! values multiplied by `(1/N)^{1/p}`, so plain `ℓ_p` norms of coordinates
//! are `L_p` norms for the normalized measure. Trial operators are defined
//! on functions and folded into coordinates separately at each exponent.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{solve_extension, Budget, ExtensionOptions, ExtensionProblem, DEFAULT_EXTENSION_TOL};
use crate::gen::{complex_vector, rng_from_seed};
use crate::model::ExponentSpec;

/// `N` equally spaced nodes `t_r = 2πr/N`, each of weight `1/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    points: usize,
}

impl TorusGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::Domain("torus grid needs at least one point".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points as f64
    }

    pub fn node(&self, r: usize) -> f64 {
        TAU * r as f64 / self.points as f64
    }

    /// Samples of `exp(i·k·t)` at the nodes.
    pub fn character(&self, k: usize) -> Vec<Complex64> {
        (0..self.points)
            .map(|r| Complex64::from_polar(1.0, (k as f64) * self.node(r)))
            .collect()
    }
}

/// Factor that turns function values into `ℓ_p` coordinates for weight `w`.
pub fn fold_factor(weight: f64, p: ExponentSpec) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        weight.powf(1.0 / p.p())
    }
}

/// Span of the characters `0..=degree` inside `L_p` of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSubspace {
    grid: TorusGrid,
    degree: usize,
    p: ExponentSpec,
    basis: Vec<Vec<Complex64>>,
}

pub fn build_analytic_subspace(points: usize, degree: usize, p: ExponentSpec) -> Result<AnalyticSubspace> {
    let grid = TorusGrid::new(points)?;
    if degree >= points {
        return Err(Error::Domain(format!(
            "degree {degree} aliases on a {points}-point grid (need degree < points)"
        )));
    }
    let scale = fold_factor(grid.weight(), p);
    let basis = (0..=degree)
        .map(|k| grid.character(k).into_iter().map(|z| z * scale).collect())
        .collect();
    Ok(AnalyticSubspace { grid, degree, p, basis })
}

impl AnalyticSubspace {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn p(&self) -> ExponentSpec {
        self.p
    }

    /// Folded basis vectors.
    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    /// The extension problem for already folded images.
    pub fn with_images(&self, images: Vec<Vec<Complex64>>) -> Result<ExtensionProblem> {
        let m = images.first().map_or(0, Vec::len);
        ExtensionProblem::new(self.p, self.grid.points, m, self.basis.clone(), images)
    }
}

/// `u(e^{ikt}) = h_k`, with the target carrying weight `target_weight` per
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOperator {
    pub target_weight: f64,
    pub images: Vec<Vec<Complex64>>,
}

impl TrialOperator {
    pub fn problem(&self, subspace: &AnalyticSubspace) -> Result<ExtensionProblem> {
        let scale = fold_factor(self.target_weight, subspace.p);
        subspace.with_images(
            self.images
                .iter()
                .map(|h| h.iter().map(|z| z * scale).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialKind {
    /// Gaussian images in `ℓ_p^m` with counting measure, each normalized to
    /// unit Euclidean length.
    Random,
    /// The inclusion of `S` into `L_p` of the same grid.
    Identity,
    /// Multiplication by a positive function `1 + c·cos(t − φ)`, `|c| < 1`
    /// drawn per trial.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyConfig {
    pub points: usize,
    pub degree: usize,
    /// Target dimension for random trials; the other kinds use `points`.
    pub target_m: usize,
    pub p: ExponentSpec,
    pub trials: usize,
    pub seed: u64,
    pub kind: TrialKind,
    pub tol: f64,
    pub budget: Budget,
}

impl HardyConfig {
    pub fn new(points: usize, degree: usize, target_m: usize, p: ExponentSpec, trials: usize, seed: u64) -> Self {
        Self {
            points,
            degree,
            target_m,
            p,
            trials,
            seed,
            kind: TrialKind::Random,
            tol: DEFAULT_EXTENSION_TOL,
            budget: Budget::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p.is_endpoint() {
            return Err(Error::Domain("the interpolation exponent must satisfy 1 < p < inf".into()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.target_m == 0 && self.kind == TrialKind::Random {
            return Err(Error::Domain("target dimension must be positive".into()));
        }
        build_analytic_subspace(self.points, self.degree, self.p).map(|_| ())
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        self.seed ^ (trial as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
    }

    /// The operator used in trial `trial`; depends only on the seed and index.
    pub fn trial_operator(&self, trial: usize) -> TrialOperator {
        let grid = TorusGrid::new(self.points).expect("validated grid");
        let mut rng = rng_from_seed(self.trial_seed(trial));
        match self.kind {
            TrialKind::Random => TrialOperator {
                target_weight: 1.0,
                images: (0..=self.degree)
                    .map(|_| {
                        let h = complex_vector(self.target_m, &mut rng);
                        let len = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        h.into_iter().map(|z| z / len).collect()
                    })
                    .collect(),
            },
            TrialKind::Identity => TrialOperator {
                target_weight: grid.weight(),
                images: (0..=self.degree).map(|k| grid.character(k)).collect(),
            },
            TrialKind::Diagonal => {
                use rand::Rng;
                let c: f64 = rng.random_range(-0.9..0.9);
                let phi: f64 = rng.random_range(0.0..TAU);
                let d: Vec<f64> = (0..self.points).map(|r| 1.0 + c * (grid.node(r) - phi).cos()).collect();
                TrialOperator {
                    target_weight: grid.weight(),
                    images: (0..=self.degree)
                        .map(|k| grid.character(k).iter().zip(&d).map(|(z, w)| z * *w).collect())
                        .collect(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyRow {
    pub trial: usize,
    pub r_p: f64,
    pub r_inf: f64,
    pub r_1: f64,
    pub interpolated_bound: f64,
    pub ratio: f64,
}

/// Minimal regular extension norms of one trial operator at `p`, `∞` and `1`.
pub fn hardy_trial(config: &HardyConfig, trial: usize) -> Result<HardyRow> {
    config.validate()?;
    let op = config.trial_operator(trial);
    let opts = ExtensionOptions {
        tol: config.tol,
        budget: config.budget,
        ..ExtensionOptions::default()
    };
    let norm_at = |p: ExponentSpec| -> Result<f64> {
        let subspace = build_analytic_subspace(config.points, config.degree, p)?;
        let prob = op.problem(&subspace)?;
        Ok(solve_extension(&prob, &opts, &[])?.value)
    };
    let r_p = norm_at(config.p)?;
    let r_inf = norm_at(ExponentSpec::INFINITY)?;
    let r_1 = norm_at(ExponentSpec::ONE)?;
    let theta = config.p.theta();
    let interpolated_bound = r_inf.powf(1.0 - theta) * r_1.powf(theta);
    let ratio = if interpolated_bound == 0.0 { 0.0 } else { r_p / interpolated_bound };
    Ok(HardyRow {
        trial,
        r_p,
        r_inf,
        r_1,
        interpolated_bound,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardySummary {
    pub schema: String,
    pub kind: TrialKind,
    pub points: usize,
    pub degree: usize,
    pub target_m: usize,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    pub min_ratio: f64,
    pub median_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardyTable {
    pub rows: Vec<HardyRow>,
    pub summary: HardySummary,
}

/// Runs all trials in index order.
pub fn hardy_experiment(config: &HardyConfig) -> Result<HardyTable> {
    let rows = (0..config.trials)
        .map(|t| hardy_trial(config, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_table(config, rows))
}

/// Builds the table from rows computed elsewhere (for example concurrently);
/// rows are put in trial order first.
pub fn assemble_table(config: &HardyConfig, mut rows: Vec<HardyRow>) -> HardyTable {
    rows.sort_by_key(|r| r.trial);
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = match ratios.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => ratios[n / 2],
        n => 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]),
    };
    let target_m = match config.kind {
        TrialKind::Random => config.target_m,
        _ => config.points,
    };
    HardyTable {
        summary: HardySummary {
            schema: crate::SCHEMA_VERSION.to_string(),
            kind: config.kind,
            points: config.points,
            degree: config.degree,
            target_m,
            p: config.p.p(),
            trials: config.trials,
            seed: config.seed,
            min_ratio: ratios.first().copied().unwrap_or(f64::NAN),
            median_ratio: median,
            max_ratio: ratios.last().copied().unwrap_or(f64::NAN),
        },
        rows,
    }
}

impl HardyTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,r_p,r_inf,r_1,interpolated_bound,ratio\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.trial, r.r_p, r.r_inf, r.r_1, r.interpolated_bound, r.ratio
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::vector_p_norm;

    fn p(v: f64) -> ExponentSpec {
        ExponentSpec::from_p(v).unwrap()
    }

    #[test]
    fn constants_on_four_points() {
        for q in [1.0, 2.0, 3.0] {
            let s = build_analytic_subspace(4, 0, p(q)).unwrap();
            let expected = 0.25_f64.powf(1.0 / q);
            assert_eq!(s.basis().len(), 1);
            assert!(s.basis()[0].iter().all(|z| (z.re - expected).abs() < 1e-15 && z.im.abs() < 1e-15));
            assert!((vector_p_norm(&s.basis()[0], p(q)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn characters_are_orthonormal_at_two() {
        let s = build_analytic_subspace(8, 1, p(2.0)).unwrap();
        let dot: Complex64 = s.basis()[0].iter().zip(&s.basis()[1]).map(|(a, b)| a.conj() * b).sum();
        assert!(dot.norm() < 1e-14);
        for v in s.basis() {
            assert!((vector_p_norm(v, p(2.0)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn aliasing_degree_rejected() {
        assert!(matches!(build_analytic_subspace(4, 4, p(2.0)), Err(Error::Domain(_))));
        assert!(build_analytic_subspace(0, 0, p(2.0)).is_err());
    }

    #[test]
    fn identity_trial_has_unit_norms() {
        let mut config = HardyConfig::new(8, 3, 8, p(2.0), 1, 5);
        config.kind = TrialKind::Identity;
        let row = hardy_trial(&config, 0).unwrap();
        for v in [row.r_p, row.r_inf, row.r_1, row.ratio] {
            assert!((v - 1.0).abs() < 1e-6, "{row:?}");
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let config = HardyConfig::new(6, 1, 3, p(2.0), 2, 11);
        assert_eq!(config.trial_operator(1), config.trial_operator(1));
        assert_ne!(config.trial_operator(0), config.trial_operator(1));
    }

    #[test]
    fn csv_header_and_order() {
        let config = HardyConfig::new(4, 0, 2, p(2.0), 3, 1);
        let rows = (0..3).rev().map(|t| hardy_trial(&config, t).unwrap()).collect();
        let table = assemble_table(&config, rows);
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "trial,r_p,r_inf,r_1,interpolated_bound,ratio");
        assert!(lines[1].starts_with("0,") && lines[3].starts_with("2,"));
    }
}
