use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use regint_core::calderon::verify_interpolation;
use regint_core::extension::{extension_bracket_seeded, Budget, ExtensionReportRecord, DEFAULT_EXTENSION_TOL};
use regint_core::gen::{random_complex_matrix, random_extension_problem, random_nonneg_matrix, rng_from_seed};
use regint_core::hardy::{assemble_table, hardy_trial, HardyConfig, HardyRow, HardySummary};
use regint_core::io::{self, ExponentRecord};
use regint_core::norms::regular_norm;
use regint_core::{Error, Result, SCHEMA_VERSION};

use crate::args::{ExtendArgs, Format, GenArgs, GenKind, HardyArgs, InterpArgs, NormArgs};

/// Rendered report and whether every check in the run passed.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

/// Independent stream per instance, so results do not depend on the order
/// in which instances are scheduled.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn name_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))),
        other => other,
    }
}

fn json<T: Serialize>(value: &T) -> String {
    io::to_json_pretty(value)
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn schema_comment() -> String {
    format!("# schema: {SCHEMA_VERSION}\n")
}

#[derive(Serialize)]
struct NormReport {
    schema: &'static str,
    command: &'static str,
    p: ExponentRecord,
    tol: f64,
    value: f64,
    bracket: [f64; 2],
    witness_x: Vec<f64>,
    witness_y: Vec<f64>,
    iterations: usize,
    pass: bool,
}

pub fn norm(args: &NormArgs) -> Result<Outcome> {
    let a = io::read_matrix(&args.input).map_err(|e| name_path(e, &args.input))?;
    let report = match regular_norm(&a, args.p, args.tol) {
        Ok(w) => NormReport {
            schema: SCHEMA_VERSION,
            command: "norm",
            p: args.p.into(),
            tol: args.tol,
            value: w.value,
            bracket: [w.lower, w.upper],
            witness_x: w.maximizer.coords().to_vec(),
            witness_y: w.dual.coords().to_vec(),
            iterations: w.iterations,
            pass: w.upper - w.lower <= args.tol * w.value,
        },
        Err(Error::NormBudget {
            lower,
            upper,
            iterations,
        }) => NormReport {
            schema: SCHEMA_VERSION,
            command: "norm",
            p: args.p.into(),
            tol: args.tol,
            value: lower,
            bracket: [lower, upper],
            witness_x: Vec::new(),
            witness_y: Vec::new(),
            iterations,
            pass: false,
        },
        Err(e) => return Err(e),
    };
    let text = match args.output.format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut s = schema_comment();
            s.push_str("p,value,lower,upper,iterations,pass\n");
            s.push_str(&csv_line(&[
                args.p.to_string(),
                report.value.to_string(),
                report.bracket[0].to_string(),
                report.bracket[1].to_string(),
                report.iterations.to_string(),
                report.pass.to_string(),
            ]));
            s
        }
    };
    Ok(Outcome {
        pass: report.pass,
        text,
    })
}

#[derive(Serialize)]
struct InterpRow {
    instance: usize,
    theta: f64,
    regular: f64,
    calderon: f64,
    pairing: f64,
    upper_product: f64,
    relative_gap: f64,
    pass: bool,
}

#[derive(Serialize)]
struct InterpSummary {
    instances: usize,
    failures: usize,
    worst_gap: f64,
}

#[derive(Serialize)]
struct InterpReport {
    schema: &'static str,
    command: &'static str,
    n: u64,
    m: u64,
    trials: u64,
    theta: Vec<f64>,
    seed: u64,
    tol: f64,
    summary: InterpSummary,
    rows: Vec<InterpRow>,
}

pub fn interp(args: &InterpArgs) -> Result<Outcome> {
    let (cols, rows) = (args.n as usize, args.m.unwrap_or(args.n) as usize);
    let jobs: Vec<(usize, f64)> = (0..args.trials as usize)
        .flat_map(|i| args.theta.iter().map(move |&t| (i, t)))
        .collect();
    let results: Vec<InterpRow> = jobs
        .par_iter()
        .map(|&(i, theta)| {
            let a = random_complex_matrix(rows, cols, &mut rng_from_seed(instance_seed(args.seed, i)))?;
            let r = verify_interpolation(&a, theta, args.tol)?;
            Ok(InterpRow {
                instance: i,
                theta,
                regular: r.regular,
                calderon: r.calderon,
                pairing: r.pairing,
                upper_product: r.upper_product,
                relative_gap: r.relative_gap,
                pass: r.pass,
            })
        })
        .collect::<Result<_>>()?;
    let summary = InterpSummary {
        instances: results.len(),
        failures: results.iter().filter(|r| !r.pass).count(),
        worst_gap: results.iter().map(|r| r.relative_gap).fold(0.0, f64::max),
    };
    let pass = summary.failures == 0;
    let text = match args.output.format {
        Format::Json => json(&InterpReport {
            schema: SCHEMA_VERSION,
            command: "interp",
            n: args.n,
            m: rows as u64,
            trials: args.trials,
            theta: args.theta.clone(),
            seed: args.seed,
            tol: args.tol,
            summary,
            rows: results,
        }),
        Format::Csv => {
            let mut s = schema_comment();
            s.push_str("instance,theta,regular,calderon,pairing,upper_product,relative_gap,pass\n");
            for r in &results {
                s.push_str(&csv_line(&[
                    r.instance.to_string(),
                    r.theta.to_string(),
                    r.regular.to_string(),
                    r.calderon.to_string(),
                    r.pairing.to_string(),
                    r.upper_product.to_string(),
                    r.relative_gap.to_string(),
                    r.pass.to_string(),
                ]));
            }
            s
        }
    };
    Ok(Outcome { text, pass })
}

#[derive(Serialize)]
struct ExtendReport {
    command: &'static str,
    p: ExponentRecord,
    budget: u64,
    seed: u64,
    threshold: f64,
    pass: bool,
    #[serde(flatten)]
    result: ExtensionReportRecord,
}

pub fn extend(args: &ExtendArgs) -> Result<Outcome> {
    let mut prob = io::read_extension_problem(&args.input).map_err(|e| name_path(e, &args.input))?;
    if let Some(p) = args.p {
        prob = prob.with_p(p);
    }
    let report = extension_bracket_seeded(&prob, DEFAULT_EXTENSION_TOL, Budget(args.budget as usize), args.seed)?;
    let pass = report.gap <= args.tol;
    let text = json(&ExtendReport {
        command: "extend",
        p: prob.p().into(),
        budget: args.budget,
        seed: args.seed,
        threshold: args.tol,
        pass,
        result: (&report).into(),
    });
    Ok(Outcome { text, pass })
}

#[derive(Serialize)]
struct HardyReport<'a> {
    summary: &'a HardySummary,
    rows: &'a [HardyRow],
}

pub fn hardy(args: &HardyArgs) -> Result<Outcome> {
    let degree = args.degree as usize;
    let points = args.n.map_or(4 * (degree + 1), |n| n as usize);
    let mut config = HardyConfig::new(
        points,
        degree,
        args.m.map_or(points, |m| m as usize),
        args.p,
        args.trials as usize,
        args.seed,
    );
    config.kind = args.kind.into();
    config.tol = args.tol;
    config.budget = Budget(args.budget as usize);
    let rows: Vec<HardyRow> = (0..config.trials)
        .into_par_iter()
        .map(|t| hardy_trial(&config, t))
        .collect::<Result<_>>()?;
    let table = assemble_table(&config, rows);
    let text = match args.output.format {
        Format::Json => json(&HardyReport {
            summary: &table.summary,
            rows: &table.rows,
        }),
        Format::Csv => schema_comment() + &table.to_csv(),
    };
    // ratios are measurements here, not checks
    Ok(Outcome { text, pass: true })
}

pub fn gen(args: &GenArgs) -> Result<Outcome> {
    let n = args.n as usize;
    let m = args.m.map_or(n, |m| m as usize);
    let mut rng = rng_from_seed(args.seed);
    let text = match args.kind {
        GenKind::Matrix if args.nonneg => io::matrix_to_json(&random_nonneg_matrix(m, n, &mut rng)?),
        GenKind::Matrix => io::matrix_to_json(&random_complex_matrix(m, n, &mut rng)?),
        GenKind::Extprob => {
            if args.nonneg {
                return Err(Error::Domain("--nonneg applies to matrices only".into()));
            }
            let prob = random_extension_problem(n, args.k as usize, m, args.p, &mut rng)?;
            io::extension_problem_to_json(&prob)
        }
    };
    Ok(Outcome { text, pass: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| instance_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(instance_seed(0, 0), instance_seed(1, 0));
    }
}
