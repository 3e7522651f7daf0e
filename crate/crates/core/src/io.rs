//! JSON instance formats.
//!
//! Matrices: `{"rows": r, "cols": c, "entries": [[re, im], ...]}`, row-major.
//! Extension problems: `{"p": number | "inf", "ambient_n": n, "target_m": m,
//! "basis": [vector, ...], "images": [vector, ...]}` with
//! `vector = [[re, im], ...]`.
//!
//! Floats are written in shortest round-trip form, so reading back a written
//! file reproduces every entry bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::ExtensionProblem;
use crate::model::{ExponentSpec, MatrixOperator};

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Pair>,
}

impl From<&MatrixOperator> for MatrixRecord {
    fn from(m: &MatrixOperator) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixRecord> for MatrixOperator {
    type Error = Error;

    fn try_from(r: MatrixRecord) -> Result<Self> {
        MatrixOperator::new(r.rows, r.cols, r.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }
}

/// `p` is either a number or the string `"inf"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentRecord {
    Finite(f64),
    Named(String),
}

impl From<ExponentSpec> for ExponentRecord {
    fn from(p: ExponentSpec) -> Self {
        if p.is_infinite() {
            ExponentRecord::Named("inf".into())
        } else {
            ExponentRecord::Finite(p.p())
        }
    }
}

impl TryFrom<&ExponentRecord> for ExponentSpec {
    type Error = Error;

    fn try_from(r: &ExponentRecord) -> Result<Self> {
        match r {
            ExponentRecord::Finite(p) => ExponentSpec::from_p(*p),
            ExponentRecord::Named(s) => ExponentSpec::parse(s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionProblemRecord {
    pub p: ExponentRecord,
    pub ambient_n: usize,
    pub target_m: usize,
    pub basis: Vec<Vec<Pair>>,
    pub images: Vec<Vec<Pair>>,
}

pub fn to_pairs(v: &[Complex64]) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_pairs(v: &[Pair]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

impl From<&ExtensionProblem> for ExtensionProblemRecord {
    fn from(prob: &ExtensionProblem) -> Self {
        Self {
            p: prob.p().into(),
            ambient_n: prob.ambient_n(),
            target_m: prob.target_m(),
            basis: prob.basis().iter().map(|v| to_pairs(v)).collect(),
            images: prob.images().iter().map(|v| to_pairs(v)).collect(),
        }
    }
}

impl TryFrom<ExtensionProblemRecord> for ExtensionProblem {
    type Error = Error;

    fn try_from(r: ExtensionProblemRecord) -> Result<Self> {
        let p = ExponentSpec::try_from(&r.p)?;
        ExtensionProblem::new(
            p,
            r.ambient_n,
            r.target_m,
            r.basis.iter().map(|v| from_pairs(v)).collect(),
            r.images.iter().map(|v| from_pairs(v)).collect(),
        )
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(Error::from_json)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("records serialize");
    s.push('\n');
    s
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

pub fn parse_matrix(text: &str) -> Result<MatrixOperator> {
    parse_json::<MatrixRecord>(text)?.try_into()
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<MatrixOperator> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn matrix_to_json(m: &MatrixOperator) -> String {
    to_json(&MatrixRecord::from(m))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &MatrixOperator) -> Result<()> {
    fs::write(path, matrix_to_json(m))?;
    Ok(())
}

pub fn parse_extension_problem(text: &str) -> Result<ExtensionProblem> {
    parse_json::<ExtensionProblemRecord>(text)?.try_into()
}

pub fn read_extension_problem(path: impl AsRef<Path>) -> Result<ExtensionProblem> {
    parse_extension_problem(&fs::read_to_string(path)?)
}

pub fn extension_problem_to_json(prob: &ExtensionProblem) -> String {
    to_json(&ExtensionProblemRecord::from(prob))
}

pub fn write_extension_problem(path: impl AsRef<Path>, prob: &ExtensionProblem) -> Result<()> {
    fs::write(path, extension_problem_to_json(prob))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_one_by_one() {
        let m = parse_matrix(r#"{"rows":1,"cols":1,"entries":[[1,0]]}"#).unwrap();
        assert_eq!(m, MatrixOperator::identity(1));
    }

    #[test]
    fn reads_row_major() {
        let m = parse_matrix(r#"{"rows":2,"cols":2,"entries":[[1,0],[-2,0],[3,0],[4,0]]}"#).unwrap();
        let expected = MatrixOperator::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn entry_count_mismatch_is_structural() {
        let err = parse_matrix(r#"{"rows":2,"cols":2,"entries":[[1,0],[2,0],[3,0]]}"#).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn malformed_json_names_position() {
        let err = parse_matrix("{\"rows\":2,\n\"cols\":\"x\"}").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("invalid type"), "{message}");
            }
            other => panic!("expected parse error, got {other}"),
        }
        assert!(matches!(
            parse_matrix(r#"{"rows":1,"cols":1,"entries":[[1,0,3]]}"#),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = MatrixOperator::new(
            2,
            1,
            vec![Complex64::new(0.1, -1e-300), Complex64::new(1.0 / 3.0, 2.5e17)],
        )
        .unwrap();
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(fs::read_to_string(&path).unwrap(), matrix_to_json(&back));
    }

    #[test]
    fn exponent_accepts_inf_string() {
        let text = r#"{"p":"inf","ambient_n":2,"target_m":1,"basis":[[[1,0],[0,0]]],"images":[[[2,0]]]}"#;
        let prob = parse_extension_problem(text).unwrap();
        assert!(prob.p().is_infinite());
        let again = parse_extension_problem(&extension_problem_to_json(&prob)).unwrap();
        assert_eq!(again.basis(), prob.basis());
    }
}
