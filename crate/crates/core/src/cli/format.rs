//! On-disk formats: the system file read by every command and the JSON report
//! written to standard output.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::genbench::GenSpec;
use crate::numkit::Tolerances;
use crate::squareup::FixedModeReport;
use crate::sysmodel::{AssumptionReport, StateSpace, ZeroSet};

/// A strictly proper plant as JSON:
///
/// ```json
/// { "n": 2, "m": 1, "p": 1,
///   "A": [[0, 1], [-2, -3]], "B": [[0], [1]], "C": [[1, 0]] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ParseError {}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn field_error(text: &str, field: &str, message: impl Into<String>) -> ParseError {
    ParseError {
        line: line_of_key(text, field),
        column: None,
        field: Some(field.to_string()),
        message: message.into(),
    }
}

fn read_count(text: &str, obj: &Map<String, Value>, key: &str) -> Result<usize, ParseError> {
    let v = obj
        .get(key)
        .ok_or_else(|| field_error(text, key, "missing required field"))?;
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| field_error(text, key, format!("expected a non-negative integer, got {v}")))
}

fn read_matrix(
    text: &str,
    obj: &Map<String, Value>,
    key: &str,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<f64>, ParseError> {
    let v = obj
        .get(key)
        .ok_or_else(|| field_error(text, key, "missing required field"))?;
    let outer = v
        .as_array()
        .ok_or_else(|| field_error(text, key, "expected an array of rows"))?;
    if outer.len() != rows {
        return Err(field_error(
            text,
            key,
            format!("expected {rows} rows, got {}", outer.len()),
        ));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in outer.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| field_error(text, key, format!("row {i} is not an array")))?;
        if row.len() != cols {
            return Err(field_error(
                text,
                key,
                format!("row {i}: expected {cols} entries, got {}", row.len()),
            ));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x
                .as_f64()
                .ok_or_else(|| field_error(text, key, format!("entry ({i}, {j}) is not a number: {x}")))?;
        }
    }
    Ok(m)
}

/// Parses a system file. A `D` field is rejected outright.
pub fn parse_system(text: &str) -> Result<StateSpace, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError {
        line: Some(e.line()),
        column: Some(e.column()),
        field: None,
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| ParseError {
        line: Some(1),
        column: None,
        field: None,
        message: "expected a JSON object".into(),
    })?;
    if obj.contains_key("D") {
        return Err(field_error(
            text,
            "D",
            "feedthrough is not supported: only strictly proper systems (D = 0) are accepted; remove the field",
        ));
    }
    let n = read_count(text, obj, "n")?;
    let m = read_count(text, obj, "m")?;
    let p = read_count(text, obj, "p")?;
    if n == 0 || m == 0 || p == 0 {
        return Err(ParseError {
            line: None,
            column: None,
            field: None,
            message: format!("n, m and p must be positive, got n = {n}, m = {m}, p = {p}"),
        });
    }
    let a = read_matrix(text, obj, "A", n, n)?;
    let b = read_matrix(text, obj, "B", n, m)?;
    let c = read_matrix(text, obj, "C", p, n)?;
    StateSpace::new(a, b, c).map_err(|e| ParseError {
        line: None,
        column: None,
        field: None,
        message: e.to_string(),
    })
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl From<&StateSpace> for SystemFile {
    fn from(sys: &StateSpace) -> Self {
        Self {
            n: sys.n(),
            m: sys.m(),
            p: sys.p(),
            a: matrix_rows(sys.a()),
            b: matrix_rows(sys.b()),
            c: matrix_rows(sys.c()),
        }
    }
}

/// Pretty JSON with a trailing newline; identical systems give identical bytes.
pub fn write_system(sys: &StateSpace) -> String {
    let mut s = serde_json::to_string_pretty(&SystemFile::from(sys)).expect("plain data serializes");
    s.push('\n');
    s
}

/// Outcome class of a command; determines the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    AssumptionFailure,
    NumericalFailure,
    ParseError,
    Unstabilizable,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::AssumptionFailure => 1,
            Outcome::NumericalFailure => 2,
            Outcome::ParseError => 3,
            Outcome::Unstabilizable => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareUpRecord {
    /// Pseudo-output rows (pseudo-input columns, transposed, when the
    /// transposition path was used).
    pub ca: Vec<Vec<f64>>,
    pub c21: Vec<Vec<f64>>,
    pub c22: Vec<Vec<f64>>,
    pub q_scale: f64,
    pub r_scale: f64,
    /// Eigenvalues of `Ã22 − Bps2·C22`.
    pub placed_zeros: Vec<Complex64>,
    pub augmented_zeros: ZeroSet,
    pub minimum_phase: bool,
    pub preserved: bool,
    pub cb_rank: usize,
    /// Extra input columns `Ba` (rows of the matrix) for a tall plant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ba: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub zero: Complex64,
    /// `σ_min(R(zero))`
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRecord {
    pub spec: GenSpec,
    pub certificates: Vec<Certificate>,
}

/// Machine-readable result of any command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub outcome: Outcome,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub tolerances: Tolerances,
    #[serde(default)]
    pub transposed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<Dimensions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<AssumptionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros: Option<ZeroSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub square: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum_phase: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_modes: Option<FixedModeReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unstabilizable_modes: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squareup: Option<SquareUpRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated: Option<GenRecord>,
}

impl Report {
    pub fn new(command: &str, tolerances: Tolerances) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            outcome: Outcome::Ok,
            exit_code: 0,
            message: None,
            tolerances,
            transposed: false,
            system: None,
            assumptions: None,
            zeros: None,
            square: None,
            minimum_phase: None,
            fixed_modes: None,
            unstabilizable_modes: Vec::new(),
            squareup: None,
            generated: None,
        }
    }

    pub fn with_outcome(mut self, outcome: Outcome, message: Option<String>) -> Self {
        self.outcome = outcome;
        self.exit_code = outcome.exit_code();
        self.message = message;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "n": 2, "m": 1, "p": 1,
  "A": [[0, 1], [-2, -3]],
  "B": [[0], [1]],
  "C": [[1, 0]]
}"#;

    #[test]
    fn parses_and_writes() {
        let sys = parse_system(GOOD).unwrap();
        assert_eq!((sys.n(), sys.m(), sys.p()), (2, 1, 1));
        assert_eq!(sys.a()[(1, 0)], -2.0);
        let again = parse_system(&write_system(&sys)).unwrap();
        assert_eq!(again, sys);
    }

    #[test]
    fn missing_c_names_the_field() {
        let text = r#"{ "n": 1, "m": 1, "p": 1, "A": [[0]], "B": [[1]] }"#;
        let e = parse_system(text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("C"));
    }

    #[test]
    fn d_field_is_rejected_explicitly() {
        let text = "{\n\"n\": 1, \"m\": 1, \"p\": 1,\n\"A\": [[0]], \"B\": [[1]], \"C\": [[1]],\n\"D\": [[0]]\n}";
        let e = parse_system(text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("D"));
        assert_eq!(e.line, Some(4));
        assert!(e.message.contains("strictly proper"));
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_system("{\n \"n\": 1,\n \"m\": ]").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.column.is_some());
    }

    #[test]
    fn wrong_row_length() {
        let text = r#"{ "n": 2, "m": 1, "p": 1, "A": [[0, 1], [2]], "B": [[0], [1]], "C": [[1, 0]] }"#;
        let e = parse_system(text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("A"));
        assert!(e.message.contains("row 1"));
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes: Vec<i32> = [
            Outcome::Ok,
            Outcome::AssumptionFailure,
            Outcome::NumericalFailure,
            Outcome::ParseError,
            Outcome::Unstabilizable,
        ]
        .iter()
        .map(|o| o.exit_code())
        .collect();
        assert_eq!(codes, vec![0, 1, 2, 3, 4]);
    }
}
