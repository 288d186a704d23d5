//! File formats for spaces, functions and function families.
//!
//! Values are either JSON numbers or strings in the rational grammar
//! (`"p/q"`, decimals, exponents). Numbers are read from their source text,
//! so `0.1` is exactly `1/10`.
//!
//! Matrix JSON: `{"n": 3, "labels": ["a", "b", "c"], "d": [[...], ...]}`.
//! Matrix CSV: `n` lines of `n` comma-separated values; blank lines and lines
//! starting with `#` are skipped.
//! Function JSON: `{"kind": "piecewise_affine", "pieces": [...]}` or
//! `{"kind": "power", "alpha": "2"}`.
//! Family JSON: a list of function objects.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::function::{FunctionError, Piece, TransformFunction};
use crate::rational::{ParseRationalError, Rational};
use crate::space::{Dissimilarity, SpaceError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: {source}")]
    Value {
        line: usize,
        column: usize,
        source: ParseRationalError,
    },
    #[error("line {line}, column {column}, entry d[{row}][{col}]: {source}")]
    Entry {
        row: usize,
        col: usize,
        line: usize,
        column: usize,
        source: ParseRationalError,
    },
    #[error("declared n = {declared} but the matrix has {actual} rows")]
    SizeMismatch { declared: usize, actual: usize },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("{context}: {source}")]
    Function { context: String, source: FunctionError },
    #[error("{context}: {source}")]
    Field { context: String, source: ParseRationalError },
    #[error("unknown function kind `{0}`")]
    UnknownKind(String),
    #[error("{0}")]
    Missing(String),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Parses one raw JSON value (number or string) as an exact rational.
fn raw_rational(raw: &RawValue) -> Result<Rational, ParseRationalError> {
    let text = raw.get().trim();
    if text.starts_with('"') {
        let s: String = serde_json::from_str(text).map_err(|_| ParseRationalError::Invalid(text.into()))?;
        s.parse()
    } else {
        text.parse()
    }
}

/// Serialized matrix with optional free-form metadata.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixFile {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub d: Vec<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl MatrixFile {
    pub fn from_space(space: &Dissimilarity, meta: Option<serde_json::Value>) -> Self {
        MatrixFile {
            n: space.n(),
            labels: space.labels().map(<[String]>::to_vec),
            d: space.rows(),
            meta,
        }
    }
}

#[derive(Deserialize)]
struct RawMatrix<'a> {
    n: Option<usize>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(borrow)]
    d: Vec<Vec<&'a RawValue>>,
}

/// 1-based line and column of `part`, a subslice of `text`.
fn position(text: &str, part: &str) -> (usize, usize) {
    let offset = (part.as_ptr() as usize).saturating_sub(text.as_ptr() as usize).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

pub fn parse_matrix_json(text: &str) -> Result<Dissimilarity, FormatError> {
    let raw: RawMatrix = serde_json::from_str(text)?;
    if let Some(n) = raw.n {
        if n != raw.d.len() {
            return Err(FormatError::SizeMismatch {
                declared: n,
                actual: raw.d.len(),
            });
        }
    }
    let rows = raw
        .d
        .iter()
        .enumerate()
        .map(|(row, r)| {
            r.iter()
                .enumerate()
                .map(|(col, v)| {
                    raw_rational(v).map_err(|source| {
                        let (line, column) = position(text, v.get());
                        FormatError::Entry {
                            row,
                            col,
                            line,
                            column,
                            source,
                        }
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let space = Dissimilarity::from_rows(rows)?;
    Ok(match raw.labels {
        Some(labels) => space.with_labels(labels)?,
        None => space,
    })
}

pub fn parse_matrix_csv(text: &str) -> Result<Dissimilarity, FormatError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        let mut column = 1;
        for field in line.split(',') {
            let value = field.parse::<Rational>().map_err(|source| FormatError::Value {
                line: line_no,
                column,
                source,
            })?;
            row.push(value);
            column += field.len() + 1;
        }
        rows.push((line_no, row));
    }
    let n = rows.len();
    if let Some((line, row)) = rows.iter().find(|(_, r)| r.len() != n) {
        return Err(FormatError::Csv {
            line: *line,
            message: format!("expected {n} values, found {}", row.len()),
        });
    }
    Ok(Dissimilarity::from_rows(rows.into_iter().map(|(_, r)| r).collect())?)
}

/// Chooses JSON or CSV by the first non-blank character.
pub fn parse_matrix(text: &str) -> Result<Dissimilarity, FormatError> {
    if text.trim_start().starts_with('{') {
        parse_matrix_json(text)
    } else {
        parse_matrix_csv(text)
    }
}

pub fn matrix_to_json(space: &Dissimilarity) -> String {
    serde_json::to_string(&MatrixFile::from_space(space, None)).expect("matrix serializes")
}

#[derive(Debug, Clone, Serialize)]
struct PieceFile<'a> {
    from: &'a Rational,
    to: Option<&'a Rational>,
    from_closed: bool,
    to_closed: bool,
    slope: &'a Rational,
    intercept: &'a Rational,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FunctionFile<'a> {
    PiecewiseAffine { pieces: Vec<PieceFile<'a>> },
    Power { alpha: &'a Rational },
}

impl Serialize for TransformFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let file = match self {
            TransformFunction::PiecewiseAffine(pieces) => FunctionFile::PiecewiseAffine {
                pieces: pieces
                    .iter()
                    .map(|p| PieceFile {
                        from: &p.from,
                        to: p.to.as_ref(),
                        from_closed: p.from_closed,
                        to_closed: p.to_closed,
                        slope: &p.slope,
                        intercept: &p.intercept,
                    })
                    .collect(),
            },
            TransformFunction::Power(alpha) => FunctionFile::Power { alpha },
        };
        file.serialize(serializer)
    }
}

/// Only supported through `serde_json`, which keeps the exact source text of
/// every number.
impl<'de> Deserialize<'de> for TransformFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Box::<RawValue>::deserialize(deserializer)?;
        parse_function(raw.get()).map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
struct RawPiece<'a> {
    #[serde(borrow)]
    from: &'a RawValue,
    #[serde(borrow, default)]
    to: Option<&'a RawValue>,
    from_closed: Option<bool>,
    to_closed: Option<bool>,
    #[serde(borrow)]
    slope: &'a RawValue,
    #[serde(borrow)]
    intercept: &'a RawValue,
}

#[derive(Deserialize)]
struct RawFunction<'a> {
    kind: String,
    #[serde(borrow, default)]
    pieces: Option<Vec<RawPiece<'a>>>,
    #[serde(borrow, default)]
    alpha: Option<&'a RawValue>,
}

fn field(raw: &RawValue, context: impl FnOnce() -> String) -> Result<Rational, FormatError> {
    raw_rational(raw).map_err(|source| FormatError::Field {
        context: context(),
        source,
    })
}

fn build_function(raw: RawFunction, context: &str) -> Result<TransformFunction, FormatError> {
    match raw.kind.as_str() {
        "power" => {
            let alpha = raw
                .alpha
                .ok_or_else(|| FormatError::Missing(format!("{context}: power needs `alpha`")))?;
            let alpha = field(alpha, || format!("{context}: alpha"))?;
            TransformFunction::power(alpha).map_err(|source| FormatError::Function {
                context: context.into(),
                source,
            })
        }
        "piecewise_affine" => {
            let raw_pieces = raw
                .pieces
                .ok_or_else(|| FormatError::Missing(format!("{context}: piecewise_affine needs `pieces`")))?;
            let mut pieces = Vec::with_capacity(raw_pieces.len());
            for (i, p) in raw_pieces.iter().enumerate() {
                let ctx = |name: &str| format!("{context}: piece {i} {name}");
                let from = field(p.from, || ctx("from"))?;
                let to = match p.to {
                    None => None,
                    Some(t) if t.get().trim() == "null" || t.get().trim() == "\"inf\"" => None,
                    Some(t) => Some(field(t, || ctx("to"))?),
                };
                let degenerate = to.as_ref() == Some(&from);
                // Default convention: left-closed, right-open; a point piece is closed.
                let from_closed = p.from_closed.unwrap_or(true);
                let to_closed = p.to_closed.unwrap_or(degenerate);
                pieces.push(Piece::new(
                    from,
                    to,
                    from_closed,
                    to_closed,
                    field(p.slope, || ctx("slope"))?,
                    field(p.intercept, || ctx("intercept"))?,
                ));
            }
            TransformFunction::piecewise(pieces).map_err(|source| FormatError::Function {
                context: context.into(),
                source,
            })
        }
        other => Err(FormatError::UnknownKind(other.into())),
    }
}

pub fn parse_function(text: &str) -> Result<TransformFunction, FormatError> {
    let raw: RawFunction = serde_json::from_str(text)?;
    build_function(raw, "function")
}

pub fn parse_family(text: &str) -> Result<Vec<TransformFunction>, FormatError> {
    let raws: Vec<RawFunction> = serde_json::from_str(text)?;
    raws.into_iter()
        .enumerate()
        .map(|(i, raw)| build_function(raw, &format!("member {i}")))
        .collect()
}

pub fn function_to_json(f: &TransformFunction) -> String {
    serde_json::to_string(f).expect("function serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn matrix_json_exact_values() {
        let d = parse_matrix(r#"{"n": 3, "labels": ["a","b","c"], "d": [[0, 0.1, "1/3"], [0.1, 0, 1], ["1/3", 1, 0]]}"#).unwrap();
        assert_eq!(d.get(0, 1), &q(1, 10));
        assert_eq!(d.get(2, 0), &q(1, 3));
        assert_eq!(d.labels().unwrap()[2], "c");
        let back = parse_matrix(&matrix_to_json(&d)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn matrix_json_diagnostics() {
        let err = parse_matrix("{\"d\": [[0, 1],\n [1, 0]\n").unwrap_err();
        assert!(matches!(err, FormatError::Json { line: 3, .. }), "{err}");
        let err = parse_matrix(r#"{"d": [[0, "NaN"], [1, 0]]}"#).unwrap_err();
        assert!(matches!(err, FormatError::Entry { row: 0, col: 1, .. }), "{err}");
        let err = parse_matrix(r#"{"d": [[0, 1], [2, 0]]}"#).unwrap_err();
        assert!(matches!(err, FormatError::Space(SpaceError::Asymmetric { i: 0, j: 1, .. })));
        let err = parse_matrix(r#"{"d": [[0, -1], [-1, 0]]}"#).unwrap_err();
        assert!(matches!(err, FormatError::Space(SpaceError::Negative { .. })));
        let err = parse_matrix(r#"{"n": 3, "d": [[0]]}"#).unwrap_err();
        assert_eq!(err, FormatError::SizeMismatch { declared: 3, actual: 1 });
    }

    #[test]
    fn matrix_csv_diagnostics() {
        let d = parse_matrix("# sides\n0,3,4\n3,0,5\n4,5,0\n").unwrap();
        assert_eq!(d.get(1, 2), &Rational::from_integer(5));
        let err = parse_matrix("0,1\n1,nan\n").unwrap_err();
        assert!(matches!(err, FormatError::Value { line: 2, column: 3, .. }), "{err}");
        let err = parse_matrix("0,1\n1\n").unwrap_err();
        assert!(matches!(err, FormatError::Csv { line: 2, .. }));
    }

    #[test]
    fn function_round_trip() {
        for f in [
            TransformFunction::fab(q(1, 1), q(3, 1)).unwrap(),
            TransformFunction::threshold(q(1, 1)).unwrap(),
            TransformFunction::power(q(5, 2)).unwrap(),
        ] {
            assert_eq!(parse_function(&function_to_json(&f)).unwrap(), f);
        }
    }

    #[test]
    fn function_defaults_and_errors() {
        let f = parse_function(
            r#"{"kind":"piecewise_affine","pieces":[
                {"from":"0","to":"0","slope":"0","intercept":"0"},
                {"from":"0","to":"1","from_closed":false,"to_closed":true,"slope":"0","intercept":"1/2"},
                {"from":"1","from_closed":false,"slope":"0","intercept":"3"}]}"#,
        )
        .unwrap();
        assert_eq!(f, TransformFunction::fab(q(1, 1), q(3, 1)).unwrap());

        let err = parse_function(r#"{"kind":"power","alpha":"-1"}"#).unwrap_err();
        assert!(matches!(err, FormatError::Function { .. }));
        let err = parse_function(r#"{"kind":"spline"}"#).unwrap_err();
        assert_eq!(err, FormatError::UnknownKind("spline".into()));
        let err = parse_family(r#"[{"kind":"power","alpha":"2"},{"kind":"power"}]"#).unwrap_err();
        assert!(err.to_string().contains("member 1"));
    }
}
