//! Text formats: search spaces, points, pyramid specs, benchmark matrices,
//! reports and arrangement dumps.
//!
//! ```json
//! {"d": 2, "cuts": [{"axis": 0, "sign": -1, "apex": ["1/2", "1/2"]}]}
//! ```
//!
//! Axes are 0-based. Rationals are strings (`"3/4"`, `"0.75"`) or JSON integers.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bench::BenchMatrix;
use crate::geometry::{GeometryError, Pyramid, RatVec, SearchSpace, Sign};
use crate::rat::{self, ParseRatError, Rat};
use crate::solver::SolveReport;
use crate::volume::CellDecomposition;

/// Largest dimension accepted from text input.
pub const MAX_DIM: usize = 16;
/// Largest number of cuts accepted in a search-space file.
pub const MAX_CUTS: usize = 4096;
/// Significant digits of the decimal rendering next to exact values.
pub const DECIMAL_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] ParseRatError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
}

fn invalid(what: &'static str, msg: impl Into<String>) -> IoError {
    IoError::Invalid { what, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutSpec {
    pub axis: usize,
    pub sign: i64,
    pub apex: RatVec,
}

impl CutSpec {
    pub fn from_pyramid(p: &Pyramid) -> Self {
        CutSpec { axis: p.axis, sign: p.sign.value() as i64, apex: p.apex.clone() }
    }

    /// The apex must lie in the unit cube and, when `d` is given, have dimension `d`.
    pub fn to_pyramid(&self, d: Option<usize>) -> Result<Pyramid, IoError> {
        let dim = self.apex.dim();
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid("pyramid", format!("apex dimension {dim} outside 1..={MAX_DIM}")));
        }
        if let Some(d) = d {
            if dim != d {
                return Err(GeometryError::DimensionMismatch { expected: d, got: dim }.into());
            }
        }
        if !self.apex.in_unit_cube() {
            return Err(invalid("pyramid", "apex outside the unit cube"));
        }
        Ok(Pyramid::new(self.axis, Sign::from_value(self.sign)?, self.apex.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub d: usize,
    #[serde(default)]
    pub cuts: Vec<CutSpec>,
}

impl SpaceSpec {
    pub fn from_search_space(x: &SearchSpace) -> Self {
        SpaceSpec { d: x.dim(), cuts: x.cuts().iter().map(CutSpec::from_pyramid).collect() }
    }

    pub fn to_search_space(&self) -> Result<SearchSpace, IoError> {
        if self.d == 0 || self.d > MAX_DIM {
            return Err(invalid("search space", format!("dimension {} outside 1..={MAX_DIM}", self.d)));
        }
        if self.cuts.len() > MAX_CUTS {
            return Err(invalid("search space", format!("{} cuts, at most {MAX_CUTS} allowed", self.cuts.len())));
        }
        let cuts = self.cuts.iter().map(|c| c.to_pyramid(Some(self.d))).collect::<Result<Vec<_>, _>>()?;
        Ok(SearchSpace::with_cuts(self.d, cuts)?)
    }
}

pub fn parse_search_space(text: &str) -> Result<SearchSpace, IoError> {
    serde_json::from_str::<SpaceSpec>(text)?.to_search_space()
}

pub fn search_space_json(x: &SearchSpace) -> String {
    serde_json::to_string_pretty(&SpaceSpec::from_search_space(x)).expect("search space serialises")
}

/// A JSON array (`["1/2", "0.5"]`) or a comma-separated list (`1/2,0.5`).
pub fn parse_point(text: &str) -> Result<RatVec, IoError> {
    let s = text.trim();
    let point = if s.starts_with('[') {
        serde_json::from_str::<RatVec>(s)?
    } else {
        if s.is_empty() {
            return Err(invalid("point", "no coordinates"));
        }
        RatVec::new(s.split(',').map(rat::parse_rat).collect::<Result<Vec<_>, _>>()?)
    };
    if point.dim() == 0 || point.dim() > MAX_DIM {
        return Err(invalid("point", format!("dimension {} outside 1..={MAX_DIM}", point.dim())));
    }
    Ok(point)
}

/// A cut object, `{"axis": 0, "sign": -1, "apex": [...]}`.
pub fn parse_pyramid(text: &str, d: Option<usize>) -> Result<Pyramid, IoError> {
    serde_json::from_str::<CutSpec>(text)?.to_pyramid(d)
}

pub fn parse_bench_matrix(text: &str) -> Result<BenchMatrix, IoError> {
    let m: BenchMatrix = serde_json::from_str(text)?;
    m.validate().map_err(|msg| invalid("benchmark matrix", msg))?;
    Ok(m)
}

/// Reads a file, or returns `arg` itself when it already looks like inline JSON.
pub fn read_inline_or_file(arg: &str) -> Result<String, IoError> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|source| IoError::Read { path: arg.to_string(), source })
}

/// `{"exact": "p/q", "decimal": "..."}`.
pub fn exact_value(r: &Rat) -> Value {
    json!({ "exact": rat::format_rat(r), "decimal": rat::format_decimal(r, DECIMAL_DIGITS) })
}

/// `p/q (decimal)` for terminal output.
pub fn display_exact(r: &Rat) -> String {
    let exact = rat::format_rat(r);
    let decimal = rat::format_decimal(r, DECIMAL_DIGITS);
    if exact == decimal {
        exact
    } else {
        format!("{exact} ({decimal})")
    }
}

/// The report plus decimal renderings of its exact fields.
pub fn report_json(report: &SolveReport, instance: Option<&str>) -> Value {
    let mut v = serde_json::to_value(report).expect("report serialises");
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("succeeded".into(), Value::Bool(report.succeeded()));
    obj.insert("residual_decimal".into(), Value::String(rat::format_decimal(&report.residual, DECIMAL_DIGITS)));
    obj.insert(
        "answer_decimal".into(),
        Value::Array(report.answer.iter().map(|r| Value::String(rat::format_decimal(r, DECIMAL_DIGITS))).collect()),
    );
    if let Some(name) = instance {
        obj.insert("instance".into(), Value::String(name.to_string()));
    }
    v
}

/// Reads back a report written by [`report_json`]; extra fields are ignored.
pub fn parse_report(text: &str) -> Result<SolveReport, IoError> {
    Ok(serde_json::from_str(text)?)
}

pub fn error_json(kind: &str, message: &str) -> Value {
    json!({ "error": { "kind": kind, "message": message } })
}

pub fn arrangement_json(a: &CellDecomposition) -> Value {
    let cells: Vec<Value> = a
        .cells
        .iter()
        .map(|c| {
            json!({
                "inequalities": c.cell.inequalities(),
                "volume": rat::format_rat(&c.volume),
                "witness": c.witness,
            })
        })
        .collect();
    json!({
        "d": a.dim,
        "hyperplanes": a.hyperplanes,
        "cells": cells,
        "total_volume": rat::format_rat(&a.total_volume()),
    })
}
