//! Benchmark matrix: every cell solves generated instances with one method and
//! becomes one CSV row per instance.
//!
//! ```json
//! {"seed": 1, "cells": [{"d": 1, "lambda": "0.999", "epsilon": "0.001", "method": "banach", "instance": "reflection"}]}
//! ```

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{sqrt_block_solve, DaggerInstance};
use crate::geometry::RatVec;
use crate::instances::{random_affine, reflection_affine, InstanceError};
use crate::rat::{self, Rat};
use crate::solver::{banach_solve, centerpoint_solve, ContractionInstance, Method, SolveReport, SolverConfig, SolverError};

pub const CSV_HEADER: [&str; 8] = ["method", "d", "lambda", "epsilon", "queries", "residual", "iterations", "wall_ms"];

/// Largest dimension a benchmark cell may ask for.
pub const MAX_BENCH_DIM: usize = 9;
/// Largest number of instances per cell.
pub const MAX_BENCH_INSTANCES: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    /// Seeded random affine contraction.
    #[default]
    Random,
    /// `x -> -λx + (1+λ)/2` per coordinate; Banach iteration oscillates around
    /// the centre and converges at exactly rate `λ`.
    Reflection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCell {
    pub d: usize,
    #[serde(with = "rat::serde_rat")]
    pub lambda: Rat,
    #[serde(with = "rat::serde_rat")]
    pub epsilon: Rat,
    pub method: Method,
    #[serde(default)]
    pub instance: InstanceKind,
    /// Overrides the matrix-wide instance count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchMatrix {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_instance")]
    pub instances: u32,
    #[serde(default)]
    pub cells: Vec<BenchCell>,
}

fn one_instance() -> u32 {
    1
}

impl BenchMatrix {
    pub fn validate(&self) -> Result<(), String> {
        let per_cell = |c: &BenchCell| c.instances.unwrap_or(self.instances);
        for (i, c) in self.cells.iter().enumerate() {
            if c.d == 0 || c.d > MAX_BENCH_DIM {
                return Err(format!("cell {i}: dimension {} outside 1..={MAX_BENCH_DIM}", c.d));
            }
            if rat::is_negative(&c.lambda) || c.lambda >= 1u32 {
                return Err(format!("cell {i}: lambda must lie in [0, 1)"));
            }
            if !rat::is_positive(&c.epsilon) || c.epsilon >= 1u32 {
                return Err(format!("cell {i}: epsilon must lie in (0, 1)"));
            }
            let n = per_cell(c);
            if n == 0 || n > MAX_BENCH_INSTANCES {
                return Err(format!("cell {i}: instance count {n} outside 1..={MAX_BENCH_INSTANCES}"));
            }
        }
        Ok(())
    }

    /// `(cell, seed)` for every row, in output order.
    pub fn expand(&self) -> Vec<(BenchCell, u64)> {
        let mut out = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            for k in 0..c.instances.unwrap_or(self.instances) {
                let seed = self.seed.wrapping_add((i as u64) << 32).wrapping_add(k as u64);
                out.push((c.clone(), seed));
            }
        }
        out
    }
}

/// Solves with the chosen method. Banach starts at the origin; the decomposed
/// method treats the instance as a relaxed non-expansive one.
pub fn solve_instance(
    inst: &ContractionInstance,
    method: Method,
    eps: &Rat,
    config: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    match method {
        Method::Banach => banach_solve(inst, eps, &RatVec::zeros(inst.dim()), config),
        Method::Centerpoint => centerpoint_solve(inst, eps, config),
        Method::Decomposed => {
            let relaxed = DaggerInstance::from_contraction(inst, eps.clone())?;
            let mut report = sqrt_block_solve(&relaxed, config)?;
            report.lambda = inst.lambda().clone();
            Ok(report)
        }
    }
}

pub fn build_instance(cell: &BenchCell, seed: u64) -> Result<ContractionInstance, InstanceError> {
    let affine = match cell.instance {
        InstanceKind::Random => random_affine(cell.d, &cell.lambda, seed)?,
        InstanceKind::Reflection => reflection_affine(cell.d, &cell.lambda)?,
    };
    Ok(affine.instance())
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub cell: BenchCell,
    pub seed: u64,
    /// Queries spent, also when the solve failed.
    pub queries: u64,
    pub result: Result<SolveReport, String>,
    pub wall_ms: f64,
}

pub fn run_cell(cell: &BenchCell, seed: u64, config: &SolverConfig) -> CellOutcome {
    let start = Instant::now();
    let (queries, result) = match build_instance(cell, seed) {
        Ok(inst) => {
            let r = solve_instance(&inst, cell.method, &cell.epsilon, config).map_err(|e| e.to_string());
            (inst.queries(), r)
        }
        Err(e) => (0, Err(e.to_string())),
    };
    CellOutcome { cell: cell.clone(), seed, queries, result, wall_ms: start.elapsed().as_secs_f64() * 1e3 }
}

/// Cells run concurrently; the result order follows [`BenchMatrix::expand`].
pub fn run_matrix(matrix: &BenchMatrix, config: &SolverConfig) -> Vec<CellOutcome> {
    matrix.expand().into_par_iter().map(|(cell, seed)| run_cell(&cell, seed, config)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: String,
    pub d: usize,
    pub lambda: String,
    pub epsilon: String,
    pub queries: u64,
    /// Decimal residual, or `error: <message>` when the cell failed.
    pub residual: String,
    pub iterations: Option<u64>,
    pub wall_ms: String,
}

impl BenchRow {
    pub fn from_outcome(o: &CellOutcome) -> Self {
        let (residual, iterations) = match &o.result {
            Ok(r) => (rat::format_decimal(&r.residual, crate::io::DECIMAL_DIGITS), Some(r.iterations)),
            Err(e) => (format!("error: {e}"), None),
        };
        BenchRow {
            method: o.cell.method.name().to_string(),
            d: o.cell.d,
            lambda: rat::format_rat(&o.cell.lambda),
            epsilon: rat::format_rat(&o.cell.epsilon),
            queries: o.queries,
            residual,
            iterations,
            wall_ms: format!("{:.3}", o.wall_ms),
        }
    }
}

/// Always writes the header, so an empty matrix gives a header-only file.
pub fn write_csv<W: Write>(outcomes: &[CellOutcome], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for o in outcomes {
        w.serialize(BenchRow::from_outcome(o))?;
    }
    w.flush()?;
    Ok(())
}

/// Appends one report as a row, writing the header first when `with_header`.
pub fn write_report_row<W: Write>(report: &SolveReport, wall_ms: f64, with_header: bool, out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if with_header {
        w.write_record(CSV_HEADER)?;
    }
    w.serialize(BenchRow {
        method: report.method.name().to_string(),
        d: report.d,
        lambda: rat::format_rat(&report.lambda),
        epsilon: rat::format_rat(&report.epsilon),
        queries: report.queries,
        residual: rat::format_decimal(&report.residual, crate::io::DECIMAL_DIGITS),
        iterations: Some(report.iterations),
        wall_ms: format!("{wall_ms:.3}"),
    })?;
    w.flush()?;
    Ok(())
}
