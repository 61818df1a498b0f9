//! Fixed-layout contour CSV, one row per grid direction.
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly. Columns of the buffered contour are empty when it was not
//! requested.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const HEADER: [&str; 11] =
    ["theta", "ux", "uy", "C", "Cbar", "Cbar_scaled", "vx_classical", "vy_classical", "vx_buffered", "vy_buffered", "convex_ok"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    pub theta: f64,
    pub ux: f64,
    pub uy: f64,
    pub c: f64,
    pub cbar: Option<f64>,
    pub cbar_scaled: Option<f64>,
    pub vx_classical: f64,
    pub vy_classical: f64,
    pub vx_buffered: Option<f64>,
    pub vy_buffered: Option<f64>,
    /// Vertex flags of every polygon written in this row.
    pub convex_ok: bool,
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

pub fn write_contour_csv(path: &Path, rows: &[ContourRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::file(path, e.to_string()))?;
    let io = |e: csv::Error| CliError::file(path, e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            format_real(r.theta),
            format_real(r.ux),
            format_real(r.uy),
            format_real(r.c),
            opt(r.cbar),
            opt(r.cbar_scaled),
            format_real(r.vx_classical),
            format_real(r.vy_classical),
            opt(r.vx_buffered),
            opt(r.vy_buffered),
            r.convex_ok.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a contour CSV, naming the first column that breaks the layout.
pub fn read_contour_csv(path: &Path) -> Result<Vec<ContourRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::file(path, e.to_string()))?;
    let header = r.headers().map_err(|e| CliError::file(path, e.to_string()))?.clone();
    for (i, expected) in HEADER.iter().enumerate() {
        match header.get(i) {
            Some(found) if found == *expected => {}
            Some(found) => return Err(CliError::file(path, format!("column {} is {found:?}, expected {expected:?}", i + 1))),
            None => return Err(CliError::file(path, format!("missing column {} {expected:?}", i + 1))),
        }
    }
    if let Some(extra) = header.get(HEADER.len()) {
        return Err(CliError::file(path, format!("unexpected column {} {extra:?}", HEADER.len() + 1)));
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::file(path, e.to_string()))?;
        let line = k + 2;
        if rec.len() != HEADER.len() {
            return Err(CliError::file(path, format!("line {line}: {} fields, expected {}", rec.len(), HEADER.len())));
        }
        let field = |i: usize| -> Result<Option<f64>> {
            let s = rec[i].trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| CliError::file(path, format!("line {line}: column {:?} is not a number: {s:?}", HEADER[i])))
        };
        let required = |i: usize| -> Result<f64> {
            field(i)?.ok_or_else(|| CliError::file(path, format!("line {line}: column {:?} is empty", HEADER[i])))
        };
        let convex_ok = match rec[10].trim() {
            "true" => true,
            "false" => false,
            other => return Err(CliError::file(path, format!("line {line}: column \"convex_ok\" is not a boolean: {other:?}"))),
        };
        rows.push(ContourRecord {
            theta: required(0)?,
            ux: required(1)?,
            uy: required(2)?,
            c: required(3)?,
            cbar: field(4)?,
            cbar_scaled: field(5)?,
            vx_classical: required(6)?,
            vy_classical: required(7)?,
            vx_buffered: field(8)?,
            vy_buffered: field(9)?,
            convex_ok,
        });
    }
    if rows.is_empty() {
        return Err(CliError::file(path, "no contour rows"));
    }
    let buffered = rows[0].cbar.is_some();
    for (k, row) in rows.iter().enumerate() {
        let cols = [(4, row.cbar), (5, row.cbar_scaled), (8, row.vx_buffered), (9, row.vy_buffered)];
        if let Some((i, _)) = cols.iter().find(|(_, c)| c.is_some() != buffered) {
            return Err(CliError::file(path, format!("line {}: column {:?} is {}", k + 2, HEADER[*i], if buffered { "empty" } else { "set" })));
        }
    }
    Ok(rows)
}
