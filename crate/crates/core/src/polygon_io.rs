//! Polygon files: one record per polygon holding its vertices `v_0..v_{n-1}`.
//!
//! The text form puts one `x y z` vertex per line with a blank line after
//! each record. The JSON form is an array of records, each an array of
//! `[x, y, z]` triples. Numbers are written in shortest round-trip form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Ring, Vec3};

/// Text form of `polygons`, each given by its vertices.
pub fn write_text(polygons: &[Vec<Vec3>]) -> String {
    let mut out = String::new();
    for poly in polygons {
        for p in poly {
            let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
        }
        out.push('\n');
    }
    out
}

/// JSON form of `polygons`, one record per line inside the outer array.
pub fn write_json(polygons: &[Vec<Vec3>]) -> String {
    let records: Vec<String> = polygons
        .iter()
        .map(|poly| {
            serde_json::to_string(&poly.iter().map(|p| p.to_array()).collect::<Vec<_>>()).expect("finite floats")
        })
        .collect();
    format!("[\n{}\n]\n", records.join(",\n"))
}

/// Vertices `v_0..v_{n-1}` of a ring, the form stored in polygon files.
pub fn ring_vertices(ring: &Ring) -> Vec<Vec3> {
    let mut v = ring.vertices();
    v.pop();
    v
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads either form; JSON is recognised by a leading `[`.
pub fn read_polygons(text: &str) -> Result<Vec<Vec<Vec3>>> {
    if text.trim_start().starts_with('[') {
        read_json(text)
    } else {
        read_text(text)
    }
}

fn read_text(text: &str) -> Result<Vec<Vec<Vec3>>> {
    let mut polygons = Vec::new();
    let mut current: Vec<Vec3> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            if !current.is_empty() {
                polygons.push(std::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_error(line_no, format!("expected 3 coordinates, found {}", fields.len())));
        }
        let mut xyz = [0.0f64; 3];
        for (slot, f) in xyz.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| parse_error(line_no, format!("not a number: {f:?}")))?;
            if !slot.is_finite() {
                return Err(parse_error(line_no, format!("non-finite coordinate {f:?}")));
            }
        }
        current.push(Vec3::from(xyz));
    }
    if !current.is_empty() {
        polygons.push(current);
    }
    Ok(polygons)
}

fn read_json(text: &str) -> Result<Vec<Vec<Vec3>>> {
    let records: Vec<Vec<[f64; 3]>> =
        serde_json::from_str(text).map_err(|e| parse_error(e.line(), format!("invalid polygon JSON: {e}")))?;
    Ok(records.into_iter().map(|r| r.into_iter().map(Vec3::from).collect()).collect())
}

/// Reads a polygon file and validates every record as a ring. Errors name
/// the line where the offending record starts (1 for JSON input).
pub fn read_rings(text: &str) -> Result<Vec<Ring>> {
    let polygons = read_polygons(text)?;
    let starts = record_start_lines(text);
    polygons
        .iter()
        .enumerate()
        .map(|(i, poly)| {
            Ring::from_vertices(poly).map_err(|e| {
                parse_error(starts.get(i).copied().unwrap_or(1), format!("polygon {} is not a valid ring: {e}", i + 1))
            })
        })
        .collect()
}

fn record_start_lines(text: &str) -> Vec<usize> {
    if text.trim_start().starts_with('[') {
        return Vec::new();
    }
    let mut starts = Vec::new();
    let mut in_record = false;
    for (i, line) in text.lines().enumerate() {
        let blank = line.trim().is_empty();
        if !blank && !in_record {
            starts.push(i + 1);
        }
        in_record = !blank;
    }
    starts
}
