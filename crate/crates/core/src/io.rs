//! Flat-file formats for populations.
//!
//! Load profiles: one row per participant, `id,h0,...,h23,max_delay`.
//! Scalar populations (reserve discrepancies, additive weights): `id,value`.
//! Both accept an optional header row, recognized by a non-numeric first
//! field.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, ShapleyError};
use crate::games::{LoadProfile, HORIZON};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn csv_error(e: csv::Error) -> ShapleyError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    ShapleyError::Parse {
        line,
        field: "row".into(),
        message: e.to_string(),
    }
}

fn is_header(record: &csv::StringRecord) -> bool {
    record
        .get(0)
        .map(|f| f.parse::<f64>().is_err())
        .unwrap_or(false)
}

fn parse_field<T: std::str::FromStr>(raw: &str, line: u64, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| ShapleyError::Parse {
        line,
        field: field.to_string(),
        message: format!("cannot parse {raw:?}: {e}"),
    })
}

fn records<R: Read>(input: R) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for (idx, rec) in reader(input).records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        if idx == 0 && is_header(&rec) {
            continue;
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(idx as u64 + 1);
        out.push((line, rec));
    }
    Ok(out)
}

/// Parses load profiles from CSV text.
pub fn parse_load_csv<R: Read>(input: R) -> Result<Vec<LoadProfile>> {
    let expected = HORIZON + 2;
    let mut profiles = Vec::new();
    for (line, rec) in records(input)? {
        if rec.len() != expected {
            return Err(ShapleyError::Parse {
                line,
                field: "row".into(),
                message: format!(
                    "expected {expected} fields (id, h0..h{}, max_delay), found {}",
                    HORIZON - 1,
                    rec.len()
                ),
            });
        }
        let id: u64 = parse_field(&rec[0], line, "id")?;
        let mut demand = Vec::with_capacity(HORIZON);
        for h in 0..HORIZON {
            let field = format!("h{h}");
            let x: f64 = parse_field(&rec[h + 1], line, &field)?;
            if !(x.is_finite() && x >= 0.0) {
                return Err(ShapleyError::Validation {
                    line,
                    field,
                    message: format!("demand must be a non-negative number, got {x}"),
                });
            }
            demand.push(x);
        }
        let max_delay: usize = parse_field(&rec[HORIZON + 1], line, "max_delay")?;
        if max_delay >= HORIZON {
            return Err(ShapleyError::Validation {
                line,
                field: "max_delay".into(),
                message: format!("must be in 0..={}, got {max_delay}", HORIZON - 1),
            });
        }
        profiles.push(LoadProfile::new(id, demand, max_delay)?);
    }
    Ok(profiles)
}

pub fn read_load_csv(path: &Path) -> Result<Vec<LoadProfile>> {
    parse_load_csv(File::open(path)?)
}

/// Parses `id,value` rows, e.g. reserve discrepancies `ΔX_i` in kWh.
pub fn parse_scalar_csv<R: Read>(input: R) -> Result<Vec<(u64, f64)>> {
    let mut rows = Vec::new();
    for (line, rec) in records(input)? {
        if rec.len() != 2 {
            return Err(ShapleyError::Parse {
                line,
                field: "row".into(),
                message: format!("expected 2 fields (id, value), found {}", rec.len()),
            });
        }
        let id: u64 = parse_field(&rec[0], line, "id")?;
        let x: f64 = parse_field(&rec[1], line, "value")?;
        if !x.is_finite() {
            return Err(ShapleyError::Validation {
                line,
                field: "value".into(),
                message: format!("must be finite, got {x}"),
            });
        }
        rows.push((id, x));
    }
    Ok(rows)
}

pub fn read_scalar_csv(path: &Path) -> Result<Vec<(u64, f64)>> {
    parse_scalar_csv(File::open(path)?)
}

/// Counts the fields of the first data row, to tell the two formats apart.
pub fn sniff_field_count(path: &Path) -> Result<Option<usize>> {
    Ok(records(File::open(path)?)?.first().map(|(_, r)| r.len()))
}

/// Parses a target profile: a single row of non-negative values.
pub fn parse_target_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let rows = records(input)?;
    let (line, rec) = match rows.as_slice() {
        [only] => only,
        _ => {
            return Err(ShapleyError::Parse {
                line: rows.get(1).map(|r| r.0).unwrap_or(1),
                field: "row".into(),
                message: format!("expected exactly one target row, found {}", rows.len()),
            })
        }
    };
    rec.iter()
        .enumerate()
        .map(|(h, raw)| {
            let field = format!("h{h}");
            let y: f64 = parse_field(raw, *line, &field)?;
            if !(y.is_finite() && y >= 0.0) {
                return Err(ShapleyError::Validation {
                    line: *line,
                    field,
                    message: format!("target must be non-negative, got {y}"),
                });
            }
            Ok(y)
        })
        .collect()
}

pub fn read_target_csv(path: &Path) -> Result<Vec<f64>> {
    parse_target_csv(File::open(path)?)
}

/// Writes profiles in the load CSV format, with a header row.
pub fn write_load_csv<W: Write>(mut out: W, profiles: &[LoadProfile]) -> Result<()> {
    let horizon = profiles.first().map(|p| p.horizon()).unwrap_or(HORIZON);
    let mut header = String::from("id");
    for h in 0..horizon {
        header.push_str(&format!(",h{h}"));
    }
    header.push_str(",max_delay\n");
    out.write_all(header.as_bytes())?;
    for p in profiles {
        let mut row = p.id.to_string();
        for x in &p.demand {
            row.push_str(&format!(",{x}"));
        }
        row.push_str(&format!(",{}\n", p.max_delay));
        out.write_all(row.as_bytes())?;
    }
    Ok(())
}
