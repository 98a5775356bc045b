//! CSV and argument parsing helpers. Floats are written in their shortest
//! round-trip form so written samples parse back to identical values.

use std::io::{Read, Write};

use crate::depth::PointCloud;
use crate::error::{Error, Result};
use crate::limit::LimitField;

/// Shortest decimal (never exponent) form that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn csv_error(e: &csv::Error) -> Error {
    Error::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("expected {expected_len} fields, found {len}")
            }
            _ => e.to_string(),
        },
    }
}

/// Reads a point cloud from CSV with a mandatory header row; the number of
/// header columns fixes the dimension.
pub fn read_cloud<R: Read>(input: R) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers().map_err(|e| csv_error(&e))?.clone();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Csv {
            line: 1,
            message: "missing header".into(),
        });
    }
    if header.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(Error::Csv {
            line: 1,
            message: "header row is mandatory; found numbers".into(),
        });
    }
    let dim = header.len();
    let mut coords = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&e))?;
        let line = rec.position().map_or(0, |p| p.line());
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                line,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    message: format!("non-finite value {field:?}"),
                });
            }
            coords.push(v);
        }
    }
    if coords.is_empty() {
        return Err(Error::Csv {
            line: 2,
            message: "no data rows".into(),
        });
    }
    PointCloud::new(dim, coords)
}

pub fn read_cloud_path(path: &std::path::Path) -> Result<PointCloud> {
    let f = std::fs::File::open(path)?;
    read_cloud(std::io::BufReader::new(f))
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes a cloud with header `x1,...,xd`.
pub fn write_cloud<W: Write>(out: W, cloud: &PointCloud) -> Result<()> {
    let mut w = writer(out);
    let header: Vec<String> = (1..=cloud.dim()).map(|i| format!("x{i}")).collect();
    w.write_record(&header).map_err(|e| csv_error(&e))?;
    for p in cloud.iter() {
        w.write_record(p.iter().map(|&x| fmt_f64(x))).map_err(|e| csv_error(&e))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `z_x,z_y,w` for every lattice point inside the ball.
pub fn write_field<W: Write>(out: W, field: &LimitField) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["z_x", "z_y", "w"]).map_err(|e| csv_error(&e))?;
    for (z, v) in field.points() {
        w.write_record([fmt_f64(z.x), fmt_f64(z.y), fmt_f64(v)])
            .map_err(|e| csv_error(&e))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `"a,b,..."` into numbers.
pub fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::invalid(format!("cannot parse {s:?} as a number")))
        })
        .collect()
}

pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<usize>()
                .map_err(|_| Error::invalid(format!("cannot parse {s:?} as a level")))
        })
        .collect()
}
