//! CSV and JSON import/export with fixed, documented column layouts.
//!
//! Point sets: `x,y`. Density reports: `R,max_count,min_count,norm_max,norm_min`.
//! Fields: `x,y,re,im,modulus`. Signals: `t,re,im`. All floats use Rust's
//! shortest-roundtrip formatting, so rewrites are byte-stable.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointset::{DensityReport, PointSet};
use crate::signal::SampledSignal;
use crate::stft::{PhasePoint, StftField};

pub fn write_pointset_csv(path: &Path, ps: &PointSet) -> Result<()> {
    let mut out = String::from("x,y\n");
    for p in ps.points() {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_pointset_csv(path: &Path) -> Result<PointSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || headers[0].trim() != "x" || headers[1].trim() != "y" {
        return Err(Error::invalid("csv", "expected header `x,y`"));
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let x: f64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::invalid("csv", format!("bad x value `{}`", &rec[0])))?;
        let y: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::invalid("csv", format!("bad y value `{}`", &rec[1])))?;
        points.push(PhasePoint::new(x, y));
    }
    PointSet::new(points, None)
}

pub fn write_density_csv(path: &Path, report: &DensityReport) -> Result<()> {
    let mut out = String::from("R,max_count,min_count,norm_max,norm_min\n");
    for i in 0..report.radii.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            report.radii[i],
            report.max_counts[i],
            report.min_counts[i],
            report.normalized_max[i],
            report.normalized_min[i]
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_field_csv(path: &Path, field: &StftField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,y,re,im,modulus")?;
    let grid = field.grid();
    let ny = grid.y.count();
    for ix in 0..grid.x.count() {
        let x = grid.x.node(ix);
        for iy in 0..ny {
            let y = grid.y.node(iy);
            let v = field.values()[ix * ny + iy];
            writeln!(f, "{},{},{},{},{}", x, y, v.re, v.im, v.norm())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FieldJson<'a> {
    source: &'a str,
    x: crate::stft::GridRange,
    y: crate::stft::GridRange,
    /// Flattened x-major [re, im] pairs.
    values: Vec<f64>,
}

pub fn write_field_json(path: &Path, field: &StftField) -> Result<()> {
    let values = field
        .values()
        .iter()
        .flat_map(|v| [v.re, v.im])
        .collect();
    let doc = FieldJson {
        source: field.source(),
        x: field.grid().x,
        y: field.grid().y,
        values,
    };
    std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn write_signal_csv(path: &Path, signal: &SampledSignal) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,re,im")?;
    for (t, v) in signal.grid().nodes().zip(signal.values()) {
        writeln!(f, "{},{},{}", t, v.re, v.im)?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
