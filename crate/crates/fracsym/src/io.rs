//! CSV exchange format for sampled grid functions.
//!
//! One-dimensional data uses the header `t,f`, two-dimensional data
//! `x1,x2,u` in row-major order with the x2 index outermost. Lines
//! starting with `#` are metadata comments. Values are written with 17
//! significant digits, which round-trips f64 exactly.

use crate::error::{FracError, Result};
use crate::fraccore::{GridFunction1D, GridFunction2D, UniformGrid1D};
use std::io::{BufRead, Write};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_grid1d(
    out: &mut dyn Write,
    f: &GridFunction1D,
    comments: &[String],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "t,f")?;
    for (t, v) in f.grid.nodes().zip(&f.values) {
        writeln!(out, "{},{}", fmt(t), fmt(*v))?;
    }
    Ok(())
}

pub fn write_grid2d(
    out: &mut dyn Write,
    f: &GridFunction2D,
    header: &str,
    comments: &[String],
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{header}")?;
    for i2 in 0..f.grid2.count {
        let x2 = f.grid2.node(i2);
        for i1 in 0..f.grid1.count {
            let x1 = f.grid1.node(i1);
            writeln!(out, "{},{},{}", fmt(x1), fmt(x2), fmt(f.at(i1, i2)))?;
        }
    }
    Ok(())
}

fn data_rows(reader: &mut dyn BufRead, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for line in reader.lines() {
        let line = line.map_err(|e| FracError::Parse(format!("read failure: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            // header row: column names, not numbers
            if trimmed.split(',').next().unwrap_or("").parse::<f64>().is_err() {
                continue;
            }
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != columns {
            return Err(FracError::parse(format!(
                "expected {columns} columns, found {} in '{trimmed}'"
            , fields.len())));
        }
        let mut row = Vec::with_capacity(columns);
        for f in fields {
            row.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| FracError::parse(format!("bad number '{f}'")))?,
            );
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FracError::parse("no data rows".to_string()));
    }
    Ok(rows)
}

fn uniform_grid_from(ts: &[f64]) -> Result<UniformGrid1D> {
    if ts.len() < 2 {
        return Err(FracError::size("need at least two samples".to_string()));
    }
    let terminal = ts[0];
    let step = (ts[ts.len() - 1] - terminal) / (ts.len() - 1) as f64;
    let grid = UniformGrid1D::new(terminal, step, ts.len())?;
    for (k, &t) in ts.iter().enumerate() {
        if (t - grid.node(k)).abs() > 1e-9 * step.max(1.0) {
            return Err(FracError::parse(format!(
                "abscissae are not uniform near t = {t}"
            )));
        }
    }
    Ok(grid)
}

pub fn read_grid1d(reader: &mut dyn BufRead) -> Result<GridFunction1D> {
    let rows = data_rows(reader, 2)?;
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let vs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    GridFunction1D::new(uniform_grid_from(&ts)?, vs)
}

pub fn read_grid2d(reader: &mut dyn BufRead) -> Result<GridFunction2D> {
    let rows = data_rows(reader, 3)?;
    // x2 outermost: count the x1 block length by the first change in x2
    let n1 = rows
        .iter()
        .position(|r| r[1] != rows[0][1])
        .unwrap_or(rows.len());
    if n1 == 0 || rows.len() % n1 != 0 {
        return Err(FracError::parse("rows do not form a full tensor grid".to_string()));
    }
    let n2 = rows.len() / n1;
    if n2 < 2 {
        return Err(FracError::size("need at least two x2 rows".to_string()));
    }
    let x1s: Vec<f64> = rows[..n1].iter().map(|r| r[0]).collect();
    let x2s: Vec<f64> = (0..n2).map(|i| rows[i * n1][1]).collect();
    let grid1 = uniform_grid_from(&x1s)?;
    let grid2 = uniform_grid_from(&x2s)?;
    for (i, row) in rows.iter().enumerate() {
        let (i1, i2) = (i % n1, i / n1);
        if (row[0] - grid1.node(i1)).abs() > 1e-9 || (row[1] - grid2.node(i2)).abs() > 1e-9 {
            return Err(FracError::parse(format!(
                "row {i} breaks the row-major x2-outer layout"
            )));
        }
    }
    let values = rows.iter().map(|r| r[2]).collect();
    GridFunction2D::new(grid1, grid2, values)
}
