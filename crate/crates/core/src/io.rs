//! Plain-text CSV formats.
//!
//! Fields: a header `# nx,np,x_min,x_max,p_min,p_max` holding the grid, then
//! `nx·np` rows `x,p,value` (real) or `x,p,re,im` (complex), `p` fastest.
//! Density matrices use the complex field layout with both axes equal to the
//! position grid. Wave functions: a header `# n,x_min,x_max`, then `x,re,im`.
//!
//! Numbers are written in the shortest form that parses back to the same `f64`.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid1D, PhaseSpaceGrid};
use crate::states::{DensityMatrix, WaveFunction};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_numbers(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| parse_err(line, format!("`{}`: {e}", t.trim()))))
        .collect()
}

/// Header numbers and data rows, with line numbers for error reporting.
struct Table {
    header: Vec<f64>,
    rows: Vec<(usize, Vec<f64>)>,
}

fn read_table(reader: impl BufRead) -> Result<Table> {
    let mut header = None;
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            // Comments that are not purely numeric are ignored.
            if header.is_none() {
                if let Ok(v) = parse_numbers(rest, lineno) {
                    header = Some(v);
                }
            }
            continue;
        }
        if header.is_none() {
            return Err(parse_err(lineno, "data before the grid header"));
        }
        rows.push((lineno, parse_numbers(t, lineno)?));
    }
    let header = header.ok_or_else(|| parse_err(0, "missing grid header"))?;
    Ok(Table { header, rows })
}

fn grid_from_header(h: &[f64], line: usize) -> Result<PhaseSpaceGrid> {
    if h.len() != 6 {
        return Err(parse_err(line, format!("field header needs 6 numbers, got {}", h.len())));
    }
    let gx = Grid1D::new(count(h[0], line)?, h[2], h[3])?;
    let gp = Grid1D::new(count(h[1], line)?, h[4], h[5])?;
    Ok(PhaseSpaceGrid::new(gx, gp))
}

fn count(v: f64, line: usize) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(parse_err(line, format!("`{v}` is not a sample count")))
    }
}

fn coordinate_matches(expected: f64, got: f64, spacing: f64) -> bool {
    (expected - got).abs() <= 1e-6 * spacing
}

fn read_field_values(table: Table, width: usize) -> Result<(PhaseSpaceGrid, Vec<Vec<f64>>)> {
    let grid = grid_from_header(&table.header, 1)?;
    let (nx, np) = grid.shape();
    if table.rows.len() != nx * np {
        return Err(parse_err(0, format!("expected {} rows, found {}", nx * np, table.rows.len())));
    }
    let mut out = Vec::with_capacity(nx * np);
    for (k, (line, row)) in table.rows.into_iter().enumerate() {
        if row.len() != 2 + width {
            return Err(parse_err(line, format!("expected {} columns, found {}", 2 + width, row.len())));
        }
        let (i, j) = (k / np, k % np);
        if !coordinate_matches(grid.gx.point(i), row[0], grid.gx.dx())
            || !coordinate_matches(grid.gp.point(j), row[1], grid.gp.dx())
        {
            return Err(parse_err(line, format!("coordinates ({}, {}) do not match the header grid", row[0], row[1])));
        }
        out.push(row[2..].to_vec());
    }
    Ok((grid, out))
}

fn write_field_header(w: &mut impl Write, g: &PhaseSpaceGrid) -> Result<()> {
    writeln!(
        w,
        "# {},{},{:?},{:?},{:?},{:?}",
        g.gx.n(),
        g.gp.n(),
        g.gx.x_min(),
        g.gx.x_max(),
        g.gp.x_min(),
        g.gp.x_max()
    )?;
    Ok(())
}

pub fn write_field(w: &mut impl Write, f: &Field2D<f64>) -> Result<()> {
    let g = f.grid();
    write_field_header(w, g)?;
    let (xs, ps) = (g.gx.points(), g.gp.points());
    for ((i, j), v) in f.values().indexed_iter() {
        writeln!(w, "{:?},{:?},{:?}", xs[i], ps[j], v)?;
    }
    Ok(())
}

pub fn write_complex_field(w: &mut impl Write, f: &Field2D<Complex64>) -> Result<()> {
    let g = f.grid();
    write_field_header(w, g)?;
    let (xs, ps) = (g.gx.points(), g.gp.points());
    for ((i, j), v) in f.values().indexed_iter() {
        writeln!(w, "{:?},{:?},{:?},{:?}", xs[i], ps[j], v.re, v.im)?;
    }
    Ok(())
}

pub fn read_field(r: impl BufRead) -> Result<Field2D<f64>> {
    let (grid, rows) = read_field_values(read_table(r)?, 1)?;
    let values = Array2::from_shape_vec(grid.shape(), rows.into_iter().map(|v| v[0]).collect()).expect("row count checked");
    Field2D::new(grid, values)
}

pub fn read_complex_field(r: impl BufRead) -> Result<Field2D<Complex64>> {
    let (grid, rows) = read_field_values(read_table(r)?, 2)?;
    let values = rows.into_iter().map(|v| Complex64::new(v[0], v[1])).collect();
    Field2D::new(grid, Array2::from_shape_vec(grid.shape(), values).expect("row count checked"))
}

/// Reads either a real field or the real part of a complex one.
pub fn read_real_or_complex_field(r: impl BufRead) -> Result<Field2D<f64>> {
    let table = read_table(r)?;
    let width = table.rows.first().map_or(1, |(_, v)| v.len().saturating_sub(2));
    let (grid, rows) = read_field_values(table, width.clamp(1, 2))?;
    let values = Array2::from_shape_vec(grid.shape(), rows.into_iter().map(|v| v[0]).collect()).expect("row count checked");
    Field2D::new(grid, values)
}

pub fn write_density(w: &mut impl Write, rho: &DensityMatrix) -> Result<()> {
    write_complex_field(w, &rho.to_field())
}

pub fn read_density(r: impl BufRead) -> Result<DensityMatrix> {
    DensityMatrix::from_field(&read_complex_field(r)?)
}

pub fn write_wavefunction(w: &mut impl Write, psi: &WaveFunction) -> Result<()> {
    let g = psi.grid();
    writeln!(w, "# {},{:?},{:?}", g.n(), g.x_min(), g.x_max())?;
    for (x, a) in g.points().iter().zip(psi.amp()) {
        writeln!(w, "{:?},{:?},{:?}", x, a.re, a.im)?;
    }
    Ok(())
}

pub fn read_wavefunction(r: impl BufRead) -> Result<WaveFunction> {
    let table = read_table(r)?;
    let h = &table.header;
    if h.len() != 3 {
        return Err(parse_err(1, format!("wave function header needs 3 numbers, got {}", h.len())));
    }
    let grid = Grid1D::new(count(h[0], 1)?, h[1], h[2])?;
    if table.rows.len() != grid.n() {
        return Err(parse_err(0, format!("expected {} rows, found {}", grid.n(), table.rows.len())));
    }
    let mut amp = Array1::zeros(grid.n());
    for (i, (line, row)) in table.rows.into_iter().enumerate() {
        if row.len() != 3 {
            return Err(parse_err(line, format!("expected 3 columns, found {}", row.len())));
        }
        if !coordinate_matches(grid.point(i), row[0], grid.dx()) {
            return Err(parse_err(line, format!("x = {} does not match the header grid", row[0])));
        }
        amp[i] = Complex64::new(row[1], row[2]);
    }
    WaveFunction::new(grid, amp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::states::{cat_state, density_from_pure, CoherentLabel};

    #[test]
    fn real_field_round_trip_is_exact() {
        let g = PhaseSpaceGrid::new(make_grid(16, 3.0).unwrap(), Grid1D::new(8, -1.0, 2.5).unwrap());
        let f = Field2D::from_fn(g, |x, p| (x * 0.37).sin() * p.exp() + 1e-300);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# 16,8,-3.0,3.0,-1.0,2.5\n"));
        assert_eq!(text.lines().count(), 1 + 16 * 8);
        assert_eq!(read_field(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn density_and_wavefunction_round_trip() {
        let g = make_grid(32, 8.0).unwrap();
        let psi = cat_state(CoherentLabel::new(0.5, 1.0), CoherentLabel::new(-0.5, 0.0), 0.3, &g).unwrap();
        let mut buf = Vec::new();
        write_wavefunction(&mut buf, &psi).unwrap();
        assert_eq!(read_wavefunction(buf.as_slice()).unwrap(), psi);
        let rho = density_from_pure(&psi);
        let mut buf = Vec::new();
        write_density(&mut buf, &rho).unwrap();
        assert_eq!(read_density(buf.as_slice()).unwrap(), rho);
        let re = read_real_or_complex_field(buf.as_slice()).unwrap();
        assert_eq!(re.values()[[3, 3]], rho.rho()[[3, 3]].re);
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            "0,0,1\n",
            "# 8,8,-1,1,-1,1\n0,0,1\n",
            "# 8,8,-1,1\n",
            "# 8,8,-1,1,-1,1\n-1,-1,abc\n",
        ];
        for c in cases {
            assert!(matches!(read_field(c.as_bytes()), Err(Error::Parse { .. })), "{c}");
        }
        let bad_coord = "# 1,1,0,1,0,1\n0.5,0,2\n";
        assert!(read_field(bad_coord.as_bytes()).is_err());
    }
}
