//! Loading and writing the CSV formats by content.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use phasespace::analysis::StateMetrics;
use phasespace::io;
use phasespace::transforms::{density_from_wigner, wigner_from_density, WignerFunction};
use phasespace::{density_from_pure, DensityMatrix, Field2D};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// A state read from disk: a density matrix (or wave function) or a real
/// phase-space field.
pub enum Input {
    Density(DensityMatrix),
    Field(Field2D<f64>),
}

impl Input {
    pub fn wigner(&self) -> CliResult<WignerFunction> {
        match self {
            Input::Density(rho) => Ok(wigner_from_density(rho)?),
            Input::Field(f) => Ok(WignerFunction::from_field(f.clone())),
        }
    }

    pub fn density(self) -> CliResult<DensityMatrix> {
        match self {
            Input::Density(rho) => Ok(rho),
            Input::Field(f) => Ok(density_from_wigner(&WignerFunction::from_field(f))?),
        }
    }
}

/// Number of comma-separated values in the header and in the first data row.
fn shape_of(text: &str) -> (usize, usize) {
    let mut header = 0;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        match line.strip_prefix('#') {
            Some(rest) if header == 0 && rest.split(',').all(|t| t.trim().parse::<f64>().is_ok()) => {
                header = rest.split(',').count();
            }
            Some(_) => {}
            None => return (header, line.split(',').count()),
        }
    }
    (header, 0)
}

pub fn load(path: &Path) -> CliResult<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let ctx = |e: phasespace::Error| CliError::from(e).context(path.display());
    match shape_of(&text) {
        (3, _) => Ok(Input::Density(density_from_pure(&io::read_wavefunction(text.as_bytes()).map_err(ctx)?))),
        (6, 4) => Ok(Input::Density(io::read_density(text.as_bytes()).map_err(ctx)?)),
        (6, _) => Ok(Input::Field(io::read_field(text.as_bytes()).map_err(ctx)?)),
        (h, _) => Err(CliError::Validation(format!(
            "{}: unrecognised header with {h} values (expected a field or wave function header)",
            path.display()
        ))),
    }
}

/// Buffered writer to `path`, or standard output when absent.
pub fn sink(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

pub fn write_field(path: Option<&PathBuf>, f: &Field2D<f64>) -> CliResult<()> {
    let mut w = sink(path)?;
    io::write_field(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn write_density(path: Option<&PathBuf>, rho: &DensityMatrix) -> CliResult<()> {
    let mut w = sink(path)?;
    io::write_density(&mut w, rho)?;
    w.flush()?;
    Ok(())
}

pub fn write_json(path: Option<&PathBuf>, v: &Value) -> CliResult<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn metrics_json(m: &StateMetrics) -> Value {
    json!({
        "mean_x": m.mean_x,
        "mean_p": m.mean_p,
        "var_x": m.var_x,
        "var_p": m.var_p,
        "negativity_volume": m.negativity_volume,
        "purity": m.purity,
        "min_wigner": m.min_wigner,
        "trace": m.trace,
        "l2_norm": m.l2_norm,
    })
}
