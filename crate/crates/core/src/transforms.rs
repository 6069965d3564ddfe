//! Conversions among the density-matrix, Wigner, Husimi and characteristic
//! function pictures.
//!
//! The discrete Wigner transform evaluates
//! `W(x, p) = (1/π) ∫ ρ(x+ν, x−ν) e^{−2ipν} dν` with `ν` on multiples of
//! `dx`, so the momentum axis is the reciprocal of the `ν` lattice: `n`
//! samples of spacing `π/(n dx)` (see [`Grid1D::wigner_momentum`]). Entries
//! `ρ(x_a, x_b)` with `a + b` odd have their midpoint between samples; the
//! inverse transform reaches them through band-limited interpolation of `W`
//! along `x`.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{gaussian_convolve, Field2D, Grid1D, PhaseSpaceGrid, BOUNDARY_WARN};
use crate::spectral::{self, Direction};
use crate::states::DensityMatrix;

/// Largest `|ρ − ρ†|` accepted by the Wigner transform.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Real quasi-probability `W(x_i, p_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerFunction {
    field: Field2D<f64>,
}

/// Husimi density `Q(x_i, p_j)`, normalized to unit integral over `dx dp`.
#[derive(Clone, Debug, PartialEq)]
pub struct HusimiFunction {
    field: Field2D<f64>,
}

/// `χ(q, k) = (2π)^{-1} ∬ e^{−iqx} e^{−ikp} W(x, p) dx dp` on the reciprocal lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicFunction {
    field: Field2D<Complex64>,
    source: PhaseSpaceGrid,
}

macro_rules! real_field_wrapper {
    ($t:ident) => {
        impl $t {
            pub fn from_field(field: Field2D<f64>) -> Self {
                Self { field }
            }

            pub fn field(&self) -> &Field2D<f64> {
                &self.field
            }

            pub fn into_field(self) -> Field2D<f64> {
                self.field
            }

            pub fn grid(&self) -> &PhaseSpaceGrid {
                self.field.grid()
            }

            pub fn values(&self) -> &Array2<f64> {
                self.field.values()
            }

            /// `Σ f dx dp`.
            pub fn integral(&self) -> f64 {
                self.field.integral()
            }

            pub fn min(&self) -> f64 {
                self.field.min()
            }
        }
    };
}

real_field_wrapper!(WignerFunction);
real_field_wrapper!(HusimiFunction);

impl CharacteristicFunction {
    pub fn new(field: Field2D<Complex64>, source: PhaseSpaceGrid) -> Result<Self> {
        field.grid().ensure_same(&source.dual())?;
        Ok(Self { field, source })
    }

    pub fn field(&self) -> &Field2D<Complex64> {
        &self.field
    }

    pub fn dual_grid(&self) -> &PhaseSpaceGrid {
        self.field.grid()
    }

    /// The phase-space lattice this function transforms back onto.
    pub fn source_grid(&self) -> &PhaseSpaceGrid {
        &self.source
    }

    pub fn values(&self) -> &Array2<Complex64> {
        self.field.values()
    }

    /// Pointwise multiplication by `f(q, k)`; Gaussian channels act this way.
    pub fn scaled(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let g = *self.field.grid();
        let qs = g.gx.points();
        let ks = g.gp.points();
        let mut field = self.field.clone();
        for ((a, b), v) in field.values_mut().indexed_iter_mut() {
            *v *= f(qs[a], ks[b]);
        }
        Self { field, source: self.source }
    }
}

fn check_density(rho: &DensityMatrix) -> Result<()> {
    let herm = rho.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NonHermitian(herm));
    }
    let edge = crate::grid::boundary_max(rho.rho(), |z| z.norm());
    if edge > BOUNDARY_WARN {
        log::warn!("density matrix boundary magnitude {edge:.2e}; Wigner transform will alias");
    }
    Ok(())
}

pub fn wigner_from_density(rho: &DensityMatrix) -> Result<WignerFunction> {
    check_density(rho)?;
    let g = *rho.grid();
    let n = g.n();
    let r = rho.rho();
    let scale = g.dx() / PI;
    let mut w = Array2::<f64>::zeros((n, n));
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let half = (n / 2) as isize;
    for i in 0..n as isize {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for j in -half..half {
            let (a, b) = (i + j, i - j);
            if (0..n as isize).contains(&a) && (0..n as isize).contains(&b) {
                buf[j.rem_euclid(n as isize) as usize] = r[[a as usize, b as usize]];
            }
        }
        spectral::fft_1d(&mut buf, Direction::Forward);
        // Output column c holds p = (c − n/2) dp.
        for c in 0..n {
            let k = c as isize - half;
            w[[i as usize, c]] = scale * buf[k.rem_euclid(n as isize) as usize].re;
        }
    }
    let field = Field2D::new(PhaseSpaceGrid::wigner(g), w)?;
    Ok(WignerFunction { field })
}

fn ensure_wigner_lattice(grid: &PhaseSpaceGrid) -> Result<Grid1D> {
    let want = PhaseSpaceGrid::wigner(grid.gx);
    grid.ensure_same(&want)?;
    Ok(grid.gx)
}

/// Inverse Weyl transform `ρ(x,y) = ∫ W((x+y)/2, μ) e^{iμ(x−y)} dμ`.
pub fn density_from_wigner(w: &WignerFunction) -> Result<DensityMatrix> {
    w.field.check_finite()?;
    let g = ensure_wigner_lattice(w.grid())?;
    let n = g.n();
    let ni = n as isize;
    let half = ni / 2;
    let scale = PI / g.dx();
    let vals = w.values();

    // W at the midpoints x_i + dx/2, by spectral shift along x.
    let mut mid = spectral::complexify(vals);
    spectral::fft_axis(&mut mid, Axis(0), Direction::Forward);
    let q = spectral::odd_frequencies(n, g.dx());
    for ((a, _), v) in mid.indexed_iter_mut() {
        *v *= Complex64::from_polar(1.0, 0.5 * q[a] * g.dx());
    }
    spectral::fft_axis(&mut mid, Axis(0), Direction::Inverse);

    let mut rho = Array2::<Complex64>::zeros((n, n));
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..ni {
        // Even parity: ρ(x_{i+j}, x_{i−j}).
        for c in 0..n {
            let k = c as isize - half;
            buf[k.rem_euclid(ni) as usize] = Complex64::new(vals[[i as usize, c]], 0.0);
        }
        spectral::fft_1d(&mut buf, Direction::Inverse);
        for j in -half..half {
            let (a, b) = (i + j, i - j);
            if (0..ni).contains(&a) && (0..ni).contains(&b) {
                rho[[a as usize, b as usize]] = scale * buf[j.rem_euclid(ni) as usize];
            }
        }
        // Odd parity: ρ(x_{i+1+j}, x_{i−j}), ν = (j + ½) dx.
        for c in 0..n {
            let k = c as isize - half;
            let phase = Complex64::from_polar(1.0, PI * k as f64 / n as f64);
            buf[k.rem_euclid(ni) as usize] = phase * mid[[i as usize, c]].re;
        }
        spectral::fft_1d(&mut buf, Direction::Inverse);
        for j in -half..half {
            let (a, b) = (i + 1 + j, i - j);
            if (0..ni).contains(&a) && (0..ni).contains(&b) {
                rho[[a as usize, b as usize]] = scale * buf[j.rem_euclid(ni) as usize];
            }
        }
    }
    Ok(DensityMatrix::new(g, rho)?.hermitize())
}

/// Husimi density as the Wigner function smoothed by the coherent-state
/// kernel: variances `σ²/2` in `x` and `1/(2σ²)` in `p`.
pub fn husimi_from_wigner(w: &WignerFunction, sigma: f64) -> Result<HusimiFunction> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::BadParameter { name: "sigma", requirement: "positive", value: sigma });
    }
    let s2 = sigma * sigma;
    let field = gaussian_convolve(w.field(), 0.5 * s2, 0.5 / s2)?;
    Ok(HusimiFunction { field })
}

/// `Q(x0, p0) = (2π)^{-1} ⟨z|ρ|z⟩` on the Wigner lattice of `rho`.
pub fn husimi_from_density(rho: &DensityMatrix, sigma: f64) -> Result<HusimiFunction> {
    husimi_from_wigner(&wigner_from_density(rho)?, sigma)
}

pub fn characteristic_from_wigner(w: &WignerFunction) -> CharacteristicFunction {
    let g = *w.grid();
    let dual = g.dual();
    let (nx, np) = g.shape();
    let mut c = spectral::complexify(w.values());
    spectral::fft2(&mut c, Direction::Forward);
    let qs = dual.gx.points();
    let ks = dual.gp.points();
    let scale = g.cell_area() / (2.0 * PI);
    let chi = Array2::from_shape_fn((nx, np), |(a, b)| {
        let ia = signed_index(a, nx);
        let ib = signed_index(b, np);
        let phase = Complex64::from_polar(1.0, -(qs[a] * g.gx.x_min() + ks[b] * g.gp.x_min()));
        scale * phase * c[[ia, ib]]
    });
    CharacteristicFunction { field: Field2D::new(dual, chi).expect("dual shape"), source: g }
}

pub fn wigner_from_characteristic(chi: &CharacteristicFunction) -> WignerFunction {
    let g = chi.source;
    let dual = *chi.dual_grid();
    let (nx, np) = g.shape();
    let qs = dual.gx.points();
    let ks = dual.gp.points();
    let mut c = Array2::<Complex64>::zeros((nx, np));
    for ((a, b), v) in chi.values().indexed_iter() {
        let phase = Complex64::from_polar(1.0, qs[a] * g.gx.x_min() + ks[b] * g.gp.x_min());
        c[[signed_index(a, nx), signed_index(b, np)]] = phase * v;
    }
    spectral::fft2(&mut c, Direction::Inverse);
    let scale = 2.0 * PI / g.cell_area();
    let w = c.mapv(|z| scale * z.re);
    WignerFunction { field: Field2D::new(g, w).expect("source shape") }
}

/// FFT bin holding the dual-lattice sample at output index `a` (frequency `a − n/2`).
fn signed_index(a: usize, n: usize) -> usize {
    let k = a as isize - (n / 2) as isize;
    k.rem_euclid(n as isize) as usize
}

/// Position and momentum marginals, `∫ W dp` and `∫ W dx`.
pub fn marginals(w: &WignerFunction) -> (Vec<f64>, Vec<f64>) {
    let g = w.grid();
    let px = w.values().sum_axis(Axis(1)).mapv(|v| v * g.gp.dx()).to_vec();
    let pp = w.values().sum_axis(Axis(0)).mapv(|v| v * g.gx.dx()).to_vec();
    (px, pp)
}
