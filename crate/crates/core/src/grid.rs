//! Uniform position and phase-space lattices, sampled fields, and the spectral
//! Gaussian convolution every channel in this crate reduces to.
//!
//! Samples sit at `x_i = x_min + i*dx` for `i in 0..n`; the interval is
//! half-open, so `x_max` itself is not a sample. Phase-space fields are stored
//! row-major with `x` as the slow axis.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, Direction};

pub const DEFAULT_N: usize = 256;
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

/// Fields whose boundary magnitude exceeds this wrap around noticeably under
/// the periodic spectral kernels.
pub const BOUNDARY_WARN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::GridTooSmall { n, min: Self::MIN_POINTS });
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::BadHalfWidth((x_max - x_min) / 2.0));
        }
        Ok(Self { n, x_min, x_max })
    }

    /// Symmetric grid on `[-half_width, half_width)`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::BadHalfWidth(half_width));
        }
        Self::new(n, -half_width, half_width)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Largest sample.
    pub fn last(&self) -> f64 {
        self.point(self.n - 1)
    }

    /// Reciprocal lattice: `n` samples centred on zero with spacing `2π/(n dx)`.
    pub fn dual(&self) -> Grid1D {
        let dk = 2.0 * PI / (self.n as f64 * self.dx());
        let k_min = -((self.n / 2) as f64) * dk;
        Grid1D { n: self.n, x_min: k_min, x_max: k_min + self.n as f64 * dk }
    }

    /// Momentum axis conjugate to the half-coordinate `ν` of the Wigner
    /// integral: `n` samples centred on zero with spacing `π/(n dx)`.
    pub fn wigner_momentum(&self) -> Grid1D {
        let dp = PI / (self.n as f64 * self.dx());
        let p_min = -((self.n / 2) as f64) * dp;
        Grid1D { n: self.n, x_min: p_min, x_max: p_min + self.n as f64 * dp }
    }

    pub fn approx_eq(&self, other: &Grid1D) -> bool {
        let tol = 1e-12 * (self.x_max - self.x_min).abs().max(1.0);
        self.n == other.n
            && (self.x_min - other.x_min).abs() <= tol
            && (self.x_max - other.x_max).abs() <= tol
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

pub fn make_grid(n: usize, half_width: f64) -> Result<Grid1D> {
    Grid1D::symmetric(n, half_width)
}

pub fn fourier_dual(g: &Grid1D) -> Grid1D {
    g.dual()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub gx: Grid1D,
    pub gp: Grid1D,
}

impl PhaseSpaceGrid {
    pub fn new(gx: Grid1D, gp: Grid1D) -> Self {
        Self { gx, gp }
    }

    /// The lattice a Wigner function of a state on `gx` lives on.
    pub fn wigner(gx: Grid1D) -> Self {
        Self { gx, gp: gx.wigner_momentum() }
    }

    /// Both axes equal to `g`; used for density matrices `ρ(x, y)`.
    pub fn square(g: Grid1D) -> Self {
        Self { gx: g, gp: g }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.gx.n(), self.gp.n())
    }

    pub fn cell_area(&self) -> f64 {
        self.gx.dx() * self.gp.dx()
    }

    pub fn dual(&self) -> Self {
        Self { gx: self.gx.dual(), gp: self.gp.dual() }
    }

    pub fn approx_eq(&self, other: &PhaseSpaceGrid) -> bool {
        self.gx.approx_eq(&other.gx) && self.gp.approx_eq(&other.gp)
    }

    pub fn ensure_same(&self, other: &PhaseSpaceGrid) -> Result<()> {
        if self.approx_eq(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Samples of a real or complex function on a [`PhaseSpaceGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D<T> {
    grid: PhaseSpaceGrid,
    values: Array2<T>,
}

impl<T: Clone> Field2D<T> {
    pub fn new(grid: PhaseSpaceGrid, values: Array2<T>) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(Error::Shape { expected: grid.shape(), got: values.dim() });
        }
        // Row-major storage is what the CSV layout and lane iteration assume.
        let values = if values.is_standard_layout() {
            values
        } else {
            values.as_standard_layout().to_owned()
        };
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PhaseSpaceGrid, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let xs = grid.gx.points();
        let ps = grid.gp.points();
        let values = Array2::from_shape_fn(grid.shape(), |(i, j)| f(xs[i], ps[j]));
        Self { grid, values }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<T> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Field2D<U> {
        Field2D { grid: self.grid, values: self.values.map(f) }
    }
}

impl Field2D<f64> {
    /// `Σ f dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn boundary_max(&self) -> f64 {
        boundary_max(&self.values, |v| v.abs())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// Value at an arbitrary point by Keys bicubic convolution, treating the
    /// lattice as periodic.
    pub fn sample_bicubic(&self, x: f64, p: f64) -> f64 {
        let (nx, np) = self.grid.shape();
        let u = (x - self.grid.gx.x_min()) / self.grid.gx.dx();
        let v = (p - self.grid.gp.x_min()) / self.grid.gp.dx();
        let (iu, fu) = (u.floor(), u - u.floor());
        let (iv, fv) = (v.floor(), v - v.floor());
        let wu = keys_weights(fu);
        let wv = keys_weights(fv);
        let mut acc = 0.0;
        for (a, wa) in wu.iter().enumerate() {
            let i = (iu as isize + a as isize - 1).rem_euclid(nx as isize) as usize;
            let mut row = 0.0;
            for (b, wb) in wv.iter().enumerate() {
                let j = (iv as isize + b as isize - 1).rem_euclid(np as isize) as usize;
                row += wb * self.values[[i, j]];
            }
            acc += wa * row;
        }
        acc
    }
}

impl Field2D<Complex64> {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

pub(crate) fn boundary_max<T>(values: &Array2<T>, abs: impl Fn(&T) -> f64) -> f64 {
    let (nx, np) = values.dim();
    let mut m: f64 = 0.0;
    for j in 0..np {
        m = m.max(abs(&values[[0, j]])).max(abs(&values[[nx - 1, j]]));
    }
    for i in 0..nx {
        m = m.max(abs(&values[[i, 0]])).max(abs(&values[[i, np - 1]]));
    }
    m
}

fn keys_weights(t: f64) -> [f64; 4] {
    // Catmull-Rom (Keys, a = -1/2) weights for offsets -1, 0, 1, 2.
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Bicubic resampling of `field` onto `target`.
pub fn resample_bicubic(field: &Field2D<f64>, target: PhaseSpaceGrid) -> Field2D<f64> {
    Field2D::from_fn(target, |x, p| field.sample_bicubic(x, p))
}

fn check_variance(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter { name, requirement: "finite and >= 0", value: v })
    }
}

/// Multiply the 2-D spectrum of a real field by `mult(kx, kp)` and return the
/// real part of the result. Axes with `active = false` are left untransformed.
pub(crate) fn spectral_filter(
    f: &Field2D<f64>,
    active: (bool, bool),
    mult: impl Fn(f64, f64) -> f64,
) -> Field2D<f64> {
    let g = f.grid();
    let mut c = spectral::complexify(f.values());
    let kx = if active.0 { spectral::angular_frequencies(g.gx.n(), g.gx.dx()) } else { vec![0.0; g.gx.n()] };
    let kp = if active.1 { spectral::angular_frequencies(g.gp.n(), g.gp.dx()) } else { vec![0.0; g.gp.n()] };
    if active.0 {
        spectral::fft_axis(&mut c, Axis(0), Direction::Forward);
    }
    if active.1 {
        spectral::fft_axis(&mut c, Axis(1), Direction::Forward);
    }
    for ((i, j), v) in c.indexed_iter_mut() {
        *v *= mult(kx[i], kp[j]);
    }
    if active.1 {
        spectral::fft_axis(&mut c, Axis(1), Direction::Inverse);
    }
    if active.0 {
        spectral::fft_axis(&mut c, Axis(0), Direction::Inverse);
    }
    Field2D { grid: *g, values: c.mapv(|z| z.re) }
}

/// Convolve `f` with the normalized product Gaussian of variances
/// `var_x`, `var_p`, by multiplying its spectrum with
/// `exp(-var_x q²/2 - var_p k²/2)`. The convolution is periodic over the grid.
pub fn gaussian_convolve(f: &Field2D<f64>, var_x: f64, var_p: f64) -> Result<Field2D<f64>> {
    check_variance("var_x", var_x)?;
    check_variance("var_p", var_p)?;
    f.check_finite()?;
    if var_x == 0.0 && var_p == 0.0 {
        return Ok(f.clone());
    }
    let edge = f.boundary_max();
    if edge > BOUNDARY_WARN {
        log::warn!("gaussian_convolve: input boundary magnitude {edge:.2e} will wrap");
    }
    Ok(spectral_filter(f, (var_x > 0.0, var_p > 0.0), |q, k| {
        (-0.5 * (var_x * q * q + var_p * k * k)).exp()
    }))
}
