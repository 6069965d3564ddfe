//! Brute-force references shared by the integration tests. Everything here is
//! a direct quadrature of a defining integral and avoids the FFT paths used by
//! the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use phasespace::grid::{Grid1D, PhaseSpaceGrid};
use phasespace::{cat_state, coherent_state, fock_state, make_grid, CoherentLabel, DensityMatrix, WaveFunction};

pub type Amplitude = Box<dyn Fn(f64) -> Complex64 + Send + Sync>;

pub struct TestState {
    pub name: &'static str,
    pub psi: WaveFunction,
    /// Closed-form wave function, up to a global phase.
    pub exact: Amplitude,
}

impl TestState {
    pub fn rho(&self) -> DensityMatrix {
        phasespace::density_from_pure(&self.psi)
    }
}

pub fn grid(n: usize, half_width: f64) -> Grid1D {
    make_grid(n, half_width).unwrap()
}

fn coherent_fn(x0: f64, p0: f64) -> impl Fn(f64) -> Complex64 + Send + Sync + Copy {
    move |x| {
        let d = x - x0;
        Complex64::from_polar(PI.powf(-0.25) * (-0.5 * d * d).exp(), p0 * d)
    }
}

fn cat_fn(a: (f64, f64), b: (f64, f64), phase: f64) -> Amplitude {
    let fa = coherent_fn(a.0, a.1);
    let fb = coherent_fn(b.0, b.1);
    let rel = Complex64::from_polar(1.0, phase);
    let raw = move |x: f64| fa(x) + rel * fb(x);
    // Normalize on a fine trapezoid.
    let h = 1e-3;
    let norm: f64 = (-40_000..=40_000).map(|i| raw(i as f64 * h).norm_sqr()).sum::<f64>() * h;
    let s = norm.sqrt().recip();
    Box::new(move |x| raw(x) * s)
}

fn fock3(x: f64) -> Complex64 {
    let h3 = 8.0 * x.powi(3) - 12.0 * x;
    let norm = (8.0 * 6.0 * PI.sqrt()).sqrt().recip();
    Complex64::new(norm * h3 * (-0.5 * x * x).exp(), 0.0)
}

/// Vacuum, a displaced coherent state, position and momentum cats, and Fock 3.
pub fn test_states(g: &Grid1D) -> Vec<TestState> {
    let coh = |x0, p0| coherent_state(CoherentLabel::new(x0, p0), g).unwrap();
    let cat = |a: (f64, f64), b: (f64, f64)| {
        cat_state(CoherentLabel::new(a.0, a.1), CoherentLabel::new(b.0, b.1), 0.0, g).unwrap()
    };
    vec![
        TestState { name: "vacuum", psi: coh(0.0, 0.0), exact: Box::new(coherent_fn(0.0, 0.0)) },
        TestState { name: "coherent(1.5,-1)", psi: coh(1.5, -1.0), exact: Box::new(coherent_fn(1.5, -1.0)) },
        TestState {
            name: "position cat",
            psi: cat((3.0, 0.0), (-3.0, 0.0)),
            exact: cat_fn((3.0, 0.0), (-3.0, 0.0), 0.0),
        },
        TestState {
            name: "momentum cat",
            psi: cat((0.0, 3.0), (0.0, -3.0)),
            exact: cat_fn((0.0, 3.0), (0.0, -3.0), 0.0),
        },
        TestState { name: "fock 3", psi: fock_state(3, g).unwrap(), exact: Box::new(fock3) },
    ]
}

pub fn position_cat(g: &Grid1D) -> WaveFunction {
    cat_state(CoherentLabel::new(3.0, 0.0), CoherentLabel::new(-3.0, 0.0), 0.0, g).unwrap()
}

pub fn momentum_cat(g: &Grid1D) -> WaveFunction {
    cat_state(CoherentLabel::new(0.0, 3.0), CoherentLabel::new(0.0, -3.0), 0.0, g).unwrap()
}

/// `W(x, p) = π⁻¹ ∫ ψ(x+y) ψ*(x−y) e^{−2ipy} dy` by a fine trapezoid.
pub fn direct_wigner(psi: &dyn Fn(f64) -> Complex64, x: f64, p: f64) -> f64 {
    let h = 2e-3;
    let steps = 7_000;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in -steps..=steps {
        let y = i as f64 * h;
        acc += psi(x + y) * psi(x - y).conj() * Complex64::from_polar(1.0, -2.0 * p * y);
    }
    acc.re * h / PI
}

/// `Q(x0, p0) = (2π)⁻¹ ⟨z|ρ|z⟩` with the overlap summed over the position grid,
/// evaluated on `lattice`. Terms are grouped by diagonal so the cost is O(n³).
pub fn direct_husimi(rho: &DensityMatrix, lattice: &PhaseSpaceGrid) -> Array2<f64> {
    let g = rho.grid();
    let n = g.n();
    let dx = g.dx();
    let xs = g.points();
    let r = rho.rho();
    let c = dx * dx / (2.0 * PI * PI.sqrt());
    let x0s = lattice.gx.points();
    let p0s = lattice.gp.points();
    let mut out = Array2::zeros(lattice.shape());
    for (i, &x0) in x0s.iter().enumerate() {
        let gw: Vec<f64> = xs.iter().map(|x| (-0.5 * (x - x0).powi(2)).exp()).collect();
        // S(d) = Σ_b g_{b+d} g_b ρ_{b+d,b}
        let mut s = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
        for a in 0..n {
            for b in 0..n {
                s[a + n - 1 - b] += gw[a] * gw[b] * r[[a, b]];
            }
        }
        for (j, &p0) in p0s.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, sd) in s.iter().enumerate() {
                let d = k as f64 - (n - 1) as f64;
                acc += sd * Complex64::from_polar(1.0, -p0 * d * dx);
            }
            out[[i, j]] = c * acc.re;
        }
    }
    out
}

/// `ρ⁽ᵐ⁾(x,y) = e^{−m(x−y)²/2} (2πm)^{−1/2} Σ_λ e^{−λ²/(2m)} ρ(x+λ, y+λ) dx`
/// with out-of-grid samples taken as zero.
pub fn direct_channel(rho: &DensityMatrix, m: f64) -> Array2<Complex64> {
    let g = rho.grid();
    let n = g.n() as isize;
    let dx = g.dx();
    let r = rho.rho();
    let kern: Vec<f64> = (-(n - 1)..n)
        .map(|l| (-(l as f64 * dx).powi(2) / (2.0 * m)).exp() * dx / (2.0 * PI * m).sqrt())
        .collect();
    Array2::from_shape_fn((n as usize, n as usize), |(a, b)| {
        let (a, b) = (a as isize, b as isize);
        let mut acc = Complex64::new(0.0, 0.0);
        for l in -(n - 1)..n {
            let (u, v) = (a + l, b + l);
            if (0..n).contains(&u) && (0..n).contains(&v) {
                acc += kern[(l + n - 1) as usize] * r[[u as usize, v as usize]];
            }
        }
        let d = (a - b) as f64 * dx;
        acc * (-0.5 * m * d * d).exp()
    })
}

/// Gaussian convolution of samples on a uniform grid, by direct summation with
/// zero extension.
pub fn convolve_1d(f: &[f64], dx: f64, var: f64) -> Vec<f64> {
    if var == 0.0 {
        return f.to_vec();
    }
    let n = f.len() as isize;
    let norm = dx / (2.0 * PI * var).sqrt();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = (i - j) as f64 * dx;
                    f[j as usize] * (-d * d / (2.0 * var)).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Separable 2-D Gaussian convolution built from [`convolve_1d`].
pub fn convolve_2d(values: &Array2<f64>, grid: &PhaseSpaceGrid, var_x: f64, var_p: f64) -> Array2<f64> {
    let mut out = values.clone();
    for mut col in out.columns_mut() {
        let v = convolve_1d(&col.to_vec(), grid.gx.dx(), var_x);
        col.assign(&Array1::from(v));
    }
    for mut row in out.rows_mut() {
        let v = convolve_1d(&row.to_vec(), grid.gp.dx(), var_p);
        row.assign(&Array1::from(v));
    }
    out
}

/// `ψ̃(p) = (2π)^{−1/2} Σ_j ψ(x_j) e^{−ipx_j} dx`
pub fn momentum_amplitude(psi: &WaveFunction, p: f64) -> Complex64 {
    let g = psi.grid();
    let acc: Complex64 = g
        .points()
        .iter()
        .zip(psi.amp())
        .map(|(x, a)| a * Complex64::from_polar(1.0, -p * x))
        .sum();
    acc * g.dx() / (2.0 * PI).sqrt()
}

pub fn linf(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn linf_c(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.norm()))
}

pub fn linf_vec(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}
