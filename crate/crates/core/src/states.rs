//! Pure states on a position grid (coherent, cat, Fock) and density matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid1D, PhaseSpaceGrid};
use crate::spectral::{self, Direction};

/// Margin, in units of the packet width, a coherent state keeps from the grid edge.
pub const COHERENT_MARGIN: f64 = 5.0;
/// Margin beyond the classical turning point a Fock state needs.
pub const FOCK_MARGIN: f64 = 4.0;
pub const FOCK_MAX: usize = 200;

/// Complex position-space amplitudes `ψ(x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    amp: Array1<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, amp: Array1<Complex64>) -> Result<Self> {
        if amp.len() != grid.n() {
            return Err(Error::Shape { expected: (grid.n(), 1), got: (amp.len(), 1) });
        }
        if let Some(i) = amp.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, amp })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amp(&self) -> &Array1<Complex64> {
        &self.amp
    }

    /// `Σ |ψ|² dx`.
    pub fn norm_sq(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// `⟨self|other⟩` by grid quadrature.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amp.iter().zip(other.amp.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.dx()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sq();
        if n.sqrt() < 1e-12 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        self.amp.mapv_inplace(|z| z * s);
        Ok(self)
    }

    /// Position density `|ψ(x_i)|²`.
    pub fn density(&self) -> Vec<f64> {
        self.amp.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Phase-space label of a coherent state, `z = (x0 + i p0)/√2`, with an
/// optional squeeze `σ` (position width; momentum width `1/σ`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentLabel {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl CoherentLabel {
    pub fn new(x0: f64, p0: f64) -> Self {
        Self { x0, p0, sigma: 1.0 }
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        Self { sigma, ..self }
    }

    pub fn from_z(z: Complex64) -> Self {
        Self::new(z.re * 2f64.sqrt(), z.im * 2f64.sqrt())
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x0, self.p0) / 2f64.sqrt()
    }
}

/// `⟨x|z⟩ = (πσ²)^{-1/4} exp(-(x-x0)²/(2σ²) + i p0 (x-x0))` sampled on `grid`,
/// without margin checks or renormalization.
pub(crate) fn coherent_amplitudes(label: &CoherentLabel, grid: &Grid1D) -> Array1<Complex64> {
    let s2 = label.sigma * label.sigma;
    let pref = (PI * s2).powf(-0.25);
    Array1::from_iter(grid.points().into_iter().map(|x| {
        let d = x - label.x0;
        Complex64::from_polar(pref * (-d * d / (2.0 * s2)).exp(), label.p0 * d)
    }))
}

pub fn coherent_state(label: CoherentLabel, grid: &Grid1D) -> Result<WaveFunction> {
    if !(label.sigma > 0.0 && label.sigma.is_finite()) {
        return Err(Error::BadParameter { name: "sigma", requirement: "positive", value: label.sigma });
    }
    let mx = COHERENT_MARGIN * label.sigma;
    let mp = COHERENT_MARGIN / label.sigma;
    let p_nyquist = PI / grid.dx();
    if label.x0 - mx < grid.x_min() || label.x0 + mx > grid.x_max() || label.p0.abs() + mp > p_nyquist {
        return Err(Error::CentreTooClose { x0: label.x0, p0: label.p0, margin: mx });
    }
    WaveFunction::new(*grid, coherent_amplitudes(&label, grid))?.normalized()
}

/// Hermite function `h_n`, via the normalized three-term recurrence.
pub fn fock_state(n: usize, grid: &Grid1D) -> Result<WaveFunction> {
    let needed = (2.0 * n as f64 + 1.0).sqrt() + FOCK_MARGIN;
    if n > FOCK_MAX || -grid.x_min() < needed || grid.x_max() < needed {
        return Err(Error::FockTooLarge { n, needed });
    }
    let amp = grid.points().into_iter().map(|x| Complex64::new(hermite_function(n, x), 0.0));
    WaveFunction::new(*grid, Array1::from_iter(amp))
}

pub(crate) fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `N (|a⟩ + e^{iφ}|b⟩)`, normalized on the grid (overlap included).
pub fn cat_state(a: CoherentLabel, b: CoherentLabel, rel_phase: f64, grid: &Grid1D) -> Result<WaveFunction> {
    let psi_a = coherent_state(a, grid)?;
    let psi_b = coherent_state(b, grid)?;
    let phase = Complex64::from_polar(1.0, rel_phase);
    let amp = &psi_a.amp + &psi_b.amp.mapv(|z| z * phase);
    WaveFunction::new(*grid, amp)?.normalized()
}

/// Kernel `ρ(x_i, x_j)` of a density operator; quadrature weight `dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    grid: Grid1D,
    rho: Array2<Complex64>,
}

/// First and second moments of position and momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl DensityMatrix {
    pub fn new(grid: Grid1D, rho: Array2<Complex64>) -> Result<Self> {
        let n = grid.n();
        if rho.dim() != (n, n) {
            return Err(Error::Shape { expected: (n, n), got: rho.dim() });
        }
        if let Some(i) = rho.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        let rho = if rho.is_standard_layout() { rho } else { rho.as_standard_layout().to_owned() };
        Ok(Self { grid, rho })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn rho(&self) -> &Array2<Complex64> {
        &self.rho
    }

    pub fn into_rho(self) -> Array2<Complex64> {
        self.rho
    }

    /// `Σ ρ(x_i, x_i) dx` (real part).
    pub fn trace(&self) -> f64 {
        self.rho.diag().iter().map(|z| z.re).sum::<f64>() * self.grid.dx()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.rho.diag().iter().map(|z| z.re).collect()
    }

    /// `max |ρ(x,y) - conj ρ(y,x)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.grid.n();
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                m = m.max((self.rho[[a, b]] - self.rho[[b, a]].conj()).norm());
            }
        }
        m
    }

    /// Replace `ρ` by `(ρ + ρ†)/2`.
    pub fn hermitize(mut self) -> Self {
        let n = self.grid.n();
        for a in 0..n {
            self.rho[[a, a]].im = 0.0;
            for b in (a + 1)..n {
                let avg = 0.5 * (self.rho[[a, b]] + self.rho[[b, a]].conj());
                self.rho[[a, b]] = avg;
                self.rho[[b, a]] = avg.conj();
            }
        }
        self
    }

    /// `tr ρ² = Σ |ρ(x,y)|² dx²` (valid for Hermitian ρ).
    pub fn purity(&self) -> f64 {
        let dx = self.grid.dx();
        self.rho.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx * dx
    }

    /// Smallest eigenvalue of the operator `ρ dx`.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.grid.n();
        let dx = self.grid.dx();
        let m = DMatrix::from_fn(n, n, |a, b| {
            let h = 0.5 * (self.rho[[a, b]] + self.rho[[b, a]].conj());
            nalgebra::Complex::new(h.re * dx, h.im * dx)
        });
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Moments of `x̂` and `p̂`, with `p̂` applied by spectral differentiation.
    pub fn moments(&self) -> Moments {
        let dx = self.grid.dx();
        let tr = self.trace();
        let xs = self.grid.points();
        let diag = self.diagonal();
        let mean_x = xs.iter().zip(&diag).map(|(x, d)| x * d).sum::<f64>() * dx / tr;
        let x2 = xs.iter().zip(&diag).map(|(x, d)| x * x * d).sum::<f64>() * dx / tr;
        let k = spectral::odd_frequencies(self.grid.n(), dx);
        let p_rho = apply_momentum_left(&self.rho, &k, 1);
        let p2_rho = apply_momentum_left(&p_rho, &k, 1);
        let mean_p = p_rho.diag().iter().map(|z| z.re).sum::<f64>() * dx / tr;
        let p2 = p2_rho.diag().iter().map(|z| z.re).sum::<f64>() * dx / tr;
        Moments { mean_x, mean_p, var_x: x2 - mean_x * mean_x, var_p: p2 - mean_p * mean_p }
    }

    /// Complex field on the `(x, y)` lattice, as serialized to disk.
    pub fn to_field(&self) -> Field2D<Complex64> {
        Field2D::new(PhaseSpaceGrid::square(self.grid), self.rho.clone()).expect("square shape")
    }

    pub fn from_field(field: &Field2D<Complex64>) -> Result<Self> {
        let g = field.grid();
        if !g.gx.approx_eq(&g.gp) {
            return Err(Error::GridMismatch("density matrix needs identical x and y axes".into()));
        }
        Self::new(g.gx, field.values().clone())
    }
}

/// `p̂^power ρ` with `p̂ = -i d/dx` applied spectrally along the row index.
pub(crate) fn apply_momentum_left(rho: &Array2<Complex64>, k: &[f64], power: i32) -> Array2<Complex64> {
    let mut out = rho.clone();
    spectral::fft_axis(&mut out, Axis(0), Direction::Forward);
    for ((i, _), v) in out.indexed_iter_mut() {
        *v *= k[i].powi(power);
    }
    spectral::fft_axis(&mut out, Axis(0), Direction::Inverse);
    out
}

/// `ρ p̂^power`, the right action of the same operator.
pub(crate) fn apply_momentum_right(rho: &Array2<Complex64>, k: &[f64], power: i32) -> Array2<Complex64> {
    // (ρP)ᵀ = Pᵀ ρᵀ and Pᵀ = F K F⁻¹ for the symmetric DFT matrix F.
    let mut out = rho.clone();
    spectral::fft_axis(&mut out, Axis(1), Direction::Inverse);
    for ((_, j), v) in out.indexed_iter_mut() {
        *v *= k[j].powi(power);
    }
    spectral::fft_axis(&mut out, Axis(1), Direction::Forward);
    out
}

pub fn density_from_pure(psi: &WaveFunction) -> DensityMatrix {
    let a = psi.amp();
    let n = a.len();
    let rho = Array2::from_shape_fn((n, n), |(i, j)| a[i] * a[j].conj());
    DensityMatrix { grid: *psi.grid(), rho }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid1D {
        make_grid(256, 10.0).unwrap()
    }

    fn linf(a: &Array1<Complex64>, b: &Array1<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vacuum_value_at_origin() {
        let psi = coherent_state(CoherentLabel::new(0.0, 0.0), &grid()).unwrap();
        assert_abs_diff_eq!(psi.amp()[128].re, PI.powf(-0.25), epsilon = 1e-14);
        assert_abs_diff_eq!(psi.amp()[128].re, 0.7511, epsilon = 1e-4);
    }

    #[test]
    fn displaced_coherent_peak_and_norm() {
        let g = grid();
        let psi = coherent_state(CoherentLabel::new(2.0, 1.0), &g).unwrap();
        let d = psi.density();
        let imax = (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        assert!((g.point(imax) - 2.0).abs() <= 0.5 * g.dx());
        assert_abs_diff_eq!(psi.norm_sq(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn coherent_margin_enforced() {
        let g = grid();
        assert!(matches!(coherent_state(CoherentLabel::new(6.0, 0.0), &g), Err(Error::CentreTooClose { .. })));
        assert!(coherent_state(CoherentLabel::new(0.0, 50.0), &g).is_err());
        assert!(coherent_state(CoherentLabel::new(0.0, 0.0).with_sigma(0.0), &g).is_err());
    }

    #[test]
    fn label_round_trip() {
        let l = CoherentLabel::new(1.5, -0.25);
        let back = CoherentLabel::from_z(l.z());
        assert_abs_diff_eq!(back.x0, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(back.p0, -0.25, epsilon = 1e-15);
    }

    #[test]
    fn coherent_matches_fock_series() {
        // e^{-|z|²/2} Σ z^n/√n! h_n, truncated at n = 60.
        let g = make_grid(512, 16.0).unwrap();
        let label = CoherentLabel::new(1.0, 0.0);
        let z = label.z();
        let mut series = Array1::<Complex64>::zeros(g.n());
        let mut coeff = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
        for n in 0..=60usize {
            if n > 0 {
                coeff = coeff * z / (n as f64).sqrt();
            }
            let h = fock_state(n, &g).unwrap();
            series = series + h.amp().mapv(|v| v * coeff);
        }
        let psi = coherent_state(label, &g).unwrap();
        assert!(linf(psi.amp(), &series) < 1e-8);
    }

    #[test]
    fn fock_basics() {
        let g = grid();
        let h0 = fock_state(0, &g).unwrap();
        for (x, v) in g.points().iter().zip(h0.amp()) {
            assert_abs_diff_eq!(v.re, PI.powf(-0.25) * (-x * x / 2.0).exp(), epsilon = 1e-15);
        }
        let h1 = fock_state(1, &g).unwrap();
        assert_eq!(h1.amp()[128].re, 0.0);
        assert_abs_diff_eq!(h1.amp()[100].re, -h1.amp()[156].re, epsilon = 1e-15);
        assert!(matches!(fock_state(201, &g), Err(Error::FockTooLarge { .. })));
        // turning point √(2n+1) plus the margin must fit: √41 + 4 > 10
        assert!(fock_state(20, &g).is_err());
        assert!(fock_state(12, &make_grid(256, 9.0).unwrap()).is_ok());
        assert!(fock_state(13, &make_grid(256, 9.0).unwrap()).is_err());
    }

    #[test]
    fn fock_orthonormal() {
        let g = make_grid(256, 12.0).unwrap();
        let hs: Vec<_> = (0..=20).map(|n| fock_state(n, &g).unwrap()).collect();
        for m in 0..=20 {
            for n in 0..=20 {
                let ip = hs[m].inner(&hs[n]);
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((ip.re - want).abs() < 1e-9 && ip.im.abs() < 1e-12, "<{m}|{n}> = {ip}");
            }
        }
    }

    #[test]
    fn fock_high_level_stays_finite() {
        let g = make_grid(1024, 30.0).unwrap();
        let h = fock_state(200, &g).unwrap();
        assert!(h.amp().iter().all(|z| z.re.is_finite()));
        assert_abs_diff_eq!(h.norm_sq(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn coherent_overlap_law() {
        let g = grid();
        let a = CoherentLabel::new(0.5, -0.3);
        for (x, p) in [(1.0, 0.0), (0.0, 2.0), (-2.0, 1.5), (2.5, -2.5)] {
            let b = CoherentLabel::new(x, p);
            let ov = coherent_state(a, &g).unwrap().inner(&coherent_state(b, &g).unwrap());
            let dz = (a.z() - b.z()).norm_sqr();
            assert_abs_diff_eq!(ov.norm_sqr(), (-dz).exp(), epsilon = 1e-8);
        }
    }

    #[test]
    fn resolution_of_identity() {
        // (2π)^{-1} Σ |z⟩⟨z| dx0 dp0 over centres on x and its reciprocal lattice.
        let g = make_grid(128, 10.0).unwrap();
        let psi = cat_state(CoherentLabel::new(-1.5, 0.5), CoherentLabel::new(2.0, -1.0), 0.7, &g).unwrap();
        let gp = g.dual();
        let mut out = Array1::<Complex64>::zeros(g.n());
        for x0 in g.points() {
            for p0 in gp.points() {
                let z = coherent_amplitudes(&CoherentLabel::new(x0, p0), &g);
                let proj: Complex64 = z.iter().zip(psi.amp()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * g.dx();
                out = out + z.mapv(|v| v * proj);
            }
        }
        out.mapv_inplace(|v| v * g.dx() * gp.dx() / (2.0 * PI));
        let l2 = out.iter().zip(psi.amp()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * g.dx();
        assert!(l2.sqrt() < 1e-6, "{}", l2.sqrt());
    }

    #[test]
    fn cat_normalization_and_degenerate_case() {
        let g = grid();
        let a = CoherentLabel::new(1.0, 0.5);
        let cat = cat_state(a, a, 0.0, &g).unwrap();
        let coh = coherent_state(a, &g).unwrap();
        assert!(linf(cat.amp(), coh.amp()) < 1e-14);
        // Overlapping pair: normalization must include the cross term.
        let c = cat_state(CoherentLabel::new(-0.5, 0.0), CoherentLabel::new(0.5, 0.0), 0.0, &g).unwrap();
        assert_abs_diff_eq!(c.norm_sq(), 1.0, epsilon = 1e-12);
        assert!(matches!(cat_state(a, a, PI, &g), Err(Error::ZeroNorm)));
    }

    #[test]
    fn position_cat_humps() {
        let g = grid();
        let cat = cat_state(CoherentLabel::new(3.0, 0.0), CoherentLabel::new(-3.0, 0.0), 0.0, &g).unwrap();
        let d = cat.density();
        let i3 = 128 + (3.0 / g.dx()) as usize;
        let im3 = 128 - (3.0 / g.dx()) as usize;
        assert!(d[i3] > d[i3 - 1] && d[i3] > d[i3 + 1]);
        assert!(d[im3] > d[im3 - 1] && d[im3] > d[im3 + 1]);
        assert!(d[128] < 1e-3);
    }

    #[test]
    fn vacuum_density_and_purity() {
        let g = grid();
        let rho = density_from_pure(&coherent_state(CoherentLabel::new(0.0, 0.0), &g).unwrap());
        let xs = g.points();
        for (a, b) in [(128, 128), (100, 140), (60, 200)] {
            let want = (-(xs[a] * xs[a] + xs[b] * xs[b]) / 2.0).exp() / PI.sqrt();
            assert_abs_diff_eq!(rho.rho()[[a, b]].re, want, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-10);
        assert_eq!(rho.hermiticity_error(), 0.0);
    }

    #[test]
    fn purity_matches_matrix_product() {
        let g = make_grid(64, 8.0).unwrap();
        let psi = cat_state(CoherentLabel::new(2.0, 1.0), CoherentLabel::new(-2.0, 0.0), 0.3, &g).unwrap();
        let rho = density_from_pure(&psi);
        let r = rho.rho();
        let dx = g.dx();
        // tr(ρ·ρ) with explicit matrix product and dx weights.
        let mut tr = Complex64::new(0.0, 0.0);
        for a in 0..g.n() {
            for c in 0..g.n() {
                tr += r[[a, c]] * r[[c, a]];
            }
        }
        let tr = tr * dx * dx;
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(rho.purity(), tr.re, epsilon = 1e-12);
        assert!(rho.min_eigenvalue() > -1e-8);
    }

    #[test]
    fn moments_of_displaced_coherent_state() {
        let g = grid();
        let rho = density_from_pure(&coherent_state(CoherentLabel::new(1.5, -2.0), &g).unwrap());
        let m = rho.moments();
        assert_abs_diff_eq!(m.mean_x, 1.5, epsilon = 1e-10);
        assert_abs_diff_eq!(m.mean_p, -2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m.var_x, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(m.var_p, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn momentum_right_action_is_adjoint() {
        // (ρ P)† = P ρ† for Hermitian ρ.
        let g = make_grid(64, 8.0).unwrap();
        let psi = coherent_state(CoherentLabel::new(0.5, 1.0), &g).unwrap();
        let rho = density_from_pure(&psi);
        let k = spectral::odd_frequencies(g.n(), g.dx());
        let left = apply_momentum_left(rho.rho(), &k, 1);
        let right = apply_momentum_right(rho.rho(), &k, 1);
        let err = left.indexed_iter().map(|((a, b), v)| (v - right[[b, a]].conj()).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}
