//! Scalar diagnostics of phase-space functions and distances between fields.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::states::DensityMatrix;
use crate::transforms::WignerFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMetrics {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// `∬ (|W| − W)/2`, the total weight of the negative part.
    pub negativity_volume: f64,
    /// `2π ∬ W²`
    pub purity: f64,
    pub min_wigner: f64,
    pub trace: f64,
    /// `(∬ W²)^{1/2}`
    pub l2_norm: f64,
}

/// Moments and nonclassicality measures of `w` by grid quadrature.
/// Means and variances are normalized by the trace.
pub fn phase_space_stats(w: &WignerFunction) -> StateMetrics {
    let g = w.grid();
    let xs = g.gx.points();
    let ps = g.gp.points();
    let area = g.cell_area();
    let (mut s0, mut sx, mut sp, mut sxx, mut spp, mut neg, mut sq) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut min = f64::INFINITY;
    for ((i, j), &v) in w.values().indexed_iter() {
        let (x, p) = (xs[i], ps[j]);
        s0 += v;
        sx += v * x;
        sp += v * p;
        sxx += v * x * x;
        spp += v * p * p;
        if v < 0.0 {
            neg -= v;
        }
        sq += v * v;
        min = min.min(v);
    }
    let mean_x = sx / s0;
    let mean_p = sp / s0;
    StateMetrics {
        mean_x,
        mean_p,
        var_x: sxx / s0 - mean_x * mean_x,
        var_p: spp / s0 - mean_p * mean_p,
        negativity_volume: neg * area,
        purity: 2.0 * PI * sq * area,
        min_wigner: min,
        trace: s0 * area,
        l2_norm: (sq * area).sqrt(),
    }
}

/// Distances between two sampled functions on the same grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldDistance {
    /// `(∬ |a − b|²)^{1/2}` by grid quadrature.
    pub l2: f64,
    pub linf: f64,
}

fn distance<T: Copy>(a: &Field2D<T>, b: &Field2D<T>, abs: impl Fn(T, T) -> f64) -> Result<FieldDistance> {
    a.grid().ensure_same(b.grid())?;
    let (mut sq, mut linf) = (0.0f64, 0.0f64);
    for (&u, &v) in a.values().iter().zip(b.values()) {
        let d = abs(u, v);
        sq += d * d;
        linf = linf.max(d);
    }
    Ok(FieldDistance { l2: (sq * a.grid().cell_area()).sqrt(), linf })
}

pub fn compare_fields(a: &Field2D<f64>, b: &Field2D<f64>) -> Result<FieldDistance> {
    distance(a, b, |u, v| (u - v).abs())
}

pub fn compare_complex_fields(a: &Field2D<Complex64>, b: &Field2D<Complex64>) -> Result<FieldDistance> {
    distance(a, b, |u, v| (u - v).norm())
}

/// Hilbert–Schmidt distance `(∬ |ρ_a − ρ_b|² dx dy)^{1/2}` and the largest
/// entrywise difference.
pub fn compare_densities(a: &DensityMatrix, b: &DensityMatrix) -> Result<FieldDistance> {
    if !a.grid().approx_eq(b.grid()) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid(), b.grid())));
    }
    let (mut sq, mut linf) = (0.0f64, 0.0f64);
    for (u, v) in a.rho().iter().zip(b.rho()) {
        let d = (u - v).norm();
        sq += d * d;
        linf = linf.max(d);
    }
    let dx = a.grid().dx();
    Ok(FieldDistance { l2: sq.sqrt() * dx, linf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, PhaseSpaceGrid};
    use crate::povm::povm_smooth_wigner;
    use crate::states::{cat_state, coherent_state, density_from_pure, CoherentLabel};
    use crate::transforms::wigner_from_density;
    use approx::assert_abs_diff_eq;

    fn wigner_of(psi: &crate::states::WaveFunction) -> WignerFunction {
        wigner_from_density(&density_from_pure(psi)).unwrap()
    }

    #[test]
    fn vacuum_metrics() {
        let g = make_grid(256, 10.0).unwrap();
        let m = phase_space_stats(&wigner_of(&coherent_state(CoherentLabel::new(0.0, 0.0), &g).unwrap()));
        assert!(m.negativity_volume < 1e-12);
        assert_abs_diff_eq!(m.purity, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.var_x, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(m.var_p, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(m.trace, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m.l2_norm, (1.0 / (2.0 * PI)).sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn cat_metrics() {
        let g = make_grid(256, 10.0).unwrap();
        let psi = cat_state(CoherentLabel::new(3.0, 0.0), CoherentLabel::new(-3.0, 0.0), 0.0, &g).unwrap();
        let w = wigner_of(&psi);
        let m = phase_space_stats(&w);
        assert!(m.negativity_volume > 0.1, "{}", m.negativity_volume);
        assert_abs_diff_eq!(m.purity, 1.0, epsilon = 1e-6);
        assert!(m.min_wigner < 0.0);
        let q = povm_smooth_wigner(&w, 0.5).unwrap();
        assert!(phase_space_stats(&q).negativity_volume <= 1e-9);
    }

    #[test]
    fn purity_matches_density_matrix() {
        let g = make_grid(128, 10.0).unwrap();
        let psi = cat_state(CoherentLabel::new(2.0, 1.0), CoherentLabel::new(-2.0, -1.0), 0.4, &g).unwrap();
        let rho = crate::povm::povm_channel(&density_from_pure(&psi), 1).unwrap();
        let w = wigner_from_density(&rho).unwrap();
        assert_abs_diff_eq!(phase_space_stats(&w).purity, rho.purity(), epsilon = 1e-6);
    }

    #[test]
    fn constant_offset_on_unit_area() {
        let g = PhaseSpaceGrid::square(make_grid(64, 8.0).unwrap());
        let f = Field2D::from_fn(g, |x, p| (-(x * x + p * p)).exp());
        assert_eq!(compare_fields(&f, &f).unwrap(), FieldDistance { l2: 0.0, linf: 0.0 });
        // dx = 0.25: a 4 x 4 block of cells covers unit area.
        let c = 0.3;
        let mut h = f.clone();
        h.values_mut().slice_mut(ndarray::s![30..34, 30..34]).mapv_inplace(|v| v + c);
        let d = compare_fields(&f, &h).unwrap();
        assert_abs_diff_eq!(d.linf, c, epsilon = 1e-15);
        assert_abs_diff_eq!(d.l2, c, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = Field2D::from_fn(PhaseSpaceGrid::square(make_grid(64, 8.0).unwrap()), |_, _| 0.0);
        let b = Field2D::from_fn(PhaseSpaceGrid::square(make_grid(64, 9.0).unwrap()), |_, _| 0.0);
        assert!(matches!(compare_fields(&a, &b), Err(Error::GridMismatch(_))));
    }
}
