//! Coherent-state POVM `Π(z) = (2π)^{-1} |z⟩⟨z|`: outcome statistics, the
//! unrecorded-measurement channel and its Monte-Carlo unravelling.
//!
//! In position space `m` unrecorded measurements act as
//!
//! ```text
//! ρ⁽ᵐ⁾(x, y) = e^{−m(x−y)²/2} (2πm)^{−1/2} ∫ e^{−λ²/(2m)} ρ(x+λ, y+λ) dλ
//! ```
//!
//! i.e. a Gaussian average along every diagonal followed by damping away from
//! the main diagonal. On the Wigner function the same channel is a product
//! Gaussian smoothing with variance `m` per axis. A squeeze `σ` turns the
//! variances into `mσ²` (position) and `m/σ²` (momentum).

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{boundary_max, gaussian_convolve, Grid1D, BOUNDARY_WARN};
use crate::spectral::{self, Direction};
use crate::states::{coherent_amplitudes, CoherentLabel, DensityMatrix};
use crate::transforms::{husimi_from_density, HusimiFunction, WignerFunction};

/// Relative boundary magnitude above which a channel output is rejected.
pub const LEAK_LIMIT: f64 = 1e-6;

/// Axis-aligned rectangle in phase space; infinite bounds mean "to the grid edge".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceRegion {
    pub x_lo: f64,
    pub x_hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
}

impl PhaseSpaceRegion {
    pub fn new(x_lo: f64, x_hi: f64, p_lo: f64, p_hi: f64) -> Result<Self> {
        let r = Self { x_lo, x_hi, p_lo, p_hi };
        if x_lo < x_hi && p_lo < p_hi {
            Ok(r)
        } else {
            Err(r.error())
        }
    }

    pub fn everything() -> Self {
        Self { x_lo: f64::NEG_INFINITY, x_hi: f64::INFINITY, p_lo: f64::NEG_INFINITY, p_hi: f64::INFINITY }
    }

    fn error(&self) -> Error {
        Error::BadRegion { x_lo: self.x_lo, x_hi: self.x_hi, p_lo: self.p_lo, p_hi: self.p_hi }
    }
}

/// `∫_lo^hi L_i(x) dx` for the periodic band-limited cardinal functions
/// `L_i` of `grid`, so that `Σ w_i f(x_i)` integrates the trigonometric
/// interpolant of `f` over `[lo, hi]`.
fn interval_weights(grid: &Grid1D, lo: f64, hi: f64) -> Vec<f64> {
    let n = grid.n();
    let h = grid.dx();
    let period = n as f64 * h;
    let nyquist = PI / h;
    grid.points()
        .into_iter()
        .map(|xi| {
            let (a, b) = (lo - xi, hi - xi);
            let mut acc = b - a;
            for k in 1..n.div_ceil(2) {
                let kw = 2.0 * PI * k as f64 / period;
                acc += 2.0 * ((kw * b).sin() - (kw * a).sin()) / kw;
            }
            if n.is_multiple_of(2) {
                acc += ((nyquist * b).sin() - (nyquist * a).sin()) / nyquist;
            }
            acc / n as f64
        })
        .collect()
}

fn clamp_interval(grid: &Grid1D, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let lo = if lo == f64::NEG_INFINITY { grid.x_min() } else { lo };
    let hi = if hi == f64::INFINITY { grid.x_max() } else { hi };
    (grid.contains(lo) && grid.contains(hi) && lo < hi).then_some((lo, hi))
}

/// `∬_A Q dx dp` for the Husimi density `q`.
pub fn husimi_probability(q: &HusimiFunction, region: &PhaseSpaceRegion) -> Result<f64> {
    let g = q.grid();
    let (x_lo, x_hi) = clamp_interval(&g.gx, region.x_lo, region.x_hi).ok_or_else(|| region.error())?;
    let (p_lo, p_hi) = clamp_interval(&g.gp, region.p_lo, region.p_hi).ok_or_else(|| region.error())?;
    let wx = interval_weights(&g.gx, x_lo, x_hi);
    let wp = interval_weights(&g.gp, p_lo, p_hi);
    let mut total = 0.0;
    for (i, row) in q.values().outer_iter().enumerate() {
        total += wx[i] * row.iter().zip(&wp).map(|(v, w)| v * w).sum::<f64>();
    }
    Ok(total)
}

/// Probability that a phase-space measurement on `rho` lands in `region`.
pub fn povm_probability(rho: &DensityMatrix, region: &PhaseSpaceRegion) -> Result<f64> {
    husimi_probability(&husimi_from_density(rho, 1.0)?, region)
}

/// Gaussian average of variance `diag_var` along each diagonal of `rho`,
/// then multiplication by `exp(−damp (x−y)²/2)`.
pub(crate) fn diagonal_smooth_and_damp(rho: &DensityMatrix, diag_var: f64, damp: f64) -> DensityMatrix {
    let g = *rho.grid();
    let n = g.n();
    let dx = g.dx();
    let r = rho.rho();
    let len = (2 * n).next_power_of_two();
    let k = spectral::angular_frequencies(len, dx);
    let mult: Vec<f64> = k.iter().map(|k| (-0.5 * diag_var * k * k).exp()).collect();
    let mut out = Array2::<Complex64>::zeros((n, n));
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let ni = n as isize;
    for d in -(ni - 1)..ni {
        // Entries (b + d, b) for b in range.
        let b0 = (-d).max(0) as usize;
        let b1 = (ni - d).min(ni) as usize;
        let v = d as f64 * dx;
        let damping = (-0.5 * damp * v * v).exp();
        if diag_var > 0.0 {
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for (t, b) in (b0..b1).enumerate() {
                buf[t] = r[[(b as isize + d) as usize, b]];
            }
            spectral::fft_1d(&mut buf, Direction::Forward);
            buf.iter_mut().zip(&mult).for_each(|(c, m)| *c *= m);
            spectral::fft_1d(&mut buf, Direction::Inverse);
            for (t, b) in (b0..b1).enumerate() {
                out[[(b as isize + d) as usize, b]] = buf[t] * damping;
            }
        } else {
            for b in b0..b1 {
                let a = (b as isize + d) as usize;
                out[[a, b]] = r[[a, b]] * damping;
            }
        }
    }
    DensityMatrix::new(g, out).expect("same shape").hermitize()
}

fn check_leak(what: &'static str, rho: &DensityMatrix) -> Result<()> {
    let peak = rho.rho().iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let leak = boundary_max(rho.rho(), |z| z.norm()) / peak.max(f64::MIN_POSITIVE);
    if leak > LEAK_LIMIT {
        return Err(Error::BoundaryLeak { what, leak, limit: LEAK_LIMIT });
    }
    if leak * peak > BOUNDARY_WARN {
        log::warn!("{what}: output boundary magnitude {:.2e}", leak * peak);
    }
    Ok(())
}

/// `m` successive unrecorded coherent-state measurements.
pub fn povm_channel(rho: &DensityMatrix, m: u32) -> Result<DensityMatrix> {
    povm_channel_squeezed(rho, m, 1.0)
}

/// [`povm_channel`] for POVM states of position width `σ`.
pub fn povm_channel_squeezed(rho: &DensityMatrix, m: u32, sigma: f64) -> Result<DensityMatrix> {
    if m == 0 {
        return Err(Error::BadParameter { name: "m", requirement: "a positive integer", value: 0.0 });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::BadParameter { name: "sigma", requirement: "positive", value: sigma });
    }
    let m = m as f64;
    let s2 = sigma * sigma;
    let out = diagonal_smooth_and_damp(rho, m * s2, m / s2);
    check_leak("povm_channel", &out)?;
    Ok(out)
}

/// The channel on the Wigner function: product Gaussian smoothing of variance
/// `m` per axis. Any real `m ≥ 0` is accepted; `m = ½` yields the Husimi density.
pub fn povm_smooth_wigner(w: &WignerFunction, m: f64) -> Result<WignerFunction> {
    povm_smooth_wigner_squeezed(w, m, 1.0)
}

pub fn povm_smooth_wigner_squeezed(w: &WignerFunction, m: f64, sigma: f64) -> Result<WignerFunction> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::BadParameter { name: "m", requirement: "finite and >= 0", value: m });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::BadParameter { name: "sigma", requirement: "positive", value: sigma });
    }
    let s2 = sigma * sigma;
    let out = gaussian_convolve(w.field(), m * s2, m / s2)?;
    let edge = out.boundary_max();
    if edge > BOUNDARY_WARN {
        log::warn!("povm_smooth_wigner: output boundary magnitude {edge:.2e}");
    }
    Ok(WignerFunction::from_field(out))
}

/// Outcome of one phase-space measurement: the detected point and the
/// coherent state the system is left in.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: CoherentLabel,
    pub post_state: DensityMatrix,
}

impl MeasurementRecord {
    pub fn z(&self) -> Complex64 {
        self.outcome.z()
    }
}

/// Inverse-CDF sampler over the cells of a Husimi density. Grid samples are
/// cell centres; within a cell the CDF is linear along `p` and the `x`
/// position is uniform.
#[derive(Clone, Debug)]
pub struct PovmSampler {
    q: HusimiFunction,
    cdf: Vec<f64>,
    sigma: f64,
}

impl PovmSampler {
    pub fn new(rho: &DensityMatrix, sigma: f64) -> Result<Self> {
        let q = husimi_from_density(rho, sigma)?;
        let mut cdf = Vec::with_capacity(q.values().len());
        let mut acc = 0.0;
        for v in q.values().iter() {
            acc += v.max(0.0);
            cdf.push(acc);
        }
        if acc.is_nan() || acc <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { q, cdf, sigma })
    }

    pub fn husimi(&self) -> &HusimiFunction {
        &self.q
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CoherentLabel {
        let g = self.q.grid();
        let np = g.gp.n();
        let total = *self.cdf.last().expect("non-empty");
        let u = rng.random::<f64>() * total;
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        let below = if idx == 0 { 0.0 } else { self.cdf[idx - 1] };
        let mass = self.cdf[idx] - below;
        let frac = if mass > 0.0 { ((u - below) / mass).clamp(0.0, 1.0) } else { 0.5 };
        let (i, j) = (idx / np, idx % np);
        let x0 = g.gx.point(i) + (rng.random::<f64>() - 0.5) * g.gx.dx();
        let p0 = g.gp.point(j) + (frac - 0.5) * g.gp.dx();
        CoherentLabel::new(x0, p0).with_sigma(self.sigma)
    }

    /// `count` outcomes from a ChaCha8 stream seeded with `seed`.
    pub fn draw_many(&self, count: usize, seed: u64) -> Vec<CoherentLabel> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

/// Rank-one coherent density `|z⟩⟨z|` without margin checks (outcomes may fall
/// in the tails of the grid).
pub fn coherent_projector(label: &CoherentLabel, grid: &Grid1D) -> DensityMatrix {
    let a = coherent_amplitudes(label, grid);
    let n = grid.n();
    let rho = Array2::from_shape_fn((n, n), |(i, j)| a[i] * a[j].conj());
    DensityMatrix::new(*grid, rho).expect("square shape")
}

pub fn sample_povm_outcome(rho: &DensityMatrix, seed: u64) -> Result<MeasurementRecord> {
    let sampler = PovmSampler::new(rho, 1.0)?;
    let outcome = sampler.draw_many(1, seed)[0];
    Ok(MeasurementRecord { outcome, post_state: coherent_projector(&outcome, rho.grid()) })
}

/// `count` outcomes; deterministic in `(rho, count, seed)`.
pub fn sample_povm_outcomes(rho: &DensityMatrix, count: usize, seed: u64) -> Result<Vec<CoherentLabel>> {
    Ok(PovmSampler::new(rho, 1.0)?.draw_many(count, seed))
}

/// `(1/N) Σ |z_s⟩⟨z_s|`, accumulated as blocked `Ψ Ψ†` products. The block
/// partition and the reduction order are fixed, so the result does not depend
/// on the thread count.
pub fn average_post_state(outcomes: &[CoherentLabel], grid: &Grid1D) -> Result<DensityMatrix> {
    const BLOCK: usize = 512;
    if outcomes.is_empty() {
        return Err(Error::ZeroNorm);
    }
    let n = grid.n();
    let partials: Vec<Array2<Complex64>> = outcomes
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut psi = Array2::<Complex64>::zeros((n, chunk.len()));
            for (s, label) in chunk.iter().enumerate() {
                psi.column_mut(s).assign(&coherent_amplitudes(label, grid));
            }
            let psi_h = psi.t().mapv(|z| z.conj());
            psi.dot(&psi_h)
        })
        .collect();
    let mut acc = Array2::<Complex64>::zeros((n, n));
    for p in &partials {
        acc += p;
    }
    acc.mapv_inplace(|z| z / outcomes.len() as f64);
    Ok(DensityMatrix::new(*grid, acc)?.hermitize())
}
