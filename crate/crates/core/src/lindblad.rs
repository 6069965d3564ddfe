//! Time evolution under position-only and phase-space dephasing, optionally
//! combined with a harmonic Hamiltonian `H = p²/2m + mω²x²/2`.
//!
//! Both dissipators are Gaussian channels with closed forms:
//!
//! * position monitoring (`L = √γ x`): `ρ_t(x,y) = e^{−γ(x−y)²t/2} ρ_0(x,y)`,
//!   which on the Wigner function is a smoothing along `p` of variance `γt`;
//! * phase-space monitoring (`L₁ = √γ x`, `L₂ = √γ p`): the heat equation
//!   `∂_t W = (γ/2)(∂²_x + ∂²_p) W`, solved by smoothing with variance `γt`
//!   on both axes.
//!
//! The harmonic flow advects `W` along classical orbits. With `ẋ = p/m`,
//! `ṗ = −mω²x` points rotate clockwise in the `(x, p/(mω))` plane and
//! `W_t(x, p) = W_0(x cos ωt − p sin ωt/(mω), p cos ωt + mωx sin ωt)`.
//! The rotation is applied as three spectral shears.
//!
//! [`evolve_master_oracle`] integrates the full master equation with classical
//! RK4 in the position basis and serves as an independent reference.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{gaussian_convolve, Field2D};
use crate::povm::{diagonal_smooth_and_damp, LEAK_LIMIT};
use crate::spectral::{self, Direction};
use crate::states::{apply_momentum_left, apply_momentum_right, DensityMatrix};
use crate::transforms::WignerFunction;

/// Which observables the environment monitors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoherenceMode {
    /// Lindblad operator `√γ x`.
    Position,
    /// Lindblad operators `√γ x` and `√γ p`.
    PhaseSpace,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionSpec {
    pub gamma: f64,
    /// Oscillator frequency; zero disables the Hamiltonian.
    pub omega: f64,
    pub mass: f64,
    pub mode: DecoherenceMode,
    pub t: f64,
    /// Splitting steps when the Hamiltonian and dissipator do not commute.
    pub n_steps: usize,
}

impl EvolutionSpec {
    pub fn new(mode: DecoherenceMode, gamma: f64, t: f64) -> Self {
        Self { gamma, omega: 0.0, mass: 1.0, mode, t, n_steps: 1 }
    }

    pub fn with_oscillator(self, omega: f64, mass: f64) -> Self {
        Self { omega, mass, ..self }
    }

    pub fn with_steps(self, n_steps: usize) -> Self {
        Self { n_steps, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        nonneg("gamma", self.gamma)?;
        nonneg("omega", self.omega)?;
        nonneg("t", self.t)?;
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::BadParameter { name: "mass", requirement: "positive", value: self.mass });
        }
        if self.n_steps == 0 {
            return Err(Error::BadParameter { name: "n_steps", requirement: ">= 1", value: 0.0 });
        }
        Ok(())
    }

    /// Monitoring rates of `x` and `p`.
    fn rates(&self) -> (f64, f64) {
        match self.mode {
            DecoherenceMode::Position => (self.gamma, 0.0),
            DecoherenceMode::PhaseSpace => (self.gamma, self.gamma),
        }
    }
}

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter { name, requirement: "finite and >= 0", value: v })
    }
}

fn check_wigner_leak(what: &'static str, f: &Field2D<f64>) -> Result<()> {
    let leak = f.boundary_max() / f.max_abs().max(f64::MIN_POSITIVE);
    if leak > LEAK_LIMIT {
        return Err(Error::BoundaryLeak { what, leak, limit: LEAK_LIMIT });
    }
    Ok(())
}

/// Closed-form position dephasing on the density matrix.
pub fn evolve_position_lindblad(rho0: &DensityMatrix, gamma: f64, t: f64) -> Result<DensityMatrix> {
    nonneg("gamma", gamma)?;
    nonneg("t", t)?;
    Ok(diagonal_smooth_and_damp(rho0, 0.0, gamma * t))
}

/// Position dephasing in the Wigner picture: smoothing along `p` only.
pub fn evolve_position_lindblad_wigner(w0: &WignerFunction, gamma: f64, t: f64) -> Result<WignerFunction> {
    nonneg("gamma", gamma)?;
    nonneg("t", t)?;
    let out = gaussian_convolve(w0.field(), 0.0, gamma * t)?;
    check_wigner_leak("position dephasing", &out)?;
    Ok(WignerFunction::from_field(out))
}

/// Heat-kernel solution of phase-space dephasing.
pub fn evolve_phase_space_lindblad(w0: &WignerFunction, gamma: f64, t: f64) -> Result<WignerFunction> {
    nonneg("gamma", gamma)?;
    nonneg("t", t)?;
    let s = gamma * t;
    let out = gaussian_convolve(w0.field(), s, s)?;
    check_wigner_leak("phase-space dephasing", &out)?;
    Ok(WignerFunction::from_field(out))
}

/// `f(x, p) ↦ f(x − shift(p), p)` (`along_x`) or `f(x, p − shift(x))`, by
/// spectral translation of each lane.
fn spectral_shear(values: &Array2<f64>, h: f64, along_x: bool, shifts: &[f64]) -> Array2<f64> {
    let axis = if along_x { Axis(0) } else { Axis(1) };
    let n = values.len_of(axis);
    let k = spectral::odd_frequencies(n, h);
    let mut c = spectral::complexify(values);
    spectral::fft_axis(&mut c, axis, Direction::Forward);
    for ((i, j), v) in c.indexed_iter_mut() {
        let (kk, d) = if along_x { (k[i], shifts[j]) } else { (k[j], shifts[i]) };
        *v *= Complex64::from_polar(1.0, -kk * d);
    }
    spectral::fft_axis(&mut c, axis, Direction::Inverse);
    c.mapv(|z| z.re)
}

/// `W ↦ W ∘ R(θ)` in the scaled plane `(x, p/s)`, as x-shear, p-shear, x-shear.
fn rotate_once(f: &Field2D<f64>, theta: f64, s: f64) -> Field2D<f64> {
    let g = *f.grid();
    let tau = (0.5 * theta).tan();
    let sin = theta.sin();
    let xs = g.gx.points();
    let ps = g.gp.points();
    let shift_x: Vec<f64> = ps.iter().map(|p| tau * p / s).collect();
    let shift_p: Vec<f64> = xs.iter().map(|x| -s * sin * x).collect();
    let v = spectral_shear(f.values(), g.gx.dx(), true, &shift_x);
    let v = spectral_shear(&v, g.gp.dx(), false, &shift_p);
    let v = spectral_shear(&v, g.gx.dx(), true, &shift_x);
    Field2D::new(g, v).expect("same shape")
}

fn rotate_field(f: &Field2D<f64>, theta: f64, s: f64) -> Field2D<f64> {
    // Reduce to (−π, π] and keep every shear at |θ| ≤ π/4.
    let theta = theta.rem_euclid(2.0 * PI);
    let theta = if theta > PI { theta - 2.0 * PI } else { theta };
    if theta == 0.0 {
        return f.clone();
    }
    let pieces = (theta.abs() / (0.25 * PI)).ceil().max(1.0) as usize;
    let step = theta / pieces as f64;
    let mut out = f.clone();
    for _ in 0..pieces {
        out = rotate_once(&out, step, s);
    }
    out
}

/// Exact harmonic-oscillator evolution of `W` for time `t`.
pub fn evolve_harmonic_rotation(w0: &WignerFunction, omega: f64, mass: f64, t: f64) -> Result<WignerFunction> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::BadParameter { name: "omega", requirement: "positive", value: omega });
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::BadParameter { name: "mass", requirement: "positive", value: mass });
    }
    if !t.is_finite() {
        return Err(Error::BadParameter { name: "t", requirement: "finite", value: t });
    }
    w0.field().check_finite()?;
    let out = rotate_field(w0.field(), omega * t, mass * omega);
    check_wigner_leak("harmonic rotation", &out)?;
    Ok(WignerFunction::from_field(out))
}

/// Largest change allowed when the splitting step is halved.
pub const SPLITTING_TOL: f64 = 1e-4;

/// Monitoring `x` at rate `gx` smooths along `p`, monitoring `p` smooths along `x`.
fn dissipate(f: &Field2D<f64>, (gx, gp): (f64, f64), dt: f64) -> Result<Field2D<f64>> {
    gaussian_convolve(f, gp * dt, gx * dt)
}

fn strang(w0: &Field2D<f64>, spec: &EvolutionSpec, n_steps: usize) -> Result<Field2D<f64>> {
    // (R_{h/2} D_h R_{h/2})^n with adjacent half-rotations merged.
    let h = spec.t / n_steps as f64;
    let s = spec.mass * spec.omega;
    let theta = spec.omega * h;
    let rates = spec.rates();
    let mut f = rotate_field(w0, 0.5 * theta, s);
    for step in 0..n_steps {
        f = dissipate(&f, rates, h)?;
        let angle = if step + 1 == n_steps { 0.5 * theta } else { theta };
        f = rotate_field(&f, angle, s);
    }
    Ok(f)
}

/// Dissipator plus optional harmonic Hamiltonian.
///
/// Phase-space dephasing commutes with the flow when `mω = 1` (the kernel is
/// isotropic in the rotated plane), and the two are composed exactly. All
/// other combinations use Strang splitting with `spec.n_steps` steps; the
/// result is rejected when doubling the step count moves it by more than
/// [`SPLITTING_TOL`].
pub fn evolve_composed(w0: &WignerFunction, spec: &EvolutionSpec) -> Result<WignerFunction> {
    spec.validate()?;
    if spec.omega == 0.0 {
        return match spec.mode {
            DecoherenceMode::Position => evolve_position_lindblad_wigner(w0, spec.gamma, spec.t),
            DecoherenceMode::PhaseSpace => evolve_phase_space_lindblad(w0, spec.gamma, spec.t),
        };
    }
    let s = spec.mass * spec.omega;
    if spec.mode == DecoherenceMode::PhaseSpace && (s - 1.0).abs() < 1e-12 {
        let rotated = evolve_harmonic_rotation(w0, spec.omega, spec.mass, spec.t)?;
        return evolve_phase_space_lindblad(&rotated, spec.gamma, spec.t);
    }
    w0.field().check_finite()?;
    let coarse = strang(w0.field(), spec, spec.n_steps)?;
    let fine = strang(w0.field(), spec, 2 * spec.n_steps)?;
    let change = (coarse.values() - fine.values()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if change > SPLITTING_TOL {
        return Err(Error::StepsTooCoarse { n_steps: spec.n_steps, change });
    }
    check_wigner_leak("composed evolution", &coarse)?;
    Ok(WignerFunction::from_field(coarse))
}

/// Result of an RK4 oracle run.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub rho: DensityMatrix,
    /// Step actually used, after any stability halvings.
    pub dt: f64,
    pub steps: usize,
    pub trace_drift: f64,
}

/// Trace drift that triggers a retry with half the step.
pub const ORACLE_RETRY_DRIFT: f64 = 1e-8;
/// Trace drift that aborts the oracle.
pub const ORACLE_ABORT_DRIFT: f64 = 1e-6;
const ORACLE_MAX_HALVINGS: usize = 8;

/// Default oracle step: `min(0.001, 0.1/(γ x_max²))`, further capped so the
/// stiffest mode of the discretized generator stays inside the RK4
/// stability region.
pub fn default_oracle_dt(spec: &EvolutionSpec, rho: &DensityMatrix) -> f64 {
    let g = rho.grid();
    let x_max = g.x_min().abs().max(g.x_max().abs());
    let mut dt: f64 = 0.001;
    if spec.gamma > 0.0 {
        dt = dt.min(0.1 / (spec.gamma * x_max * x_max));
    }
    dt.min(2.0 / generator_bound(spec, rho))
}

/// Upper bound on the spectral radius of the discretized master-equation generator.
fn generator_bound(spec: &EvolutionSpec, rho: &DensityMatrix) -> f64 {
    let g = rho.grid();
    let k_max = PI / g.dx();
    let span = g.x_max() - g.x_min();
    let x_max = g.x_min().abs().max(g.x_max().abs());
    let (gx, gp) = spec.rates();
    let mut b = 0.5 * gx * span * span + 0.5 * gp * (2.0 * k_max).powi(2);
    if spec.omega > 0.0 {
        b += k_max * k_max / (2.0 * spec.mass) + 0.5 * spec.mass * spec.omega * spec.omega * x_max * x_max;
    }
    b.max(f64::MIN_POSITIVE)
}

struct Generator {
    gx: f64,
    gp: f64,
    /// `−½ (x_a − x_b)²`
    dephase: Array2<f64>,
    /// `V(x_a) − V(x_b)`, or empty without a Hamiltonian.
    potential: Option<Array2<f64>>,
    inv_mass: f64,
    k: Vec<f64>,
}

impl Generator {
    fn new(spec: &EvolutionSpec, rho: &DensityMatrix) -> Self {
        let g = rho.grid();
        let n = g.n();
        let xs = g.points();
        let (gx, gp) = spec.rates();
        let dephase = Array2::from_shape_fn((n, n), |(a, b)| -0.5 * (xs[a] - xs[b]).powi(2));
        let potential = (spec.omega > 0.0).then(|| {
            let v: Vec<f64> = xs.iter().map(|x| 0.5 * spec.mass * spec.omega * spec.omega * x * x).collect();
            Array2::from_shape_fn((n, n), |(a, b)| v[a] - v[b])
        });
        Self { gx, gp, dephase, potential, inv_mass: 1.0 / spec.mass, k: spectral::odd_frequencies(n, g.dx()) }
    }

    fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let mut out = Array2::<Complex64>::zeros(rho.raw_dim());
        if self.gx > 0.0 {
            ndarray::Zip::from(&mut out).and(rho).and(&self.dephase).for_each(|o, r, d| *o += self.gx * d * r);
        }
        let need_p2 = self.gp > 0.0 || self.potential.is_some();
        if need_p2 {
            let p2_rho = apply_momentum_left(rho, &self.k, 2);
            let rho_p2 = apply_momentum_right(rho, &self.k, 2);
            if self.gp > 0.0 {
                let p_rho_p = apply_momentum_left(&apply_momentum_right(rho, &self.k, 1), &self.k, 1);
                ndarray::Zip::from(&mut out)
                    .and(&p_rho_p)
                    .and(&p2_rho)
                    .and(&rho_p2)
                    .for_each(|o, prp, ppr, rpp| *o += self.gp * (prp - 0.5 * (ppr + rpp)));
            }
            if let Some(pot) = &self.potential {
                // −i[H, ρ] with H = p²/2m + V.
                let c = 0.5 * self.inv_mass;
                ndarray::Zip::from(&mut out)
                    .and(&p2_rho)
                    .and(&rho_p2)
                    .and(rho)
                    .and(pot)
                    .for_each(|o, ppr, rpp, r, v| *o += -i * (c * (ppr - rpp) + v * r));
            }
        }
        out
    }
}

fn rk4(gen: &Generator, rho0: &Array2<Complex64>, h: f64, steps: usize) -> Array2<Complex64> {
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = gen.apply(&rho);
        let k2 = gen.apply(&(&rho + &k1.mapv(|z| z * (0.5 * h))));
        let k3 = gen.apply(&(&rho + &k2.mapv(|z| z * (0.5 * h))));
        let k4 = gen.apply(&(&rho + &k3.mapv(|z| z * h)));
        ndarray::Zip::from(&mut rho)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|r, a, b, c, d| *r += (a + 2.0 * b + 2.0 * c + d) * (h / 6.0));
    }
    rho
}

/// RK4 integration of the master equation for `spec` in the position basis,
/// starting with step `dt` (capped by the stability bound) and halving it
/// while the trace drifts by more than [`ORACLE_RETRY_DRIFT`].
pub fn evolve_master_oracle(rho0: &DensityMatrix, spec: &EvolutionSpec, dt: f64) -> Result<OracleRun> {
    spec.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BadParameter { name: "dt", requirement: "positive", value: dt });
    }
    let gen = Generator::new(spec, rho0);
    let tr0 = rho0.trace();
    let mut dt = dt.min(2.0 / generator_bound(spec, rho0));
    let mut best: Option<OracleRun> = None;
    for _ in 0..=ORACLE_MAX_HALVINGS {
        let steps = ((spec.t / dt).ceil() as usize).max(1);
        let h = spec.t / steps as f64;
        let rho = rk4(&gen, rho0.rho(), h, steps);
        let finite = rho.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        let drift = if finite {
            let tr = rho.diag().iter().map(|z| z.re).sum::<f64>() * rho0.grid().dx();
            (tr - tr0).abs()
        } else {
            f64::INFINITY
        };
        if drift.is_finite() {
            let run = OracleRun { rho: DensityMatrix::new(*rho0.grid(), rho)?.hermitize(), dt: h, steps, trace_drift: drift };
            if drift <= ORACLE_RETRY_DRIFT {
                return Ok(run);
            }
            best = Some(run);
        }
        log::debug!("oracle: trace drift {drift:.3e} at dt = {h:.3e}, halving");
        dt = h / 2.0;
    }
    match best {
        Some(run) if run.trace_drift <= ORACLE_ABORT_DRIFT => {
            log::warn!("oracle: trace drift {:.3e} above {ORACLE_RETRY_DRIFT:e} after halving", run.trace_drift);
            Ok(run)
        }
        Some(run) => Err(Error::Unstable { drift: run.trace_drift, dt: run.dt }),
        None => Err(Error::Unstable { drift: f64::INFINITY, dt }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::states::{cat_state, coherent_state, density_from_pure, CoherentLabel};
    use crate::transforms::wigner_from_density;
    use approx::assert_abs_diff_eq;

    fn linf(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn coherent_wigner(x0: f64, p0: f64) -> WignerFunction {
        let g = make_grid(256, 10.0).unwrap();
        wigner_from_density(&density_from_pure(&coherent_state(CoherentLabel::new(x0, p0), &g).unwrap())).unwrap()
    }

    fn peak(w: &WignerFunction) -> (f64, f64) {
        let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
        for ((i, j), v) in w.values().indexed_iter() {
            if *v > best {
                best = *v;
                at = (i, j);
            }
        }
        (w.grid().gx.point(at.0), w.grid().gp.point(at.1))
    }

    #[test]
    fn position_dephasing_keeps_diagonal() {
        let g = make_grid(128, 10.0).unwrap();
        let psi = cat_state(CoherentLabel::new(3.0, 0.0), CoherentLabel::new(-3.0, 0.0), 0.0, &g).unwrap();
        let rho = density_from_pure(&psi);
        let out = evolve_position_lindblad(&rho, 0.7, 2.0).unwrap();
        assert_eq!(out.diagonal(), rho.diagonal());
        assert_eq!(evolve_position_lindblad(&rho, 0.2, 0.0).unwrap(), rho);
        assert!(evolve_position_lindblad(&rho, -0.2, 1.0).is_err());
        assert!(evolve_position_lindblad(&rho, 0.2, -1.0).is_err());
    }

    #[test]
    fn vacuum_heat_kernel_peak() {
        let w = coherent_wigner(0.0, 0.0);
        let out = evolve_phase_space_lindblad(&w, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(out.values()[[128, 128]], 1.0 / (3.0 * PI), epsilon = 1e-12);
        assert_eq!(evolve_phase_space_lindblad(&w, 0.3, 0.0).unwrap(), w);
    }

    #[test]
    fn full_period_is_identity() {
        let w = coherent_wigner(2.0, 1.0);
        let out = evolve_harmonic_rotation(&w, 1.0, 1.0, 2.0 * PI).unwrap();
        assert!(linf(out.values(), w.values()) < 1e-6);
    }

    #[test]
    fn coherent_orbit_is_clockwise() {
        let w = coherent_wigner(3.0, 0.0);
        let out = evolve_harmonic_rotation(&w, 1.0, 1.0, 0.5 * PI).unwrap();
        let (x, p) = peak(&out);
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p, -3.0, epsilon = 0.08);
        let exact = coherent_wigner(0.0, -3.0);
        assert!(linf(out.values(), exact.values()) < 1e-8);
    }

    #[test]
    fn rotation_with_mass_and_frequency() {
        // ω = 2, m = 0.5: s = mω = 1, a quarter period takes t = π/4.
        let w = coherent_wigner(2.0, 0.0);
        let out = evolve_harmonic_rotation(&w, 2.0, 0.5, 0.25 * PI).unwrap();
        let exact = coherent_wigner(0.0, -2.0);
        assert!(linf(out.values(), exact.values()) < 1e-8);
    }

    #[test]
    fn quarter_turns_compose() {
        let g = make_grid(256, 10.0).unwrap();
        let psi = cat_state(CoherentLabel::new(0.0, 3.0), CoherentLabel::new(0.0, -3.0), 0.0, &g).unwrap();
        let w = wigner_from_density(&density_from_pure(&psi)).unwrap();
        let mut q = w.clone();
        for _ in 0..4 {
            q = evolve_harmonic_rotation(&q, 1.0, 1.0, 0.5 * PI).unwrap();
        }
        let full = evolve_harmonic_rotation(&w, 1.0, 1.0, 2.0 * PI).unwrap();
        assert!(linf(q.values(), full.values()) < 1e-6);
    }

    #[test]
    fn spec_validation() {
        let s = EvolutionSpec::new(DecoherenceMode::Position, 0.1, 1.0);
        assert!(s.validate().is_ok());
        assert!(s.with_steps(0).validate().is_err());
        assert!(s.with_oscillator(1.0, 0.0).validate().is_err());
        assert!(EvolutionSpec::new(DecoherenceMode::Position, -0.1, 1.0).validate().is_err());
    }

    #[test]
    fn composed_without_hamiltonian_matches_propagators() {
        let w = coherent_wigner(1.0, -1.0);
        let spec = EvolutionSpec::new(DecoherenceMode::PhaseSpace, 0.1, 3.0);
        let a = evolve_composed(&w, &spec).unwrap();
        let b = evolve_phase_space_lindblad(&w, 0.1, 3.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coarse_splitting_is_reported() {
        let g = make_grid(256, 10.0).unwrap();
        let psi = cat_state(CoherentLabel::new(0.0, 3.0), CoherentLabel::new(0.0, -3.0), 0.0, &g).unwrap();
        let w = wigner_from_density(&density_from_pure(&psi)).unwrap();
        let spec = EvolutionSpec::new(DecoherenceMode::Position, 0.2, 2.0).with_oscillator(1.0, 1.0).with_steps(1);
        assert!(matches!(evolve_composed(&w, &spec), Err(Error::StepsTooCoarse { .. })));
    }

    #[test]
    fn oracle_dt_respects_stability() {
        let g = make_grid(256, 10.0).unwrap();
        let rho = density_from_pure(&coherent_state(CoherentLabel::new(0.0, 0.0), &g).unwrap());
        let spec = EvolutionSpec::new(DecoherenceMode::PhaseSpace, 1.0, 1.0);
        let dt = default_oracle_dt(&spec, &rho);
        assert!(dt * generator_bound(&spec, &rho) <= 2.0 + 1e-12);
        let spec = EvolutionSpec::new(DecoherenceMode::Position, 0.2, 1.0);
        assert_eq!(default_oracle_dt(&spec, &rho), 0.001);
    }

    #[test]
    fn oracle_unitary_orbit() {
        let g = make_grid(128, 10.0).unwrap();
        let rho = density_from_pure(&coherent_state(CoherentLabel::new(3.0, 0.0), &g).unwrap());
        let spec = EvolutionSpec::new(DecoherenceMode::Position, 0.0, 0.5 * PI).with_oscillator(1.0, 1.0);
        let run = evolve_master_oracle(&rho, &spec, default_oracle_dt(&spec, &rho)).unwrap();
        let m = run.rho.moments();
        assert_abs_diff_eq!(m.mean_x, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.mean_p, -3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(run.rho.purity(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn oracle_position_dephasing_keeps_diagonal() {
        let g = make_grid(128, 10.0).unwrap();
        let psi = cat_state(CoherentLabel::new(2.0, 1.0), CoherentLabel::new(-2.0, 0.0), 0.0, &g).unwrap();
        let rho = density_from_pure(&psi);
        let spec = EvolutionSpec::new(DecoherenceMode::Position, 0.5, 1.0);
        let run = evolve_master_oracle(&rho, &spec, 0.001).unwrap();
        for (a, b) in run.rho.diagonal().iter().zip(rho.diagonal()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
