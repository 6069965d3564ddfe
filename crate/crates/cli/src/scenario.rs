//! TOML scenario configs and the snapshot runner.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use phasespace::analysis::phase_space_stats;
use phasespace::lindblad::{evolve_composed, evolve_position_lindblad, DecoherenceMode, EvolutionSpec};
use phasespace::povm::{average_post_state, povm_channel, povm_smooth_wigner_squeezed, sample_povm_outcomes};
use phasespace::transforms::{density_from_wigner, husimi_from_wigner, wigner_from_density, HusimiFunction};
use phasespace::{
    cat_state, coherent_state, density_from_pure, fock_state, make_grid, CoherentLabel, DensityMatrix, Field2D,
    Grid1D, WignerFunction,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::files;
use crate::render::{render_heatmap, Colormap};

/// Scenarios shipped with the binary, by name.
pub const BUILTIN: [(&str, &str); 6] = [
    ("fig1-top", include_str!("../scenarios/fig1-top.toml")),
    ("fig1-middle", include_str!("../scenarios/fig1-middle.toml")),
    ("fig1-bottom", include_str!("../scenarios/fig1-bottom.toml")),
    ("fig2-top", include_str!("../scenarios/fig2-top.toml")),
    ("fig2-middle", include_str!("../scenarios/fig2-middle.toml")),
    ("fig2-bottom", include_str!("../scenarios/fig2-bottom.toml")),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Seeds the `povm_sample` step.
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    pub initial_state: InitialState,
    pub pipeline: Vec<Step>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Coherent {
        x0: f64,
        p0: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// Centres at `(±alpha, 0)`.
    CatPosition {
        alpha: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Centres at `(0, ±alpha)`.
    CatMomentum {
        alpha: f64,
        #[serde(default)]
        phase: f64,
    },
    Fock {
        level: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Position,
    PhaseSpace,
}

impl From<Mode> for DecoherenceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Position => DecoherenceMode::Position,
            Mode::PhaseSpace => DecoherenceMode::PhaseSpace,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Wigner,
    Husimi,
    Density,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Evolve {
        mode: Mode,
        gamma: f64,
        #[serde(default)]
        omega: f64,
        #[serde(default = "one")]
        mass: f64,
        /// Fixed duration; the snapshot time when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<f64>,
        /// Upper bound on the splitting step.
        #[serde(default = "default_max_dt")]
        max_dt: f64,
    },
    PovmApply {
        m: u32,
    },
    PovmSmooth {
        m: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// Replaces the state by the average of `count` sampled coherent post-states.
    PovmSample {
        count: usize,
    },
    Transform {
        kind: TransformKind,
        #[serde(default = "one")]
        sigma: f64,
    },
    Analyze,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Png,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub colormap: Colormap,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { directory: None, formats: all_formats(), colormap: Colormap::default(), snapshot_times: Vec::new() }
    }
}

fn one() -> f64 {
    1.0
}

fn default_max_dt() -> f64 {
    0.05
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Png, Format::Json]
}

fn invalid(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn nonneg(field: &str, v: f64) -> CliResult<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {}", e.to_string().trim_end())))?;
        cfg.validate().map_err(|e| e.context(origin))?;
        Ok(cfg)
    }

    /// A built-in name or a path to a TOML file.
    pub fn load(name_or_path: &str) -> CliResult<Self> {
        if let Some((name, text)) = BUILTIN.iter().find(|(n, _)| *n == name_or_path) {
            return Self::parse(text, name);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            let names: Vec<&str> = BUILTIN.iter().map(|(n, _)| *n).collect();
            return Err(CliError::Validation(format!(
                "{name_or_path}: no such file or built-in scenario (built-ins: {})",
                names.join(", ")
            )));
        }
        let text = fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{name_or_path}: {e}")))?;
        Self::parse(&text, name_or_path)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        make_grid(self.grid.n, self.grid.half_width).map_err(|e| invalid("grid", e))?;
        match self.initial_state {
            InitialState::Coherent { x0, p0, sigma } => {
                if !(x0.is_finite() && p0.is_finite()) {
                    return Err(invalid("initial_state", "centre must be finite"));
                }
                positive("initial_state.sigma", sigma)?;
            }
            InitialState::CatPosition { alpha, phase } | InitialState::CatMomentum { alpha, phase } => {
                positive("initial_state.alpha", alpha)?;
                if !phase.is_finite() {
                    return Err(invalid("initial_state.phase", "must be finite"));
                }
            }
            InitialState::Fock { .. } => {}
        }
        if self.pipeline.is_empty() {
            return Err(invalid("pipeline", "must contain at least one step"));
        }
        let times = &self.outputs.snapshot_times;
        for (i, &t) in times.iter().enumerate() {
            nonneg(&format!("outputs.snapshot_times[{i}]"), t)?;
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("outputs.snapshot_times", "must be sorted ascending"));
        }
        if self.outputs.formats.is_empty() {
            return Err(invalid("outputs.formats", "must list at least one of csv, png, json"));
        }
        for (i, step) in self.pipeline.iter().enumerate() {
            let f = |name: &str| format!("pipeline[{i}].{name}");
            match *step {
                Step::Evolve { gamma, omega, mass, t, max_dt, .. } => {
                    nonneg(&f("gamma"), gamma)?;
                    nonneg(&f("omega"), omega)?;
                    positive(&f("mass"), mass)?;
                    positive(&f("max_dt"), max_dt)?;
                    match t {
                        Some(t) => nonneg(&f("t"), t)?,
                        None if times.is_empty() => {
                            return Err(invalid(f("t"), "required when outputs.snapshot_times is empty"));
                        }
                        None => {}
                    }
                }
                Step::PovmApply { m: 0 } => return Err(invalid(f("m"), "must be >= 1")),
                Step::PovmSmooth { m, sigma } => {
                    nonneg(&f("m"), m)?;
                    positive(&f("sigma"), sigma)?;
                }
                Step::PovmSample { count: 0 } => return Err(invalid(f("count"), "must be >= 1")),
                Step::Transform { sigma, .. } => positive(&f("sigma"), sigma)?,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Grid1D> {
        make_grid(self.grid.n, self.grid.half_width).map_err(|e| invalid("grid", e))
    }

    pub fn initial_density(&self) -> CliResult<DensityMatrix> {
        let g = self.grid()?;
        let psi = match self.initial_state {
            InitialState::Coherent { x0, p0, sigma } => coherent_state(CoherentLabel::new(x0, p0).with_sigma(sigma), &g),
            InitialState::CatPosition { alpha, phase } => {
                cat_state(CoherentLabel::new(alpha, 0.0), CoherentLabel::new(-alpha, 0.0), phase, &g)
            }
            InitialState::CatMomentum { alpha, phase } => {
                cat_state(CoherentLabel::new(0.0, alpha), CoherentLabel::new(0.0, -alpha), phase, &g)
            }
            InitialState::Fock { level } => fock_state(level, &g),
        };
        Ok(density_from_pure(&psi.map_err(|e| CliError::from(e).context("initial_state"))?))
    }
}

/// The representation carried between pipeline steps.
#[derive(Clone)]
enum Stage {
    Density(DensityMatrix),
    Wigner(WignerFunction),
    Husimi(HusimiFunction),
}

impl Stage {
    fn wigner(self) -> CliResult<WignerFunction> {
        match self {
            Stage::Density(rho) => Ok(wigner_from_density(&rho)?),
            Stage::Wigner(w) => Ok(w),
            Stage::Husimi(_) => Err(CliError::Validation("needs a Wigner function, the state is a Husimi function".into())),
        }
    }

    fn density(self) -> CliResult<DensityMatrix> {
        match self {
            Stage::Density(rho) => Ok(rho),
            Stage::Wigner(w) => Ok(density_from_wigner(&w)?),
            Stage::Husimi(_) => Err(CliError::Validation("needs a density matrix, the state is a Husimi function".into())),
        }
    }

    fn field(self) -> CliResult<(&'static str, Field2D<f64>)> {
        match self {
            Stage::Husimi(q) => Ok(("husimi", q.into_field())),
            other => Ok(("wigner", other.wigner()?.into_field())),
        }
    }
}

fn run_step(stage: Stage, step: &Step, time: Option<f64>, seed: u64, analyses: &mut Vec<Value>, i: usize) -> CliResult<Stage> {
    Ok(match *step {
        Step::Evolve { mode, gamma, omega, mass, t, max_dt } => {
            let t = t.or(time).unwrap_or(0.0);
            let steps = ((t / max_dt).ceil() as usize).max(1);
            let spec = EvolutionSpec::new(mode.into(), gamma, t).with_oscillator(omega, mass).with_steps(steps);
            spec.validate()?;
            match stage {
                Stage::Density(rho) if mode == Mode::Position && omega == 0.0 => {
                    Stage::Density(evolve_position_lindblad(&rho, gamma, t)?)
                }
                other => Stage::Wigner(evolve_composed(&other.wigner()?, &spec)?),
            }
        }
        Step::PovmApply { m } => Stage::Density(povm_channel(&stage.density()?, m)?),
        Step::PovmSmooth { m, sigma } => Stage::Wigner(povm_smooth_wigner_squeezed(&stage.wigner()?, m, sigma)?),
        Step::PovmSample { count } => {
            let rho = stage.density()?;
            let outcomes = sample_povm_outcomes(&rho, count, seed)?;
            Stage::Density(average_post_state(&outcomes, rho.grid())?)
        }
        Step::Transform { kind, sigma } => match kind {
            TransformKind::Wigner => Stage::Wigner(stage.wigner()?),
            TransformKind::Husimi => Stage::Husimi(husimi_from_wigner(&stage.wigner()?, sigma)?),
            TransformKind::Density => Stage::Density(stage.density()?),
        },
        Step::Analyze => {
            let (kind, field) = stage.clone().field()?;
            let stats = phase_space_stats(&WignerFunction::from_field(field));
            analyses.push(json!({ "step": i, "field": kind, "metrics": files::metrics_json(&stats) }));
            stage
        }
    })
}

fn step_name(step: &Step) -> &'static str {
    match step {
        Step::Evolve { .. } => "evolve",
        Step::PovmApply { .. } => "povm_apply",
        Step::PovmSmooth { .. } => "povm_smooth",
        Step::PovmSample { .. } => "povm_sample",
        Step::Transform { .. } => "transform",
        Step::Analyze => "analyze",
    }
}

struct Snapshot {
    index: usize,
    time: Option<f64>,
    kind: &'static str,
    field: Field2D<f64>,
    analyses: Vec<Value>,
}

/// Runs every snapshot and writes the artifacts into `out`. Returns the
/// manifest.
pub fn run(cfg: &ScenarioConfig, out: &Path) -> CliResult<Value> {
    let started = Instant::now();
    let rho0 = cfg.initial_density()?;
    let times: Vec<Option<f64>> = if cfg.outputs.snapshot_times.is_empty() {
        vec![None]
    } else {
        cfg.outputs.snapshot_times.iter().copied().map(Some).collect()
    };

    let mut snapshots = Vec::with_capacity(times.len());
    for (index, &time) in times.iter().enumerate() {
        let mut stage = Stage::Density(rho0.clone());
        let mut analyses = Vec::new();
        for (i, step) in cfg.pipeline.iter().enumerate() {
            stage = run_step(stage, step, time, cfg.seed, &mut analyses, i)
                .map_err(|e| e.context(format_args!("pipeline step {i} ({})", step_name(step))))?;
        }
        let (kind, field) = stage.field()?;
        log::info!("{}: snapshot {index} done after {:.2?}", cfg.name, started.elapsed());
        snapshots.push(Snapshot { index, time, kind, field, analyses });
    }

    fs::create_dir_all(out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    let want = |f: Format| cfg.outputs.formats.contains(&f);
    let artifacts: Vec<Vec<String>> = snapshots
        .par_iter()
        .map(|s| write_snapshot(s, out, cfg.outputs.colormap, want(Format::Csv), want(Format::Png), want(Format::Json)))
        .collect::<CliResult<_>>()?;

    let echo = toml::to_string(cfg).map_err(|e| CliError::Runtime(format!("config echo: {e}")))?;
    fs::write(out.join("scenario.toml"), echo)?;

    let g = cfg.grid()?;
    let lattice = snapshots[0].field.grid();
    let manifest = json!({
        "name": cfg.name,
        "description": cfg.description,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "grid": {
            "n": g.n(),
            "half_width": cfg.grid.half_width,
            "x_min": g.x_min(),
            "dx": g.dx(),
            "p_min": lattice.gp.x_min(),
            "dp": lattice.gp.dx(),
        },
        "config": serde_json::to_value(cfg)?,
        "config_file": "scenario.toml",
        "snapshots": snapshots.iter().zip(&artifacts).map(|(s, a)| json!({
            "index": s.index,
            "time": s.time,
            "field": s.kind,
            "artifacts": a,
        })).collect::<Vec<_>>(),
    });
    files::write_json(Some(&out.join("manifest.json")), &manifest)?;
    log::info!("{}: finished in {:.2?}", cfg.name, started.elapsed());
    Ok(manifest)
}

fn write_snapshot(s: &Snapshot, out: &Path, cmap: Colormap, csv: bool, png: bool, json_out: bool) -> CliResult<Vec<String>> {
    let stem = format!("t{:02}", s.index);
    let mut written = Vec::new();
    if csv {
        let name = format!("{stem}_{}.csv", s.kind);
        files::write_field(Some(&out.join(&name)), &s.field)?;
        written.push(name);
    }
    if png {
        let name = format!("{stem}.png");
        render_heatmap(&s.field, &out.join(&name), cmap)?;
        written.push(name);
    }
    if json_out {
        let name = format!("{stem}_metrics.json");
        let stats = phase_space_stats(&WignerFunction::from_field(s.field.clone()));
        let v = json!({
            "index": s.index,
            "time": s.time,
            "field": s.kind,
            "metrics": files::metrics_json(&stats),
            "analyze": s.analyses,
        });
        files::write_json(Some(&out.join(&name)), &v)?;
        written.push(name);
    }
    Ok(written)
}
