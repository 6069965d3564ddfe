mod error;
mod files;
mod render;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasespace::analysis::{compare_densities, compare_fields, phase_space_stats, StateMetrics};
use phasespace::lindblad::{default_oracle_dt, evolve_composed, evolve_master_oracle, evolve_position_lindblad, EvolutionSpec};
use phasespace::povm::{povm_channel, povm_smooth_wigner_squeezed, sample_povm_outcomes};
use phasespace::transforms::{characteristic_from_wigner, husimi_from_wigner, wigner_from_density};
use phasespace::{cat_state, coherent_state, density_from_pure, fock_state, make_grid, CoherentLabel, WaveFunction};
use serde_json::{json, Value};

use error::{CliError, CliResult};
use files::Input;
use render::Colormap;
use scenario::{Mode, ScenarioConfig};

const THREADS_VAR: &str = "PHASESPACE_THREADS";

#[derive(Parser)]
#[command(name = "phasespace", version, about = "Phase-space decoherence toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a coherent, cat or Fock state on a symmetric grid.
    State(StateArgs),
    /// Convert between representations.
    Transform {
        kind: TransformTarget,
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Husimi smoothing width.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Lindblad evolution of a density matrix or Wigner function.
    Evolve(EvolveArgs),
    /// Coherent-state measurement channels and sampling.
    Povm {
        #[command(subcommand)]
        action: PovmAction,
    },
    /// Phase-space metrics of a state as JSON.
    Analyze { input: PathBuf },
    /// Distance between two states or fields.
    Compare { a: PathBuf, b: PathBuf },
    /// PNG heatmap of a real field.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Colormap::Diverging)]
        colormap: Colormap,
    },
    /// Built-in and file-based scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    Coherent,
    Cat,
    Fock,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Repr {
    Wavefunction,
    Density,
    Wigner,
}

#[derive(Args)]
struct StateArgs {
    kind: StateKind,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 10.0)]
    half_width: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    p0: f64,
    /// Second cat component; defaults to the mirror image of the first.
    #[arg(long, allow_negative_numbers = true)]
    x1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p1: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    level: usize,
    #[arg(long = "as", value_enum, default_value_t = Repr::Wigner)]
    repr: Repr,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformTarget {
    Wigner,
    Husimi,
    Char,
    Density,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Position,
    Phasespace,
}

#[derive(Args)]
struct EvolveArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: CliMode,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 0.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    /// Integrate the master equation with RK4 instead of the closed forms.
    #[arg(long)]
    oracle: bool,
    /// Oracle step; chosen from the generator bound when absent.
    #[arg(long, requires = "oracle")]
    dt: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Metrics sidecar; `<output>.metrics.json` by default.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PovmAction {
    /// Apply the m-fold measurement channel to a density matrix.
    Apply {
        #[arg(long)]
        m: u32,
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Gaussian smoothing of the Wigner function.
    Smooth {
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw coherent-state outcomes.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Run a built-in scenario by name or a TOML config file.
    Run {
        scenario: String,
        /// Output directory; overrides `outputs.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads().and_then(|_| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_VAR}: expected a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::State(a) => state(a),
        Command::Transform { kind, input, output, sigma } => transform(kind, &input, output.as_ref(), sigma),
        Command::Evolve(a) => evolve(a),
        Command::Povm { action } => povm(action),
        Command::Analyze { input } => analyze(&input),
        Command::Compare { a, b } => compare(&a, &b),
        Command::Render { input, output, colormap } => {
            let w = files::load(&input)?.wigner()?;
            render::render_heatmap(w.field(), &output, colormap)
        }
        Command::Scenario { action } => match action {
            ScenarioAction::List => {
                let mut out = std::io::stdout().lock();
                for (name, text) in scenario::BUILTIN {
                    let cfg = ScenarioConfig::parse(text, name)?;
                    writeln!(out, "{name}\t{}", cfg.description)?;
                }
                Ok(())
            }
            ScenarioAction::Run { scenario, out } => {
                let cfg = ScenarioConfig::load(&scenario)?;
                let dir = out.or_else(|| cfg.outputs.directory.clone()).unwrap_or_else(|| PathBuf::from(&cfg.name));
                let manifest = scenario::run(&cfg, &dir)?;
                let n = manifest["snapshots"].as_array().map_or(0, Vec::len);
                println!("{}: {n} snapshots written to {}", cfg.name, dir.display());
                Ok(())
            }
        },
    }
}

fn state(a: StateArgs) -> CliResult<()> {
    let g = make_grid(a.n, a.half_width)?;
    let label = CoherentLabel::new(a.x0, a.p0).with_sigma(a.sigma);
    let psi: WaveFunction = match a.kind {
        StateKind::Coherent => coherent_state(label, &g)?,
        StateKind::Cat => {
            let other = CoherentLabel::new(a.x1.unwrap_or(-a.x0), a.p1.unwrap_or(-a.p0)).with_sigma(a.sigma);
            cat_state(label, other, a.phase, &g)?
        }
        StateKind::Fock => fock_state(a.level, &g)?,
    };
    let out = a.output.as_ref();
    match a.repr {
        Repr::Wavefunction => {
            let mut w = files::sink(out)?;
            phasespace::io::write_wavefunction(&mut w, &psi)?;
            w.flush()?;
            Ok(())
        }
        Repr::Density => files::write_density(out, &density_from_pure(&psi)),
        Repr::Wigner => files::write_field(out, wigner_from_density(&density_from_pure(&psi))?.field()),
    }
}

fn transform(kind: TransformTarget, input: &Path, out: Option<&PathBuf>, sigma: f64) -> CliResult<()> {
    let state = files::load(input)?;
    match kind {
        TransformTarget::Wigner => files::write_field(out, state.wigner()?.field()),
        TransformTarget::Husimi => files::write_field(out, husimi_from_wigner(&state.wigner()?, sigma)?.field()),
        TransformTarget::Char => {
            let chi = characteristic_from_wigner(&state.wigner()?);
            let mut w = files::sink(out)?;
            phasespace::io::write_complex_field(&mut w, chi.field())?;
            w.flush()?;
            Ok(())
        }
        TransformTarget::Density => files::write_density(out, &state.density()?),
    }
}

fn drift(before: &StateMetrics, after: &StateMetrics) -> Value {
    json!({
        "trace_before": before.trace,
        "trace_after": after.trace,
        "trace_drift": (after.trace - before.trace).abs(),
        "moment_drift": {
            "mean_x": after.mean_x - before.mean_x,
            "mean_p": after.mean_p - before.mean_p,
            "var_x": after.var_x - before.var_x,
            "var_p": after.var_p - before.var_p,
        },
        "purity_before": before.purity,
        "purity_after": after.purity,
        "negativity_before": before.negativity_volume,
        "negativity_after": after.negativity_volume,
    })
}

fn evolve(a: EvolveArgs) -> CliResult<()> {
    let mode = match a.mode {
        CliMode::Position => Mode::Position,
        CliMode::Phasespace => Mode::PhaseSpace,
    };
    let spec = EvolutionSpec::new(mode.into(), a.gamma, a.t).with_oscillator(a.omega, a.mass).with_steps(a.steps);
    spec.validate()?;
    let input = files::load(&a.input)?;
    let before = phase_space_stats(&input.wigner()?);
    let started = Instant::now();
    let mut extra = json!({});
    let after = if a.oracle {
        let Input::Density(rho) = input else {
            return Err(CliError::Validation("--oracle needs a density matrix or wave function input".into()));
        };
        let dt = a.dt.unwrap_or_else(|| default_oracle_dt(&spec, &rho));
        let run = evolve_master_oracle(&rho, &spec, dt)?;
        extra = json!({ "oracle": { "dt": run.dt, "steps": run.steps, "trace_drift": run.trace_drift } });
        files::write_density(a.output.as_ref(), &run.rho)?;
        phase_space_stats(&wigner_from_density(&run.rho)?)
    } else {
        match input {
            Input::Density(rho) if mode == Mode::Position && a.omega == 0.0 => {
                let out = evolve_position_lindblad(&rho, a.gamma, a.t)?;
                files::write_density(a.output.as_ref(), &out)?;
                phase_space_stats(&wigner_from_density(&out)?)
            }
            other => {
                let w = evolve_composed(&other.wigner()?, &spec)?;
                files::write_field(a.output.as_ref(), w.field())?;
                phase_space_stats(&w)
            }
        }
    };
    let mut report = drift(&before, &after);
    report["runtime_s"] = json!(started.elapsed().as_secs_f64());
    if let (Some(r), Value::Object(e)) = (report.as_object_mut(), extra) {
        r.extend(e);
    }
    let sidecar = a.metrics.or_else(|| a.output.as_ref().map(|o| PathBuf::from(format!("{}.metrics.json", o.display()))));
    match sidecar {
        Some(p) => files::write_json(Some(&p), &report),
        None => {
            eprintln!("{}", serde_json::to_string(&report)?);
            Ok(())
        }
    }
}

fn povm(action: PovmAction) -> CliResult<()> {
    match action {
        PovmAction::Apply { m, input, output } => {
            let state = files::load(&input)?;
            let as_field = matches!(state, Input::Field(_));
            let out = povm_channel(&state.density()?, m)?;
            if as_field {
                files::write_field(output.as_ref(), wigner_from_density(&out)?.field())
            } else {
                files::write_density(output.as_ref(), &out)
            }
        }
        PovmAction::Smooth { m, sigma, input, output } => {
            let w = povm_smooth_wigner_squeezed(&files::load(&input)?.wigner()?, m, sigma)?;
            files::write_field(output.as_ref(), w.field())
        }
        PovmAction::Sample { n, seed, input, output } => {
            if n == 0 {
                return Err(CliError::Validation("--n must be at least 1".into()));
            }
            let outcomes = sample_povm_outcomes(&files::load(&input)?.density()?, n, seed)?;
            let mut w = files::sink(output.as_ref())?;
            writeln!(w, "x0,p0")?;
            for o in outcomes {
                writeln!(w, "{:?},{:?}", o.x0, o.p0)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn analyze(input: &Path) -> CliResult<()> {
    let state = files::load(input)?;
    let mut v = files::metrics_json(&phase_space_stats(&state.wigner()?));
    if let Input::Density(rho) = &state {
        v["density_trace"] = json!(rho.trace());
        v["density_purity"] = json!(rho.purity());
        v["hermiticity_error"] = json!(rho.hermiticity_error());
    }
    files::write_json(None, &v)
}

fn compare(a: &Path, b: &Path) -> CliResult<()> {
    let d = match (files::load(a)?, files::load(b)?) {
        (Input::Density(x), Input::Density(y)) => compare_densities(&x, &y)?,
        (x, y) => compare_fields(x.wigner()?.field(), y.wigner()?.field())?,
    };
    files::write_json(None, &json!({ "l2": d.l2, "linf": d.linf }))
}
