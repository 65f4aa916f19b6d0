use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use obproj_cli::config::{parse_sweep, OSCILLATOR_PULSE_PRESETS};
use obproj_cli::experiments::{series_csv, ExperimentReport, Series};
use obproj_cli::model::{load_model, load_vector};
use obproj_cli::{
    run_custom, run_diffraction, run_oscillators, session, CliResult, ExperimentConfig,
};
use obproj_core::QBasisMaintenance;

#[derive(Parser)]
#[command(
    name = "obproj",
    version,
    about = "Recursive oblique projectors: experiments and scripted sessions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the built-in separation experiments.
    #[command(subcommand)]
    Demo(Demo),
    /// Run the separation pipeline on a model document.
    Run(RunArgs),
    /// Edit a persisted projector state.
    #[command(subcommand)]
    State(StateCmd),
}

#[derive(Args)]
struct Common {
    /// Model order whose recovery is written out.
    #[arg(long)]
    k: Option<usize>,
    /// Grow to HI then downdate to LO, e.g. 40:200.
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<(usize, usize)>,
    #[arg(long)]
    dep_tol: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "obproj-out")]
    out: PathBuf,
    /// Cross-check against the direct pseudo-inverse construction.
    #[arg(long)]
    oracle: bool,
    /// Relative singular value cutoff of the cross-check.
    #[arg(long)]
    oracle_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Demo {
    /// Layer peaks over an exponential background (default sweep 40:200).
    Diffraction {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
        /// Skip the default order sweep.
        #[arg(long, conflicts_with = "sweep")]
        no_sweep: bool,
    },
    /// Damped oscillators under Gaussian sparks; without --pulses both
    /// presets run into separate subdirectories.
    Oscillators {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pulses: Option<usize>,
        /// Spark amplitude scale A (default max |f1|).
        #[arg(long)]
        amplitude: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum StateCmd {
    /// Build a state from a model's complement and atoms.
    Init {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        dep_tol: Option<f64>,
        /// Maintain the residual basis incrementally.
        #[arg(long)]
        incremental: bool,
    },
    /// Append an atom.
    Update {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        vector: PathBuf,
        /// Dual to use if the atom turns out dependent.
        #[arg(long)]
        y: Option<PathBuf>,
        /// Write the new state here instead of in place.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove atom J (1-based).
    Downdate {
        #[arg(long)]
        state: PathBuf,
        j: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove atom J (1-based) and append a new one.
    Replace {
        #[arg(long)]
        state: PathBuf,
        j: usize,
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the projector to a vector; CSV to --out or stdout.
    Apply {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure(mut cfg: ExperimentConfig, c: &Common, out: PathBuf) -> ExperimentConfig {
    if let Some(k) = c.k {
        cfg.k = k;
    }
    if c.sweep.is_some() {
        cfg.k_sweep = c.sweep;
    }
    if let Some(t) = c.dep_tol {
        cfg.dep_tol = t;
    }
    if let Some(t) = c.oracle_tol {
        cfg.oracle_rel_tol = t;
    }
    cfg.oracle = c.oracle;
    cfg.output_dir = Some(out);
    cfg
}

fn print_report(label: &str, report: &ExperimentReport, started: Instant) {
    let fmt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"));
    println!(
        "{label}: k = {}, relative error = {}",
        report.k,
        fmt(report.relative_error)
    );
    let errs: Vec<f64> = report
        .sweep
        .iter()
        .filter_map(|r| r.relative_error)
        .collect();
    if errs.len() > 1 {
        let lo = errs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = errs.iter().cloned().fold(0.0, f64::max);
        println!(
            "  sweep over {} orders: error in [{lo:.3e}, {hi:.3e}]",
            errs.len()
        );
    }
    if let Some(b) = report.background_residual {
        println!("  background residual = {b:.3e}");
    }
    if let Some(o) = &report.oracle {
        println!(
            "  oracle: rank {} of {}, Gram condition {:.3e}, error {}, operator distance {:.3e}",
            o.rank,
            o.k,
            o.gram_condition,
            fmt(o.relative_error),
            o.operator_distance
        );
    }
    println!(
        "  updates {}+{} (independent+dependent), downdates {}+{} (reducing+redundant), condition indicator {}",
        report.counts.independent_updates,
        report.counts.dependent_updates,
        report.counts.reducing_downdates,
        report.counts.redundant_downdates,
        fmt(report.condition_indicator)
    );
    println!("  {:.2} s", started.elapsed().as_secs_f64());
}

fn persist(
    st: &obproj_core::ProjectorState,
    state: &Path,
    out: Option<&PathBuf>,
    report: serde_json::Value,
) -> CliResult<()> {
    session::save_state(out.map_or(state, |p| p.as_path()), st)?;
    println!("{report}");
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Demo(Demo::Diffraction {
            common,
            grid,
            no_sweep,
        }) => {
            let mut cfg = configure(ExperimentConfig::diffraction(), &common, common.out.clone());
            if let Some(g) = grid {
                cfg.grid_points = g;
            }
            if no_sweep {
                cfg.k_sweep = None;
            }
            let t = Instant::now();
            let report = run_diffraction(&cfg)?;
            print_report("diffraction", &report, t);
            println!("  wrote {}", common.out.display());
        }
        Command::Demo(Demo::Oscillators {
            common,
            grid,
            seed,
            pulses,
            amplitude,
        }) => {
            let presets: Vec<(usize, PathBuf)> = match pulses {
                Some(p) => vec![(p, common.out.clone())],
                None => OSCILLATOR_PULSE_PRESETS
                    .iter()
                    .map(|&p| (p, common.out.join(format!("pulses-{p}"))))
                    .collect(),
            };
            for (p, dir) in presets {
                let mut cfg = configure(ExperimentConfig::oscillators(p), &common, dir.clone());
                if let Some(g) = grid {
                    cfg.grid_points = g;
                }
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                cfg.noise_amplitude = amplitude;
                let t = Instant::now();
                let report = run_oscillators(&cfg)?;
                print_report(&format!("oscillators, {p} pulses"), &report, t);
                println!("  wrote {}", dir.display());
            }
        }
        Command::Run(args) => {
            let model = load_model(&args.model)?;
            let mut cfg = ExperimentConfig::custom();
            cfg.k = model.atoms.len();
            let cfg = configure(cfg, &args.common, args.common.out.clone());
            let t = Instant::now();
            let report = run_custom(&model, &cfg)?;
            print_report("custom", &report, t);
            println!("  wrote {}", args.common.out.display());
        }
        Command::State(cmd) => match cmd {
            StateCmd::Init {
                model,
                state,
                dep_tol,
                incremental,
            } => {
                let model = load_model(&model)?;
                let maintenance = if incremental {
                    QBasisMaintenance::Incremental
                } else {
                    QBasisMaintenance::Recompute
                };
                let st = session::init_state(
                    &model,
                    dep_tol.unwrap_or(obproj_core::DEFAULT_DEP_TOL),
                    maintenance,
                )?;
                session::save_state(&state, &st)?;
                println!("{}", session::summary(&st));
            }
            StateCmd::Update {
                state,
                vector,
                y,
                out,
            } => {
                let mut st = session::load_state(&state)?;
                let v = load_vector(&vector, st.space())?;
                let y = y.map(|p| load_vector(&p, st.space())).transpose()?;
                let rep = session::update(&mut st, &v, y.as_ref())?;
                persist(&st, &state, out.as_ref(), rep)?;
            }
            StateCmd::Downdate { state, j, out } => {
                let mut st = session::load_state(&state)?;
                let rep = session::downdate(&mut st, j)?;
                persist(&st, &state, out.as_ref(), rep)?;
            }
            StateCmd::Replace {
                state,
                j,
                vector,
                out,
            } => {
                let mut st = session::load_state(&state)?;
                let v = load_vector(&vector, st.space())?;
                let rep = session::replace(&mut st, j, &v)?;
                persist(&st, &state, out.as_ref(), rep)?;
            }
            StateCmd::Apply { state, vector, out } => {
                let st = session::load_state(&state)?;
                let f = load_vector(&vector, st.space())?;
                let recovered = st.apply(&f)?;
                let x = match st.space().as_grid() {
                    Some(g) => g.nodes().to_vec(),
                    None => (0..st.space().dim()).map(|i| i as f64).collect(),
                };
                let x_name = if st.space().is_euclidean() {
                    "index"
                } else {
                    "x"
                };
                let text = series_csv(&Series {
                    x_name,
                    x,
                    signal: f,
                    truth: None,
                    recovered,
                })?;
                match out {
                    Some(p) => obproj_cli::output::write_text(&p, &text)?,
                    None => print!("{text}"),
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("obproj: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
