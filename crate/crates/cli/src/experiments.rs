//! The separation experiments: grow the projector atom by atom, optionally
//! sweep the order up and back down, and measure recovery of the known
//! component.

use std::path::Path;
use std::sync::Arc;

use obproj_core::oracle::{direct_projector, probe_distance, random_probes};
use obproj_core::signals::{
    diffraction_grid, oscillator_grid, random_spark_noise, DiffractionModel, OscillatorModel,
    SparkNoise,
};
use obproj_core::{norm, CaseCounts, LinearOperator, ProjectorState, SampledSignal, Space};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::model::Model;
use crate::output::{self, Column, Curve};

/// Probes used for operator distances in function spaces.
pub const ORACLE_PROBES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderError {
    pub k: usize,
    pub phase: Phase,
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub k: usize,
    pub rel_tol: f64,
    pub rank: usize,
    pub gram_condition: f64,
    /// Recovery error of the directly constructed projector.
    pub relative_error: Option<f64>,
    /// Frobenius distance (Euclidean) or worst relative probe discrepancy.
    pub operator_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseInfo {
    pub amplitude_rule: String,
    #[serde(flatten)]
    pub draw: SparkNoise,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub x_name: &'static str,
    pub x: Vec<f64>,
    pub signal: SampledSignal,
    pub truth: Option<SampledSignal>,
    pub recovered: SampledSignal,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub k: usize,
    /// `‖Ê f − f_1‖ / ‖f_1‖` at order `k`, when the truth is known.
    pub relative_error: Option<f64>,
    pub sweep: Vec<OrderError>,
    /// `‖Ê f_2‖ / ‖f_2‖` for the pure background, at order `k`.
    pub background_residual: Option<f64>,
    pub oracle: Option<OracleCheck>,
    pub counts: CaseCounts,
    /// Smallest `‖q‖ / ‖u‖` over all independent updates.
    pub condition_indicator: Option<f64>,
    pub noise: Option<NoiseInfo>,
    pub files: Vec<String>,
    #[serde(skip)]
    pub series: Series,
}

pub fn relative_error(estimate: &SampledSignal, truth: &SampledSignal) -> CliResult<f64> {
    Ok(norm(&estimate.sub(truth)?) / norm(truth))
}

struct Sweep {
    at_k: ProjectorState,
    last: ProjectorState,
    records: Vec<OrderError>,
}

/// Updates with atoms `1..=top`, recording errors from `lo` upward, then
/// downdates back to `lo`. `top`/`lo` collapse to `k` without a sweep.
fn sweep_orders(
    mut state: ProjectorState,
    atoms: &[SampledSignal],
    signal: &SampledSignal,
    truth: Option<&SampledSignal>,
    cfg: &ExperimentConfig,
) -> CliResult<Sweep> {
    let (lo, top) = cfg.k_sweep.unwrap_or((cfg.k, cfg.k));
    let record_from = lo.min(cfg.k);
    let error_at = |st: &ProjectorState| -> CliResult<Option<f64>> {
        truth
            .map(|t| relative_error(&st.apply(signal)?, t))
            .transpose()
    };
    let mut records = Vec::new();
    let mut at_k = None;
    for (n, v) in atoms[..top].iter().enumerate() {
        state.update(v, None)?;
        let order = n + 1;
        if order >= record_from {
            records.push(OrderError {
                k: order,
                phase: Phase::Up,
                relative_error: error_at(&state)?,
            });
        }
        if order == cfg.k {
            at_k = Some(state.snapshot());
        }
    }
    for order in (lo..top).rev() {
        state.downdate(order)?;
        records.push(OrderError {
            k: order,
            phase: Phase::Down,
            relative_error: error_at(&state)?,
        });
    }
    Ok(Sweep {
        at_k: at_k.expect("k lies within the sweep"),
        last: state,
        records,
    })
}

fn oracle_check(
    cfg: &ExperimentConfig,
    state: &ProjectorState,
    atoms: &[SampledSignal],
    wperp: &[SampledSignal],
    signal: &SampledSignal,
    truth: Option<&SampledSignal>,
) -> CliResult<OracleCheck> {
    let space = state.space().clone();
    let oracle = direct_projector(space.clone(), atoms, wperp, cfg.oracle_rel_tol)?;
    let operator_distance = if space.is_euclidean() {
        obproj_core::operator_distance(state, &oracle, 0, cfg.seed)?
    } else {
        probe_distance(
            state,
            &oracle,
            &random_probes(&space, ORACLE_PROBES, cfg.seed),
        )?
    };
    Ok(OracleCheck {
        k: atoms.len(),
        rel_tol: cfg.oracle_rel_tol,
        rank: oracle.rank,
        gram_condition: oracle.gram_condition(),
        relative_error: truth
            .map(|t| relative_error(&oracle.apply(signal)?, t))
            .transpose()?,
        operator_distance,
    })
}

fn expect_experiment(cfg: &ExperimentConfig, want: Experiment) -> CliResult<()> {
    cfg.validate()?;
    if cfg.experiment != want {
        return Err(CliError::Config(format!(
            "configuration is for {:?}, not {want:?}",
            cfg.experiment
        )));
    }
    Ok(())
}

fn top_order(cfg: &ExperimentConfig) -> usize {
    cfg.k_sweep.map_or(cfg.k, |(_, hi)| hi)
}

fn grid_nodes(space: &Arc<Space>) -> Vec<f64> {
    space.as_grid().expect("grid space").nodes().to_vec()
}

/// Layer peaks over an exponential background, separated along the
/// background subspace.
pub fn run_diffraction(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    expect_experiment(cfg, Experiment::Diffraction)?;
    let model = DiffractionModel::new(top_order(cfg), diffraction_grid(cfg.grid_points)?)?;
    let space = model.space().clone();
    let (f1, f2) = (model.truth()?, model.background()?);
    let f = f1.add(&f2)?;
    let wperp = model.wperp()?;
    let atoms = model.atoms()?;
    let state = ProjectorState::new(space.clone(), &wperp, cfg.dep_tol)?;
    let sweep = sweep_orders(state, &atoms, &f, Some(&f1), cfg)?;

    let recovered = sweep.at_k.apply(&f)?;
    let background_residual = norm(&sweep.at_k.apply(&f2)?) / norm(&f2);
    let oracle = cfg
        .oracle
        .then(|| oracle_check(cfg, &sweep.at_k, &atoms[..cfg.k], &wperp, &f, Some(&f1)))
        .transpose()?;
    finish(
        cfg,
        sweep,
        Series {
            x_name: "x",
            x: grid_nodes(&space),
            signal: f,
            truth: Some(f1),
            recovered,
        },
        Some(background_residual),
        oracle,
        None,
    )
}

/// Damped modes under random Gaussian sparks, separated along the span of
/// all 400 sparks.
pub fn run_oscillators(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    expect_experiment(cfg, Experiment::Oscillators)?;
    let model = OscillatorModel::new(top_order(cfg), oscillator_grid(cfg.grid_points)?)?;
    let space = model.space().clone();
    let f1 = model.truth()?;
    let (amplitude, amplitude_rule) = match cfg.noise_amplitude {
        Some(a) => (a, format!("uniform in [0.5 A, A], A = {a} (configured)")),
        None => {
            let a = f1.max_abs();
            (a, format!("uniform in [0.5 A, A], A = max|f1| = {a}"))
        }
    };
    let (noise, draw) = random_spark_noise(cfg.pulse_count, cfg.seed, amplitude, &space)?;
    let f = f1.add(&noise)?;
    let wperp = model.wperp()?;
    let atoms = model.atoms()?;
    let state = ProjectorState::new(space.clone(), &wperp, cfg.dep_tol)?;
    let sweep = sweep_orders(state, &atoms, &f, Some(&f1), cfg)?;

    let recovered = sweep.at_k.apply(&f)?;
    let oracle = cfg
        .oracle
        .then(|| oracle_check(cfg, &sweep.at_k, &atoms[..cfg.k], &wperp, &f, Some(&f1)))
        .transpose()?;
    finish(
        cfg,
        sweep,
        Series {
            x_name: "t",
            x: grid_nodes(&space),
            signal: f,
            truth: Some(f1),
            recovered,
        },
        None,
        oracle,
        Some(NoiseInfo {
            amplitude_rule,
            draw,
        }),
    )
}

/// The same pipeline on a user model, using its first `k` atoms. A
/// `dep_tol` in the model takes precedence over the configuration.
pub fn run_custom(model: &Model, cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    expect_experiment(cfg, Experiment::Custom)?;
    if top_order(cfg) > model.atoms.len() {
        return Err(CliError::Config(format!(
            "order {} requested but the model has {} atoms",
            top_order(cfg),
            model.atoms.len()
        )));
    }
    let mut cfg = cfg.clone();
    if let Some(t) = model.dep_tol {
        cfg.dep_tol = t;
    }
    let space = model.space.clone();
    let state = ProjectorState::new(space.clone(), &model.wperp, cfg.dep_tol)?;
    let truth = model.truth.as_ref();
    let sweep = sweep_orders(state, &model.atoms, &model.signal, truth, &cfg)?;
    let recovered = sweep.at_k.apply(&model.signal)?;
    let oracle = cfg
        .oracle
        .then(|| {
            oracle_check(
                &cfg,
                &sweep.at_k,
                &model.atoms[..cfg.k],
                &model.wperp,
                &model.signal,
                truth,
            )
        })
        .transpose()?;
    let (x_name, x) = match space.as_grid() {
        Some(g) => ("x", g.nodes().to_vec()),
        None => ("index", (0..space.dim()).map(|i| i as f64).collect()),
    };
    finish(
        &cfg,
        sweep,
        Series {
            x_name,
            x,
            signal: model.signal.clone(),
            truth: model.truth.clone(),
            recovered,
        },
        None,
        oracle,
        None,
    )
}

fn finish(
    cfg: &ExperimentConfig,
    sweep: Sweep,
    series: Series,
    background_residual: Option<f64>,
    oracle: Option<OracleCheck>,
    noise: Option<NoiseInfo>,
) -> CliResult<ExperimentReport> {
    let relative_error = series
        .truth
        .as_ref()
        .map(|t| relative_error(&series.recovered, t))
        .transpose()?;
    let mut report = ExperimentReport {
        experiment: cfg.experiment,
        k: cfg.k,
        relative_error,
        sweep: sweep.records,
        background_residual,
        oracle,
        counts: sweep.last.counts(),
        condition_indicator: sweep.last.condition_indicator(),
        noise,
        files: Vec::new(),
        series,
    };
    if let Some(dir) = &cfg.output_dir {
        report.files = write_outputs(dir, cfg, &report)?;
    }
    Ok(report)
}

pub const SERIES_CSV: &str = "series.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SERIES_SVG: &str = "series.svg";
pub const SWEEP_SVG: &str = "sweep.svg";
pub const METADATA_JSON: &str = "metadata.json";

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    config: &'a ExperimentConfig,
    report: &'a ExperimentReport,
}

pub fn series_csv(series: &Series) -> CliResult<String> {
    let residual = series.signal.sub(&series.recovered)?;
    let mut cols = vec![Column {
        name: "f",
        signal: &series.signal,
    }];
    if let Some(t) = &series.truth {
        cols.push(Column {
            name: "f1_true",
            signal: t,
        });
    }
    cols.push(Column {
        name: "recovered",
        signal: &series.recovered,
    });
    cols.push(Column {
        name: "residual",
        signal: &residual,
    });
    Ok(output::series_csv(series.x_name, &series.x, &cols))
}

pub fn sweep_csv(records: &[OrderError]) -> String {
    let mut out = String::from("k,phase,relative_error\n");
    for r in records {
        let phase = match r.phase {
            Phase::Up => "up",
            Phase::Down => "down",
        };
        let err = r.relative_error.map_or_else(String::new, output::num);
        out.push_str(&format!("{},{phase},{err}\n", r.k));
    }
    out
}

fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    report: &ExperimentReport,
) -> CliResult<Vec<String>> {
    let s = &report.series;
    let mut files = Vec::new();
    let mut put = |name: &str, text: &str| -> CliResult<()> {
        output::write_text(&dir.join(name), text)?;
        files.push(name.to_string());
        Ok(())
    };
    put(SERIES_CSV, &series_csv(s)?)?;
    put(SWEEP_CSV, &sweep_csv(&report.sweep))?;

    let re = |sig: &SampledSignal| sig.values().iter().map(|z| z.re).collect::<Vec<f64>>();
    let (f, rec) = (re(&s.signal), re(&s.recovered));
    let truth = s.truth.as_ref().map(re);
    let mut curves = vec![Curve {
        label: "f",
        x: &s.x,
        y: &f,
        color: "#888888",
    }];
    if let Some(t) = &truth {
        curves.push(Curve {
            label: "f1 (true)",
            x: &s.x,
            y: t,
            color: "#1f77b4",
        });
    }
    curves.push(Curve {
        label: "recovered",
        x: &s.x,
        y: &rec,
        color: "#d62728",
    });
    let title = format!("{:?} separation, k = {}", cfg.experiment, cfg.k);
    put(
        SERIES_SVG,
        &output::line_plot_svg(&title, s.x_name, "value", &curves, false),
    )?;

    let with_err: Vec<&OrderError> = report
        .sweep
        .iter()
        .filter(|r| r.relative_error.is_some())
        .collect();
    if with_err.len() > 1 {
        let pick = |p: Phase| -> (Vec<f64>, Vec<f64>) {
            with_err
                .iter()
                .filter(|r| r.phase == p)
                .map(|r| (r.k as f64, r.relative_error.unwrap()))
                .unzip()
        };
        let (ux, uy) = pick(Phase::Up);
        let (dx, dy) = pick(Phase::Down);
        let curves = [
            Curve {
                label: "updating",
                x: &ux,
                y: &uy,
                color: "#1f77b4",
            },
            Curve {
                label: "downdating",
                x: &dx,
                y: &dy,
                color: "#d62728",
            },
        ];
        put(
            SWEEP_SVG,
            &output::line_plot_svg(
                "Relative recovery error",
                "k",
                "relative L2 error",
                &curves,
                true,
            ),
        )?;
    }

    files.push(METADATA_JSON.to_string());
    let mut meta_report = report.clone();
    meta_report.files = files.clone();
    output::write_json(
        &dir.join(METADATA_JSON),
        &Metadata {
            tool: "obproj",
            version: env!("CARGO_PKG_VERSION"),
            core_version: obproj_core::VERSION,
            config: cfg,
            report: &meta_report,
        },
    )?;
    Ok(files)
}
