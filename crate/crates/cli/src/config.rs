use std::path::PathBuf;

use obproj_core::oracle::DEFAULT_PINV_TOL;
use obproj_core::DEFAULT_DEP_TOL;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_GRID_POINTS: usize = 2048;
pub const MIN_GRID_POINTS: usize = 64;
pub const DIFFRACTION_K: usize = 50;
pub const DIFFRACTION_SWEEP: (usize, usize) = (40, 200);
pub const OSCILLATOR_K: usize = 100;
pub const OSCILLATOR_PULSE_PRESETS: [usize; 2] = [50, 200];
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Diffraction,
    Oscillators,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid_points: usize,
    /// Model order whose recovery is written out.
    pub k: usize,
    /// Grow to `hi`, then downdate to `lo`, recording the error at every
    /// visited order.
    pub k_sweep: Option<(usize, usize)>,
    pub seed: u64,
    pub pulse_count: usize,
    /// Spark amplitude scale `A`; `None` means `A = max |f_1|`.
    pub noise_amplitude: Option<f64>,
    pub dep_tol: f64,
    /// Cross-check against the Gram pseudo-inverse construction.
    pub oracle: bool,
    pub oracle_rel_tol: f64,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn diffraction() -> Self {
        ExperimentConfig {
            experiment: Experiment::Diffraction,
            grid_points: DEFAULT_GRID_POINTS,
            k: DIFFRACTION_K,
            k_sweep: Some(DIFFRACTION_SWEEP),
            seed: DEFAULT_SEED,
            pulse_count: 0,
            noise_amplitude: None,
            dep_tol: DEFAULT_DEP_TOL,
            oracle: false,
            oracle_rel_tol: DEFAULT_PINV_TOL,
            output_dir: None,
        }
    }

    pub fn oscillators(pulse_count: usize) -> Self {
        ExperimentConfig {
            experiment: Experiment::Oscillators,
            k: OSCILLATOR_K,
            k_sweep: None,
            pulse_count,
            ..Self::diffraction()
        }
    }

    pub fn custom() -> Self {
        ExperimentConfig {
            experiment: Experiment::Custom,
            k_sweep: None,
            ..Self::diffraction()
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if self.experiment != Experiment::Custom && self.grid_points < MIN_GRID_POINTS {
            return fail(format!(
                "grid must have at least {MIN_GRID_POINTS} points, got {}",
                self.grid_points
            ));
        }
        if let Some((lo, hi)) = self.k_sweep {
            if lo == 0 || lo > hi {
                return fail(format!("sweep {lo}:{hi} must satisfy 1 <= lo <= hi"));
            }
            if self.k > hi {
                return fail(format!("k = {} lies above the sweep top {hi}", self.k));
            }
        }
        if !(self.dep_tol > 0.0 && self.dep_tol < 1.0) {
            return fail(format!("dep_tol must lie in (0, 1), got {}", self.dep_tol));
        }
        if !(self.oracle_rel_tol >= 0.0 && self.oracle_rel_tol < 1.0) {
            return fail(format!(
                "oracle rel_tol must lie in [0, 1), got {}",
                self.oracle_rel_tol
            ));
        }
        if self.pulse_count > obproj_core::signals::SPARK_COUNT {
            return fail(format!(
                "at most {} pulses exist, got {}",
                obproj_core::signals::SPARK_COUNT,
                self.pulse_count
            ));
        }
        if let Some(a) = self.noise_amplitude {
            if !(a.is_finite() && a >= 0.0) {
                return fail(format!("noise amplitude must be finite and >= 0, got {a}"));
            }
        }
        Ok(())
    }
}

/// Parses `LO:HI`.
pub fn parse_sweep(text: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {text:?}"))?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad LO in {text:?}: {e}"))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad HI in {text:?}: {e}"))?;
    Ok((lo, hi))
}
