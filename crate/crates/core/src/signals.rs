//! Signal families for the two separation experiments.
//!
//! * Diffraction: layer atoms `I_n(x) = sin²(nx)/sin²(x)` on `[π/2, 3π/2]`
//!   over an exponential background spanned by `e^{−j(x−π/2)}`, `j = 1..3`.
//! * Oscillators: damped modes `e^{−t} cos(πnt)` on `[0, 1]` corrupted by
//!   Gaussian sparks `e^{−100000 (t − 0.0025 j)²}`, `j = 1..400`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::space::{Grid, SampledSignal, Space};

/// Number of layer atoms in the simulated diffraction figure.
pub const DIFFRACTION_TERMS: usize = 60;
/// Number of oscillator modes in the simulated motion.
pub const OSCILLATOR_TERMS: usize = 100;
pub const SPARK_COUNT: usize = 400;
pub const SPARK_SPACING: f64 = 0.0025;
pub const SPARK_SHARPNESS: f64 = 100_000.0;

const SINGULARITY_EPS: f64 = 1e-8;

pub fn diffraction_grid(n_points: usize) -> Result<Grid> {
    Grid::new(FRAC_PI_2, 1.5 * PI, n_points)
}

pub fn oscillator_grid(n_points: usize) -> Result<Grid> {
    Grid::new(0.0, 1.0, n_points)
}

fn grid_of(space: &Arc<Space>) -> Result<&Grid> {
    space
        .as_grid()
        .ok_or_else(|| Error::InvalidArgument("signal families are defined on grids".into()))
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument(
            "atom order must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// `sin²(nx)/sin²(x)`, with the limit `n²` where `sin x` vanishes.
pub fn layer_intensity(n: usize, x: f64) -> f64 {
    let s = x.sin();
    if s.abs() < SINGULARITY_EPS {
        (n * n) as f64
    } else {
        let sn = (n as f64 * x).sin();
        sn * sn / (s * s)
    }
}

pub fn diffraction_atom(n: usize, space: &Arc<Space>) -> Result<SampledSignal> {
    check_order(n)?;
    grid_of(space)?;
    SampledSignal::sample(space, |x| layer_intensity(n, x))
}

/// `c_n = e^{−0.05(n−7)²} + 0.2 e^{−0.1(n−35)²}`.
pub fn diffraction_coefficient(n: usize) -> f64 {
    let n = n as f64;
    (-0.05 * (n - 7.0).powi(2)).exp() + 0.2 * (-0.1 * (n - 35.0).powi(2)).exp()
}

/// `f_1(x) = Σ_{n=1}^{60} c_n I_n(x)`.
pub fn diffraction_truth(space: &Arc<Space>) -> Result<SampledSignal> {
    grid_of(space)?;
    SampledSignal::sample(space, |x| {
        (1..=DIFFRACTION_TERMS)
            .map(|n| diffraction_coefficient(n) * layer_intensity(n, x))
            .sum()
    })
}

/// `f_2(x) = 50 Σ_{j=1}^{3} j e^{−j(x−π/2)}`.
pub fn diffraction_background(space: &Arc<Space>) -> Result<SampledSignal> {
    grid_of(space)?;
    SampledSignal::sample(space, |x| {
        50.0 * (1..=3)
            .map(|j| j as f64 * (-(j as f64) * (x - FRAC_PI_2)).exp())
            .sum::<f64>()
    })
}

/// Spanning set `e^{−j(x−π/2)}`, `j = 1..3`, of the background subspace.
pub fn wperp_diffraction(space: &Arc<Space>) -> Result<Vec<SampledSignal>> {
    grid_of(space)?;
    (1..=3)
        .map(|j| SampledSignal::sample(space, |x| (-(j as f64) * (x - FRAC_PI_2)).exp()))
        .collect()
}

/// `x_n(t) = e^{−t} cos(πnt)`.
pub fn oscillator_atom(n: usize, space: &Arc<Space>) -> Result<SampledSignal> {
    check_order(n)?;
    grid_of(space)?;
    SampledSignal::sample(space, |t| (-t).exp() * (PI * n as f64 * t).cos())
}

/// `c_n = 1 / (1 + 0.7 (n − 75)²)`.
pub fn oscillator_coefficient(n: usize) -> f64 {
    1.0 / (1.0 + 0.7 * (n as f64 - 75.0).powi(2))
}

/// `f_1(t) = Σ_{n=1}^{100} c_n e^{−t} cos(πnt)`.
pub fn oscillator_truth(space: &Arc<Space>) -> Result<SampledSignal> {
    grid_of(space)?;
    SampledSignal::sample(space, |t| {
        let damp = (-t).exp();
        (1..=OSCILLATOR_TERMS)
            .map(|n| oscillator_coefficient(n) * damp * (PI * n as f64 * t).cos())
            .sum()
    })
}

/// `p_j(t) = e^{−100000 (t − 0.0025 j)²}`.
pub fn spark(j: usize, t: f64) -> f64 {
    let d = t - SPARK_SPACING * j as f64;
    (-SPARK_SHARPNESS * d * d).exp()
}

/// All 400 pulses, `j = 1..400` in order.
pub fn spark_atoms(space: &Arc<Space>) -> Result<Vec<SampledSignal>> {
    grid_of(space)?;
    (1..=SPARK_COUNT)
        .map(|j| SampledSignal::sample(space, |t| spark(j, t)))
        .collect()
}

fn check_endpoints(grid: &Grid, a: f64, b: f64) -> Result<()> {
    if (grid.start() - a).abs() > 1e-12 || (grid.end() - b).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "grid must span [{a}, {b}], got [{}, {}]",
            grid.start(),
            grid.end()
        )));
    }
    Ok(())
}

fn check_k_max(k_max: usize) -> Result<()> {
    if k_max == 0 {
        return Err(Error::InvalidArgument(
            "model order must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Layer atoms `n = 1..=k_max` over the exponential background.
#[derive(Clone, Debug)]
pub struct DiffractionModel {
    pub k_max: usize,
    space: Arc<Space>,
}

impl DiffractionModel {
    /// `k_max` may exceed the 60 atoms present in the truth.
    pub fn new(k_max: usize, grid: Grid) -> Result<Self> {
        check_k_max(k_max)?;
        check_endpoints(&grid, FRAC_PI_2, 1.5 * PI)?;
        Ok(DiffractionModel {
            k_max,
            space: Space::grid(grid),
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn atom(&self, n: usize) -> Result<SampledSignal> {
        diffraction_atom(n, &self.space)
    }

    pub fn atoms(&self) -> Result<Vec<SampledSignal>> {
        (1..=self.k_max).map(|n| self.atom(n)).collect()
    }

    pub fn truth(&self) -> Result<SampledSignal> {
        diffraction_truth(&self.space)
    }

    pub fn background(&self) -> Result<SampledSignal> {
        diffraction_background(&self.space)
    }

    pub fn wperp(&self) -> Result<Vec<SampledSignal>> {
        wperp_diffraction(&self.space)
    }
}

/// Damped modes `n = 1..=k_max` along the spark subspace.
#[derive(Clone, Debug)]
pub struct OscillatorModel {
    pub k_max: usize,
    space: Arc<Space>,
}

impl OscillatorModel {
    pub fn new(k_max: usize, grid: Grid) -> Result<Self> {
        check_k_max(k_max)?;
        check_endpoints(&grid, 0.0, 1.0)?;
        Ok(OscillatorModel {
            k_max,
            space: Space::grid(grid),
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn atom(&self, n: usize) -> Result<SampledSignal> {
        oscillator_atom(n, &self.space)
    }

    pub fn atoms(&self) -> Result<Vec<SampledSignal>> {
        (1..=self.k_max).map(|n| self.atom(n)).collect()
    }

    pub fn truth(&self) -> Result<SampledSignal> {
        oscillator_truth(&self.space)
    }

    pub fn wperp(&self) -> Result<Vec<SampledSignal>> {
        spark_atoms(&self.space)
    }
}

/// A drawn superposition of distinct sparks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparkNoise {
    pub pulse_count: usize,
    pub seed: u64,
    /// Amplitudes are uniform in `[0.5 · amplitude, amplitude]`.
    pub amplitude: f64,
    /// Selected pulse indices in `1..=400`, in draw order.
    pub indices: Vec<usize>,
    pub amplitudes: Vec<f64>,
}

impl SparkNoise {
    /// Draws `pulse_count` distinct pulse indices with a partial
    /// Fisher-Yates shuffle of `1..=400`, then one amplitude per pulse.
    pub fn draw(pulse_count: usize, seed: u64, amplitude: f64) -> Result<Self> {
        if pulse_count > SPARK_COUNT {
            return Err(Error::InvalidArgument(format!(
                "at most {SPARK_COUNT} pulses are available, asked for {pulse_count}"
            )));
        }
        let mut rng = SplitMix64::new(seed);
        let mut pool: Vec<usize> = (1..=SPARK_COUNT).collect();
        for i in 0..pulse_count {
            let pick = i + rng.below((SPARK_COUNT - i) as u64) as usize;
            pool.swap(i, pick);
        }
        pool.truncate(pulse_count);
        let amplitudes = (0..pulse_count)
            .map(|_| rng.uniform(0.5 * amplitude, amplitude))
            .collect();
        Ok(SparkNoise {
            pulse_count,
            seed,
            amplitude,
            indices: pool,
            amplitudes,
        })
    }

    pub fn sample(&self, space: &Arc<Space>) -> Result<SampledSignal> {
        let grid = grid_of(space)?;
        let values = grid
            .nodes()
            .iter()
            .map(|&t| {
                let v: f64 = self
                    .indices
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(&j, &a)| a * spark(j, t))
                    .sum();
                Complex64::new(v, 0.0)
            })
            .collect();
        SampledSignal::new(Arc::clone(space), values)
    }
}

/// Random superposition of `count` distinct sparks; see [`SparkNoise::draw`].
pub fn random_spark_noise(
    count: usize,
    seed: u64,
    amplitude: f64,
    space: &Arc<Space>,
) -> Result<(SampledSignal, SparkNoise)> {
    let noise = SparkNoise::draw(count, seed, amplitude)?;
    Ok((noise.sample(space)?, noise))
}
