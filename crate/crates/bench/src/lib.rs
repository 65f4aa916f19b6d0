//! Fixtures shared by the projector benchmarks.

use std::sync::Arc;

use obproj_core::{Complex64, ProjectorState, SampledSignal, Space, SplitMix64, DEFAULT_DEP_TOL};

pub fn random_signals(space: &Arc<Space>, count: usize, seed: u64) -> Vec<SampledSignal> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| {
            let values = (0..space.dim())
                .map(|_| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
                .collect();
            SampledSignal::new(Arc::clone(space), values).expect("length matches space")
        })
        .collect()
}

/// Random Euclidean problem: `k` atoms and an `m`-dimensional complement in
/// dimension `dim`.
pub struct Problem {
    pub space: Arc<Space>,
    pub atoms: Vec<SampledSignal>,
    pub wperp: Vec<SampledSignal>,
}

impl Problem {
    pub fn euclidean(dim: usize, k: usize, m: usize, seed: u64) -> Self {
        assert!(k + m <= dim);
        let space = Space::euclidean(dim);
        let atoms = random_signals(&space, k, seed);
        let wperp = random_signals(&space, m, seed ^ 0x9e37);
        Problem {
            space,
            atoms,
            wperp,
        }
    }

    pub fn empty_state(&self) -> ProjectorState {
        ProjectorState::new(Arc::clone(&self.space), &self.wperp, DEFAULT_DEP_TOL)
            .expect("complement is valid")
    }

    /// State holding all atoms.
    pub fn full_state(&self) -> ProjectorState {
        let mut st = self.empty_state();
        for v in &self.atoms {
            st.update(v, None).expect("atoms are independent");
        }
        st
    }
}
