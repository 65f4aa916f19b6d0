//! Self-describing JSON form of a [`ProjectorState`].
//!
//! Every vector is stored as separate `re` / `im` number lists. Floats are
//! written in shortest round-trip form (at most 17 significant digits), so
//! `from_json(to_json(s))` reproduces every sample bit for bit.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projector::{CaseCounts, ProjectorState, QBasisMaintenance, StateParts};
use crate::space::{SampledSignal, Space};

pub const STATE_FORMAT: &str = "obproj-state";
pub const STATE_VERSION: u32 = 1;

/// Split real/imaginary representation of a signal's samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorDoc {
    pub fn from_signal(s: &SampledSignal) -> Self {
        VectorDoc {
            re: s.values().iter().map(|z| z.re).collect(),
            im: s.values().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_signal(&self, space: &Arc<Space>) -> Result<SampledSignal> {
        if self.re.len() != self.im.len() {
            return Err(Error::Format(format!(
                "re has {} entries but im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        let values = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        SampledSignal::new(Arc::clone(space), values)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StateDoc {
    format: String,
    version: u32,
    space: Space,
    dep_tol: f64,
    maintenance: QBasisMaintenance,
    #[serde(default)]
    condition_indicator: Option<f64>,
    #[serde(default)]
    counts: CaseCounts,
    wperp_basis: Vec<VectorDoc>,
    v: Vec<VectorDoc>,
    u: Vec<VectorDoc>,
    duals: Vec<VectorDoc>,
    q_basis: Vec<VectorDoc>,
    #[serde(default)]
    q_owner: Vec<usize>,
}

fn decode(field: &str, docs: &[VectorDoc], space: &Arc<Space>) -> Result<Vec<SampledSignal>> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| {
            d.to_signal(space)
                .map_err(|e| Error::Format(format!("{field}[{i}]: {e}")))
        })
        .collect()
}

fn encode(signals: &[SampledSignal]) -> Vec<VectorDoc> {
    signals.iter().map(VectorDoc::from_signal).collect()
}

impl ProjectorState {
    pub fn to_json(&self) -> Result<String> {
        let p = self.to_parts();
        let doc = StateDoc {
            format: STATE_FORMAT.into(),
            version: STATE_VERSION,
            space: (*p.space).clone(),
            dep_tol: p.dep_tol,
            maintenance: p.maintenance,
            condition_indicator: p.min_residual_ratio,
            counts: p.counts,
            wperp_basis: encode(&p.wperp_basis),
            v: encode(&p.v),
            u: encode(&p.u),
            duals: encode(&p.duals),
            q_basis: encode(&p.q_basis),
            q_owner: p.q_owner,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StateDoc = serde_json::from_str(text)?;
        if doc.format != STATE_FORMAT {
            return Err(Error::Format(format!(
                "format is {:?}, expected {STATE_FORMAT:?}",
                doc.format
            )));
        }
        if doc.version != STATE_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        if !(doc.dep_tol > 0.0) {
            return Err(Error::Format(format!(
                "dep_tol must be positive, got {}",
                doc.dep_tol
            )));
        }
        let space = Arc::new(doc.space);
        ProjectorState::from_parts(StateParts {
            wperp_basis: decode("wperp_basis", &doc.wperp_basis, &space)?,
            v: decode("v", &doc.v, &space)?,
            u: decode("u", &doc.u, &space)?,
            duals: decode("duals", &doc.duals, &space)?,
            q_basis: decode("q_basis", &doc.q_basis, &space)?,
            q_owner: doc.q_owner,
            dep_tol: doc.dep_tol,
            maintenance: doc.maintenance,
            min_residual_ratio: doc.condition_indicator,
            counts: doc.counts,
            space,
        })
    }
}
