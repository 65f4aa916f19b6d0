//! Scripted adaptive sessions on a persisted projector state. Atom indices
//! here are 1-based.

use std::fs;
use std::path::Path;

use obproj_core::{ProjectorState, QBasisMaintenance, SampledSignal};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::model::Model;
use crate::output;

pub fn init_state(
    model: &Model,
    dep_tol: f64,
    maintenance: QBasisMaintenance,
) -> CliResult<ProjectorState> {
    let dep_tol = model.dep_tol.unwrap_or(dep_tol);
    let mut st = ProjectorState::new(model.space.clone(), &model.wperp, dep_tol)?
        .with_maintenance(maintenance);
    for v in &model.atoms {
        st.update(v, None)?;
    }
    Ok(st)
}

pub fn load_state(path: &Path) -> CliResult<ProjectorState> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ProjectorState::from_json(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        context: "state".into(),
        message: e.to_string(),
    })
}

pub fn save_state(path: &Path, st: &ProjectorState) -> CliResult<()> {
    let mut text = st.to_json()?;
    text.push('\n');
    output::write_text(path, &text)
}

fn to_index(j: usize, st: &ProjectorState) -> CliResult<usize> {
    if j == 0 || j > st.len() {
        return Err(CliError::Config(format!(
            "atom index {j} outside 1..={}",
            st.len()
        )));
    }
    Ok(j - 1)
}

pub fn summary(st: &ProjectorState) -> Value {
    json!({
        "k": st.len(),
        "rank": st.q_basis().len(),
        "wperp_rank": st.wperp_basis().len(),
        "counts": st.counts(),
        "condition_indicator": st.condition_indicator(),
    })
}

pub fn update(
    st: &mut ProjectorState,
    v: &SampledSignal,
    y: Option<&SampledSignal>,
) -> CliResult<Value> {
    let r = st.update(v, y)?;
    Ok(json!({
        "op": "update",
        "case": r.case,
        "index": r.index + 1,
        "residual_ratio": r.residual_ratio,
        "residual_norm": r.residual_norm,
        "state": summary(st),
    }))
}

pub fn downdate(st: &mut ProjectorState, j: usize) -> CliResult<Value> {
    let r = st.downdate(to_index(j, st)?)?;
    Ok(json!({
        "op": "downdate",
        "case": r.case,
        "index": j,
        "s": [r.s.re, r.s.im],
        "state": summary(st),
    }))
}

pub fn replace(st: &mut ProjectorState, j: usize, v: &SampledSignal) -> CliResult<Value> {
    let r = st.replace(to_index(j, st)?, v)?;
    Ok(json!({
        "op": "replace",
        "removed": j,
        "downdate_case": r.downdate.case,
        "s": [r.downdate.s.re, r.downdate.s.im],
        "update_case": r.update.case,
        "index": r.update.index + 1,
        "residual_ratio": r.update.residual_ratio,
        "state": summary(st),
    }))
}
