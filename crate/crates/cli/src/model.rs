//! User-supplied model documents:
//!
//! ```json
//! {
//!   "space": {"kind": "grid", "a": 0.0, "b": 1.0, "n_points": 5},
//!   "signal": [1, 2, 3, 4, 5],
//!   "atoms": [[1, 0, 0, 0, 0], {"re": [0, 1, 0, 0, 0], "im": [0, 0, 1, 0, 0]}],
//!   "wperp": [[1, 1, 1, 1, 1]],
//!   "truth": [0, 2, 3, 0, 0],
//!   "dep_tol": 1e-10
//! }
//! ```
//!
//! `space` may also be `{"kind": "euclidean", "dim": N}`. Vectors are real
//! arrays or `{re, im}` pairs. `wperp`, `truth` and `dep_tol` are optional.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use obproj_core::{Complex64, SampledSignal, Space};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum VectorInput {
    Real(Vec<f64>),
    Complex { re: Vec<f64>, im: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    space: Space,
    signal: VectorInput,
    atoms: Vec<VectorInput>,
    #[serde(default)]
    wperp: Vec<VectorInput>,
    #[serde(default)]
    truth: Option<VectorInput>,
    #[serde(default)]
    dep_tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub space: Arc<Space>,
    pub signal: SampledSignal,
    pub atoms: Vec<SampledSignal>,
    pub wperp: Vec<SampledSignal>,
    pub truth: Option<SampledSignal>,
    pub dep_tol: Option<f64>,
}

fn input_error(path: &Path, context: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        context: context.into(),
        message: message.into(),
    }
}

fn syntax_error(path: &Path, e: serde_json::Error) -> CliError {
    input_error(
        path,
        format!("line {}, column {}", e.line(), e.column()),
        e.to_string(),
    )
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

impl VectorInput {
    pub fn to_signal(
        &self,
        space: &Arc<Space>,
        path: &Path,
        field: &str,
    ) -> CliResult<SampledSignal> {
        let n = space.dim();
        let values: Vec<Complex64> = match self {
            VectorInput::Real(re) => {
                if re.len() != n {
                    return Err(input_error(
                        path,
                        field,
                        format!("expected {n} values, got {}", re.len()),
                    ));
                }
                re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
            }
            VectorInput::Complex { re, im } => {
                if re.len() != n || im.len() != n {
                    return Err(input_error(
                        path,
                        field,
                        format!(
                            "expected {n} values in re and im, got {} and {}",
                            re.len(),
                            im.len()
                        ),
                    ));
                }
                re.iter()
                    .zip(im)
                    .map(|(&a, &b)| Complex64::new(a, b))
                    .collect()
            }
        };
        if let Some(p) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(input_error(
                path,
                format!("{field}[{p}]"),
                "non-finite value",
            ));
        }
        Ok(SampledSignal::new(Arc::clone(space), values)?)
    }
}

pub fn parse_model(text: &str, path: &Path) -> CliResult<Model> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| syntax_error(path, e))?;
    let space = Arc::new(doc.space);
    if space.dim() == 0 {
        return Err(input_error(path, "space", "dimension must be positive"));
    }
    let list = |items: &[VectorInput], name: &str| -> CliResult<Vec<SampledSignal>> {
        items
            .iter()
            .enumerate()
            .map(|(i, v)| v.to_signal(&space, path, &format!("{name}[{i}]")))
            .collect()
    };
    let atoms = list(&doc.atoms, "atoms")?;
    if atoms.is_empty() {
        return Err(input_error(path, "atoms", "at least one atom is required"));
    }
    if let Some(t) = doc.dep_tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(input_error(
                path,
                "dep_tol",
                format!("must lie in (0, 1), got {t}"),
            ));
        }
    }
    Ok(Model {
        signal: doc.signal.to_signal(&space, path, "signal")?,
        wperp: list(&doc.wperp, "wperp")?,
        truth: doc
            .truth
            .as_ref()
            .map(|t| t.to_signal(&space, path, "truth"))
            .transpose()?,
        dep_tol: doc.dep_tol,
        atoms,
        space,
    })
}

pub fn load_model(path: &Path) -> CliResult<Model> {
    parse_model(&read(path)?, path)
}

/// A single vector document (array or `{re, im}`) in the given space.
pub fn load_vector(path: &Path, space: &Arc<Space>) -> CliResult<SampledSignal> {
    let v: VectorInput = serde_json::from_str(&read(path)?).map_err(|e| syntax_error(path, e))?;
    v.to_signal(space, path, "vector")
}
