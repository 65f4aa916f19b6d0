//! Recursive construction, downdating and replacement of oblique projectors
//! onto the span of a set of atoms along a fixed complementary subspace.
//!
//! The central type is [`ProjectorState`], which keeps a dual family so that
//! `Ê f = Σ v_i ⟨ũ_i, f⟩` is the oblique projector onto `span{v_i}` along
//! `W⊥`. [`oracle::direct_projector`] builds the same operator
//! non-recursively from a Gram pseudo-inverse.

pub mod error;
pub mod oracle;
pub mod persist;
pub mod projector;
pub mod rng;
pub mod signals;
pub mod space;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use oracle::{direct_projector, operator_distance, GramOracleResult};
pub use projector::{
    CaseCounts, DowndateCase, DowndateReport, DualExpansion, ProjectorState, QBasisMaintenance,
    ReplaceReport, UpdateCase, UpdateReport,
};
pub use rng::SplitMix64;
pub use space::{
    inner_product, norm, norm_sq, orthonormalize, project_orthonormal, Grid, Identity,
    LinearOperator, SampledSignal, Space, Zero, DEFAULT_DEP_TOL,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
