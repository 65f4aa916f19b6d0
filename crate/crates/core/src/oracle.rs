//! Direct, non-recursive oblique projector `Ê = V (V* P_W V)† V* P_W`,
//! used as ground truth for the recursive construction.
//!
//! The pseudo-inverse lives in the `k × k` Gram representation, so nothing
//! of size `grid × grid` is formed in function spaces. In Euclidean spaces
//! the full projector matrix is assembled as well.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::rng::SplitMix64;
use crate::space::{
    axpy_raw, check_space, dot_raw, norm, orthonormalize, residual, LinearOperator, SampledSignal,
    Space, DEFAULT_DEP_TOL,
};

/// Default cutoff for singular values, relative to the largest one.
pub const DEFAULT_PINV_TOL: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

/// Moore-Penrose pseudo-inverse by SVD along with the singular values
/// (descending) and the numerical rank.
#[derive(Clone, Debug)]
pub struct PseudoInverse {
    pub matrix: CMatrix,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

pub fn pseudo_inverse(m: &CMatrix, rel_tol: f64) -> CMatrix {
    pseudo_inverse_full(m, rel_tol).matrix
}

/// Singular values at or below `rel_tol · σ_max` are treated as zero.
pub fn pseudo_inverse_full(m: &CMatrix, rel_tol: f64) -> PseudoInverse {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return PseudoInverse {
            matrix: CMatrix::zeros(cols, rows),
            singular_values: Vec::new(),
            rank: 0,
        };
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * sigma_max;

    let mut pinv = CMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (i, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            // V Σ⁺ U*: column i of V is conj of row i of V^H.
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            pinv += (vi * ui).map(|z| z / s);
        }
    }
    let mut singular_values: Vec<f64> = sigma.iter().cloned().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    PseudoInverse {
        matrix: pinv,
        singular_values,
        rank,
    }
}

/// The directly constructed projector and its diagnostics.
#[derive(Clone, Debug)]
pub struct GramOracleResult {
    space: Arc<Space>,
    v: Vec<SampledSignal>,
    /// `u_i = v_i − P_{W⊥} v_i`.
    pub u: Vec<SampledSignal>,
    /// `ũ_i = Σ_j conj(g†_ij) u_j`.
    pub duals: Vec<SampledSignal>,
    /// `G_ij = ⟨v_i, u_j⟩`, the matrix of `V* P_W V`.
    pub gram: CMatrix,
    pub gram_pinv: CMatrix,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Dense `dim × dim` matrix; only formed for Euclidean spaces.
    pub projector_matrix: Option<CMatrix>,
}

impl GramOracleResult {
    pub fn atoms(&self) -> &[SampledSignal] {
        &self.v
    }

    /// `σ_max / σ_min` over the retained singular values.
    pub fn gram_condition(&self) -> f64 {
        match (
            self.singular_values.first(),
            self.singular_values.get(self.rank.max(1) - 1),
        ) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }
}

impl LinearOperator for GramOracleResult {
    fn space(&self) -> &Arc<Space> {
        &self.space
    }

    fn apply(&self, f: &SampledSignal) -> Result<SampledSignal> {
        check_space(&self.space, f.space())?;
        let w = self.space.weights();
        let mut out = SampledSignal::zeros(Arc::clone(&self.space));
        for (v, d) in self.v.iter().zip(&self.duals) {
            let c = dot_raw(w, d.values(), f.values());
            axpy_raw(out.values_mut(), c, v.values());
        }
        Ok(out)
    }
}

/// Builds `Ê_{V W⊥}` from the Gram matrix pseudo-inverse. A violated
/// direct-sum condition shows up as a rank drop rather than an error.
pub fn direct_projector(
    space: Arc<Space>,
    v_set: &[SampledSignal],
    wperp_spanning: &[SampledSignal],
    rel_tol: f64,
) -> Result<GramOracleResult> {
    for s in v_set.iter().chain(wperp_spanning) {
        check_space(&space, s.space())?;
    }
    let (wperp_basis, _) = orthonormalize(wperp_spanning, DEFAULT_DEP_TOL)?;
    let u: Vec<SampledSignal> = v_set.iter().map(|v| residual(&wperp_basis, v)).collect();
    let k = v_set.len();
    let w = space.weights();
    let gram = CMatrix::from_fn(k, k, |i, j| dot_raw(w, v_set[i].values(), u[j].values()));
    let pinv = pseudo_inverse_full(&gram, rel_tol);

    let duals: Vec<SampledSignal> = (0..k)
        .map(|i| {
            let mut d = SampledSignal::zeros(Arc::clone(&space));
            for (j, uj) in u.iter().enumerate() {
                axpy_raw(d.values_mut(), pinv.matrix[(i, j)].conj(), uj.values());
            }
            d
        })
        .collect();

    let projector_matrix = space.is_euclidean().then(|| {
        let n = space.dim();
        let mut m = CMatrix::zeros(n, n);
        for (v, d) in v_set.iter().zip(&duals) {
            for c in 0..n {
                let dc = d.values()[c].conj();
                for r in 0..n {
                    m[(r, c)] += v.values()[r] * dc;
                }
            }
        }
        m
    });

    Ok(GramOracleResult {
        space,
        v: v_set.to_vec(),
        u,
        duals,
        gram,
        gram_pinv: pinv.matrix,
        rank: pinv.rank,
        singular_values: pinv.singular_values,
        projector_matrix,
    })
}

/// Matrix of an operator on a Euclidean space, column by column.
pub fn operator_matrix(op: &dyn LinearOperator) -> Result<CMatrix> {
    let space = op.space();
    let n = space.dim();
    let mut m = CMatrix::zeros(n, n);
    for c in 0..n {
        let col = op.apply(&SampledSignal::unit(Arc::clone(space), c)?)?;
        for (r, z) in col.values().iter().enumerate() {
            m[(r, c)] = *z;
        }
    }
    Ok(m)
}

/// Seeded probe signals with entries uniform in `[-1, 1] + i[-1, 1]`.
pub fn random_probes(space: &Arc<Space>, count: usize, seed: u64) -> Vec<SampledSignal> {
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

/// Frobenius distance of the matrices in Euclidean spaces; otherwise the
/// largest relative discrepancy `‖a f − b f‖ / ‖f‖` over seeded probes.
pub fn operator_distance(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    check_space(a.space(), b.space())?;
    if a.space().is_euclidean() {
        let diff = operator_matrix(a)? - operator_matrix(b)?;
        return Ok(diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    probe_distance(a, b, &random_probes(a.space(), probes, seed))
}

/// Largest `‖a f − b f‖ / ‖f‖` over the given probes.
pub fn probe_distance(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    probes: &[SampledSignal],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in probes {
        let nf = norm(f);
        if nf == 0.0 {
            continue;
        }
        let d = norm(&a.apply(f)?.sub(&b.apply(f)?)?);
        worst = worst.max(d / nf);
    }
    Ok(worst)
}
