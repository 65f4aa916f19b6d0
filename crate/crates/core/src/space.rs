//! Inner-product spaces: plain Euclidean coordinates, and functions sampled
//! on a uniform grid with composite trapezoid weights.
//!
//! The inner product is conjugate-linear in its first argument:
//! `⟨f, g⟩ = Σ_p conj(f_p) g_p w_p`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance below which a vector counts as linearly
/// dependent on the ones before it.
pub const DEFAULT_DEP_TOL: f64 = 1e-10;

/// Uniform grid on `[a, b]` carrying composite trapezoid weights.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct GridSpec {
    a: f64,
    b: f64,
    n_points: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.a, spec.b, spec.n_points)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        GridSpec {
            a: grid.a,
            b: grid.b,
            n_points: grid.len(),
        }
    }
}

impl Grid {
    pub fn new(a: f64, b: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidArgument(format!(
                "grid interval [{a}, {b}] must be finite with b > a"
            )));
        }
        let h = (b - a) / (n_points - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_points).map(|i| a + i as f64 * h).collect();
        nodes[n_points - 1] = b;
        let mut weights = vec![h; n_points];
        weights[0] = 0.5 * h;
        weights[n_points - 1] = 0.5 * h;
        Ok(Grid {
            a,
            b,
            nodes,
            weights,
        })
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.len() - 1) as f64
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.len() == other.len()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid([{}, {}], n={})", self.a, self.b, self.len())
    }
}

/// The space a signal belongs to. Signals are combinable only when their
/// spaces compare equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Space {
    Euclidean { dim: usize },
    Grid(Grid),
}

impl Space {
    pub fn euclidean(dim: usize) -> Arc<Space> {
        Arc::new(Space::Euclidean { dim })
    }

    pub fn grid(grid: Grid) -> Arc<Space> {
        Arc::new(Space::Grid(grid))
    }

    pub fn dim(&self) -> usize {
        match self {
            Space::Euclidean { dim } => *dim,
            Space::Grid(g) => g.len(),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Space::Euclidean { .. })
    }

    /// Quadrature weights, or `None` for unit weights.
    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            Space::Euclidean { .. } => None,
            Space::Grid(g) => Some(g.weights()),
        }
    }

    pub fn as_grid(&self) -> Option<&Grid> {
        match self {
            Space::Grid(g) => Some(g),
            Space::Euclidean { .. } => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            Space::Euclidean { dim } => format!("euclidean(dim={dim})"),
            Space::Grid(g) => format!("{g:?}"),
        }
    }
}

pub(crate) fn same_space(a: &Arc<Space>, b: &Arc<Space>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_space(a: &Arc<Space>, b: &Arc<Space>) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: a.describe(),
            right: b.describe(),
        })
    }
}

/// A vector of the working space: complex samples bound to a [`Space`].
#[derive(Clone, Debug)]
pub struct SampledSignal {
    values: Vec<Complex64>,
    space: Arc<Space>,
}

impl PartialEq for SampledSignal {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.values == other.values
    }
}

impl SampledSignal {
    pub fn new(space: Arc<Space>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != space.dim() {
            return Err(Error::LengthMismatch {
                expected: space.dim(),
                actual: values.len(),
            });
        }
        Ok(SampledSignal { values, space })
    }

    pub fn from_real(space: Arc<Space>, values: &[f64]) -> Result<Self> {
        Self::new(
            space,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(space: Arc<Space>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); space.dim()];
        SampledSignal { values, space }
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn unit(space: Arc<Space>, i: usize) -> Result<Self> {
        let dim = space.dim();
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, len: dim });
        }
        let mut s = Self::zeros(space);
        s.values[i] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Samples a real function at the grid nodes.
    pub fn sample(grid: &Arc<Space>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let g = grid
            .as_grid()
            .ok_or_else(|| Error::InvalidArgument("sampling needs a grid space".into()))?;
        let values = g
            .nodes()
            .iter()
            .map(|&x| Complex64::new(f(x), 0.0))
            .collect();
        Ok(SampledSignal {
            values,
            space: Arc::clone(grid),
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        SampledSignal {
            values: self.values.iter().map(|&z| alpha * z).collect(),
            space: Arc::clone(&self.space),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Complex64, other: &SampledSignal) -> Result<()> {
        check_space(&self.space, &other.space)?;
        axpy_raw(&mut self.values, alpha, &other.values);
        Ok(())
    }

    pub fn add(&self, other: &SampledSignal) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SampledSignal) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn axpy_raw(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn dot_raw(weights: Option<&[f64]>, f: &[Complex64], g: &[Complex64]) -> Complex64 {
    match weights {
        None => f.iter().zip(g).map(|(a, b)| a.conj() * b).sum(),
        Some(w) => f
            .iter()
            .zip(g)
            .zip(w)
            .map(|((a, b), &wp)| a.conj() * b * wp)
            .sum(),
    }
}

/// `⟨f, g⟩`, conjugate-linear in `f`.
pub fn inner_product(f: &SampledSignal, g: &SampledSignal) -> Result<Complex64> {
    check_space(&f.space, &g.space)?;
    Ok(dot_raw(f.space.weights(), &f.values, &g.values))
}

/// `‖f‖²`, accumulated directly as a real sum so no imaginary residue appears.
pub fn norm_sq(f: &SampledSignal) -> f64 {
    match f.space.weights() {
        None => f.values.iter().map(|z| z.norm_sqr()).sum(),
        Some(w) => f
            .values
            .iter()
            .zip(w)
            .map(|(z, &wp)| z.norm_sqr() * wp)
            .sum(),
    }
}

pub fn norm(f: &SampledSignal) -> f64 {
    norm_sq(f).sqrt()
}

/// Removes from `f` its components along the orthonormal `basis`, in place
/// (modified Gram-Schmidt order).
pub(crate) fn deflate(basis: &[SampledSignal], f: &mut SampledSignal) {
    let w = f.space.weights();
    for b in basis {
        let c = dot_raw(w, &b.values, &f.values);
        axpy_raw(&mut f.values, -c, &b.values);
    }
}

/// Residual of `f` against an orthonormal basis, with one reorthogonalization
/// pass.
pub(crate) fn residual(basis: &[SampledSignal], f: &SampledSignal) -> SampledSignal {
    residual_beyond(&[], basis, f)
}

/// Residual of `f` against the union of two mutually orthogonal orthonormal
/// bases, with one reorthogonalization pass over both.
pub(crate) fn residual_beyond(
    fixed: &[SampledSignal],
    basis: &[SampledSignal],
    f: &SampledSignal,
) -> SampledSignal {
    let mut r = f.clone();
    for _ in 0..2 {
        deflate(fixed, &mut r);
        deflate(basis, &mut r);
    }
    r
}

/// Orthonormalizes `vectors` by modified Gram-Schmidt with one
/// reorthogonalization pass. A vector whose residual norm is at most
/// `tol * (its own norm)` is dropped. Returns the basis and its size.
pub fn orthonormalize(vectors: &[SampledSignal], tol: f64) -> Result<(Vec<SampledSignal>, usize)> {
    let mut basis: Vec<SampledSignal> = Vec::with_capacity(vectors.len());
    let Some(first) = vectors.first() else {
        return Ok((basis, 0));
    };
    for v in vectors {
        check_space(&first.space, &v.space)?;
    }
    for v in vectors {
        extend_basis(&mut basis, v, tol);
    }
    let rank = basis.len();
    Ok((basis, rank))
}

/// Appends the normalized residual of `v` to `basis` if `v` is independent
/// of it. Returns the relative residual `‖r‖ / ‖v‖` (0 for a zero vector).
pub(crate) fn extend_basis(basis: &mut Vec<SampledSignal>, v: &SampledSignal, tol: f64) -> f64 {
    extend_basis_beyond(&[], basis, v, tol)
}

/// As [`extend_basis`], but the residual is also taken against `fixed`,
/// which must be orthonormal and orthogonal to `basis`.
pub(crate) fn extend_basis_beyond(
    fixed: &[SampledSignal],
    basis: &mut Vec<SampledSignal>,
    v: &SampledSignal,
    tol: f64,
) -> f64 {
    let own = norm(v);
    if own == 0.0 {
        return 0.0;
    }
    let r = residual_beyond(fixed, basis, v);
    let rn = norm(&r);
    let rel = rn / own;
    if rel > tol {
        basis.push(r.scaled(Complex64::new(1.0 / rn, 0.0)));
    }
    rel
}

/// `Σ_i b_i ⟨b_i, f⟩` for an orthonormal basis (caller guarantee).
pub fn project_orthonormal(basis: &[SampledSignal], f: &SampledSignal) -> Result<SampledSignal> {
    let mut out = SampledSignal::zeros(Arc::clone(&f.space));
    let w = f.space.weights();
    for b in basis {
        check_space(&b.space, &f.space)?;
        let c = dot_raw(w, &b.values, &f.values);
        axpy_raw(&mut out.values, c, &b.values);
    }
    Ok(out)
}

/// A linear map of a space into itself.
pub trait LinearOperator {
    fn space(&self) -> &Arc<Space>;
    fn apply(&self, f: &SampledSignal) -> Result<SampledSignal>;
}

/// The identity map, mostly useful as a reference in distance checks.
pub struct Identity(pub Arc<Space>);

impl LinearOperator for Identity {
    fn space(&self) -> &Arc<Space> {
        &self.0
    }

    fn apply(&self, f: &SampledSignal) -> Result<SampledSignal> {
        check_space(&self.0, &f.space)?;
        Ok(f.clone())
    }
}

/// The zero map.
pub struct Zero(pub Arc<Space>);

impl LinearOperator for Zero {
    fn space(&self) -> &Arc<Space> {
        &self.0
    }

    fn apply(&self, f: &SampledSignal) -> Result<SampledSignal> {
        check_space(&self.0, &f.space)?;
        Ok(SampledSignal::zeros(Arc::clone(&self.0)))
    }
}
