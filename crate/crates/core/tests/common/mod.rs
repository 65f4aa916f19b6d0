//! Random instances and dense-matrix oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use obproj_core::{Complex64, Grid, SampledSignal, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMatrix = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_signal(space: &Arc<Space>, rng: &mut ChaCha8Rng, complex: bool) -> SampledSignal {
    let values = (0..space.dim())
        .map(|_| {
            let im = if complex {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            c(rng.gen_range(-1.0..1.0), im)
        })
        .collect();
    SampledSignal::new(Arc::clone(space), values).unwrap()
}

/// Smooth random function on a grid: a short random cosine series.
pub fn random_smooth(space: &Arc<Space>, rng: &mut ChaCha8Rng, terms: usize) -> SampledSignal {
    let g = space.as_grid().unwrap();
    let (a, b) = (g.start(), g.end());
    let coeffs: Vec<(f64, f64, f64)> = (0..terms)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..6.0),
            )
        })
        .collect();
    let values = g
        .nodes()
        .iter()
        .map(|&x| {
            let s = (x - a) / (b - a);
            let mut z = c(0.0, 0.0);
            for &(re, im, freq) in &coeffs {
                let phase = std::f64::consts::PI * freq * s;
                z += c(re, im) * phase.cos();
            }
            z
        })
        .collect();
    SampledSignal::new(Arc::clone(space), values).unwrap()
}

pub struct Instance {
    pub space: Arc<Space>,
    pub atoms: Vec<SampledSignal>,
    pub wperp: Vec<SampledSignal>,
}

/// Random Euclidean instance with `k + m ≤ dim`, so that atoms and the
/// complement are independent with probability one.
pub fn euclidean_instance(rng: &mut ChaCha8Rng, complex: bool) -> Instance {
    let dim = rng.gen_range(2..=30);
    let k = rng.gen_range(1..=10.min(dim - 1));
    let m = rng.gen_range(0..=10.min(dim - k));
    let space = Space::euclidean(dim);
    let atoms = (0..k)
        .map(|_| random_signal(&space, rng, complex))
        .collect();
    let wperp = (0..m)
        .map(|_| random_signal(&space, rng, complex))
        .collect();
    Instance {
        space,
        atoms,
        wperp,
    }
}

pub fn grid_instance(rng: &mut ChaCha8Rng, n_points: usize) -> Instance {
    let space = Space::grid(Grid::new(0.0, 1.0, n_points).unwrap());
    let k = rng.gen_range(1..=8);
    let m = rng.gen_range(0..=4);
    let atoms = (0..k).map(|_| random_signal(&space, rng, true)).collect();
    let wperp = (0..m).map(|_| random_signal(&space, rng, true)).collect();
    Instance {
        space,
        atoms,
        wperp,
    }
}

pub fn column_matrix(vectors: &[SampledSignal], rows: usize) -> CMatrix {
    CMatrix::from_fn(rows, vectors.len(), |r, col| vectors[col].values()[r])
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n, n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
            .unwrap();
        a.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let p = a[(col, col)];
        assert!(p.norm() > 0.0, "singular matrix");
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[(r, col)];
                if f != c(0.0, 0.0) {
                    for j in 0..n {
                        let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                        a[(r, j)] -= f * ac;
                        inv[(r, j)] -= f * ic;
                    }
                }
            }
        }
    }
    inv
}

/// Oblique projector `V (X* V)⁻¹ X*` with `X` the W-components, formed
/// with explicit matrices in a Euclidean space.
pub fn dense_oblique(atoms: &[SampledSignal], wperp: &[SampledSignal], dim: usize) -> CMatrix {
    let v = column_matrix(atoms, dim);
    let p_w = if wperp.is_empty() {
        CMatrix::identity(dim, dim)
    } else {
        let w = column_matrix(wperp, dim);
        let gram = w.adjoint() * &w;
        CMatrix::identity(dim, dim) - &w * gauss_jordan_inverse(&gram) * w.adjoint()
    };
    let x = &p_w * &v;
    &v * gauss_jordan_inverse(&(x.adjoint() * &v)) * x.adjoint()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &SampledSignal, b: &SampledSignal) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
