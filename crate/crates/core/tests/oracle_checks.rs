mod common;

use common::*;
use obproj_core::oracle::{
    direct_projector, operator_matrix, probe_distance, pseudo_inverse, pseudo_inverse_full,
    random_probes, DEFAULT_PINV_TOL,
};
use obproj_core::{
    norm, orthonormalize, project_orthonormal, LinearOperator, SampledSignal, Space,
};
use proptest::prelude::*;
use rand::Rng;

fn random_matrix(r: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn penrose_identities(seed in any::<u64>(), rows in 1usize..9, cols in 1usize..9, rank in 1usize..9) {
        let mut r = rng(seed);
        let rank = rank.min(rows).min(cols);
        let m = random_matrix(&mut r, rows, rank) * random_matrix(&mut r, rank, cols);
        let p = pseudo_inverse_full(&m, DEFAULT_PINV_TOL);
        prop_assert_eq!(p.rank, rank);
        let g = &p.matrix;
        let scale = frobenius(&m).max(1.0);
        prop_assert!(frobenius(&(&m * g * &m - &m)) <= 1e-10 * scale);
        prop_assert!(frobenius(&(g * &m * g - g)) <= 1e-10 * frobenius(g).max(1.0));
        prop_assert!(frobenius(&((&m * g).adjoint() - &m * g)) <= 1e-10);
        prop_assert!(frobenius(&((g * &m).adjoint() - g * &m)) <= 1e-10);
        prop_assert!(p.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn direct_projector_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, true);
        let o = direct_projector(inst.space.clone(), &inst.atoms, &inst.wperp, DEFAULT_PINV_TOL).unwrap();
        let m = o.projector_matrix.clone().unwrap();
        prop_assert!(frobenius(&(&m * &m - &m)) <= 1e-9 * frobenius(&m).max(1.0));
        for v in &inst.atoms {
            let ev = o.apply(v).unwrap();
            prop_assert!(norm(&ev.sub(v).unwrap()) <= 1e-9 * norm(v));
        }
        for w in &inst.wperp {
            prop_assert!(norm(&o.apply(w).unwrap()) <= 1e-9 * norm(w));
        }
        // P_W Ê = P_W with W = span{u_i}.
        let (ub, _) = orthonormalize(&o.u, 1e-10).unwrap();
        for f in random_probes(&inst.space, 5, seed) {
            let lhs = project_orthonormal(&ub, &o.apply(&f).unwrap()).unwrap();
            let rhs = project_orthonormal(&ub, &f).unwrap();
            prop_assert!(norm(&lhs.sub(&rhs).unwrap()) <= 1e-9 * norm(&f));
        }
    }

    #[test]
    fn empty_complement_is_least_squares(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, true);
        let dim = inst.space.dim();
        let o = direct_projector(inst.space.clone(), &inst.atoms, &[], DEFAULT_PINV_TOL).unwrap();
        let v = column_matrix(&inst.atoms, dim);
        let ls = &v * gauss_jordan_inverse(&(v.adjoint() * &v)) * v.adjoint();
        prop_assert!(frobenius(&(o.projector_matrix.unwrap() - ls)) <= 1e-9);
    }
}

#[test]
fn pseudo_inverse_of_invertible_matches_elimination() {
    let mut r = rng(4);
    for _ in 0..20 {
        let m = random_matrix(&mut r, 4, 4);
        let diff = pseudo_inverse(&m, DEFAULT_PINV_TOL) - gauss_jordan_inverse(&m);
        assert!(frobenius(&diff) <= 1e-10);
    }
}

#[test]
fn gram_pinv_satisfies_penrose_on_projector_instances() {
    let mut r = rng(12);
    for _ in 0..20 {
        let inst = euclidean_instance(&mut r, true);
        let o = direct_projector(
            inst.space.clone(),
            &inst.atoms,
            &inst.wperp,
            DEFAULT_PINV_TOL,
        )
        .unwrap();
        let (g, p) = (&o.gram, &o.gram_pinv);
        assert!(frobenius(&(g * p * g - g)) <= 1e-10 * frobenius(g).max(1.0));
        assert!(frobenius(&(p * g * p - p)) <= 1e-10 * frobenius(p).max(1.0));
        assert_eq!(o.rank, inst.atoms.len());
    }
}

#[test]
fn dependent_atoms_show_up_as_rank_drop() {
    let mut r = rng(21);
    let s = Space::euclidean(10);
    let a = random_signal(&s, &mut r, true);
    let b = random_signal(&s, &mut r, true);
    let ab = a.add(&b.scaled(c(0.5, -2.0))).unwrap();
    let w = random_signal(&s, &mut r, true);
    let o = direct_projector(
        s.clone(),
        &[a.clone(), b.clone(), ab],
        std::slice::from_ref(&w),
        DEFAULT_PINV_TOL,
    )
    .unwrap();
    assert_eq!(o.rank, 2);
    let reduced = direct_projector(s, &[a, b], &[w], DEFAULT_PINV_TOL).unwrap();
    assert!(
        frobenius(&(operator_matrix(&o).unwrap() - operator_matrix(&reduced).unwrap())) <= 1e-10
    );
}

#[test]
fn function_space_oracle_fixes_atoms() {
    let mut r = rng(5);
    let inst = grid_instance(&mut r, 512);
    let o = direct_projector(
        inst.space.clone(),
        &inst.atoms,
        &inst.wperp,
        DEFAULT_PINV_TOL,
    )
    .unwrap();
    assert!(o.projector_matrix.is_none());
    for v in &inst.atoms {
        assert!(norm(&o.apply(v).unwrap().sub(v).unwrap()) <= 1e-9 * norm(v));
    }
    let same = probe_distance(&o, &o, &random_probes(&inst.space, 5, 1)).unwrap();
    assert_eq!(same, 0.0);
    let _: &[SampledSignal] = o.atoms();
}
