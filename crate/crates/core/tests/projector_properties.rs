mod common;

use std::sync::Arc;

use common::*;
use obproj_core::oracle::{
    direct_projector, operator_matrix, probe_distance, random_probes, DEFAULT_PINV_TOL,
};
use obproj_core::{
    inner_product, norm, operator_distance, project_orthonormal, DowndateCase, Error,
    ProjectorState, QBasisMaintenance, SampledSignal, Space, UpdateCase, DEFAULT_DEP_TOL,
};
use proptest::prelude::*;
use rand::Rng;

fn build(inst: &Instance) -> ProjectorState {
    let mut st = ProjectorState::new(inst.space.clone(), &inst.wperp, DEFAULT_DEP_TOL).unwrap();
    for v in &inst.atoms {
        st.update(v, None).unwrap();
    }
    st
}

fn unit(space: &Arc<Space>, i: usize) -> SampledSignal {
    SampledSignal::unit(space.clone(), i).unwrap()
}

fn sum(a: &SampledSignal, b: &SampledSignal) -> SampledSignal {
    a.add(b).unwrap()
}

fn rel(a: &SampledSignal, b: &SampledSignal) -> f64 {
    norm(&a.sub(b).unwrap()) / norm(b).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projector_axioms_hold(seed in any::<u64>(), complex in any::<bool>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, complex);
        let st = build(&inst);
        let f = random_signal(&inst.space, &mut r, complex);
        let pf = st.apply(&f).unwrap();
        let ppf = st.apply(&pf).unwrap();
        prop_assert!(norm(&ppf.sub(&pf).unwrap()) <= 1e-9 * norm(&f));
        for w in st.wperp_basis() {
            prop_assert!(st.apply(w).unwrap().max_abs() <= 1e-10);
        }
        for v in &inst.atoms {
            prop_assert!(rel(&st.apply(v).unwrap(), v) <= 1e-9);
        }
        prop_assert!(st.biorthogonality_defect() <= 1e-8);
        let pw = st.apply_pw(&f).unwrap();
        let want = project_orthonormal(st.q_basis(), &f).unwrap();
        prop_assert!(norm(&pw.sub(&want).unwrap()) <= 1e-10 * norm(&f).max(1.0));
    }

    #[test]
    fn recursive_matches_both_oracles(seed in any::<u64>(), complex in any::<bool>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, complex);
        let st = build(&inst);
        let oracle = direct_projector(inst.space.clone(), &inst.atoms, &inst.wperp, DEFAULT_PINV_TOL).unwrap();
        prop_assert!(operator_distance(&st, &oracle, 0, 0).unwrap() <= 1e-8);
        let dense = dense_oblique(&inst.atoms, &inst.wperp, inst.space.dim());
        prop_assert!(frobenius(&(operator_matrix(&st).unwrap() - dense)) <= 1e-8);
    }

    #[test]
    fn new_atom_is_normalized_against_its_dual(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, true);
        let mut st = ProjectorState::new(inst.space.clone(), &inst.wperp, DEFAULT_DEP_TOL).unwrap();
        for v in &inst.atoms {
            let rep = st.update(v, None).unwrap();
            prop_assert_eq!(rep.case, UpdateCase::Independent);
            let k = st.len() - 1;
            let s = inner_product(&st.w_components()[k], &st.duals()[k]).unwrap();
            prop_assert!((s - c(1.0, 0.0)).norm() <= 1e-8);
        }
    }

    #[test]
    fn update_then_downdate_restores_duals(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, true);
        let (last, first) = inst.atoms.split_last().unwrap();
        let mut st = ProjectorState::new(inst.space.clone(), &inst.wperp, DEFAULT_DEP_TOL).unwrap();
        for v in first {
            st.update(v, None).unwrap();
        }
        let before: Vec<SampledSignal> = st.duals().to_vec();
        st.update(last, None).unwrap();
        let rep = st.downdate(st.len() - 1).unwrap();
        prop_assert_eq!(rep.case, DowndateCase::Reducing);
        for (a, b) in st.duals().iter().zip(&before) {
            prop_assert!(norm(&a.sub(b).unwrap()) <= 1e-9 * norm(b).max(1.0));
        }
    }

    #[test]
    fn reducing_downdate_then_reupdate_restores_operator(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, true);
        let st0 = build(&inst);
        let mut st = st0.snapshot();
        let j = pick.index(inst.atoms.len());
        st.downdate(j).unwrap();
        let reduced: Vec<_> = inst.atoms.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v.clone()).collect();
        let oracle = direct_projector(inst.space.clone(), &reduced, &inst.wperp, DEFAULT_PINV_TOL).unwrap();
        prop_assert!(operator_distance(&st, &oracle, 0, 0).unwrap() <= 1e-8);
        st.update(&inst.atoms[j], None).unwrap();
        prop_assert!(operator_distance(&st, &st0, 0, 0).unwrap() <= 1e-8);
    }

    #[test]
    fn dependent_insertions_keep_operator(seed in any::<u64>(), with_y in any::<bool>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, true);
        let mut st = build(&inst);
        let before = st.snapshot();
        let mut combo = SampledSignal::zeros(inst.space.clone());
        for v in &inst.atoms {
            combo.axpy(c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)), v).unwrap();
        }
        let y = with_y.then(|| random_signal(&inst.space, &mut r, true));
        let rep = st.update(&combo, y.as_ref()).unwrap();
        prop_assert_eq!(rep.case, UpdateCase::Dependent);
        let probes = random_probes(&inst.space, 20, seed);
        prop_assert!(probe_distance(&st, &before, &probes).unwrap() <= 1e-10);
        // Removing the dependent atom again is a redundant downdate.
        let rep = st.downdate(st.len() - 1).unwrap();
        prop_assert_eq!(rep.case, DowndateCase::Redundant);
        prop_assert!(probe_distance(&st, &before, &probes).unwrap() <= 1e-10);
    }

    #[test]
    fn perturbed_duals_are_unique_for_independent_atoms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = euclidean_instance(&mut r, true);
        let st = build(&inst);
        let y: Vec<_> = (0..st.len()).map(|_| random_signal(&inst.space, &mut r, true)).collect();
        for (a, b) in st.perturb_duals(&y).unwrap().iter().zip(st.duals()) {
            prop_assert!(norm(&a.sub(b).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn empty_complement_gives_least_squares(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut inst = euclidean_instance(&mut r, true);
        inst.wperp.clear();
        let st = build(&inst);
        let m = operator_matrix(&st).unwrap();
        prop_assert!(frobenius(&(&m - m.adjoint())) <= 1e-9);
        let dim = inst.space.dim();
        let v = column_matrix(&inst.atoms, dim);
        let ls = &v * gauss_jordan_inverse(&(v.adjoint() * &v)) * v.adjoint();
        prop_assert!(frobenius(&(m - ls)) <= 1e-9);
    }

    #[test]
    fn grid_instances_match_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = grid_instance(&mut r, 257);
        let st = build(&inst);
        let oracle = direct_projector(inst.space.clone(), &inst.atoms, &inst.wperp, DEFAULT_PINV_TOL).unwrap();
        prop_assert!(operator_distance(&st, &oracle, 10, seed).unwrap() <= 1e-8);
    }
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Update,
    Downdate(usize),
    Replace(usize),
}

fn fuzz(seed: u64, maintenance: QBasisMaintenance, steps: usize) -> (ProjectorState, f64) {
    let mut r = rng(seed);
    let space = Space::euclidean(24);
    let wperp: Vec<_> = (0..3)
        .map(|_| random_signal(&space, &mut r, true))
        .collect();
    let mut st = ProjectorState::new(space.clone(), &wperp, DEFAULT_DEP_TOL)
        .unwrap()
        .with_maintenance(maintenance);
    let mut worst = 0.0f64;
    for _ in 0..steps {
        let k = st.len();
        let step = match r.gen_range(0..3) {
            _ if k == 0 => Step::Update,
            0 if k < 12 => Step::Update,
            1 => Step::Downdate(r.gen_range(0..k)),
            _ => Step::Replace(r.gen_range(0..k)),
        };
        match step {
            Step::Update => {
                let v = random_signal(&space, &mut r, true);
                let (k0, q0) = (st.len(), st.q_basis().len());
                let rep = st.update(&v, None).unwrap();
                assert_eq!(
                    rep.case,
                    UpdateCase::Independent,
                    "{maintenance:?} k={k0} q={q0} {rep:?}"
                );
            }
            Step::Downdate(j) => {
                assert_eq!(st.downdate(j).unwrap().case, DowndateCase::Reducing);
            }
            Step::Replace(j) => {
                let v = random_signal(&space, &mut r, true);
                st.replace(j, &v).unwrap();
            }
        }
        worst = worst.max(st.biorthogonality_defect());
    }
    let oracle = direct_projector(space, st.atoms(), &wperp, DEFAULT_PINV_TOL).unwrap();
    let d = operator_distance(&st, &oracle, 0, 0).unwrap();
    assert!(d <= 1e-8, "seed {seed} {maintenance:?}: oracle distance {d:e}, k={}, q={}, worst bi {worst:e}, cond {:?}", st.len(), st.q_basis().len(), oracle.gram_condition());
    (st, worst)
}

#[test]
fn fuzzed_sequences_stay_biorthogonal() {
    for seed in 0..10 {
        for m in [QBasisMaintenance::Recompute, QBasisMaintenance::Incremental] {
            let (_, worst) = fuzz(seed, m, 200);
            assert!(worst <= 1e-8, "seed {seed} {m:?}: {worst:e}");
        }
    }
}

#[test]
fn maintenance_modes_agree() {
    for seed in 20..25 {
        let (a, _) = fuzz(seed, QBasisMaintenance::Recompute, 120);
        let (b, _) = fuzz(seed, QBasisMaintenance::Incremental, 120);
        assert_eq!(a.len(), b.len());
        assert!(operator_distance(&a, &b, 0, 0).unwrap() <= 1e-9);
        assert_eq!(a.q_basis().len(), b.q_basis().len());
    }
}

#[test]
fn two_step_oblique_example() {
    let s = Space::euclidean(3);
    let wperp = [unit(&s, 2)];
    let mut st = ProjectorState::new(s.clone(), &wperp, DEFAULT_DEP_TOL).unwrap();
    let atoms = [
        unit(&s, 0),
        sum(&sum(&unit(&s, 0), &unit(&s, 1)), &unit(&s, 2)),
    ];
    for v in &atoms {
        st.update(v, None).unwrap();
    }
    let oracle = direct_projector(s, &atoms, &wperp, DEFAULT_PINV_TOL).unwrap();
    assert!(operator_distance(&st, &oracle, 0, 0).unwrap() <= 1e-10);
}

#[test]
fn apply_matches_oracle_matrix_k5_dim12() {
    let mut r = rng(512);
    let s = Space::euclidean(12);
    let atoms: Vec<_> = (0..5).map(|_| random_signal(&s, &mut r, true)).collect();
    let wperp: Vec<_> = (0..3).map(|_| random_signal(&s, &mut r, true)).collect();
    let st = build(&Instance {
        space: s.clone(),
        atoms: atoms.clone(),
        wperp: wperp.clone(),
    });
    let m = direct_projector(s.clone(), &atoms, &wperp, DEFAULT_PINV_TOL)
        .unwrap()
        .projector_matrix
        .unwrap();
    for _ in 0..5 {
        let f = random_signal(&s, &mut r, true);
        let want = &m * column_matrix(std::slice::from_ref(&f), 12);
        let got = st.apply(&f).unwrap();
        for i in 0..12 {
            assert!((got.values()[i] - want[(i, 0)]).norm() <= 1e-10);
        }
        let pw = st.apply_pw(&f).unwrap();
        assert!(max_abs_diff(&pw, &project_orthonormal(st.q_basis(), &f).unwrap()) <= 1e-10);
    }
}

#[test]
fn distance_to_oracle_k6_dim15() {
    let mut r = rng(615);
    let s = Space::euclidean(15);
    let atoms: Vec<_> = (0..6).map(|_| random_signal(&s, &mut r, true)).collect();
    let wperp: Vec<_> = (0..4).map(|_| random_signal(&s, &mut r, true)).collect();
    let st = build(&Instance {
        space: s.clone(),
        atoms: atoms.clone(),
        wperp: wperp.clone(),
    });
    let oracle = direct_projector(s, &atoms, &wperp, DEFAULT_PINV_TOL).unwrap();
    assert!(operator_distance(&st, &oracle, 0, 0).unwrap() <= 1e-8);
}

#[test]
fn downdate_second_atom_leaves_span_of_first() {
    let s = Space::euclidean(3);
    let wperp = [unit(&s, 2)];
    let mut st = ProjectorState::new(s.clone(), &wperp, DEFAULT_DEP_TOL).unwrap();
    st.update(&unit(&s, 0), None).unwrap();
    st.update(&sum(&unit(&s, 0), &unit(&s, 1)), None).unwrap();
    assert_eq!(st.downdate(1).unwrap().case, DowndateCase::Reducing);
    let oracle = direct_projector(s.clone(), &[unit(&s, 0)], &wperp, DEFAULT_PINV_TOL).unwrap();
    assert!(operator_distance(&st, &oracle, 0, 0).unwrap() <= 1e-10);
}

#[test]
fn redundant_second_copy_is_removed_without_change() {
    let s = Space::euclidean(3);
    let mut st = ProjectorState::new(s.clone(), &[unit(&s, 2)], DEFAULT_DEP_TOL).unwrap();
    st.update(&unit(&s, 0), None).unwrap();
    st.update(&unit(&s, 0).scaled(c(2.0, 0.0)), None).unwrap();
    let before = operator_matrix(&st).unwrap();
    assert_eq!(st.downdate(1).unwrap().case, DowndateCase::Redundant);
    assert!(frobenius(&(operator_matrix(&st).unwrap() - before)) <= 1e-12);
}

#[test]
fn replace_examples() {
    let mut r = rng(9);
    let inst = euclidean_instance(&mut r, true);
    let mut st = build(&inst);
    let before = st.snapshot();
    let j = inst.atoms.len() / 2;
    st.replace(j, &inst.atoms[j]).unwrap();
    assert!(operator_distance(&st, &before, 0, 0).unwrap() <= 1e-9);

    let s = Space::euclidean(4);
    let wperp = [unit(&s, 3)];
    let mut st = ProjectorState::new(s.clone(), &wperp, DEFAULT_DEP_TOL).unwrap();
    st.update(&unit(&s, 0), None).unwrap();
    st.update(&unit(&s, 1), None).unwrap();
    st.replace(1, &unit(&s, 2)).unwrap();
    let mut fresh = ProjectorState::new(s.clone(), &wperp, DEFAULT_DEP_TOL).unwrap();
    fresh.update(&unit(&s, 0), None).unwrap();
    fresh.update(&unit(&s, 2), None).unwrap();
    assert!(operator_distance(&st, &fresh, 0, 0).unwrap() <= 1e-10);

    let err = st.replace(0, &unit(&s, 3).scaled(c(0.0, 5.0))).unwrap_err();
    assert!(matches!(err, Error::DirectSumViolation { .. }));
    assert_eq!(st.len(), 2);
}

#[test]
fn perturbed_duals_for_dependent_pair() {
    let mut r = rng(2);
    let s = Space::euclidean(3);
    let mut st = ProjectorState::new(s.clone(), &[], DEFAULT_DEP_TOL).unwrap();
    st.update(&unit(&s, 0), None).unwrap();
    st.update(&unit(&s, 0).scaled(c(2.0, 0.0)), None).unwrap();
    let y: Vec<_> = (0..2).map(|_| random_signal(&s, &mut r, true)).collect();
    let alt = st.with_duals(st.perturb_duals(&y).unwrap()).unwrap();
    let probes = random_probes(&s, 20, 77);
    assert!(probe_distance(&alt, &st, &probes).unwrap() <= 1e-10);
    let moved: f64 = alt
        .duals()
        .iter()
        .zip(st.duals())
        .map(|(a, b)| norm(&a.sub(b).unwrap()))
        .sum();
    assert!(moved > 1e-3, "dependent set should admit other duals");
}

#[test]
fn complement_vectors_are_annihilated_on_a_grid() {
    let mut r = rng(44);
    let inst = grid_instance(&mut r, 129);
    let st = build(&inst);
    for w in &inst.wperp {
        assert!(st.apply(w).unwrap().max_abs() <= 1e-10 * w.max_abs().max(1.0));
        assert!(st.apply_pw(w).unwrap().max_abs() <= 1e-10 * w.max_abs().max(1.0));
    }
    let u0 = st.w_components()[0].clone();
    let mut one = ProjectorState::new(inst.space.clone(), &inst.wperp, DEFAULT_DEP_TOL).unwrap();
    one.update(&inst.atoms[0], None).unwrap();
    assert!(max_abs_diff(&one.apply_pw(&u0).unwrap(), &u0) <= 1e-12);
}

#[test]
fn persisted_state_continues_like_the_original() {
    let mut r = rng(31);
    let inst = grid_instance(&mut r, 65);
    let mut mem = build(&inst);
    let mut loaded = ProjectorState::from_json(&mem.to_json().unwrap()).unwrap();
    let f = random_signal(&inst.space, &mut r, true);
    assert_eq!(
        mem.apply(&f).unwrap().values(),
        loaded.apply(&f.clone()).unwrap().values()
    );
    let j = mem.len() - 1;
    let (a, b) = (mem.downdate(j).unwrap(), loaded.downdate(j).unwrap());
    assert_eq!(a.case, b.case);
    let g = SampledSignal::new(loaded.space().clone(), f.values().to_vec()).unwrap();
    assert_eq!(
        mem.apply(&f).unwrap().values(),
        loaded.apply(&g).unwrap().values()
    );
}

#[test]
fn state_is_transferable_between_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<ProjectorState>();
    assert_send_sync::<SampledSignal>();
    let mut r = rng(3);
    let inst = euclidean_instance(&mut r, false);
    let st = build(&inst);
    let f = random_signal(&inst.space, &mut r, false);
    let want = st.apply(&f).unwrap();
    let got = std::thread::spawn(move || st.apply(&f).unwrap())
        .join()
        .unwrap();
    assert_eq!(got, want);
}
