//! Recursive construction of the oblique projector `Ê = Σ v_i ⟨ũ_i, ·⟩`
//! onto `V_k = span{v_i}` along a fixed subspace `W⊥`.
//!
//! The state keeps, for every atom `v_i`, its W-component
//! `u_i = v_i − P_{W⊥} v_i` and its dual `ũ_i`, plus an orthonormal basis of
//! `W_k = span{u_i}` built from the Gram-Schmidt residuals
//! `q = u − P_{W_k} u`. Atoms can be appended ([`ProjectorState::update`]),
//! removed ([`ProjectorState::downdate`]) or swapped
//! ([`ProjectorState::replace`]) without rebuilding the operator.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{
    axpy_raw, check_space, dot_raw, extend_basis_beyond, norm, norm_sq, orthonormalize, residual,
    residual_beyond, LinearOperator, SampledSignal, Space,
};

/// Smallest admissible `|1 − ⟨u_j, ũ_j⟩|` in a redundant-atom downdate.
pub const DEGENERACY_GUARD: f64 = 1e2 * f64::EPSILON;

/// How the orthonormal basis of `W_k` is refreshed after an atom that
/// carries its own direction is removed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QBasisMaintenance {
    /// Re-run Gram-Schmidt on the surviving `u_i`; the prefix of the basis
    /// that precedes the removed atom is reused. Downdate case detection is
    /// an explicit rank test.
    #[default]
    Recompute,
    /// Subtract the direction of the removed dual, `P_{W_k} − P_{ũ_j}`.
    /// Case detection relies on `⟨u_j, ũ_j⟩ = 1`, which holds for states
    /// grown from independent updates with duals in `W`.
    Incremental,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateCase {
    /// `v_new ∉ V_k`: a fresh dual `q/‖q‖²`.
    Independent,
    /// `v_new ∈ V_k`: the dual is the caller's `y` (zero by default) and the
    /// operator is unchanged.
    Dependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DowndateCase {
    /// `v_j ∉ V_{k\j}`: the range shrinks.
    Reducing,
    /// `v_j ∈ V_{k\j}`: the operator is unchanged.
    Redundant,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateReport {
    pub case: UpdateCase,
    /// 0-based position of the new atom.
    pub index: usize,
    /// `‖q‖ / ‖u_new‖`, 0 when `u_new = 0`.
    pub residual_ratio: f64,
    pub residual_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DowndateReport {
    pub case: DowndateCase,
    pub index: usize,
    /// `s = ⟨u_j, ũ_j⟩` before removal.
    pub s: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplaceReport {
    pub downdate: DowndateReport,
    pub update: UpdateReport,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCounts {
    pub independent_updates: usize,
    pub dependent_updates: usize,
    pub reducing_downdates: usize,
    pub redundant_downdates: usize,
}

/// Mutable recursive state of an oblique projector along a fixed `W⊥`.
#[derive(Clone, Debug)]
pub struct ProjectorState {
    space: Arc<Space>,
    wperp_basis: Vec<SampledSignal>,
    v: Vec<SampledSignal>,
    u: Vec<SampledSignal>,
    duals: Vec<SampledSignal>,
    q_basis: Vec<SampledSignal>,
    // Atom index whose update produced each q_basis entry (Recompute mode).
    q_owner: Vec<usize>,
    dep_tol: f64,
    maintenance: QBasisMaintenance,
    min_residual_ratio: Option<f64>,
    counts: CaseCounts,
}

impl ProjectorState {
    /// Starts an empty projector along `span(wperp_spanning)`. Dependent
    /// spanning vectors are dropped. An empty list yields `W⊥ = {0}`, i.e.
    /// orthogonal projectors.
    pub fn new(space: Arc<Space>, wperp_spanning: &[SampledSignal], dep_tol: f64) -> Result<Self> {
        if !(dep_tol > 0.0 && dep_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dep_tol must be positive, got {dep_tol}"
            )));
        }
        for w in wperp_spanning {
            check_space(&space, w.space())?;
        }
        let (wperp_basis, _) = orthonormalize(wperp_spanning, dep_tol)?;
        Ok(ProjectorState {
            space,
            wperp_basis,
            v: Vec::new(),
            u: Vec::new(),
            duals: Vec::new(),
            q_basis: Vec::new(),
            q_owner: Vec::new(),
            dep_tol,
            maintenance: QBasisMaintenance::default(),
            min_residual_ratio: None,
            counts: CaseCounts::default(),
        })
    }

    pub fn with_maintenance(mut self, maintenance: QBasisMaintenance) -> Self {
        if maintenance == self.maintenance {
            return self;
        }
        self.maintenance = maintenance;
        match maintenance {
            QBasisMaintenance::Incremental => self.q_owner.clear(),
            QBasisMaintenance::Recompute => {
                let mut basis = Vec::with_capacity(self.u.len());
                let mut owner = Vec::with_capacity(self.u.len());
                for (i, u) in self.u.iter().enumerate() {
                    let before = basis.len();
                    extend_basis_beyond(&self.wperp_basis, &mut basis, u, self.dep_tol);
                    if basis.len() > before {
                        owner.push(i);
                    }
                }
                self.q_basis = basis;
                self.q_owner = owner;
            }
        }
        self
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    /// Number of atoms `k`.
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn dep_tol(&self) -> f64 {
        self.dep_tol
    }

    pub fn maintenance(&self) -> QBasisMaintenance {
        self.maintenance
    }

    pub fn wperp_basis(&self) -> &[SampledSignal] {
        &self.wperp_basis
    }

    pub fn atoms(&self) -> &[SampledSignal] {
        &self.v
    }

    pub fn w_components(&self) -> &[SampledSignal] {
        &self.u
    }

    pub fn duals(&self) -> &[SampledSignal] {
        &self.duals
    }

    pub fn q_basis(&self) -> &[SampledSignal] {
        &self.q_basis
    }

    pub fn counts(&self) -> CaseCounts {
        self.counts
    }

    /// Smallest `‖q_i‖ / ‖u_i‖` seen over independent updates. Small values
    /// mean `V` is nearly inside `W⊥` and the duals are large.
    pub fn condition_indicator(&self) -> Option<f64> {
        self.min_residual_ratio
    }

    /// A speculative copy that can be mutated independently.
    pub fn snapshot(&self) -> Self {
        self.clone()
    }

    fn w_component(&self, v: &SampledSignal) -> SampledSignal {
        residual(&self.wperp_basis, v)
    }

    /// Appends an atom. When `v_new ∈ V_k` the dual of the new atom is
    /// `y_choice` (zero if `None`) and the existing duals absorb it so the
    /// operator is unchanged; otherwise the duals are biorthogonalized
    /// against the Gram-Schmidt residual of `u_new`.
    pub fn update(
        &mut self,
        v_new: &SampledSignal,
        y_choice: Option<&SampledSignal>,
    ) -> Result<UpdateReport> {
        check_space(&self.space, v_new.space())?;
        if let Some(y) = y_choice {
            check_space(&self.space, y.space())?;
        }
        let w = self.space.weights();
        let v_norm = norm(v_new);
        let u_new = self.w_component(v_new);
        let u_norm = norm(&u_new);
        if v_norm == 0.0 {
            if self.is_empty() {
                return Err(Error::DirectSumViolation { relative_norm: 0.0 });
            }
        } else if u_norm <= self.dep_tol * v_norm {
            return Err(Error::DirectSumViolation {
                relative_norm: u_norm / v_norm,
            });
        }

        // Deflating against W⊥ again keeps roundoff in `u_new` out of the
        // dual, where `1 / ‖q‖` would amplify it.
        let q = residual_beyond(&self.wperp_basis, &self.q_basis, &u_new);
        let q_norm_sq = norm_sq(&q);
        let q_norm = q_norm_sq.sqrt();
        let ratio = if u_norm == 0.0 { 0.0 } else { q_norm / u_norm };
        let index = self.len();

        let (case, new_dual) = if ratio > self.dep_tol {
            let new_dual = q.scaled(Complex64::new(1.0 / q_norm_sq, 0.0));
            for d in &mut self.duals {
                let c = dot_raw(w, u_new.values(), d.values());
                axpy_raw(d.values_mut(), -c, new_dual.values());
            }
            self.q_basis
                .push(q.scaled(Complex64::new(1.0 / q_norm, 0.0)));
            if self.maintenance == QBasisMaintenance::Recompute {
                self.q_owner.push(index);
            }
            self.min_residual_ratio = Some(self.min_residual_ratio.map_or(ratio, |m| m.min(ratio)));
            self.counts.independent_updates += 1;
            (UpdateCase::Independent, new_dual)
        } else {
            let y = y_choice
                .cloned()
                .unwrap_or_else(|| SampledSignal::zeros(Arc::clone(&self.space)));
            for d in &mut self.duals {
                let c = dot_raw(w, u_new.values(), d.values());
                axpy_raw(d.values_mut(), -c, y.values());
            }
            self.counts.dependent_updates += 1;
            (UpdateCase::Dependent, y)
        };

        self.v.push(v_new.clone());
        self.u.push(u_new);
        self.duals.push(new_dual);
        Ok(UpdateReport {
            case,
            index,
            residual_ratio: ratio,
            residual_norm: q_norm,
        })
    }

    /// Orthonormal basis of `span{u_i : i ≠ j}` by Gram-Schmidt in atom
    /// order, reusing the stored prefix that precedes atom `j`. Also returns
    /// whether `u_j` lies in that span.
    fn basis_without(&self, j: usize) -> (Vec<SampledSignal>, Vec<usize>, bool) {
        let keep = self.q_owner.iter().take_while(|&&o| o < j).count();
        let mut basis: Vec<SampledSignal> = self.q_basis[..keep].to_vec();
        let mut owner: Vec<usize> = self.q_owner[..keep].to_vec();
        let owns_direction = self.q_owner.get(keep) == Some(&j);
        for i in (j + 1)..self.len() {
            let before = basis.len();
            extend_basis_beyond(&self.wperp_basis, &mut basis, &self.u[i], self.dep_tol);
            if basis.len() > before {
                owner.push(i - 1);
            }
        }
        let redundant = if owns_direction {
            let u_norm = norm(&self.u[j]);
            u_norm == 0.0
                || norm(&residual_beyond(&self.wperp_basis, &basis, &self.u[j]))
                    <= self.dep_tol * u_norm
        } else {
            true
        };
        (basis, owner, redundant)
    }

    /// Removes atom `j` (0-based), adapting the remaining duals so that the
    /// result is the oblique projector onto `V_{k\j}` along `W⊥`.
    pub fn downdate(&mut self, j: usize) -> Result<DowndateReport> {
        let k = self.len();
        if j >= k {
            return Err(Error::IndexOutOfRange { index: j, len: k });
        }
        let w = self.space.weights();
        let s = dot_raw(w, self.u[j].values(), self.duals[j].values());

        let (case, new_q) = match self.maintenance {
            QBasisMaintenance::Recompute => {
                let (basis, owner, redundant) = self.basis_without(j);
                let case = if redundant {
                    DowndateCase::Redundant
                } else {
                    DowndateCase::Reducing
                };
                (case, Some((basis, owner)))
            }
            QBasisMaintenance::Incremental => {
                let case = if (s - 1.0).norm() <= self.dep_tol {
                    DowndateCase::Reducing
                } else {
                    DowndateCase::Redundant
                };
                (case, None)
            }
        };

        let removed_dual = self.duals[j].clone();
        match case {
            DowndateCase::Redundant => {
                let denom = Complex64::new(1.0, 0.0) - s;
                if denom.norm() < DEGENERACY_GUARD {
                    return Err(Error::NumericalDegeneracy(format!(
                        "1 - <u_j, dual_j> = {denom:.3e} for redundant atom {j}"
                    )));
                }
                let u_j = &self.u[j];
                for (i, d) in self.duals.iter_mut().enumerate() {
                    if i != j {
                        let c = dot_raw(w, u_j.values(), d.values()) / denom;
                        axpy_raw(d.values_mut(), c, removed_dual.values());
                    }
                }
                self.counts.redundant_downdates += 1;
            }
            DowndateCase::Reducing => {
                let g_norm_sq = norm_sq(&removed_dual);
                if g_norm_sq == 0.0 {
                    return Err(Error::NumericalDegeneracy(format!(
                        "dual of atom {j} vanishes"
                    )));
                }
                for (i, d) in self.duals.iter_mut().enumerate() {
                    if i != j {
                        let c = dot_raw(w, removed_dual.values(), d.values()) / g_norm_sq;
                        axpy_raw(d.values_mut(), -c, removed_dual.values());
                    }
                }
                self.counts.reducing_downdates += 1;
            }
        }

        match new_q {
            Some((basis, owner)) => {
                self.q_basis = basis;
                self.q_owner = owner;
            }
            None if case == DowndateCase::Reducing => {
                // Exactly one direction leaves W_k; pivoting on the largest
                // remainder picks the survivors without a drop threshold.
                let g_hat = removed_dual.scaled(Complex64::new(1.0 / norm(&removed_dual), 0.0));
                let mut rest: Vec<SampledSignal> = self
                    .q_basis
                    .iter()
                    .map(|q| residual(std::slice::from_ref(&g_hat), q))
                    .collect();
                let mut basis = Vec::with_capacity(rest.len().saturating_sub(1));
                while basis.len() + 1 < self.q_basis.len() {
                    let (pick, _) = rest
                        .iter()
                        .map(norm_sq)
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(&b.1))
                        .expect("candidates remain");
                    let b = rest.swap_remove(pick);
                    let b = b.scaled(Complex64::new(1.0 / norm(&b), 0.0));
                    for r in &mut rest {
                        *r = residual(std::slice::from_ref(&b), r);
                    }
                    basis.push(b);
                }
                self.q_owner.clear();
                self.q_basis = basis;
            }
            None => {}
        }

        self.v.remove(j);
        self.u.remove(j);
        self.duals.remove(j);
        Ok(DowndateReport { case, index: j, s })
    }

    /// Swaps atom `j` for `v_new`: removal followed by an update, with the
    /// new atom appended last. The state is untouched if either step fails.
    pub fn replace(&mut self, j: usize, v_new: &SampledSignal) -> Result<ReplaceReport> {
        let mut next = self.snapshot();
        let downdate = next.downdate(j)?;
        let update = next.update(v_new, None)?;
        *self = next;
        Ok(ReplaceReport { downdate, update })
    }

    /// `Ê f = Σ v_i ⟨ũ_i, f⟩`.
    pub fn apply(&self, f: &SampledSignal) -> Result<SampledSignal> {
        expand(&self.space, &self.v, &self.duals, f)
    }

    /// `P_W f = Σ u_i ⟨ũ_i, f⟩`.
    pub fn apply_pw(&self, f: &SampledSignal) -> Result<SampledSignal> {
        expand(&self.space, &self.u, &self.duals, f)
    }

    /// Alternative duals `ỹ_i = ũ_i + y_i − Σ_j y_j ⟨v_j, ũ_i⟩`. They give
    /// the same operator; for independent atoms they coincide with `ũ_i`.
    pub fn perturb_duals(&self, y: &[SampledSignal]) -> Result<Vec<SampledSignal>> {
        if y.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: y.len(),
            });
        }
        for yi in y {
            check_space(&self.space, yi.space())?;
        }
        let w = self.space.weights();
        let out = self
            .duals
            .iter()
            .zip(y)
            .map(|(d, yi)| {
                let mut out = d.clone();
                axpy_raw(out.values_mut(), Complex64::new(1.0, 0.0), yi.values());
                for (vj, yj) in self.v.iter().zip(y) {
                    let c = dot_raw(w, vj.values(), d.values());
                    axpy_raw(out.values_mut(), -c, yj.values());
                }
                out
            })
            .collect();
        Ok(out)
    }

    /// The operator `Σ v_i ⟨d_i, ·⟩` for caller-supplied duals.
    pub fn with_duals(&self, duals: Vec<SampledSignal>) -> Result<DualExpansion> {
        DualExpansion::new(Arc::clone(&self.space), self.v.clone(), duals)
    }

    /// `max_{m,i} |⟨v_m, ũ_i⟩ − δ_{mi}|`; zero up to roundoff for
    /// independent atoms.
    pub fn biorthogonality_defect(&self) -> f64 {
        let w = self.space.weights();
        let mut worst = 0.0f64;
        for (m, vm) in self.v.iter().enumerate() {
            for (i, d) in self.duals.iter().enumerate() {
                let target = if m == i { 1.0 } else { 0.0 };
                let got = dot_raw(w, vm.values(), d.values());
                worst = worst.max((got - target).norm());
            }
        }
        worst
    }

    pub(crate) fn from_parts(parts: StateParts) -> Result<Self> {
        let k = parts.v.len();
        if parts.u.len() != k || parts.duals.len() != k {
            return Err(Error::Format(format!(
                "atom lists have lengths v={}, u={}, duals={}",
                k,
                parts.u.len(),
                parts.duals.len()
            )));
        }
        if parts.q_owner.len() != parts.q_basis.len()
            && !(parts.maintenance == QBasisMaintenance::Incremental && parts.q_owner.is_empty())
        {
            return Err(Error::Format("q_owner does not match q_basis".into()));
        }
        if parts.q_owner.iter().any(|&o| o >= k.max(1)) {
            return Err(Error::Format("q_owner entry out of range".into()));
        }
        Ok(ProjectorState {
            space: parts.space,
            wperp_basis: parts.wperp_basis,
            v: parts.v,
            u: parts.u,
            duals: parts.duals,
            q_basis: parts.q_basis,
            q_owner: parts.q_owner,
            dep_tol: parts.dep_tol,
            maintenance: parts.maintenance,
            min_residual_ratio: parts.min_residual_ratio,
            counts: parts.counts,
        })
    }

    pub(crate) fn to_parts(&self) -> StateParts {
        StateParts {
            space: Arc::clone(&self.space),
            wperp_basis: self.wperp_basis.clone(),
            v: self.v.clone(),
            u: self.u.clone(),
            duals: self.duals.clone(),
            q_basis: self.q_basis.clone(),
            q_owner: self.q_owner.clone(),
            dep_tol: self.dep_tol,
            maintenance: self.maintenance,
            min_residual_ratio: self.min_residual_ratio,
            counts: self.counts,
        }
    }
}

pub(crate) struct StateParts {
    pub space: Arc<Space>,
    pub wperp_basis: Vec<SampledSignal>,
    pub v: Vec<SampledSignal>,
    pub u: Vec<SampledSignal>,
    pub duals: Vec<SampledSignal>,
    pub q_basis: Vec<SampledSignal>,
    pub q_owner: Vec<usize>,
    pub dep_tol: f64,
    pub maintenance: QBasisMaintenance,
    pub min_residual_ratio: Option<f64>,
    pub counts: CaseCounts,
}

fn expand(
    space: &Arc<Space>,
    range: &[SampledSignal],
    duals: &[SampledSignal],
    f: &SampledSignal,
) -> Result<SampledSignal> {
    check_space(space, f.space())?;
    let w = space.weights();
    let mut out = SampledSignal::zeros(Arc::clone(space));
    for (r, d) in range.iter().zip(duals) {
        let c = dot_raw(w, d.values(), f.values());
        axpy_raw(out.values_mut(), c, r.values());
    }
    Ok(out)
}

impl LinearOperator for ProjectorState {
    fn space(&self) -> &Arc<Space> {
        &self.space
    }

    fn apply(&self, f: &SampledSignal) -> Result<SampledSignal> {
        ProjectorState::apply(self, f)
    }
}

/// `Σ v_i ⟨d_i, ·⟩` for an arbitrary family of duals.
#[derive(Clone, Debug)]
pub struct DualExpansion {
    space: Arc<Space>,
    v: Vec<SampledSignal>,
    duals: Vec<SampledSignal>,
}

impl DualExpansion {
    pub fn new(
        space: Arc<Space>,
        v: Vec<SampledSignal>,
        duals: Vec<SampledSignal>,
    ) -> Result<Self> {
        if v.len() != duals.len() {
            return Err(Error::LengthMismatch {
                expected: v.len(),
                actual: duals.len(),
            });
        }
        for s in v.iter().chain(&duals) {
            check_space(&space, s.space())?;
        }
        Ok(DualExpansion { space, v, duals })
    }

    pub fn duals(&self) -> &[SampledSignal] {
        &self.duals
    }
}

impl LinearOperator for DualExpansion {
    fn space(&self) -> &Arc<Space> {
        &self.space
    }

    fn apply(&self, f: &SampledSignal) -> Result<SampledSignal> {
        expand(&self.space, &self.v, &self.duals, f)
    }
}
