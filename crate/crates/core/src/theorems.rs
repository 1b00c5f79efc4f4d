//! Verifiers for the scalar-product identity, record orthogonality,
//! actionability, mixtures of records and purified records.
//!
//! Exact identities are checked at `TOL_ALG`. Statements of the form "no
//! unitary exists" are probed by bounded adversarial search; their reports
//! carry the search budget so a threshold can be audited.

use serde::Serialize;

use crate::copy_dynamics::{build_controlled_copy, ChainRun, RecordDecomposition, TagSpec};
use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, hs_distance, hs_inner, partial_trace, qubit, schmidt_decompose_with, CompositeDims,
    DensityOperator, StateVector, UnitaryOperator, TOL_ALG,
};
use crate::linalg::{
    frobenius_distance, kron, kron_vec, leading_phase, max_abs, outer, partial_trace_matrix,
    real, trace, trace_of_product, CMatrix, CVector, C64, ZERO,
};
use crate::optimizer::{
    maximize, ActionabilityProblem, NamedResidual, OptimizationConfig, RepeatableCopyProblem,
    TOL_OPT,
};

/// Minimum score for a record to count as actionable.
pub const THR_ACTION: f64 = 0.1;
/// Largest product-form residual accepted for a test-system coupling.
pub const TOL_PROD: f64 = 1e-6;

/// Both sides of an identity. The sides are complex because scalar products
/// of states carry phases; for operator traces the imaginary parts are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub satisfied: bool,
}

impl IdentityReport {
    pub fn compare(lhs: C64, rhs: C64) -> Self {
        let residual = (lhs - rhs).norm();
        Self {
            lhs,
            rhs,
            residual,
            satisfied: residual < TOL_ALG,
        }
    }

    pub fn compare_real(lhs: f64, rhs: f64) -> Self {
        Self::compare(real(lhs), real(rhs))
    }
}

/// How a copy unitary must leave the copied states alone.
#[derive(Debug, Clone, Copy)]
pub enum Repeatability<'a> {
    /// The post-copy system state equals the pre-copy state.
    Strict,
    /// Each state lies in one record subspace of the decomposition and may be
    /// disturbed inside it; the whole subspace must be tagged by one pure tag.
    WithinRecords(&'a RecordDecomposition),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarProductReport {
    /// `⟨u|v⟩` against `⟨ũ|ṽ⟩⟨A_u|A_v⟩` after the copy.
    pub identity: IdentityReport,
    pub tag_overlap: C64,
    pub repeatability_residual: f64,
    /// `|⟨u|v⟩| < TOL_ALG` or `||⟨A_u|A_v⟩| − 1| < TOL_ALG`.
    pub dichotomy: bool,
}

impl ScalarProductReport {
    pub fn satisfied(&self) -> bool {
        self.identity.satisfied && self.dichotomy
    }
}

/// Reduced states `(S, A)` of a pure state on `S ⊗ A`.
fn bipartite_marginals(psi: &CVector, ds: usize, da: usize) -> (CMatrix, CMatrix) {
    let rho = outer(psi, psi);
    let dims = [ds, da];
    (
        partial_trace_matrix(&rho, &dims, &[0]),
        partial_trace_matrix(&rho, &dims, &[1]),
    )
}

/// `(⟨x| ⊗ 1)ψ` on `S ⊗ A`.
fn contract_system(psi: &CVector, x: &CVector, da: usize) -> CVector {
    CVector::from_fn(da, |a, _| {
        x.iter()
            .enumerate()
            .fold(ZERO, |acc, (s, xs)| acc + xs.conj() * psi[s * da + a])
    })
}

/// `(1 ⊗ ⟨t|)ψ` on `S ⊗ A`.
fn contract_apparatus(psi: &CVector, t: &CVector, ds: usize) -> CVector {
    let da = t.len();
    CVector::from_fn(ds, |s, _| {
        t.iter()
            .enumerate()
            .fold(ZERO, |acc, (a, ta)| acc + ta.conj() * psi[s * da + a])
    })
}

/// Residual of "the whole record subspace `k` ends in `range(P_k) ⊗ |A_k⟩`":
/// the largest of the product residual, the purity deficit of the tag and the
/// leakage out of `range(P_k)`.
fn record_sector_residual(
    dec: &RecordDecomposition,
    k: usize,
    u: &CMatrix,
    ready: &CVector,
) -> f64 {
    let ds = dec.dim();
    let da = ready.len();
    let pk = dec.projector(k);
    let r = trace(pk).re;
    let input = kron(&(pk * real(1.0 / r)), &outer(ready, ready));
    let omega = u * input * u.adjoint();
    let dims = [ds, da];
    let sys = partial_trace_matrix(&omega, &dims, &[0]);
    let app = partial_trace_matrix(&omega, &dims, &[1]);
    let product = frobenius_distance(&omega, &kron(&sys, &app));
    let deficit = (1.0 - trace_of_product(&app, &app).re).max(0.0);
    let leakage = frobenius_distance(&sys, &(pk * &sys * pk));
    product.max(deficit).max(leakage)
}

/// Checks `⟨u|v⟩ = ⟨u|v⟩⟨A_u|A_v⟩` for a copy unitary on `S ⊗ A` that
/// starts the apparatus in `ready`.
///
/// In [`Repeatability::Strict`] mode the tags are `A_w = (⟨w| ⊗ 1)U|w⟩|ready⟩`.
/// In [`Repeatability::WithinRecords`] mode the tag is the pure apparatus
/// marginal and `w̃ = (1 ⊗ ⟨A_w|)U|w⟩|ready⟩`, so the right-hand side reads
/// `⟨ũ|ṽ⟩⟨A_u|A_v⟩`. A violated repeatability precondition is an error, not
/// a theorem failure.
pub fn verify_scalar_product_identity(
    u: &StateVector,
    v: &StateVector,
    copy_unitary: &UnitaryOperator,
    ready: &StateVector,
    mode: Repeatability<'_>,
) -> Result<ScalarProductReport> {
    let ds = u.dim();
    let da = ready.dim();
    check_dim(ds, v.dim())?;
    check_dim(ds * da, copy_unitary.dim())?;
    let m = copy_unitary.matrix();
    let ready_amps = ready.amplitudes();

    let mut systems = Vec::with_capacity(2);
    let mut tags = Vec::with_capacity(2);
    let mut worst: f64 = 0.0;
    for x in [u, v] {
        let xa = x.amplitudes();
        let psi = m * kron_vec(xa, ready_amps);
        match mode {
            Repeatability::Strict => {
                let (sys, _) = bipartite_marginals(&psi, ds, da);
                let residual = frobenius_distance(&sys, &outer(xa, xa));
                if residual >= TOL_ALG {
                    return Err(Error::RepeatabilityViolated { residual });
                }
                worst = worst.max(residual);
                tags.push(contract_system(&psi, xa, da));
                systems.push(xa.clone());
            }
            Repeatability::WithinRecords(dec) => {
                check_dim(dec.dim(), ds)?;
                let k = dec.locate_state(x).ok_or_else(|| {
                    let best = dec
                        .projectors()
                        .iter()
                        .map(|p| (xa.adjoint() * p * xa)[(0, 0)].re)
                        .fold(0.0, f64::max);
                    Error::RepeatabilityViolated {
                        residual: 1.0 - best,
                    }
                })?;
                let residual = record_sector_residual(dec, k, m, ready_amps);
                if residual >= TOL_ALG {
                    return Err(Error::RepeatabilityViolated { residual });
                }
                worst = worst.max(residual);
                let (_, app) = bipartite_marginals(&psi, ds, da);
                let (_, vecs) = crate::linalg::hermitian_eigen(&app);
                let mut tag = vecs.column(0).into_owned();
                let phase = leading_phase(&tag, 1e-12);
                tag *= phase.conj();
                systems.push(contract_apparatus(&psi, &tag, ds));
                tags.push(tag);
            }
        }
    }
    let lhs = u.inner(v)?;
    let tag_overlap = tags[0].dotc(&tags[1]);
    let rhs = systems[0].dotc(&systems[1]) * tag_overlap;
    let dichotomy = lhs.norm() < TOL_ALG || (tag_overlap.norm() - 1.0).abs() < TOL_ALG;
    Ok(ScalarProductReport {
        identity: IdentityReport::compare(lhs, rhs),
        tag_overlap,
        repeatability_residual: worst,
        dichotomy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordOrthogonalityReport {
    /// `Tr ρ^u ρ^v` of the original system states.
    pub system_overlap: f64,
    /// One identity per copy step: `Tr ρ^u ρ^v = Tr ρ̃^u ρ̃^v · Π_i Tr rec_i^u rec_i^v`.
    pub steps: Vec<IdentityReport>,
    /// Overlap of the records deposited in each apparatus.
    pub record_overlaps: Vec<f64>,
    /// Largest distance of a step state from its record product form.
    pub product_residual: f64,
    /// Some record overlap below one forces orthogonal originals.
    pub dichotomy: bool,
    pub trace_drift: f64,
    pub purity_drift: f64,
}

impl RecordOrthogonalityReport {
    pub fn satisfied(&self) -> bool {
        self.dichotomy && self.steps.iter().all(|s| s.satisfied)
    }
}

fn check_same_chain(run_u: &ChainRun, run_v: &ChainRun) -> Result<()> {
    if run_u.initial.dims() != run_v.initial.dims() {
        return Err(Error::MismatchedChains("composite layouts differ".into()));
    }
    if run_u.steps.len() != run_v.steps.len() || run_u.unitaries.len() != run_v.unitaries.len() {
        return Err(Error::MismatchedChains("different numbers of copy steps".into()));
    }
    if run_u.steps.len() != run_u.unitaries.len() {
        return Err(Error::MismatchedChains("steps and unitaries disagree".into()));
    }
    for (j, (a, b)) in run_u.unitaries.iter().zip(&run_v.unitaries).enumerate() {
        if a.dims() != b.dims() || max_abs(&(a.matrix() - b.matrix())) > TOL_ALG {
            return Err(Error::MismatchedChains(format!("copy step {j} differs")));
        }
    }
    Ok(())
}

/// Checks the record bookkeeping `Tr ρ^u ρ^v = Tr ρ̃^u ρ̃^v · Π_i Tr rec_i^u rec_i^v`
/// after every step of two chain runs, and the dichotomy that any imperfect
/// record overlap forces orthogonal originals.
///
/// After step `j` each run must be in the product form
/// `ρ̃ ⊗ rec_1 ⊗ … ⊗ rec_j ⊗ rest`; otherwise the chain does not deposit
/// records and [`Error::NotRecordPreserving`] is returned.
pub fn verify_record_orthogonality(
    rho_u: &DensityOperator,
    rho_v: &DensityOperator,
    run_u: &ChainRun,
    run_v: &ChainRun,
) -> Result<RecordOrthogonalityReport> {
    check_same_chain(run_u, run_v)?;
    for (rho, run) in [(rho_u, run_u), (rho_v, run_v)] {
        let start = partial_trace(&run.initial, &[0])?;
        check_dim(start.dim(), rho.dim())?;
        if hs_distance(&start, rho)? > TOL_ALG {
            return Err(Error::MismatchedChains(
                "run does not start from the given system state".into(),
            ));
        }
    }
    let system_overlap = hs_inner(rho_u, rho_v)?;
    let factors = run_u.initial.dims().len();
    let mut steps = Vec::with_capacity(run_u.steps.len());
    let mut record_overlaps = Vec::with_capacity(run_u.steps.len());
    let mut product_residual: f64 = 0.0;
    for (j, (su, sv)) in run_u.steps.iter().zip(&run_v.steps).enumerate() {
        let recorded = j + 1;
        if recorded + 1 > factors {
            return Err(Error::MismatchedChains("more steps than apparatuses".into()));
        }
        let mut marginals = Vec::with_capacity(2);
        for state in [su, sv] {
            let mut parts = Vec::with_capacity(recorded + 2);
            for f in 0..=recorded {
                parts.push(partial_trace(state, &[f])?.matrix().clone());
            }
            let rest: Vec<usize> = (recorded + 1..factors).collect();
            let mut product = parts[0].clone();
            for p in &parts[1..] {
                product = kron(&product, p);
            }
            if !rest.is_empty() {
                product = kron(&product, partial_trace(state, &rest)?.matrix());
            }
            let residual = frobenius_distance(state.matrix(), &product);
            if residual > TOL_ALG {
                return Err(Error::NotRecordPreserving { residual });
            }
            product_residual = product_residual.max(residual);
            marginals.push(parts);
        }
        let (mu, mv) = (&marginals[0], &marginals[1]);
        let overlaps: Vec<f64> = (1..=recorded)
            .map(|f| trace_of_product(&mu[f], &mv[f]).re)
            .collect();
        let rhs = trace_of_product(&mu[0], &mv[0]).re * overlaps.iter().product::<f64>();
        steps.push(IdentityReport::compare_real(system_overlap, rhs));
        record_overlaps.push(overlaps[j]);
    }
    let dichotomy = record_overlaps.iter().all(|&o| o >= 1.0 - TOL_ALG) || system_overlap < TOL_ALG;
    let mut trace_drift: f64 = 0.0;
    let mut purity_drift: f64 = 0.0;
    for run in [run_u, run_v] {
        let a = run.initial.matrix();
        let b = run.final_state().matrix();
        trace_drift = trace_drift.max((trace(b) - trace(a)).norm());
        purity_drift = purity_drift
            .max((trace_of_product(b, b).re - trace_of_product(a, a).re).abs());
    }
    Ok(RecordOrthogonalityReport {
        system_overlap,
        steps,
        record_overlaps,
        product_residual,
        dichotomy,
        trace_drift,
        purity_drift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversarialRecordReport {
    pub system_overlap: f64,
    /// Largest tag distinguishability `½‖ρ_A^u − ρ_A^v‖²_F` found.
    pub max_distinguishability: f64,
    /// `Tr ρ_A^u ρ_A^v` at the best coupling.
    pub record_overlap: f64,
    pub feasibility_residuals: Vec<NamedResidual>,
    /// Every residual below `TOL_OPT`.
    pub feasible: bool,
    pub trials: usize,
    pub budget_exhausted: bool,
    pub witness: UnitaryOperator,
}

/// Searches couplings on `S ⊗ A` (apparatus ready in `|0⟩`) that deposit
/// distinguishable pure records of `ρ^u` and `ρ^v` while keeping each inside
/// its own support.
pub fn adversarial_record_search(
    rho_u: &DensityOperator,
    rho_v: &DensityOperator,
    apparatus_dim: usize,
    config: &OptimizationConfig,
) -> Result<AdversarialRecordReport> {
    let problem = RepeatableCopyProblem::new(rho_u, rho_v, apparatus_dim)?;
    let result = maximize(&problem, config)?;
    let witness = result
        .witness()
        .with_dims(CompositeDims::new(vec![rho_u.dim(), apparatus_dim])?)?;
    let [(_, ru), (_, rv)] = problem.records(witness.matrix());
    let feasible = result.constraint_residuals.iter().all(|r| r.value < TOL_OPT);
    Ok(AdversarialRecordReport {
        system_overlap: hs_inner(rho_u, rho_v)?,
        max_distinguishability: result.objective,
        record_overlap: trace_of_product(&ru, &rv).re,
        feasibility_residuals: result.constraint_residuals,
        feasible,
        trials: result.restarts,
        budget_exhausted: result.budget_exhausted,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionabilityStatus {
    Actionable,
    NotActionable,
    /// The search never met the product-form constraint.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionabilityVerdict {
    pub status: ActionabilityStatus,
    /// `best_score > THR_ACTION` and both residuals below `TOL_PROD`.
    pub actionable: bool,
    /// `Tr τ_0² − Tr τ_u τ_v` at the best coupling.
    pub best_score: f64,
    pub penalized_score: f64,
    pub product_residual: f64,
    pub spectrum_residual: f64,
    /// Coupling on `A^(k) ⊗ T`.
    pub witness_unitary: UnitaryOperator,
    pub trials: usize,
    pub iterations_used: usize,
    pub budget_exhausted: bool,
    /// `Tr ρ_S^u ρ_S^v` of the first factors of the composites.
    pub system_overlap: f64,
    /// An actionable verdict comes with orthogonal system states.
    pub consistent_with_orthogonality: bool,
    pub trace_drift: f64,
    pub purity_drift: f64,
}

/// Searches couplings between factor `k` of the composites and a fresh test
/// system `T` (dimension `test_dim`, prepared in `|0⟩`) that turn the record
/// into distinct test-system states while leaving `T` in a product with
/// everything else.
pub fn actionability_test(
    composite_u: &DensityOperator,
    composite_v: &DensityOperator,
    k: usize,
    test_dim: usize,
    config: &OptimizationConfig,
) -> Result<ActionabilityVerdict> {
    let problem = ActionabilityProblem::new(composite_u, composite_v, k, test_dim)?;
    let result = maximize(&problem, config)?;
    let local = CompositeDims::new(vec![composite_u.dims().factor(k)?, test_dim])?;
    let witness = result.witness().with_dims(local)?;
    let product_residual = result.residual("product").unwrap_or(f64::INFINITY);
    let spectrum_residual = result.residual("spectrum").unwrap_or(f64::INFINITY);
    let feasible = product_residual < TOL_PROD && spectrum_residual < TOL_PROD;
    let status = if !feasible {
        ActionabilityStatus::Inconclusive
    } else if result.objective > THR_ACTION {
        ActionabilityStatus::Actionable
    } else {
        ActionabilityStatus::NotActionable
    };
    let actionable = status == ActionabilityStatus::Actionable;

    let mut trace_drift: f64 = 0.0;
    let mut purity_drift: f64 = 0.0;
    for (omega, before) in problem
        .outputs(witness.matrix())
        .iter()
        .zip([composite_u, composite_v])
    {
        let b = before.matrix();
        trace_drift = trace_drift.max((trace(omega) - trace(b)).norm());
        purity_drift = purity_drift
            .max((trace_of_product(omega, omega).re - trace_of_product(b, b).re).abs());
    }
    let system_overlap = hs_inner(
        &partial_trace(composite_u, &[0])?,
        &partial_trace(composite_v, &[0])?,
    )?;
    Ok(ActionabilityVerdict {
        status,
        actionable,
        best_score: result.objective,
        penalized_score: result.best_score,
        product_residual,
        spectrum_residual,
        witness_unitary: witness,
        trials: result.restarts,
        iterations_used: result.iterations_used,
        budget_exhausted: result.budget_exhausted,
        system_overlap,
        consistent_with_orthogonality: !actionable || system_overlap < TOL_ALG,
        trace_drift,
        purity_drift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixturesReport {
    /// `[a, b, c, d]`.
    pub coefficients: [f64; 4],
    /// `(a,b),(c,d)` is `(1,0),(0,1)` or `(0,1),(1,0)`.
    pub trivial: bool,
    pub verdict: ActionabilityVerdict,
    /// Trivial mixtures are actionable; all others score below `TOL_OPT`.
    pub consistent: bool,
}

fn check_weights(name: &str, (x, y): (f64, f64)) -> Result<()> {
    let ok = x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0 && (x + y - 1.0).abs() <= TOL_ALG;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidCoefficients(format!(
            "{name} = ({x}, {y}) must be nonnegative and sum to 1"
        )))
    }
}

/// Tests actionability of `aρ_u + bρ_v` against `cρ_u + dρ_v` for
/// orthogonal, individually actionable records `ρ_u`, `ρ_v`.
pub fn mixtures_dont_mix_check(
    rho_u: &DensityOperator,
    rho_v: &DensityOperator,
    ab: (f64, f64),
    cd: (f64, f64),
    config: &OptimizationConfig,
) -> Result<MixturesReport> {
    check_dim(rho_u.dim(), rho_v.dim())?;
    let overlap = hs_inner(rho_u, rho_v)?;
    if overlap >= TOL_ALG {
        return Err(Error::NotOrthogonal { overlap });
    }
    check_weights("(a, b)", ab)?;
    check_weights("(c, d)", cd)?;
    let single = CompositeDims::single(rho_u.dim());
    let (ru, rv) = (rho_u.with_dims(single.clone())?, rho_v.with_dims(single)?);
    let rho_ab = DensityOperator::mixture(&[(ab.0, &ru), (ab.1, &rv)])?;
    let rho_cd = DensityOperator::mixture(&[(cd.0, &ru), (cd.1, &rv)])?;
    let verdict = actionability_test(&rho_ab, &rho_cd, 0, 2, config)?;
    let is = |p: (f64, f64), x: f64, y: f64| (p.0 - x).abs() < TOL_ALG && (p.1 - y).abs() < TOL_ALG;
    let trivial = (is(ab, 1.0, 0.0) && is(cd, 0.0, 1.0)) || (is(ab, 0.0, 1.0) && is(cd, 1.0, 0.0));
    let consistent = if trivial {
        verdict.actionable
    } else {
        !verdict.actionable && verdict.best_score < TOL_OPT
    };
    Ok(MixturesReport {
        coefficients: [ab.0, ab.1, cd.0, cd.1],
        trivial,
        verdict,
        consistent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurifiedReport {
    /// `⟨Γ_u|Γ_v⟩` against `Σ_k s_k² ⟨σ_k^u|σ_k^v⟩`.
    pub identity: IdentityReport,
    pub schmidt_weights: Vec<f64>,
    /// The summands `s_k² ⟨σ_k^u|σ_k^v⟩`.
    pub terms: Vec<C64>,
    /// The purifications are orthogonal, so their records could be copied.
    pub copyable: bool,
}

/// Compares `⟨Γ_u|Γ_v⟩` with its Schmidt-sum form for two states on `S ⊗ S′`
/// whose purifier marginals agree. `σ_k^v = (1 ⊗ ⟨σ′_k|)Γ_v / s_k` uses the
/// purifier basis of `Γ_u`.
pub fn purified_orthogonality(gamma_u: &StateVector, gamma_v: &StateVector) -> Result<PurifiedReport> {
    if gamma_u.dims() != gamma_v.dims() {
        return Err(Error::DimensionMismatch {
            expected: gamma_u.dim(),
            found: gamma_v.dim(),
        });
    }
    if gamma_u.dims().len() != 2 {
        return Err(Error::InvalidBipartition(format!(
            "expected S ⊗ S′, found {} factors",
            gamma_u.dims().len()
        )));
    }
    let purifier_u = partial_trace(&gamma_u.projector(), &[1])?;
    let purifier_v = partial_trace(&gamma_v.projector(), &[1])?;
    let residual = hs_distance(&purifier_u, &purifier_v)?;
    if residual > TOL_ALG {
        return Err(Error::MismatchedPurifier { residual });
    }
    // every nonzero coefficient: dropping small ones would shift the sum by
    // their size
    let schmidt = schmidt_decompose_with(gamma_u, &[0], 0.0)?;
    let ds = gamma_u.dims().factor(0)?;
    let dp = gamma_u.dims().factor(1)?;
    let gv = gamma_v.amplitudes();
    let mut terms = Vec::with_capacity(schmidt.rank());
    for ((s, su), sp) in schmidt
        .coefficients
        .iter()
        .zip(&schmidt.left_basis)
        .zip(&schmidt.right_basis)
    {
        let prime = sp.amplitudes();
        // s·σ_k^v, kept undivided so tiny coefficients stay harmless
        let scaled = CVector::from_fn(ds, |a, _| {
            (0..dp).fold(ZERO, |acc, b| acc + prime[b].conj() * gv[a * dp + b])
        });
        terms.push(su.amplitudes().dotc(&scaled) * real(*s));
    }
    let lhs = gamma_u.inner(gamma_v)?;
    let rhs = terms.iter().sum();
    Ok(PurifiedReport {
        identity: IdentityReport::compare(lhs, rhs),
        schmidt_weights: schmidt.coefficients.iter().map(|s| s * s).collect(),
        terms,
        copyable: lhs.norm() < TOL_ALG,
    })
}

/// Apparatus records of `|γ_±⟩` on `S ⊗ S′ ⊗ A`, tagged by a global copy:
/// `P_+ ↦ |0⟩`, `P_− ↦ |1⟩`, rest `↦ |0⟩`, apparatus ready in `|0⟩`.
pub fn bell_composites() -> Result<(DensityOperator, DensityOperator, UnitaryOperator)> {
    let plus = qubit::bell(1.0);
    let minus = qubit::bell(-1.0);
    let pp = outer(plus.amplitudes(), plus.amplitudes());
    let pm = outer(minus.amplitudes(), minus.amplitudes());
    let rest = CMatrix::identity(4, 4) - &pp - &pm;
    let dec = RecordDecomposition::new(vec![pp, pm, rest], vec![1.0, -1.0, 0.0])?;
    let tags = TagSpec::new(qubit::ket0(), vec![qubit::ket0(), qubit::ket1(), qubit::ket0()])?;
    let copy = build_controlled_copy(&dec, &tags)?.with_dims(CompositeDims::new(vec![2, 2, 2])?)?;
    let mut out = Vec::with_capacity(2);
    for g in [&plus, &minus] {
        let start = g.tensor(&qubit::ket0()).projector();
        out.push(start.evolve(&copy)?);
    }
    let v = out.pop().expect("two branches");
    let u = out.pop().expect("two branches");
    Ok((u, v, copy))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellReport {
    /// `Tr ρ_+^S ρ_-^S`, equal to 1/2.
    pub reduced_overlap: f64,
    /// `‖ρ_+^S − ρ_-^S‖` before and after the copy.
    pub reduced_distance_before: f64,
    pub reduced_distance_after: f64,
    /// `|⟨γ_+|γ_-⟩|`.
    pub global_overlap: f64,
    /// `Tr ρ_A^+ ρ_A^-` of the records.
    pub tag_overlap: f64,
    /// Actionability of the apparatus record.
    pub record: ActionabilityVerdict,
    /// Actionability of `S` alone.
    pub local: ActionabilityVerdict,
}

/// Tags `|γ_+⟩` against `|γ_-⟩` globally and shows the record is actionable
/// on the apparatus while `S` alone carries nothing actionable.
pub fn bell_phase_demo(config: &OptimizationConfig) -> Result<BellReport> {
    let (cu, cv, _) = bell_composites()?;
    let plus = qubit::bell(1.0);
    let minus = qubit::bell(-1.0);
    let before_u = partial_trace(&plus.projector(), &[0])?;
    let before_v = partial_trace(&minus.projector(), &[0])?;
    let after_u = partial_trace(&cu, &[0])?;
    let after_v = partial_trace(&cv, &[0])?;
    let record = actionability_test(&cu, &cv, 2, 2, config)?;
    let local = actionability_test(&cu, &cv, 0, 2, config)?;
    Ok(BellReport {
        reduced_overlap: hs_inner(&after_u, &after_v)?,
        reduced_distance_before: hs_distance(&before_u, &before_v)?,
        reduced_distance_after: hs_distance(&after_u, &after_v)?,
        global_overlap: plus.inner(&minus)?.norm(),
        tag_overlap: hs_inner(&partial_trace(&cu, &[2])?, &partial_trace(&cv, &[2])?)?,
        record,
        local,
    })
}
