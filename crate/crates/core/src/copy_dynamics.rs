//! Controlled information-transfer ("tagging") unitaries and chains of copy
//! steps across several apparatuses.
//!
//! A copy step couples the system `S` to one apparatus `A`. Each record
//! subspace `range(P_k)` of `S` is tagged by rotating the apparatus ready
//! state `|A_0⟩` into `|A_k⟩`; states inside a record subspace may be
//! disturbed by a unitary `D_k` that never leaves that subspace.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::hilbert::{
    check_dim, hs_inner, partial_trace, random_state_with, random_unitary_with, CompositeDims,
    DensityOperator, StateVector, UnitaryOperator, TOL_ALG,
};
use crate::linalg::{self, hermiticity_residual, max_abs, real, CMatrix, CVector, C64, ONE};

/// Observable `Σ_k o_k P_k` with optional intra-subspace disturbances.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordDecomposition {
    projectors: Vec<CMatrix>,
    labels: Vec<f64>,
    disturbances: Option<Vec<CMatrix>>,
}

impl RecordDecomposition {
    /// Validates orthogonality, idempotence and completeness of the
    /// projectors. Incomplete decompositions are rejected.
    pub fn new(projectors: Vec<CMatrix>, labels: Vec<f64>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::InvalidDecomposition("no projectors".into()))?;
        let d = first.nrows();
        if labels.len() != projectors.len() {
            return Err(Error::InvalidDecomposition(format!(
                "{} labels for {} projectors",
                labels.len(),
                projectors.len()
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidDecomposition(format!("label {a} repeated")));
            }
        }
        let mut sum = CMatrix::zeros(d, d);
        for (k, p) in projectors.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::InvalidDecomposition(format!(
                    "projector {k} is not {d}x{d}"
                )));
            }
            if hermiticity_residual(p) > TOL_ALG || max_abs(&(p * p - p)) > TOL_ALG {
                return Err(Error::InvalidDecomposition(format!(
                    "P_{k} is not an orthogonal projector"
                )));
            }
            for (j, q) in projectors[..k].iter().enumerate() {
                if max_abs(&(q * p)) > TOL_ALG {
                    return Err(Error::InvalidDecomposition(format!(
                        "P_{j} and P_{k} are not orthogonal"
                    )));
                }
            }
            sum += p;
        }
        if max_abs(&(sum - CMatrix::identity(d, d))) > TOL_ALG {
            return Err(Error::InvalidDecomposition(
                "projectors do not sum to the identity".into(),
            ));
        }
        Ok(Self {
            projectors,
            labels,
            disturbances: None,
        })
    }

    /// Builds `P_k = B_k B_k†` from orthonormal column bases, labelled `0, 1, …`.
    pub fn from_subspaces(bases: &[CMatrix]) -> Result<Self> {
        let projectors = bases.iter().map(|b| b * b.adjoint()).collect();
        let labels = (0..bases.len()).map(|k| k as f64).collect();
        Self::new(projectors, labels)
    }

    /// Rank-one projectors onto the computational basis of dimension `dim`.
    pub fn computational(dim: usize) -> Self {
        let projectors = (0..dim)
            .map(|k| {
                let mut p = CMatrix::zeros(dim, dim);
                p[(k, k)] = ONE;
                p
            })
            .collect();
        Self {
            projectors,
            labels: (0..dim).map(|k| k as f64).collect(),
            disturbances: None,
        }
    }

    /// Attaches one disturbance unitary per record subspace. Each must commute
    /// with its projector and act as the identity outside its range.
    pub fn with_disturbances(mut self, disturbances: Vec<CMatrix>) -> Result<Self> {
        if disturbances.len() != self.projectors.len() {
            return Err(Error::InvalidDecomposition(format!(
                "{} disturbances for {} projectors",
                disturbances.len(),
                self.projectors.len()
            )));
        }
        let d = self.dim();
        let id = CMatrix::identity(d, d);
        for (k, (dk, pk)) in disturbances.iter().zip(&self.projectors).enumerate() {
            if dk.nrows() != d || dk.ncols() != d {
                return Err(Error::InvalidDecomposition(format!(
                    "disturbance {k} is not {d}x{d}"
                )));
            }
            if linalg::unitarity_residual(dk) > TOL_ALG {
                return Err(Error::InvalidDecomposition(format!(
                    "disturbance {k} is not unitary"
                )));
            }
            if max_abs(&linalg::commutator(dk, pk)) > TOL_ALG {
                return Err(Error::InvalidDecomposition(format!(
                    "disturbance {k} leaves its record subspace"
                )));
            }
            let outside = &id - pk;
            if max_abs(&(dk * &outside - &outside)) > TOL_ALG {
                return Err(Error::InvalidDecomposition(format!(
                    "disturbance {k} acts outside its record subspace"
                )));
            }
        }
        self.disturbances = Some(disturbances);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, k: usize) -> &CMatrix {
        &self.projectors[k]
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn label(&self, k: usize) -> f64 {
        self.labels[k]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// `D_k`, or the identity when no disturbance was attached.
    pub fn disturbance(&self, k: usize) -> CMatrix {
        match &self.disturbances {
            Some(ds) => ds[k].clone(),
            None => CMatrix::identity(self.dim(), self.dim()),
        }
    }

    pub fn has_disturbances(&self) -> bool {
        self.disturbances.is_some()
    }

    /// `ô = Σ_k o_k P_k`.
    pub fn observable(&self) -> CMatrix {
        let d = self.dim();
        self.projectors
            .iter()
            .zip(&self.labels)
            .fold(CMatrix::zeros(d, d), |acc, (p, &o)| acc + p * real(o))
    }

    /// Index of the record subspace containing the whole support of `rho`, if
    /// any.
    pub fn locate(&self, rho: &DensityOperator) -> Option<usize> {
        if rho.dim() != self.dim() {
            return None;
        }
        self.projectors.iter().position(|p| {
            let weight = linalg::trace_of_product(p, rho.matrix()).re;
            (1.0 - weight).abs() < TOL_ALG
        })
    }

    pub fn locate_state(&self, state: &StateVector) -> Option<usize> {
        self.locate(&state.projector())
    }
}

/// `B Q B† + (1 − B B†)`: a local unitary `Q` on the subspace spanned by the
/// orthonormal columns of `basis`, extended by the identity.
pub fn embed_disturbance(basis: &CMatrix, local: &CMatrix) -> CMatrix {
    let d = basis.nrows();
    let p = basis * basis.adjoint();
    basis * local * basis.adjoint() + (CMatrix::identity(d, d) - p)
}

/// Apparatus ready state `|A_0⟩` and one tag `|A_k⟩` per record subspace.
///
/// Tags need not be mutually orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TagSpec {
    ready: StateVector,
    tags: Vec<StateVector>,
}

impl TagSpec {
    pub fn new(ready: StateVector, tags: Vec<StateVector>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::InvalidTags("no tag states".into()));
        }
        for (k, t) in tags.iter().enumerate() {
            if t.dim() != ready.dim() {
                return Err(Error::InvalidTags(format!(
                    "tag {k} has dimension {}, ready state has {}",
                    t.dim(),
                    ready.dim()
                )));
            }
        }
        Ok(Self { ready, tags })
    }

    /// Computational-basis tags `|k⟩` with ready state `|0⟩`.
    pub fn basis(apparatus_dim: usize, count: usize) -> Result<Self> {
        let ready = StateVector::basis(apparatus_dim, 0)?;
        let tags = (0..count)
            .map(|k| StateVector::basis(apparatus_dim, k % apparatus_dim))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ready, tags)
    }

    pub fn ready(&self) -> &StateVector {
        &self.ready
    }

    pub fn tags(&self) -> &[StateVector] {
        &self.tags
    }

    pub fn dim(&self) -> usize {
        self.ready.dim()
    }
}

/// Canonical unitary `W` with `W|from⟩ = |to⟩`.
///
/// It reflects inside `span{|from⟩, |to⟩}` and is the identity on the
/// orthogonal complement of that plane. When the two states are parallel it
/// only attaches the relative phase to the `|from⟩` ray.
pub fn ray_rotation(from: &CVector, to: &CVector) -> CMatrix {
    let d = from.len();
    let id = CMatrix::identity(d, d);
    let c: C64 = from.dotc(to);
    let residual = to - from * c;
    let s = residual.norm();
    if s < 1e-13 {
        let phase = if c.norm() > 0.0 { c / c.norm() } else { ONE };
        return &id + linalg::outer(from, from) * (phase - ONE);
    }
    let e2 = residual.unscale(s);
    let e1 = from;
    // reflection [[c, s], [s, -c̄]] in the (e1, e2) basis
    let sr = real(s);
    &id - linalg::outer(e1, e1) - linalg::outer(&e2, &e2)
        + linalg::outer(e1, e1) * c
        + linalg::outer(&e2, e1) * sr
        + linalg::outer(e1, &e2) * sr
        - linalg::outer(&e2, &e2) * c.conj()
}

/// `V = Σ_k (D_k P_k) ⊗ W_k` on `S ⊗ A`, with `W_k|A_0⟩ = |A_k⟩`.
pub fn build_controlled_copy(
    decomposition: &RecordDecomposition,
    tags: &TagSpec,
) -> Result<UnitaryOperator> {
    if tags.tags.len() != decomposition.len() {
        return Err(Error::InvalidTags(format!(
            "{} tags for {} record subspaces",
            tags.tags.len(),
            decomposition.len()
        )));
    }
    let ds = decomposition.dim();
    let da = tags.dim();
    let ready = tags.ready.amplitudes();
    let mut v = CMatrix::zeros(ds * da, ds * da);
    for (k, tag) in tags.tags.iter().enumerate() {
        let w = ray_rotation(ready, tag.amplitudes());
        let dp = decomposition.disturbance(k) * decomposition.projector(k);
        v += linalg::kron(&dp, &w);
    }
    let dims = CompositeDims::new(vec![ds, da])?;
    let residual = linalg::unitarity_residual(&v);
    if residual > TOL_ALG {
        return Err(Error::NotUnitary { residual });
    }
    Ok(UnitaryOperator::from_parts_unchecked(v, dims))
}

/// Layout of a copy chain: `S ⊗ A ⊗ A′ ⊗ … [⊗ E]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CopyChain {
    system_dim: usize,
    apparatus_dims: Vec<usize>,
    environment: Option<DensityOperator>,
    decomposition: RecordDecomposition,
    tags: Vec<TagSpec>,
}

impl CopyChain {
    pub fn new(decomposition: RecordDecomposition, tags: Vec<TagSpec>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::InvalidTags("chain has no apparatus".into()));
        }
        for (i, t) in tags.iter().enumerate() {
            if t.tags.len() != decomposition.len() {
                return Err(Error::InvalidTags(format!(
                    "apparatus {i} has {} tags for {} record subspaces",
                    t.tags.len(),
                    decomposition.len()
                )));
            }
        }
        Ok(Self {
            system_dim: decomposition.dim(),
            apparatus_dims: tags.iter().map(TagSpec::dim).collect(),
            environment: None,
            decomposition,
            tags,
        })
    }

    /// Appends an environment factor that copy steps leave untouched.
    pub fn with_environment(mut self, environment: DensityOperator) -> Self {
        self.environment = Some(environment);
        self
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn apparatus_dims(&self) -> &[usize] {
        &self.apparatus_dims
    }

    pub fn environment_dim(&self) -> Option<usize> {
        self.environment.as_ref().map(DensityOperator::dim)
    }

    pub fn decomposition(&self) -> &RecordDecomposition {
        &self.decomposition
    }

    pub fn tags(&self) -> &[TagSpec] {
        &self.tags
    }

    pub fn steps(&self) -> usize {
        self.tags.len()
    }

    /// Factor index of apparatus `k` in the composite space.
    pub fn apparatus_factor(&self, k: usize) -> usize {
        1 + k
    }

    pub fn dims(&self) -> CompositeDims {
        let mut dims = vec![self.system_dim];
        dims.extend_from_slice(&self.apparatus_dims);
        if let Some(e) = self.environment_dim() {
            dims.push(e);
        }
        CompositeDims::new(dims).expect("chain dimensions are positive")
    }

    /// `ρ_S ⊗ |A_0⟩⟨A_0| ⊗ |A′_0⟩⟨A′_0| ⊗ … [⊗ ρ_E]`.
    pub fn initial_state(&self, system: &DensityOperator) -> Result<DensityOperator> {
        check_dim(self.system_dim, system.dim())?;
        let mut state = system.with_dims(CompositeDims::single(self.system_dim))?;
        for t in &self.tags {
            state = state.tensor(&t.ready.projector());
        }
        if let Some(env) = &self.environment {
            state = state.tensor(&env.with_dims(CompositeDims::single(env.dim()))?);
        }
        state.with_dims(self.dims())
    }

    /// The copy unitary of step `k` on `S ⊗ A^(k)`.
    pub fn step_unitary(&self, k: usize) -> Result<UnitaryOperator> {
        build_controlled_copy(&self.decomposition, &self.tags[k])
    }
}

/// Composite states produced by [`run_copy_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub initial: DensityOperator,
    /// State after each copy step `a, b, c, …`.
    pub steps: Vec<DensityOperator>,
    /// Copy unitaries, one per step, on `S ⊗ A^(k)`.
    pub unitaries: Vec<UnitaryOperator>,
}

impl ChainRun {
    pub fn final_state(&self) -> &DensityOperator {
        self.steps.last().unwrap_or(&self.initial)
    }
}

/// Applies the copy steps in sequence, each on `S ⊗ A^(k)` and identity on
/// every other factor.
pub fn run_copy_chain(initial: &DensityOperator, chain: &CopyChain) -> Result<ChainRun> {
    let start = chain.initial_state(initial)?;
    let mut state = start.clone();
    let mut steps = Vec::with_capacity(chain.steps());
    let mut unitaries = Vec::with_capacity(chain.steps());
    for k in 0..chain.steps() {
        let v = chain.step_unitary(k)?;
        state = state.evolve_on(&v, &[0, chain.apparatus_factor(k)])?;
        steps.push(state.clone());
        unitaries.push(v);
    }
    Ok(ChainRun {
        initial: start,
        steps,
        unitaries,
    })
}

/// Reduced state of apparatus `k`.
pub fn extract_record(
    composite: &DensityOperator,
    chain: &CopyChain,
    k: usize,
) -> Result<DensityOperator> {
    if k >= chain.steps() {
        return Err(Error::InvalidSubsystem {
            index: k,
            count: chain.steps(),
        });
    }
    check_dim(chain.dims().total(), composite.dim())?;
    let composite = composite.with_dims(chain.dims())?;
    partial_trace(&composite, &[chain.apparatus_factor(k)])
}

/// `Tr(ρ_u ρ_v)` of two records; `|⟨A_u|A_v⟩|²` for pure records.
pub fn record_overlap(rec_u: &DensityOperator, rec_v: &DensityOperator) -> Result<f64> {
    hs_inner(rec_u, rec_v)
}

/// Couples a system to an apparatus in a (possibly mixed) ready state with a
/// caller-supplied unitary on `S ⊗ A`: `U (ρ_S ⊗ ρ_{0A}) U†`.
pub fn mixed_copy(
    system: &DensityOperator,
    ready: &DensityOperator,
    coupling: &UnitaryOperator,
) -> Result<DensityOperator> {
    let joint = system
        .with_dims(CompositeDims::single(system.dim()))?
        .tensor(&ready.with_dims(CompositeDims::single(ready.dim()))?);
    check_dim(joint.dim(), coupling.dim())?;
    joint.evolve(coupling)
}

/// `|s⟩|a⟩ ↦ |s⟩|a + s·step mod d_A⟩`: copies the computational basis of the
/// system into shifts of the apparatus.
pub fn controlled_shift(system_dim: usize, apparatus_dim: usize, step: usize) -> Result<UnitaryOperator> {
    let dims = CompositeDims::new(vec![system_dim, apparatus_dim])?;
    let n = dims.total();
    let mut m = CMatrix::zeros(n, n);
    for s in 0..system_dim {
        for a in 0..apparatus_dim {
            let b = (a + s * step) % apparatus_dim;
            m[(s * apparatus_dim + b, s * apparatus_dim + a)] = ONE;
        }
    }
    Ok(UnitaryOperator::from_parts_unchecked(m, dims))
}

/// Record with a mixed apparatus that may decohere into an environment:
/// `(1 ⊗ U_AE)(U_SA ⊗ 1)(ρ_S ⊗ ρ_0A ⊗ ρ_0E)(U_SA ⊗ 1)†(1 ⊗ U_AE)†` on
/// `S ⊗ A ⊗ E`, or `U_SA (ρ_S ⊗ ρ_0A) U_SA†` on `S ⊗ A` without environment.
pub fn mixed_record_composite(
    system: &DensityOperator,
    ready: &DensityOperator,
    coupling: &UnitaryOperator,
    environment: Option<(&DensityOperator, &UnitaryOperator)>,
) -> Result<DensityOperator> {
    let sa = mixed_copy(system, ready, coupling)?
        .with_dims(CompositeDims::new(vec![system.dim(), ready.dim()])?)?;
    match environment {
        None => Ok(sa),
        Some((env, decoherence)) => {
            let joint = sa.tensor(&env.with_dims(CompositeDims::single(env.dim()))?);
            joint.evolve_on(decoherence, &[1, 2])
        }
    }
}

/// Random complete decomposition of a `dim`-dimensional system into between
/// 2 and `dim` record subspaces (a single one when `dim == 1`) spanned by
/// columns of a Haar unitary, each carrying a Haar disturbance.
pub fn random_decomposition_with<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<(RecordDecomposition, Vec<CMatrix>)> {
    if dim == 0 {
        return Err(Error::InvalidDims("system dimension 0".into()));
    }
    let blocks = if dim == 1 { 1 } else { rng.random_range(2..=dim) };
    // random composition of `dim` into `blocks` positive parts
    let mut cuts: Vec<usize> = (1..dim).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(blocks - 1).collect();
    cuts.sort_unstable();
    cuts.push(dim);
    let q = random_unitary_with(dim, rng);
    let mut bases = Vec::with_capacity(blocks);
    let mut start = 0;
    for end in cuts {
        bases.push(q.matrix().columns(start, end - start).into_owned());
        start = end;
    }
    let disturbances = bases
        .iter()
        .map(|b| embed_disturbance(b, random_unitary_with(b.ncols(), rng).matrix()))
        .collect();
    let dec = RecordDecomposition::from_subspaces(&bases)?.with_disturbances(disturbances)?;
    Ok((dec, bases))
}

/// Random pure state inside the subspace spanned by the orthonormal columns
/// of `basis`.
pub fn random_state_in<R: Rng + ?Sized>(basis: &CMatrix, rng: &mut R) -> StateVector {
    let local = random_state_with(&CompositeDims::single(basis.ncols()), rng);
    let amps = basis * local.amplitudes();
    StateVector::from_parts_unchecked(amps, CompositeDims::single(basis.nrows()))
}
