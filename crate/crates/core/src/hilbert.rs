//! States, density operators and unitaries on multipartite finite-dimensional
//! spaces, together with the reductions and decompositions used everywhere
//! else: partial traces, Hilbert-Schmidt overlaps, Schmidt decompositions,
//! purifications and Haar/induced-measure sampling.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    self, first_significant_index, frobenius_distance, hermitian_eigen, hermiticity_residual,
    leading_phase, real, trace, trace_of_product, unitarity_residual, CMatrix, CVector, FactorSplit,
    C64, ONE, ZERO,
};

/// Absolute tolerance for every algebraic identity.
pub const TOL_ALG: f64 = 1e-9;

/// Local dimensions of the tensor factors, left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct CompositeDims(Vec<usize>);

impl CompositeDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("no factors".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidDims(format!("factor {pos} has dimension 0")));
        }
        Ok(Self(dims))
    }

    pub fn single(dim: usize) -> Self {
        Self(vec![dim.max(1)])
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn factor(&self, index: usize) -> Result<usize> {
        self.0.get(index).copied().ok_or(Error::InvalidSubsystem {
            index,
            count: self.0.len(),
        })
    }

    pub fn concat(&self, other: &CompositeDims) -> CompositeDims {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        CompositeDims(dims)
    }

    /// Dimensions of the listed factors, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Result<CompositeDims> {
        self.check_indices(indices)?;
        Ok(CompositeDims(indices.iter().map(|&k| self.0[k]).collect()))
    }

    /// Rejects empty, repeated or out-of-range index lists.
    pub fn check_indices(&self, indices: &[usize]) -> Result<()> {
        if indices.is_empty() {
            return Err(Error::InvalidDims("empty subsystem set".into()));
        }
        for (pos, &k) in indices.iter().enumerate() {
            if k >= self.0.len() {
                return Err(Error::InvalidSubsystem {
                    index: k,
                    count: self.0.len(),
                });
            }
            if indices[..pos].contains(&k) {
                return Err(Error::InvalidDims(format!("subsystem {k} listed twice")));
            }
        }
        Ok(())
    }

    /// Factors not listed in `indices`, in ascending order.
    pub fn complement(&self, indices: &[usize]) -> Vec<usize> {
        (0..self.0.len()).filter(|k| !indices.contains(k)).collect()
    }
}

impl<'de> Deserialize<'de> for CompositeDims {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dims = Vec::<usize>::deserialize(deserializer)?;
        CompositeDims::new(dims).map_err(D::Error::custom)
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    dims: CompositeDims,
}

impl StateVector {
    pub fn new(amplitudes: CVector, dims: CompositeDims) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL_ALG {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales `amplitudes` to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: CVector, dims: CompositeDims) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < TOL_ALG {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(amplitudes.unscale(norm), dims)
    }

    pub fn from_amplitudes(amplitudes: &[C64]) -> Result<Self> {
        let dims = CompositeDims::new(vec![amplitudes.len()])?;
        Self::new(CVector::from_column_slice(amplitudes), dims)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        let v: Vec<C64> = amplitudes.iter().map(|&x| real(x)).collect();
        Self::from_amplitudes(&v)
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidSubsystem { index, count: dim });
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self::new(v, CompositeDims::single(dim))
    }

    pub(crate) fn from_parts_unchecked(amplitudes: CVector, dims: CompositeDims) -> Self {
        Self { amplitudes, dims }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &CompositeDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
            dims: self.dims.concat(&other.dims),
        }
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            matrix: linalg::outer(&self.amplitudes, &self.amplitudes),
            dims: self.dims.clone(),
        }
    }

    /// Same amplitudes regrouped into different factors.
    pub fn with_dims(&self, dims: CompositeDims) -> Result<StateVector> {
        check_dim(dims.total(), self.dim())?;
        Ok(StateVector {
            amplitudes: self.amplitudes.clone(),
            dims,
        })
    }
}

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: CompositeDims,
}

impl DensityOperator {
    /// Validates the density-operator invariants. Eigenvalues in
    /// `(-TOL_ALG, 0)` are clipped to zero and the result renormalized.
    pub fn new(matrix: CMatrix, dims: CompositeDims) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_dim(dims.total(), matrix.nrows())?;
        let residual = hermiticity_residual(&matrix);
        if residual > TOL_ALG {
            return Err(Error::NotHermitian { residual });
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TOL_ALG {
            return Err(Error::NotUnitTrace { trace: tr });
        }
        let (values, vectors) = hermitian_eigen(&matrix);
        let min = values.last().copied().unwrap_or(0.0);
        if min <= -TOL_ALG {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        if min < 0.0 {
            let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let n = matrix.nrows();
            let mut scaled = vectors.clone();
            for (k, &lam) in clipped.iter().enumerate() {
                for i in 0..n {
                    scaled[(i, k)] *= real(lam / total);
                }
            }
            let rebuilt = scaled * vectors.adjoint();
            return Ok(Self {
                matrix: rebuilt,
                dims,
            });
        }
        Ok(Self { matrix, dims })
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let dims = CompositeDims::new(vec![matrix.nrows()])?;
        Self::new(matrix, dims)
    }

    pub fn pure(state: &StateVector) -> Self {
        state.projector()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let d = dim.max(1);
        Self {
            matrix: CMatrix::identity(d, d) * real(1.0 / d as f64),
            dims: CompositeDims::single(d),
        }
    }

    /// Diagonal operator with the given (nonnegative, unit-sum) weights.
    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        let d = weights.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &w) in weights.iter().enumerate() {
            m[(i, i)] = real(w);
        }
        Self::from_matrix(m)
    }

    /// `Σ_k p_k ρ_k`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidCoefficients("empty mixture".into()))?;
        let dims = first.1.dims.clone();
        let mut m = CMatrix::zeros(dims.total(), dims.total());
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidCoefficients(format!("negative weight {w}")));
            }
            check_dim(dims.total(), rho.dim())?;
            m += &rho.matrix * real(*w);
        }
        Self::new(m, dims)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &CompositeDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn with_dims(&self, dims: CompositeDims) -> Result<DensityOperator> {
        check_dim(dims.total(), self.dim())?;
        Ok(DensityOperator {
            matrix: self.matrix.clone(),
            dims,
        })
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.matrix, &self.matrix).re
    }

    /// Eigenvalues in nonincreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.matrix)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > tol).count()
    }

    /// Orthogonal projector onto the support (eigenvalues above `tol`).
    pub fn support_projector(&self, tol: f64) -> CMatrix {
        let (values, vectors) = self.eigen();
        let n = self.dim();
        let mut p = CMatrix::zeros(n, n);
        for (k, &lam) in values.iter().enumerate() {
            if lam > tol {
                let v = vectors.column(k).into_owned();
                p += linalg::outer(&v, &v);
            }
        }
        p
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            dims: self.dims.concat(&other.dims),
        }
    }

    /// `U ρ U†`.
    pub fn evolve(&self, unitary: &UnitaryOperator) -> Result<DensityOperator> {
        check_dim(self.dim(), unitary.dim())?;
        Ok(DensityOperator {
            matrix: &unitary.matrix * &self.matrix * unitary.matrix.adjoint(),
            dims: self.dims.clone(),
        })
    }

    /// Evolves with `unitary` acting on the listed factors only.
    pub fn evolve_on(&self, unitary: &UnitaryOperator, targets: &[usize]) -> Result<DensityOperator> {
        self.dims.check_indices(targets)?;
        let local = self.dims.select(targets)?.total();
        check_dim(local, unitary.dim())?;
        let split = FactorSplit::new(self.dims.as_slice(), targets);
        Ok(DensityOperator {
            matrix: linalg::conjugate_on(&self.matrix, &unitary.matrix, &split),
            dims: self.dims.clone(),
        })
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        partial_trace(self, keep)
    }
}

/// Square complex matrix with `U†U = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: CMatrix,
    dims: CompositeDims,
}

impl UnitaryOperator {
    pub fn new(matrix: CMatrix, dims: CompositeDims) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_dim(dims.total(), matrix.nrows())?;
        let residual = unitarity_residual(&matrix);
        if residual > TOL_ALG {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { matrix, dims })
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let dims = CompositeDims::new(vec![matrix.nrows()])?;
        Self::new(matrix, dims)
    }

    pub(crate) fn from_parts_unchecked(matrix: CMatrix, dims: CompositeDims) -> Self {
        Self { matrix, dims }
    }

    pub fn identity(dims: CompositeDims) -> Self {
        let n = dims.total();
        Self {
            matrix: CMatrix::identity(n, n),
            dims,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &CompositeDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn with_dims(&self, dims: CompositeDims) -> Result<UnitaryOperator> {
        check_dim(dims.total(), self.dim())?;
        Ok(UnitaryOperator {
            matrix: self.matrix.clone(),
            dims,
        })
    }

    pub fn adjoint(&self) -> UnitaryOperator {
        UnitaryOperator {
            matrix: self.matrix.adjoint(),
            dims: self.dims.clone(),
        }
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &UnitaryOperator) -> Result<UnitaryOperator> {
        check_dim(self.dim(), other.dim())?;
        Ok(UnitaryOperator {
            matrix: &self.matrix * &other.matrix,
            dims: self.dims.clone(),
        })
    }

    pub fn tensor(&self, other: &UnitaryOperator) -> UnitaryOperator {
        UnitaryOperator {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            dims: self.dims.concat(&other.dims),
        }
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), state.dim())?;
        Ok(StateVector {
            amplitudes: &self.matrix * &state.amplitudes,
            dims: state.dims.clone(),
        })
    }

    /// Lifts `self` (acting on `targets` of `full`, in that order) to the
    /// whole composite space.
    pub fn embed(&self, full: &CompositeDims, targets: &[usize]) -> Result<UnitaryOperator> {
        full.check_indices(targets)?;
        check_dim(full.select(targets)?.total(), self.dim())?;
        Ok(UnitaryOperator {
            matrix: linalg::embed_matrix(&self.matrix, full.as_slice(), targets),
            dims: full.clone(),
        })
    }
}

/// Operand of [`tensor_product`].
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    State(StateVector),
    Density(DensityOperator),
    Unitary(UnitaryOperator),
}

/// Kronecker composition; states compose with states, operators with
/// operators of the same kind.
pub fn tensor_product(a: &Operand, b: &Operand) -> Result<Operand> {
    match (a, b) {
        (Operand::State(x), Operand::State(y)) => Ok(Operand::State(x.tensor(y))),
        (Operand::Density(x), Operand::Density(y)) => Ok(Operand::Density(x.tensor(y))),
        (Operand::Unitary(x), Operand::Unitary(y)) => Ok(Operand::Unitary(x.tensor(y))),
        _ => Err(Error::InvalidDims(
            "tensor product operands must be of the same kind".into(),
        )),
    }
}

/// Reduced operator on the `keep` factors, in the order listed.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    rho.dims.check_indices(keep)?;
    let dims = rho.dims.select(keep)?;
    let matrix = linalg::partial_trace_matrix(&rho.matrix, rho.dims.as_slice(), keep);
    Ok(DensityOperator { matrix, dims })
}

/// `Tr(ρσ)`.
pub fn hs_inner(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    Ok(trace_of_product(&rho.matrix, &sigma.matrix).re)
}

/// Overlap of supports measured by `Tr(ρσ)`; zero exactly when the supports
/// of two positive operators are orthogonal.
pub fn support_overlap(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    hs_inner(rho, sigma)
}

/// Hilbert-Schmidt (Frobenius) distance `‖ρ − σ‖₂`.
pub fn hs_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    Ok(frobenius_distance(&rho.matrix, &sigma.matrix))
}

/// `Σ_k s_k |σ_k⟩|σ'_k⟩` with nonincreasing positive coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<StateVector>,
    pub right_basis: Vec<StateVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Rebuilds the bipartite state with dims `[left, right]` grouped as in
    /// the decomposition.
    pub fn reconstruct(&self) -> StateVector {
        let dl = self.left_basis[0].dim();
        let dr = self.right_basis[0].dim();
        let mut amps = CVector::zeros(dl * dr);
        for ((s, l), r) in self
            .coefficients
            .iter()
            .zip(&self.left_basis)
            .zip(&self.right_basis)
        {
            amps += linalg::kron_vec(l.amplitudes(), r.amplitudes()) * real(*s);
        }
        StateVector {
            amplitudes: amps,
            dims: self.left_basis[0].dims.concat(&self.right_basis[0].dims),
        }
    }
}

/// Schmidt decomposition across the cut `left | rest`.
///
/// Coefficients below `TOL_ALG` are dropped. Ties are ordered by the position
/// of the first significant amplitude of the left vector, and each left
/// vector's first significant amplitude is made real and positive.
pub fn schmidt_decompose(psi: &StateVector, left: &[usize]) -> Result<SchmidtDecomposition> {
    schmidt_decompose_with(psi, left, TOL_ALG)
}

fn phased(s: f64, mut l: CVector, mut r: CVector) -> (f64, CVector, CVector) {
    let phase = leading_phase(&l, 1e-12);
    l *= phase.conj();
    r *= phase;
    (s, l, r)
}

/// [`schmidt_decompose`] keeping every coefficient above `cutoff`.
pub fn schmidt_decompose_with(
    psi: &StateVector,
    left: &[usize],
    cutoff: f64,
) -> Result<SchmidtDecomposition> {
    let dims = psi.dims();
    if dims.len() < 2 {
        return Err(Error::InvalidBipartition(
            "state has a single factor".into(),
        ));
    }
    dims.check_indices(left)
        .map_err(|e| Error::InvalidBipartition(e.to_string()))?;
    let right = dims.complement(left);
    if right.is_empty() {
        return Err(Error::InvalidBipartition(
            "right side of the cut is empty".into(),
        ));
    }
    let left_dims = dims.select(left)?;
    let right_dims = dims.select(&right)?;
    let split = FactorSplit::new(dims.as_slice(), left);
    let (dl, dr) = (split.sub_dim, split.rest_dim);
    let mut m = CMatrix::zeros(dl, dr);
    for r in 0..dr {
        for a in 0..dl {
            m[(a, r)] = psi.amplitudes[split.index(r, a)];
        }
    }
    // Gram eigenvectors on the smaller side form a complete basis there, so
    // the terms sum back to `m` to rounding even with tiny coefficients.
    let mut terms: Vec<(f64, CVector, CVector)> = Vec::new();
    if dl <= dr {
        let (_, basis) = linalg::hermitian_eigen(&(&m * m.adjoint()));
        for k in 0..dl {
            let l = basis.column(k).into_owned();
            let w = (l.adjoint() * &m).transpose();
            let s = w.norm();
            if s <= cutoff {
                continue;
            }
            terms.push(phased(s, l, w.unscale(s)));
        }
    } else {
        let (_, basis) = linalg::hermitian_eigen(&(m.adjoint() * &m));
        for k in 0..dr {
            let v = basis.column(k).into_owned();
            let w = &m * &v;
            let s = w.norm();
            if s <= cutoff {
                continue;
            }
            terms.push(phased(s, w.unscale(s), v.conjugate()));
        }
    }
    terms.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= TOL_ALG {
            first_significant_index(&a.1, 1e-12).cmp(&first_significant_index(&b.1, 1e-12))
        } else {
            b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal)
        }
    });
    let mut decomposition = SchmidtDecomposition {
        coefficients: Vec::with_capacity(terms.len()),
        left_basis: Vec::with_capacity(terms.len()),
        right_basis: Vec::with_capacity(terms.len()),
    };
    for (s, l, r) in terms {
        decomposition.coefficients.push(s);
        decomposition
            .left_basis
            .push(StateVector::from_parts_unchecked(l, left_dims.clone()));
        decomposition
            .right_basis
            .push(StateVector::from_parts_unchecked(r, right_dims.clone()));
    }
    Ok(decomposition)
}

/// Canonical purification `(√ρ ⊗ 1) Σ_j |j⟩|j⟩` on `d ⊗ d`.
///
/// Its Schmidt form is `Σ_k √λ_k |e_k⟩|ē_k⟩` over the eigenbasis of `ρ`.
pub fn purify(rho: &DensityOperator) -> StateVector {
    let d = rho.dim();
    let root = linalg::hermitian_function(&rho.matrix, |x| real(x.max(0.0).sqrt()));
    let mut amps = CVector::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            amps[i * d + j] = root[(i, j)];
        }
    }
    // renormalize away rounding from the clipped square root
    let norm = amps.norm();
    if norm > 0.0 {
        amps.unscale_mut(norm);
    }
    StateVector {
        amplitudes: amps,
        dims: CompositeDims::new(vec![d, d]).expect("d >= 1"),
    }
}

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a stream index (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex Ginibre matrix with entries `(N(0,1) + i N(0,1)) / √2`.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryOperator {
    let d = dim.max(1);
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let diag = r[(k, k)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            ONE
        };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    UnitaryOperator {
        matrix: q,
        dims: CompositeDims::single(d),
    }
}

pub fn random_unitary(dim: usize, seed: u64) -> UnitaryOperator {
    random_unitary_with(dim, &mut rng_from_seed(seed))
}

/// Density operator `G G† / Tr(G G†)` for a `dim × rank` Ginibre `G`.
pub fn random_density_with<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    let g = ginibre(dim, rank, rng);
    let w = &g * g.adjoint();
    let tr = trace(&w).re;
    let mut m = w * real(1.0 / tr);
    // exact Hermitian symmetry
    m = (&m + m.adjoint()) * real(0.5);
    Ok(DensityOperator {
        matrix: m,
        dims: CompositeDims::single(dim),
    })
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_density_with(dim, rank, &mut rng_from_seed(seed))
}

/// Uniformly random pure state on `dims`.
pub fn random_state_with<R: Rng + ?Sized>(dims: &CompositeDims, rng: &mut R) -> StateVector {
    let g = ginibre(dims.total(), 1, rng);
    let v = g.column(0).into_owned();
    let n = v.norm();
    StateVector {
        amplitudes: v.unscale(n),
        dims: dims.clone(),
    }
}

pub fn random_state(dims: &CompositeDims, seed: u64) -> StateVector {
    random_state_with(dims, &mut rng_from_seed(seed))
}

/// Density operator supported inside the span of the orthonormal columns of
/// `basis`: `B ρ_local B†` for a random `ρ_local` of the given rank.
pub fn random_density_in_subspace<R: Rng + ?Sized>(
    basis: &CMatrix,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    let local = random_density_with(basis.ncols(), rank, rng)?;
    let m = basis * local.matrix() * basis.adjoint();
    Ok(DensityOperator {
        matrix: (&m + m.adjoint()) * real(0.5),
        dims: CompositeDims::single(basis.nrows()),
    })
}

/// `|Tr(U†V)|² / d²`, the normalized overlap of two unitaries.
pub fn unitary_fidelity(a: &UnitaryOperator, b: &UnitaryOperator) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let d = a.dim() as f64;
    let tr = trace_of_product(&a.matrix.adjoint(), &b.matrix);
    Ok(tr.norm_sqr() / (d * d))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON form: `{"dims": [...], "amplitudes": [[re, im], ...]}` for states and
// `{"dims": [...], "matrix": [[[re, im], ...], ...]}` (row-major) for operators.

fn pairs_from_vector(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn rows_from_matrix(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn vector_from_pairs(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|p| C64::new(p[0], p[1])))
}

pub(crate) fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        for (j, p) in row.iter().enumerate() {
            m[(i, j)] = C64::new(p[0], p[1]);
        }
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    dims: CompositeDims,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dims: CompositeDims,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            dims: self.dims.clone(),
            amplitudes: pairs_from_vector(&self.amplitudes),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = StateRepr::deserialize(deserializer)?;
        StateVector::new(vector_from_pairs(&repr.amplitudes), repr.dims).map_err(D::Error::custom)
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorRepr {
            dims: self.dims.clone(),
            matrix: rows_from_matrix(&self.matrix),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(deserializer)?;
        let m = matrix_from_rows(&repr.matrix).map_err(D::Error::custom)?;
        DensityOperator::new(m, repr.dims).map_err(D::Error::custom)
    }
}

impl Serialize for UnitaryOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorRepr {
            dims: self.dims.clone(),
            matrix: rows_from_matrix(&self.matrix),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitaryOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(deserializer)?;
        let m = matrix_from_rows(&repr.matrix).map_err(D::Error::custom)?;
        UnitaryOperator::new(m, repr.dims).map_err(D::Error::custom)
    }
}

/// Common single-qubit objects.
pub mod qubit {
    use super::*;

    pub fn ket0() -> StateVector {
        StateVector::basis(2, 0).expect("valid basis index")
    }

    pub fn ket1() -> StateVector {
        StateVector::basis(2, 1).expect("valid basis index")
    }

    pub fn plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[h, h]).expect("normalized")
    }

    pub fn minus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[h, -h]).expect("normalized")
    }

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    /// Controlled-NOT with the first factor as control.
    pub fn cnot() -> UnitaryOperator {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        UnitaryOperator::from_parts_unchecked(m, CompositeDims(vec![2, 2]))
    }

    /// `(|00⟩ ± |11⟩)/√2`.
    pub fn bell(sign: f64) -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = CVector::from_column_slice(&[real(h), ZERO, ZERO, real(sign.signum() * h)]);
        StateVector::from_parts_unchecked(amps, CompositeDims(vec![2, 2]))
    }
}
