//! Two-step sequential measurement: measure `Ŷ` (outcome `k`), evolve with
//! `U_t`, measure `Ẑ` (outcome `l`). The effects
//! `F(k,l) = |y_k⟩⟨y_k| U_t† |z_l⟩⟨z_l| U_t |y_k⟩⟨y_k|` form a POVM.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, CompositeDims, DensityOperator, StateVector, UnitaryOperator, TOL_ALG};
use crate::linalg::{
    commutator, hermitian_eigenvalues, hermitian_function, hermiticity_residual, max_abs, outer,
    real, trace_of_product, CMatrix, C64,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub outcome: (usize, usize),
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialMeasurement {
    y_basis: Vec<StateVector>,
    z_basis: Vec<StateVector>,
    evolution: UnitaryOperator,
    elements: Vec<PovmElement>,
}

fn basis_matrix(name: &str, basis: &[StateVector], dim: usize) -> Result<CMatrix> {
    if basis.len() != dim {
        return Err(Error::InvalidBasis(format!(
            "{name} basis has {} vectors, dimension is {dim}",
            basis.len()
        )));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (k, b) in basis.iter().enumerate() {
        check_dim(dim, b.dim())?;
        m.set_column(k, b.amplitudes());
    }
    let gram = m.adjoint() * &m;
    let residual = max_abs(&(gram - CMatrix::identity(dim, dim)));
    if residual > TOL_ALG {
        return Err(Error::InvalidBasis(format!(
            "{name} basis is not orthonormal (residual {residual:e})"
        )));
    }
    Ok(m)
}

impl SequentialMeasurement {
    pub fn y_basis(&self) -> &[StateVector] {
        &self.y_basis
    }

    pub fn z_basis(&self) -> &[StateVector] {
        &self.z_basis
    }

    pub fn evolution(&self) -> &UnitaryOperator {
        &self.evolution
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.evolution.dim()
    }

    /// `F(k,l)`.
    pub fn element(&self, k: usize, l: usize) -> &CMatrix {
        &self.elements[k * self.dim() + l].matrix
    }

    /// `Σ_k k |b_k⟩⟨b_k|`: an observable with distinct integer labels.
    fn labelled_observable(basis: &[StateVector]) -> CMatrix {
        let d = basis.len();
        basis
            .iter()
            .enumerate()
            .fold(CMatrix::zeros(d, d), |acc, (k, b)| {
                acc + outer(b.amplitudes(), b.amplitudes()) * real(k as f64)
            })
    }

    /// `‖[Ŷ, U_t† Ẑ U_t]‖_max` with eigenvalue labels `0..d−1`.
    pub fn commutator_norm(&self) -> f64 {
        let y = Self::labelled_observable(&self.y_basis);
        let z = Self::labelled_observable(&self.z_basis);
        let u = self.evolution.matrix();
        let heisenberg = u.adjoint() * z * u;
        max_abs(&commutator(&y, &heisenberg))
    }
}

/// Builds the `d²` effects `F(k,l)`, indexed `k·d + l`.
pub fn build_sequential_povm(
    y_basis: Vec<StateVector>,
    z_basis: Vec<StateVector>,
    evolution: UnitaryOperator,
) -> Result<SequentialMeasurement> {
    let d = evolution.dim();
    let residual = evolution.unitarity_residual();
    if residual > TOL_ALG {
        return Err(Error::NotUnitary { residual });
    }
    let y = basis_matrix("y", &y_basis, d)?;
    let z = basis_matrix("z", &z_basis, d)?;
    let u = evolution.matrix();
    let mut elements = Vec::with_capacity(d * d);
    for k in 0..d {
        let yk = y.column(k).into_owned();
        let py = outer(&yk, &yk);
        for l in 0..d {
            let zl = z.column(l).into_owned();
            let heisenberg = u.adjoint() * outer(&zl, &zl) * u;
            elements.push(PovmElement {
                outcome: (k, l),
                matrix: &py * heisenberg * &py,
            });
        }
    }
    Ok(SequentialMeasurement {
        y_basis,
        z_basis,
        evolution,
        elements,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementCheck {
    pub outcome: (usize, usize),
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    /// `‖F² − F‖`, the largest eigenvalue modulus of `F² − F`.
    pub projector_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmValidity {
    pub elements: Vec<ElementCheck>,
    /// `‖Σ F(k,l) − 1‖_max`.
    pub identity_residual: f64,
    pub commutator_norm: f64,
    pub all_projectors: bool,
}

impl PovmValidity {
    pub fn max_hermiticity_residual(&self) -> f64 {
        self.elements.iter().map(|e| e.hermiticity_residual).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| e.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_valid(&self) -> bool {
        self.identity_residual < TOL_ALG
            && self.max_hermiticity_residual() < TOL_ALG
            && self.min_eigenvalue() > -TOL_ALG
    }
}

fn spectral_norm(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn check_povm(m: &SequentialMeasurement) -> PovmValidity {
    let d = m.dim();
    let mut sum = CMatrix::zeros(d, d);
    let elements: Vec<ElementCheck> = m
        .elements
        .iter()
        .map(|e| {
            sum += &e.matrix;
            ElementCheck {
                outcome: e.outcome,
                hermiticity_residual: hermiticity_residual(&e.matrix),
                min_eigenvalue: hermitian_eigenvalues(&e.matrix)
                    .last()
                    .copied()
                    .unwrap_or(0.0),
                projector_residual: spectral_norm(&(&e.matrix * &e.matrix - &e.matrix)),
            }
        })
        .collect();
    let all_projectors = elements.iter().all(|e| e.projector_residual < TOL_ALG);
    PovmValidity {
        identity_residual: max_abs(&(sum - CMatrix::identity(d, d))),
        commutator_norm: m.commutator_norm(),
        all_projectors,
        elements,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeProbability {
    pub k: usize,
    pub l: usize,
    pub p: f64,
}

/// `p(k,l) = Tr F(k,l) ρ₀`, in the order `k·d + l`.
pub fn outcome_probabilities(
    m: &SequentialMeasurement,
    rho0: &DensityOperator,
) -> Result<Vec<OutcomeProbability>> {
    check_dim(m.dim(), rho0.dim())?;
    Ok(m.elements
        .iter()
        .map(|e| OutcomeProbability {
            k: e.outcome.0,
            l: e.outcome.1,
            p: trace_of_product(&e.matrix, rho0.matrix()).re,
        })
        .collect())
}

/// Truncated oscillator preset: `U_t = W† exp(−iθN) W` on `dim` levels,
/// where `N` is the number operator and the columns of `W†` are the
/// eigenvectors of the truncated position `X̂ = (a + a†)/√2`, so that in the
/// eigenbasis of `X̂` the evolution is a rotation of phase space by `θ`.
/// Both measurements use the `X̂` eigenbasis (the computational basis here).
pub fn oscillator_preset(dim: usize, theta: f64) -> Result<SequentialMeasurement> {
    if dim == 0 {
        return Err(Error::InvalidDims("oscillator with no levels".into()));
    }
    let mut x = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        let a = real((n as f64).sqrt() * std::f64::consts::FRAC_1_SQRT_2);
        x[(n - 1, n)] = a;
        x[(n, n - 1)] = a;
    }
    let (_, w_adj) = crate::linalg::hermitian_eigen(&x);
    let mut number = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        number[(n, n)] = real(n as f64);
    }
    let rotation = hermitian_function(&number, |e| C64::new((e * theta).cos(), -(e * theta).sin()));
    let u = w_adj.adjoint() * rotation * &w_adj;
    let evolution = UnitaryOperator::new(u, CompositeDims::single(dim))?;
    let basis = (0..dim)
        .map(|k| StateVector::basis(dim, k))
        .collect::<Result<Vec<_>>>()?;
    build_sequential_povm(basis.clone(), basis, evolution)
}
