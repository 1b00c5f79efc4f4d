//! Dense complex matrix helpers shared by every module.
//!
//! Tensor factors use the Kronecker convention: the first factor is the most
//! significant digit of a composite index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Frobenius (Hilbert-Schmidt) norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `‖U†U − 1‖_max`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let n = prod.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// nonincreasing order; columns of the returned matrix are the eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // symmetrize so tiny asymmetries from accumulated rounding do not leak in
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// `V diag(f(λ)) V†` for a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (k, &lam) in values.iter().enumerate() {
        let fk = f(lam);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    scaled * vectors.adjoint()
}

/// Mixed-radix digits of `index` for the given factor dimensions.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

pub(crate) fn compose_index(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims.iter())
        .fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Index table splitting a composite space into a `selected` group and the
/// remaining factors, each ordered as given.
///
/// `table[rest * sub_dim + sub]` is the composite index whose selected digits
/// form `sub` and whose remaining digits form `rest`.
#[derive(Debug, Clone)]
pub(crate) struct FactorSplit {
    pub sub_dim: usize,
    pub rest_dim: usize,
    pub table: Vec<usize>,
}

impl FactorSplit {
    pub fn new(dims: &[usize], selected: &[usize]) -> Self {
        let rest: Vec<usize> = (0..dims.len()).filter(|k| !selected.contains(k)).collect();
        let sub_dims: Vec<usize> = selected.iter().map(|&k| dims[k]).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
        let sub_dim: usize = sub_dims.iter().product();
        let rest_dim: usize = rest_dims.iter().product();
        let mut table = vec![0; sub_dim * rest_dim];
        let mut full = vec![0; dims.len()];
        for r in 0..rest_dim {
            let rd = digits(r, &rest_dims);
            for (slot, &k) in rest.iter().enumerate() {
                full[k] = rd[slot];
            }
            for s in 0..sub_dim {
                let sd = digits(s, &sub_dims);
                for (slot, &k) in selected.iter().enumerate() {
                    full[k] = sd[slot];
                }
                table[r * sub_dim + s] = compose_index(&full, dims);
            }
        }
        Self {
            sub_dim,
            rest_dim,
            table,
        }
    }

    #[inline]
    pub fn index(&self, rest: usize, sub: usize) -> usize {
        self.table[rest * self.sub_dim + sub]
    }
}

/// Partial trace keeping the factors listed in `keep` (in that order).
pub(crate) fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let split = FactorSplit::new(dims, keep);
    partial_trace_with(m, &split)
}

pub(crate) fn partial_trace_with(m: &CMatrix, split: &FactorSplit) -> CMatrix {
    let dk = split.sub_dim;
    let mut out = CMatrix::zeros(dk, dk);
    for r in 0..split.rest_dim {
        for a in 0..dk {
            let ia = split.index(r, a);
            for b in 0..dk {
                out[(a, b)] += m[(ia, split.index(r, b))];
            }
        }
    }
    out
}

/// Embeds `op` (acting on `targets`, in that order) into the full space,
/// acting as identity on all other factors.
pub(crate) fn embed_matrix(op: &CMatrix, dims: &[usize], targets: &[usize]) -> CMatrix {
    let split = FactorSplit::new(dims, targets);
    let total = split.sub_dim * split.rest_dim;
    let mut out = CMatrix::zeros(total, total);
    for r in 0..split.rest_dim {
        for a in 0..split.sub_dim {
            let ia = split.index(r, a);
            for b in 0..split.sub_dim {
                out[(ia, split.index(r, b))] = op[(a, b)];
            }
        }
    }
    out
}

/// `(1 ⊗ U) ρ (1 ⊗ U)†` with `U` acting on the selected factors, computed
/// block by block instead of through the embedded matrix.
pub(crate) fn conjugate_on(rho: &CMatrix, op: &CMatrix, split: &FactorSplit) -> CMatrix {
    let ds = split.sub_dim;
    let dr = split.rest_dim;
    if dr == 1 {
        // selected factors span the whole space, possibly permuted
        let mut permuted = CMatrix::zeros(ds, ds);
        for a in 0..ds {
            for b in 0..ds {
                permuted[(a, b)] = rho[(split.index(0, a), split.index(0, b))];
            }
        }
        let evolved = op * permuted * op.adjoint();
        let mut out = CMatrix::zeros(ds, ds);
        for a in 0..ds {
            for b in 0..ds {
                out[(split.index(0, a), split.index(0, b))] = evolved[(a, b)];
            }
        }
        return out;
    }
    let adj = op.adjoint();
    let total = ds * dr;
    let mut out = CMatrix::zeros(total, total);
    let mut block = CMatrix::zeros(ds, ds);
    for r1 in 0..dr {
        for r2 in 0..dr {
            for a in 0..ds {
                let ia = split.index(r1, a);
                for b in 0..ds {
                    block[(a, b)] = rho[(ia, split.index(r2, b))];
                }
            }
            let evolved = op * &block * &adj;
            for a in 0..ds {
                let ia = split.index(r1, a);
                for b in 0..ds {
                    out[(ia, split.index(r2, b))] = evolved[(a, b)];
                }
            }
        }
    }
    out
}

/// Phase of the first entry whose modulus exceeds `tol`, or 1 when none does.
pub(crate) fn leading_phase(v: &CVector, tol: f64) -> C64 {
    v.iter()
        .find(|z| z.norm() > tol)
        .map(|z| z / z.norm())
        .unwrap_or(ONE)
}

pub(crate) fn first_significant_index(v: &CVector, tol: f64) -> usize {
    v.iter().position(|z| z.norm() > tol).unwrap_or(v.len())
}

pub(crate) fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}
