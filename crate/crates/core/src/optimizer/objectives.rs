//! Search problems used by the theorem verifiers.

use crate::error::{Error, Result};
use crate::hilbert::{CompositeDims, DensityOperator, StateVector, TOL_ALG};
use crate::linalg::{
    conjugate_on, frobenius_distance, kron, partial_trace_matrix, partial_trace_with,
    trace_of_product, CMatrix, FactorSplit, ONE,
};

use super::{Evaluation, SearchObjective};

/// `|0⟩` and `s|0⟩ + √(1−s²)|1⟩`.
pub fn overlapping_qubits(s: f64) -> (StateVector, StateVector) {
    let u = StateVector::from_real(&[1.0, 0.0]).expect("normalized");
    let c = (1.0 - s * s).max(0.0).sqrt();
    let v = StateVector::from_real(&[s, c]).expect("normalized");
    (u, v)
}

/// `½‖ρ − σ‖²_F`: `1 − |⟨a|b⟩|²` for pure states, 0 for equal states.
pub fn distinguishability(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    0.5 * frobenius_distance(rho, sigma).powi(2)
}

/// Couplings `U` on `S ⊗ A`, apparatus ready in `|0⟩`, that tag two system
/// states distinguishably while leaving each inside its own support.
///
/// Objective: distinguishability of the two apparatus records. Residuals,
/// summed over both branches:
/// - `support_containment`: `‖ρ̃ − Πρ̃Π‖_F` with `Π` the support of the input;
/// - `product`: `‖Ω − ρ̃ ⊗ ρ_A‖_F` for the joint output `Ω`;
/// - `tag_purity`: `√(1 − Tr ρ_A²)`.
#[derive(Debug, Clone)]
pub struct RepeatableCopyProblem {
    system_dim: usize,
    apparatus_dim: usize,
    inputs: [CMatrix; 2],
    supports: [CMatrix; 2],
}

impl RepeatableCopyProblem {
    pub fn new(rho_u: &DensityOperator, rho_v: &DensityOperator, apparatus_dim: usize) -> Result<Self> {
        if rho_u.dim() != rho_v.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho_u.dim(),
                found: rho_v.dim(),
            });
        }
        if apparatus_dim < 1 {
            return Err(Error::InvalidDims("apparatus dimension 0".into()));
        }
        let ds = rho_u.dim();
        let mut ready = CMatrix::zeros(apparatus_dim, apparatus_dim);
        ready[(0, 0)] = ONE;
        Ok(Self {
            system_dim: ds,
            apparatus_dim,
            inputs: [kron(rho_u.matrix(), &ready), kron(rho_v.matrix(), &ready)],
            supports: [
                rho_u.support_projector(TOL_ALG),
                rho_v.support_projector(TOL_ALG),
            ],
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn apparatus_dim(&self) -> usize {
        self.apparatus_dim
    }

    /// Post-coupling `(system, apparatus)` marginals of both branches.
    pub fn records(&self, u: &CMatrix) -> [(CMatrix, CMatrix); 2] {
        let dims = [self.system_dim, self.apparatus_dim];
        let out = |input: &CMatrix| {
            let omega = u * input * u.adjoint();
            (
                partial_trace_matrix(&omega, &dims, &[0]),
                partial_trace_matrix(&omega, &dims, &[1]),
            )
        };
        [out(&self.inputs[0]), out(&self.inputs[1])]
    }
}

impl SearchObjective for RepeatableCopyProblem {
    fn dim(&self) -> usize {
        self.system_dim * self.apparatus_dim
    }

    fn constraint_names(&self) -> Vec<String> {
        vec![
            "support_containment".into(),
            "product".into(),
            "tag_purity".into(),
        ]
    }

    fn evaluate(&self, u: &CMatrix) -> Evaluation {
        let dims = [self.system_dim, self.apparatus_dim];
        let mut containment = 0.0;
        let mut product = 0.0;
        let mut purity = 0.0;
        let mut tags = Vec::with_capacity(2);
        for (input, support) in self.inputs.iter().zip(&self.supports) {
            let omega = u * input * u.adjoint();
            let sys = partial_trace_matrix(&omega, &dims, &[0]);
            let app = partial_trace_matrix(&omega, &dims, &[1]);
            containment += frobenius_distance(&sys, &(support * &sys * support));
            product += frobenius_distance(&omega, &kron(&sys, &app));
            let p = trace_of_product(&app, &app).re;
            purity += (1.0 - p).max(0.0).sqrt();
            tags.push(app);
        }
        Evaluation {
            objective: distinguishability(&tags[0], &tags[1]),
            residuals: vec![containment, product, purity],
        }
    }
}

/// Couplings `U` between factor `k` of a composite and an appended test
/// system `T` prepared in `|0⟩`.
///
/// Objective: `Tr τ_0² − Tr τ_u τ_v` for the test-system outputs. Residuals,
/// summed over both branches:
/// - `product`: `‖Ω − Ω_rest ⊗ τ‖_F`, the output must leave `T` uncorrelated;
/// - `spectrum`: `√|Tr τ_0² − Tr τ²|`, the test system must keep the purity
///   of its initial state so that a score cannot come from mixing alone.
#[derive(Debug, Clone)]
pub struct ActionabilityProblem {
    test_dim: usize,
    inputs: [CMatrix; 2],
    coupled: FactorSplit,
    test: FactorSplit,
    rest: FactorSplit,
    tau0_purity: f64,
}

impl ActionabilityProblem {
    pub fn new(
        composite_u: &DensityOperator,
        composite_v: &DensityOperator,
        k: usize,
        test_dim: usize,
    ) -> Result<Self> {
        if composite_u.dims() != composite_v.dims() {
            return Err(Error::DimensionMismatch {
                expected: composite_u.dim(),
                found: composite_v.dim(),
            });
        }
        composite_u.dims().check_indices(&[k])?;
        if test_dim < 1 {
            return Err(Error::InvalidDims("test dimension 0".into()));
        }
        let mut tau0 = CMatrix::zeros(test_dim, test_dim);
        tau0[(0, 0)] = ONE;
        let mut dims = composite_u.dims().as_slice().to_vec();
        dims.push(test_dim);
        let t = dims.len() - 1;
        let rest: Vec<usize> = (0..t).collect();
        let tau0_purity = 1.0;
        Ok(Self {
            test_dim,
            inputs: [
                kron(composite_u.matrix(), &tau0),
                kron(composite_v.matrix(), &tau0),
            ],
            coupled: FactorSplit::new(&dims, &[k, t]),
            test: FactorSplit::new(&dims, &[t]),
            rest: FactorSplit::new(&dims, &rest),
            tau0_purity,
        })
    }

    pub fn test_dim(&self) -> usize {
        self.test_dim
    }

    /// Joint outputs `U(ρ ⊗ τ_0)U†` of both branches, test system last.
    pub fn outputs(&self, u: &CMatrix) -> [CMatrix; 2] {
        [
            conjugate_on(&self.inputs[0], u, &self.coupled),
            conjugate_on(&self.inputs[1], u, &self.coupled),
        ]
    }

    /// Test-system output of a joint state from [`ActionabilityProblem::outputs`].
    pub fn test_state(&self, omega: &CMatrix) -> CMatrix {
        partial_trace_with(omega, &self.test)
    }

    /// Marginal on everything except the test system.
    pub fn rest_state(&self, omega: &CMatrix) -> CMatrix {
        partial_trace_with(omega, &self.rest)
    }

    pub fn joint_dims(&self, composite: &CompositeDims) -> CompositeDims {
        composite.concat(&CompositeDims::single(self.test_dim))
    }
}

impl SearchObjective for ActionabilityProblem {
    fn dim(&self) -> usize {
        self.coupled.sub_dim
    }

    fn constraint_names(&self) -> Vec<String> {
        vec!["product".into(), "spectrum".into()]
    }

    fn evaluate(&self, u: &CMatrix) -> Evaluation {
        let mut product = 0.0;
        let mut spectrum = 0.0;
        let mut taus = Vec::with_capacity(2);
        for omega in self.outputs(u) {
            let tau = self.test_state(&omega);
            let rest = self.rest_state(&omega);
            product += frobenius_distance(&omega, &kron(&rest, &tau));
            spectrum += (self.tau0_purity - trace_of_product(&tau, &tau).re)
                .abs()
                .sqrt();
            taus.push(tau);
        }
        Evaluation {
            objective: self.tau0_purity - trace_of_product(&taus[0], &taus[1]).re,
            residuals: vec![product, spectrum],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::qubit;

    fn cnot() -> CMatrix {
        qubit::cnot().matrix().clone()
    }

    #[test]
    fn cnot_is_a_feasible_copy_for_orthogonal_states() {
        let p = RepeatableCopyProblem::new(&qubit::ket0().projector(), &qubit::ket1().projector(), 2)
            .unwrap();
        let e = p.evaluate(&cnot());
        assert!((e.objective - 1.0).abs() < 1e-14);
        assert!(e.residuals.iter().all(|r| *r < 1e-12), "{:?}", e.residuals);
    }

    #[test]
    fn cnot_disturbs_overlapping_states() {
        let (u, v) = overlapping_qubits(0.5);
        let p = RepeatableCopyProblem::new(&u.projector(), &v.projector(), 2).unwrap();
        let e = p.evaluate(&cnot());
        assert!(e.objective > 0.1);
        assert!(e.residuals[0] > 0.1);
    }

    #[test]
    fn swap_into_apparatus_is_penalized() {
        // SWAP moves the state into A; the system is left in |0⟩ for both
        let mut swap = CMatrix::zeros(4, 4);
        for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(a, b)] = ONE;
        }
        let (u, v) = overlapping_qubits(0.0);
        let p = RepeatableCopyProblem::new(&u.projector(), &v.projector(), 2).unwrap();
        let e = p.evaluate(&swap);
        assert!(e.residuals[0] > 0.5);
    }

    #[test]
    fn cnot_record_actionability() {
        let ru = qubit::ket0().projector();
        let rv = qubit::ket1().projector();
        let p = ActionabilityProblem::new(&ru, &rv, 0, 2).unwrap();
        let e = p.evaluate(&cnot());
        assert!((e.objective - 1.0).abs() < 1e-14);
        assert!(e.residuals.iter().all(|r| *r < 1e-12));
        let id = CMatrix::identity(4, 4);
        let e = p.evaluate(&id);
        assert!(e.objective.abs() < 1e-14);
    }

    #[test]
    fn swap_with_mixed_record_pays_spectrum_penalty() {
        let half = DensityOperator::maximally_mixed(2);
        let p = ActionabilityProblem::new(&half, &half, 0, 2).unwrap();
        let mut swap = CMatrix::zeros(4, 4);
        for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(a, b)] = ONE;
        }
        let e = p.evaluate(&swap);
        assert!((e.objective - 0.5).abs() < 1e-14);
        assert!(e.residuals[0] < 1e-12);
        assert!(e.residuals[1] > 1.0);
    }

    #[test]
    fn acts_on_selected_factor_only() {
        // records live on the second factor of a two-qubit composite
        let ru = qubit::plus().tensor(&qubit::ket0()).projector();
        let rv = qubit::plus().tensor(&qubit::ket1()).projector();
        let p = ActionabilityProblem::new(&ru, &rv, 1, 2).unwrap();
        assert_eq!(p.dim(), 4);
        let e = p.evaluate(&cnot());
        assert!((e.objective - 1.0).abs() < 1e-14);
        assert!(e.residuals[0] < 1e-12);
    }
}
