//! Search over the unitary group.
//!
//! Unitaries are parameterized as `exp(iH)` with `H` expanded in the
//! generalized Gell-Mann basis plus the identity. Objectives are maximized by
//! multi-restart simplex search on `objective − λ·Σ residuals`; feasibility is
//! always re-evaluated from the returned parameters.

mod nelder_mead;
pub mod objectives;

use nalgebra::Schur;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    derive_seed, rng_from_seed, unitary_fidelity, CompositeDims, UnitaryOperator, TOL_ALG,
};
use crate::linalg::{hermitian_function, CMatrix, C64};

pub use objectives::{distinguishability, overlapping_qubits, ActionabilityProblem, RepeatableCopyProblem};

/// Tolerance for adversarial (optimizer-backed) claims.
pub const TOL_OPT: f64 = 1e-6;

/// Coordinates of a Hermitian generator in the basis
/// `{1, Gell-Mann symmetric/antisymmetric pairs, Gell-Mann diagonals}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryParameterization {
    pub dim: usize,
    pub coefficients: Vec<f64>,
}

impl UnitaryParameterization {
    pub fn new(dim: usize, coefficients: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDims("unitary dimension 0".into()));
        }
        if coefficients.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidOptimizerConfig(
                "non-finite unitary coefficient".into(),
            ));
        }
        Ok(Self { dim, coefficients })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            coefficients: vec![0.0; dim * dim],
        }
    }

    /// The Hermitian generator `H`.
    pub fn generator(&self) -> CMatrix {
        generator_from(self.dim, &self.coefficients)
    }
}

fn generator_from(d: usize, c: &[f64]) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    for j in 0..d {
        h[(j, j)] = C64::new(c[0], 0.0);
    }
    let mut idx = 1;
    for j in 0..d {
        for k in (j + 1)..d {
            let s = c[idx];
            let a = c[idx + 1];
            idx += 2;
            h[(j, k)] = C64::new(s, -a);
            h[(k, j)] = C64::new(s, a);
        }
    }
    for l in 1..d {
        let w = c[idx] * (2.0 / (l * (l + 1)) as f64).sqrt();
        idx += 1;
        for j in 0..l {
            h[(j, j)].re += w;
        }
        h[(l, l)].re -= w * l as f64;
    }
    h
}

fn coefficients_from(h: &CMatrix) -> Vec<f64> {
    let d = h.nrows();
    let mut c = Vec::with_capacity(d * d);
    let tr: f64 = (0..d).map(|j| h[(j, j)].re).sum();
    c.push(tr / d as f64);
    for j in 0..d {
        for k in (j + 1)..d {
            c.push(h[(j, k)].re);
            c.push(-h[(j, k)].im);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let partial: f64 = (0..l).map(|j| h[(j, j)].re).sum();
        c.push(0.5 * norm * (partial - l as f64 * h[(l, l)].re));
    }
    c
}

/// `exp(i H(p))`.
pub fn exp_unitary(p: &UnitaryParameterization) -> UnitaryOperator {
    UnitaryOperator::from_parts_unchecked(
        exp_matrix(p.dim, &p.coefficients),
        CompositeDims::single(p.dim),
    )
}

pub(crate) fn exp_matrix(dim: usize, coefficients: &[f64]) -> CMatrix {
    let h = generator_from(dim, coefficients);
    hermitian_function(&h, |x| C64::new(x.cos(), x.sin()))
}

/// Principal logarithm: coefficients `p` with `exp(iH(p)) = U`, from the
/// Schur form of `U`.
pub fn log_unitary(u: &UnitaryOperator) -> UnitaryParameterization {
    UnitaryParameterization {
        dim: u.dim(),
        coefficients: log_matrix(u.matrix()),
    }
}

fn log_matrix(u: &CMatrix) -> Vec<f64> {
    let d = u.nrows();
    let (q, t) = Schur::new(u.clone()).unpack();
    let mut h = CMatrix::zeros(d, d);
    for k in 0..d {
        let phase = t[(k, k)].arg();
        let col = q.column(k).into_owned();
        h += &col * col.adjoint() * C64::new(phase, 0.0);
    }
    coefficients_from(&h)
}

/// Budget and seeding of a search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub penalty_weight: f64,
    pub convergence_tol: f64,
    pub step_init: f64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 2000,
            seed: 0,
            penalty_weight: 1e3,
            convergence_tol: 1e-10,
            step_init: 0.5,
        }
    }
}

impl OptimizationConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidOptimizerConfig(format!("{what} must be positive")));
        if self.restarts == 0 {
            return bad("restarts");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations");
        }
        if !(self.penalty_weight > 0.0) {
            return bad("penalty_weight");
        }
        if !(self.convergence_tol > 0.0) {
            return bad("convergence_tol");
        }
        if !(self.step_init > 0.0) {
            return bad("step_init");
        }
        Ok(())
    }
}

/// Objective value plus nonnegative constraint residuals at one unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub residuals: Vec<f64>,
}

/// A maximization problem over unitaries of a fixed dimension.
pub trait SearchObjective: Sync {
    fn dim(&self) -> usize;

    /// Names of the residuals returned by [`SearchObjective::evaluate`].
    fn constraint_names(&self) -> Vec<String>;

    fn evaluate(&self, u: &CMatrix) -> Evaluation;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedResidual {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    /// Best penalized score `objective − λ·Σ residuals` over all restarts.
    pub best_score: f64,
    /// Unpenalized objective at the best parameters.
    pub objective: f64,
    pub best_params: UnitaryParameterization,
    /// Residuals re-evaluated from `best_params`.
    pub constraint_residuals: Vec<NamedResidual>,
    pub iterations_used: usize,
    pub restart_index: usize,
    pub restarts: usize,
    /// True when no restart reached the simplex-diameter criterion.
    pub budget_exhausted: bool,
}

impl SearchResult {
    pub fn witness(&self) -> UnitaryOperator {
        exp_unitary(&self.best_params)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.constraint_residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
    }

    pub fn total_residual(&self) -> f64 {
        self.constraint_residuals.iter().map(|r| r.value).sum()
    }
}

fn penalized(e: &Evaluation, weight: f64) -> f64 {
    e.objective - weight * e.residuals.iter().sum::<f64>()
}

/// Maximum number of simplex rebuilds per restart, counting the first run.
const POLISH_ROUNDS: usize = 5;

struct RestartOutcome {
    params: Vec<f64>,
    score: f64,
    iterations: usize,
    converged: bool,
}

fn run_restart<P: SearchObjective + ?Sized>(
    problem: &P,
    config: &OptimizationConfig,
    index: usize,
) -> RestartOutcome {
    let d = problem.dim();
    let n = d * d;
    let mut rng = rng_from_seed(derive_seed(config.seed, index as u64));
    let x0: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let weight = config.penalty_weight;
    let cost = |x: &[f64]| -penalized(&problem.evaluate(&exp_matrix(d, x)), weight);
    // A collapsed simplex can stall on a kink of the penalty. Rebuilding it in
    // local coordinates `exp(iH(δ))·U_best` around the best point resumes
    // progress.
    let first = nelder_mead::minimize(
        &cost,
        &x0,
        config.step_init,
        config.max_iterations,
        config.convergence_tol,
    );
    let mut iterations = first.iterations;
    let mut converged = first.converged;
    let mut best_value = first.value;
    let mut best_u = exp_matrix(d, &first.x);
    let mut best_x = first.x;
    for round in 1..POLISH_ROUNDS {
        if !converged {
            break;
        }
        let anchor = best_u.clone();
        let local = |delta: &[f64]| {
            let u = exp_matrix(d, delta) * &anchor;
            -penalized(&problem.evaluate(&u), weight)
        };
        let next = nelder_mead::minimize(
            local,
            &vec![0.0; n],
            config.step_init * 0.1f64.powi(round as i32),
            config.max_iterations,
            config.convergence_tol,
        );
        iterations += next.iterations;
        converged = next.converged;
        let gain = best_value - next.value;
        if gain > 0.0 {
            best_value = next.value;
            best_u = exp_matrix(d, &next.x) * &anchor;
            best_x = log_matrix(&best_u);
        }
        if gain <= config.convergence_tol {
            break;
        }
    }
    let out = nelder_mead::SimplexOutcome {
        x: best_x,
        value: best_value,
        iterations,
        converged,
    };
    RestartOutcome {
        params: out.x,
        score: -out.value,
        iterations,
        converged: out.converged,
    }
}

/// Multi-restart maximization of `objective − λ·Σ residuals`.
///
/// Restart `r` starts from Gaussian coefficients seeded by
/// `derive_seed(config.seed, r)`. Restarts run in parallel; the merge keeps
/// the highest score with ties going to the lowest restart index.
pub fn maximize<P: SearchObjective + ?Sized>(
    problem: &P,
    config: &OptimizationConfig,
) -> Result<SearchResult> {
    config.validate()?;
    let d = problem.dim();
    if d == 0 {
        return Err(Error::InvalidDims("search dimension 0".into()));
    }
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, config, r))
        .collect();
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.score > outcomes[best].score {
            best = r;
        }
    }
    let winner = &outcomes[best];
    let params = UnitaryParameterization {
        dim: d,
        coefficients: winner.params.clone(),
    };
    let evaluation = problem.evaluate(&exp_matrix(d, &params.coefficients));
    let names = problem.constraint_names();
    let constraint_residuals = names
        .into_iter()
        .zip(evaluation.residuals.iter())
        .map(|(name, &value)| NamedResidual { name, value })
        .collect();
    Ok(SearchResult {
        best_score: penalized(&evaluation, config.penalty_weight),
        objective: evaluation.objective,
        best_params: params,
        constraint_residuals,
        iterations_used: winner.iterations,
        restart_index: best,
        restarts: config.restarts,
        budget_exhausted: !outcomes.iter().any(|o| o.converged),
    })
}

/// A constraint for [`maximize_fn`]: a named nonnegative residual function.
pub struct Constraint<'a> {
    pub name: String,
    pub residual: Box<dyn Fn(&UnitaryOperator) -> f64 + Sync + 'a>,
}

struct ClosureProblem<'a, F> {
    dim: usize,
    objective: F,
    constraints: Vec<Constraint<'a>>,
}

impl<F> SearchObjective for ClosureProblem<'_, F>
where
    F: Fn(&UnitaryOperator) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn constraint_names(&self) -> Vec<String> {
        self.constraints.iter().map(|c| c.name.clone()).collect()
    }

    fn evaluate(&self, u: &CMatrix) -> Evaluation {
        let op = UnitaryOperator::from_parts_unchecked(u.clone(), CompositeDims::single(self.dim));
        Evaluation {
            objective: (self.objective)(&op),
            residuals: self.constraints.iter().map(|c| (c.residual)(&op)).collect(),
        }
    }
}

/// Closure form of [`maximize`].
pub fn maximize_fn<'a, F>(
    dim: usize,
    objective: F,
    constraints: Vec<Constraint<'a>>,
    config: &OptimizationConfig,
) -> Result<SearchResult>
where
    F: Fn(&UnitaryOperator) -> f64 + Sync,
{
    let problem = ClosureProblem {
        dim,
        objective,
        constraints,
    };
    maximize(&problem, config)
}

/// Fidelity objective `|Tr(U†V)|²/d²` against a fixed target.
pub fn fidelity_objective(target: &UnitaryOperator) -> impl Fn(&UnitaryOperator) -> f64 + Sync + '_ {
    move |u| unitary_fidelity(target, u).unwrap_or(0.0)
}

/// One row of the overlap frontier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub overlap: f64,
    pub max_distinguishability: f64,
    pub feasibility_residual: f64,
    pub penalized_score: f64,
}

/// For each `s`, searches couplings on `S ⊗ A` (qubits) that tag
/// `|u⟩ = |0⟩` and `|v⟩ = s|0⟩ + √(1−s²)|1⟩` as distinguishably as possible
/// while leaving both states repeatably in place.
pub fn sweep_overlap_frontier(
    overlap_grid: &[f64],
    config: &OptimizationConfig,
) -> Result<Vec<FrontierPoint>> {
    let mut rows = Vec::with_capacity(overlap_grid.len());
    for (i, &s) in overlap_grid.iter().enumerate() {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidConfig {
                field: "grid".into(),
                message: format!("overlap {s} outside [0, 1]"),
            });
        }
        let (u, v) = objectives::overlapping_qubits(s);
        let problem = RepeatableCopyProblem::new(&u.projector(), &v.projector(), 2)?;
        let cfg = config.clone().with_seed(derive_seed(config.seed, i as u64));
        let result = maximize(&problem, &cfg)?;
        rows.push(FrontierPoint {
            overlap: s,
            max_distinguishability: result.objective,
            feasibility_residual: result.total_residual(),
            penalized_score: result.best_score,
        });
    }
    Ok(rows)
}

/// `‖U†U − 1‖_max` of `exp_unitary(p)`, for checks.
pub fn exp_unitarity_residual(p: &UnitaryParameterization) -> f64 {
    exp_unitary(p).unitarity_residual()
}

#[allow(dead_code)]
pub(crate) fn is_unitary(u: &CMatrix) -> bool {
    crate::linalg::unitarity_residual(u) < TOL_ALG
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{qubit, random_unitary};
    use crate::linalg::{frobenius_distance, hermitian_eigen};

    #[test]
    fn zero_coefficients_give_identity() {
        let u = exp_unitary(&UnitaryParameterization::zeros(3));
        assert!(frobenius_distance(u.matrix(), &CMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn identity_coefficient_is_global_phase() {
        let mut p = UnitaryParameterization::zeros(2);
        p.coefficients[0] = std::f64::consts::PI;
        let u = exp_unitary(&p);
        let minus = -CMatrix::identity(2, 2);
        assert!(frobenius_distance(u.matrix(), &minus) < 1e-14);
    }

    #[test]
    fn random_coefficients_are_unitary() {
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let c: Vec<f64> = (0..16).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let p = UnitaryParameterization::new(4, c).unwrap();
            assert!(exp_unitarity_residual(&p) < 1e-11);
            // oracle: eigendecomposition of H, exponentiated by hand
            let h = p.generator();
            let (vals, vecs) = hermitian_eigen(&h);
            let mut diag = CMatrix::zeros(4, 4);
            for (k, v) in vals.iter().enumerate() {
                diag[(k, k)] = C64::new(v.cos(), v.sin());
            }
            let oracle = &vecs * diag * vecs.adjoint();
            assert!(frobenius_distance(&oracle, exp_unitary(&p).matrix()) < 1e-11);
        }
    }

    #[test]
    fn generator_basis_is_orthogonal() {
        let d = 3;
        let basis: Vec<CMatrix> = (0..d * d)
            .map(|i| {
                let mut c = vec![0.0; d * d];
                c[i] = 1.0;
                generator_from(d, &c)
            })
            .collect();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip = crate::linalg::trace_of_product(a, b).re;
                let want = match (i, j) {
                    (0, 0) => d as f64,
                    _ if i == j => 2.0,
                    _ => 0.0,
                };
                assert!((ip - want).abs() < 1e-12, "{i} {j} {ip}");
            }
        }
    }

    #[test]
    fn log_map_recovers_haar_targets() {
        for d in 1..=4 {
            for seed in 0..25 {
                let target = random_unitary(d, 1000 + seed);
                let p = log_unitary(&target);
                let back = exp_unitary(&p);
                let f = unitary_fidelity(&target, &back).unwrap();
                assert!(f > 1.0 - 1e-6, "d={d} seed={seed} f={f}");
            }
        }
    }

    #[test]
    fn parameterization_validation() {
        assert!(UnitaryParameterization::new(2, vec![0.0; 3]).is_err());
        assert!(UnitaryParameterization::new(1, vec![f64::NAN]).is_err());
        assert!(UnitaryParameterization::new(0, vec![]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizationConfig::default().validate().is_ok());
        let mut c = OptimizationConfig::default();
        c.restarts = 0;
        assert!(c.validate().is_err());
        let mut c = OptimizationConfig::default();
        c.penalty_weight = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn recovers_target_unitary() {
        let target = random_unitary(2, 77);
        let cfg = OptimizationConfig::default().with_restarts(8).with_seed(3);
        let r = maximize_fn(2, fidelity_objective(&target), vec![], &cfg).unwrap();
        assert!(r.best_score > 0.999, "{}", r.best_score);
    }

    #[test]
    fn constant_objective() {
        let cfg = OptimizationConfig {
            restarts: 3,
            max_iterations: 50,
            ..Default::default()
        };
        let r = maximize_fn(2, |_| 0.0, vec![], &cfg).unwrap();
        assert_eq!(r.best_score, 0.0);
        assert_eq!(r.restart_index, 0);
    }

    #[test]
    fn deterministic_and_monotone_in_restarts() {
        let target = qubit::cnot().with_dims(CompositeDims::single(4)).unwrap();
        let base = OptimizationConfig {
            restarts: 2,
            max_iterations: 300,
            seed: 9,
            ..Default::default()
        };
        let a = maximize_fn(4, fidelity_objective(&target), vec![], &base).unwrap();
        let b = maximize_fn(4, fidelity_objective(&target), vec![], &base).unwrap();
        assert_eq!(a, b);
        let more = base.clone().with_restarts(5);
        let c = maximize_fn(4, fidelity_objective(&target), vec![], &more).unwrap();
        assert!(c.best_score >= a.best_score);
    }

    #[test]
    fn penalties_are_reevaluated() {
        let cfg = OptimizationConfig {
            restarts: 4,
            max_iterations: 400,
            seed: 1,
            ..Default::default()
        };
        // maximize |U00|^2 subject to U01 = 0: feasible optimum is diagonal
        let constraints = vec![Constraint {
            name: "u01".into(),
            residual: Box::new(|u: &UnitaryOperator| u.matrix()[(0, 1)].norm()),
        }];
        let r = maximize_fn(2, |u| u.matrix()[(0, 0)].norm_sqr(), constraints, &cfg).unwrap();
        let w = r.witness();
        assert!((r.residual("u01").unwrap() - w.matrix()[(0, 1)].norm()).abs() < 1e-15);
        assert!(r.objective > 0.999);
    }
}
