//! Scenario configuration files.
//!
//! One JSON object per scenario. Common keys are `kind`, `seed` (required),
//! `name`, `dims` and `optimizer`; every other key belongs to the kind.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::copy_dynamics::{RecordDecomposition, TagSpec};
use crate::error::{Error, Result};
use crate::hilbert::{CompositeDims, DensityOperator, StateVector, UnitaryOperator};
use crate::linalg::{CMatrix, ONE};
use crate::optimizer::OptimizationConfig;

const COMMON_KEYS: [&str; 4] = ["name", "seed", "dims", "optimizer"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<CompositeDims>,
    #[serde(skip_serializing_if = "OptimizerOverrides::is_empty")]
    pub optimizer: OptimizerOverrides,
    #[serde(flatten)]
    pub scenario: Scenario,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Common {
    name: Option<String>,
    seed: u64,
    dims: Option<CompositeDims>,
    #[serde(default)]
    optimizer: OptimizerOverrides,
}

/// Optimizer settings a scenario may change. The seed always comes from the
/// scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_init: Option<f64>,
}

impl OptimizerOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, seed: u64) -> OptimizationConfig {
        let d = OptimizationConfig::default();
        OptimizationConfig {
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            seed,
            penalty_weight: self.penalty_weight.unwrap_or(d.penalty_weight),
            convergence_tol: self.convergence_tol.unwrap_or(d.convergence_tol),
            step_init: self.step_init.unwrap_or(d.step_init),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Identity(IdentityParams),
    RecordOrthogonality(RecordOrthogonalityParams),
    Actionability(ActionabilityParams),
    Mixtures(MixturesParams),
    Purified(PurifiedParams),
    Bell(BellParams),
    Povm(PovmParams),
    Sweep(SweepParams),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Identity(_) => "identity",
            Scenario::RecordOrthogonality(_) => "record-orthogonality",
            Scenario::Actionability(_) => "actionability",
            Scenario::Mixtures(_) => "mixtures",
            Scenario::Purified(_) => "purified",
            Scenario::Bell(_) => "bell",
            Scenario::Povm(_) => "povm",
            Scenario::Sweep(_) => "sweep",
        }
    }
}

/// `⟨u|v⟩ = ⟨ũ|ṽ⟩⟨A_u|A_v⟩` for one explicit coupling and/or a batch of
/// random repeatable couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<StateVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<StateVector>,
    /// Apparatus ready state; `|0⟩` of the coupling's apparatus by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ready: Option<StateVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
    #[serde(default)]
    pub random_trials: usize,
    #[serde(default = "default_max_dim")]
    pub max_system_dim: usize,
    #[serde(default = "default_max_apparatus")]
    pub max_apparatus_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordOrthogonalityParams {
    pub decomposition: DecompositionSpec,
    pub apparatuses: Vec<TagsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<DensitySpec>,
    pub rho_u: DensitySpec,
    pub rho_v: DensitySpec,
    /// Also search couplings that would tag the pair distinguishably.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversarial: Option<AdversarialSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialSpec {
    pub apparatus_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Actionable,
    NotActionable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionabilityParams {
    pub composites: CompositesSpec,
    pub factor: usize,
    #[serde(default = "default_test_dim")]
    pub test_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CompositesSpec {
    Explicit {
        u: DensitySpec,
        v: DensitySpec,
    },
    /// `U_SA(ρ_S ⊗ ρ_0A)U_SA†`, optionally followed by a coupling of the
    /// apparatus to an environment.
    MixedRecord {
        system_u: DensitySpec,
        system_v: DensitySpec,
        ready: DensitySpec,
        coupling: CouplingSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        environment: Option<EnvironmentSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub state: DensitySpec,
    /// Acts on `A ⊗ E`.
    pub unitary: UnitaryOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixturesParams {
    pub rho_u: DensitySpec,
    pub rho_v: DensitySpec,
    /// `[a, b, c, d]`: `aρ_u + bρ_v` against `cρ_u + dρ_v`.
    pub quadruples: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurifiedParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_u: Option<StateVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_v: Option<StateVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_copyable: Option<bool>,
    #[serde(default)]
    pub random_pairs: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PovmPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_basis: Option<Vec<StateVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_basis: Option<Vec<StateVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<UnitaryOperator>,
    pub rho0: DensitySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PovmPreset {
    /// `|±⟩` then the computational basis, no evolution in between.
    PlusMinus,
    Oscillator { levels: usize, theta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub grid: Vec<f64>,
}

/// A system–apparatus coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingSpec {
    Cnot,
    /// `|s⟩|a⟩ ↦ |s⟩|a + s·step mod d_A⟩`.
    ControlledShift { step: usize },
    ControlledCopy {
        decomposition: DecompositionSpec,
        tags: TagsSpec,
    },
    Unitary { unitary: UnitaryOperator },
}

impl CouplingSpec {
    /// The coupling on `S ⊗ A`, plus the decomposition it copies when known.
    pub fn build(
        &self,
        system_dim: usize,
        apparatus_dim: usize,
    ) -> Result<(UnitaryOperator, Option<RecordDecomposition>)> {
        let dims = CompositeDims::new(vec![system_dim, apparatus_dim])?;
        let (u, dec) = match self {
            CouplingSpec::Cnot => {
                if system_dim != 2 || apparatus_dim != 2 {
                    return Err(field_error(
                        "coupling",
                        format!("cnot needs qubits, found {system_dim} ⊗ {apparatus_dim}"),
                    ));
                }
                (crate::hilbert::qubit::cnot(), None)
            }
            CouplingSpec::ControlledShift { step } => (
                crate::copy_dynamics::controlled_shift(system_dim, apparatus_dim, *step)?,
                None,
            ),
            CouplingSpec::ControlledCopy { decomposition, tags } => {
                let dec = decomposition.build()?;
                let tags = tags.build(dec.len())?;
                (
                    crate::copy_dynamics::build_controlled_copy(&dec, &tags)?,
                    Some(dec),
                )
            }
            CouplingSpec::Unitary { unitary } => (unitary.clone(), None),
        };
        if u.dim() != dims.total() {
            return Err(field_error(
                "coupling",
                format!(
                    "coupling acts on dimension {}, expected {system_dim} ⊗ {apparatus_dim}",
                    u.dim()
                ),
            ));
        }
        Ok((u.with_dims(dims)?, dec))
    }
}

/// Record subspaces spanned by consecutive computational basis vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<f64>>,
    /// One unitary per block acting inside it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbances: Option<Vec<UnitaryOperator>>,
}

impl DecompositionSpec {
    pub fn build(&self) -> Result<RecordDecomposition> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(field_error("blocks", "block sizes must be positive".into()));
        }
        let d: usize = self.blocks.iter().sum();
        let mut projectors = Vec::with_capacity(self.blocks.len());
        let mut start = 0;
        for &b in &self.blocks {
            let mut p = CMatrix::zeros(d, d);
            for i in start..start + b {
                p[(i, i)] = ONE;
            }
            projectors.push(p);
            start += b;
        }
        let labels = self
            .labels
            .clone()
            .unwrap_or_else(|| (0..self.blocks.len()).map(|k| k as f64).collect());
        let dec = RecordDecomposition::new(projectors, labels)?;
        match &self.disturbances {
            None => Ok(dec),
            Some(ds) => dec.with_disturbances(ds.iter().map(|u| u.matrix().clone()).collect()),
        }
    }
}

/// Apparatus ready state and one tag per record subspace. With `basis`, the
/// tags are `|k mod d⟩` and the ready state is `|0⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ready: Option<StateVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<Vec<StateVector>>,
}

impl TagsSpec {
    pub fn build(&self, count: usize) -> Result<TagSpec> {
        match (self.basis, &self.ready, &self.tags) {
            (Some(d), None, None) => TagSpec::basis(d, count),
            (None, Some(ready), Some(tags)) => TagSpec::new(ready.clone(), tags.clone()),
            _ => Err(field_error(
                "tags",
                "give either `basis` or both `ready` and `tags`".into(),
            )),
        }
    }
}

/// A density operator: full matrix (`dims`, `matrix`), a `diagonal`, or a
/// `pure` state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    Full(DensityOperator),
    Diagonal(DiagonalDensity),
    Pure(PureDensity),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalDensity {
    pub diagonal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<CompositeDims>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureDensity {
    pub pure: StateVector,
}

impl DensitySpec {
    pub fn build(&self) -> Result<DensityOperator> {
        match self {
            DensitySpec::Full(rho) => Ok(rho.clone()),
            DensitySpec::Diagonal(d) => {
                let rho = DensityOperator::from_diagonal(&d.diagonal)?;
                match &d.dims {
                    Some(dims) => rho.with_dims(dims.clone()),
                    None => Ok(rho),
                }
            }
            DensitySpec::Pure(p) => Ok(p.pure.projector()),
        }
    }
}

fn default_max_dim() -> usize {
    4
}

fn default_max_apparatus() -> usize {
    3
}

fn default_test_dim() -> usize {
    2
}

pub(crate) fn field_error(field: &str, message: String) -> Error {
    Error::InvalidConfig {
        field: field.into(),
        message,
    }
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|err| {
        let path = err.path().to_string();
        let message = err.inner().to_string();
        let field = if path != "." {
            path
        } else {
            // missing and unknown fields are reported at the parent
            message
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<root>".into())
        };
        let field = if prefix.is_empty() {
            field
        } else {
            format!("{prefix}.{field}")
        };
        Error::InvalidConfig { field, message }
    })
}

impl ScenarioConfig {
    /// Parses and validates one scenario. `default_name` is used when the
    /// config has no `name`.
    pub fn parse(text: &str, default_name: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| field_error("<root>", e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(field_error("<root>", "expected a JSON object".into()));
        };
        let mut common = Map::new();
        let mut params = Map::new();
        let mut kind = None;
        for (key, value) in map {
            if key == "kind" {
                kind = Some(value);
            } else if COMMON_KEYS.contains(&key.as_str()) {
                common.insert(key, value);
            } else {
                params.insert(key, value);
            }
        }
        let common: Common = typed(Value::Object(common), "")?;
        let kind = match kind {
            Some(Value::String(s)) => s,
            Some(_) => return Err(field_error("kind", "expected a string".into())),
            None => return Err(field_error("kind", "missing field `kind`".into())),
        };
        let params = Value::Object(params);
        let scenario = match kind.as_str() {
            "identity" => Scenario::Identity(typed(params, "")?),
            "record-orthogonality" => Scenario::RecordOrthogonality(typed(params, "")?),
            "actionability" => Scenario::Actionability(typed(params, "")?),
            "mixtures" => Scenario::Mixtures(typed(params, "")?),
            "purified" => Scenario::Purified(typed(params, "")?),
            "bell" => Scenario::Bell(typed(params, "")?),
            "povm" => Scenario::Povm(typed(params, "")?),
            "sweep" => Scenario::Sweep(typed(params, "")?),
            other => return Err(field_error("kind", format!("unknown scenario kind `{other}`"))),
        };
        let name = common.name.unwrap_or_else(|| default_name.to_string());
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(field_error("name", format!("`{name}` is not a valid directory name")));
        }
        let config = Self {
            name,
            seed: common.seed,
            dims: common.dims,
            optimizer: common.optimizer,
            scenario,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario");
        Self::parse(&text, stem)
    }

    pub fn optimization(&self) -> OptimizationConfig {
        self.optimizer.apply(self.seed)
    }

    /// Checks that the kind-specific parameters are complete.
    pub fn validate(&self) -> Result<()> {
        self.optimization()
            .validate()
            .map_err(|e| field_error("optimizer", e.to_string()))?;
        match &self.scenario {
            Scenario::Identity(p) => {
                let explicit = [p.u.is_some(), p.v.is_some(), p.coupling.is_some()];
                if explicit.iter().any(|x| *x) && !explicit.iter().all(|x| *x) {
                    return Err(field_error("coupling", "`u`, `v` and `coupling` go together".into()));
                }
                if !explicit[0] && p.random_trials == 0 {
                    return Err(field_error(
                        "random_trials",
                        "give an explicit pair or a positive number of random trials".into(),
                    ));
                }
                if p.max_system_dim < 2 || p.max_apparatus_dim < 2 {
                    return Err(field_error("max_system_dim", "dimensions below 2".into()));
                }
            }
            Scenario::RecordOrthogonality(p) => {
                if p.apparatuses.is_empty() {
                    return Err(field_error("apparatuses", "at least one apparatus".into()));
                }
            }
            Scenario::Actionability(p) => {
                if p.test_dim < 2 {
                    return Err(field_error("test_dim", "test system needs two levels".into()));
                }
            }
            Scenario::Mixtures(p) => {
                if p.quadruples.is_empty() {
                    return Err(field_error("quadruples", "no coefficient quadruples".into()));
                }
            }
            Scenario::Purified(p) => {
                if p.gamma_u.is_some() != p.gamma_v.is_some() {
                    return Err(field_error("gamma_v", "`gamma_u` and `gamma_v` go together".into()));
                }
                if p.gamma_u.is_none() && p.random_pairs == 0 {
                    return Err(field_error(
                        "random_pairs",
                        "give an explicit pair or a positive number of random pairs".into(),
                    ));
                }
                if p.max_dim < 1 {
                    return Err(field_error("max_dim", "must be positive".into()));
                }
            }
            Scenario::Bell(_) => {}
            Scenario::Povm(p) => {
                let explicit = [p.y_basis.is_some(), p.z_basis.is_some(), p.evolution.is_some()];
                let complete = explicit.iter().all(|x| *x);
                let none = !explicit.iter().any(|x| *x);
                match (&p.preset, complete, none) {
                    (Some(_), _, true) | (None, true, _) => {}
                    (Some(_), _, false) => {
                        return Err(field_error("preset", "a preset replaces the bases and evolution".into()))
                    }
                    (None, false, _) => {
                        return Err(field_error(
                            "evolution",
                            "give a preset or all of `y_basis`, `z_basis`, `evolution`".into(),
                        ))
                    }
                }
            }
            Scenario::Sweep(p) => {
                if p.grid.is_empty() {
                    return Err(field_error("grid", "empty grid".into()));
                }
                if let Some(s) = p.grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
                    return Err(field_error("grid", format!("overlap {s} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}
