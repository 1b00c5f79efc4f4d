//! Execution of each scenario kind.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::*;
use super::report::{format_float, Table, Verdict};
use crate::copy_dynamics::{
    build_controlled_copy, mixed_record_composite, random_decomposition_with, random_state_in,
    run_copy_chain, CopyChain, TagSpec,
};
use crate::error::Result;
use crate::hilbert::{
    derive_seed, purify, qubit, random_density_with, random_state_with,
    random_unitary_with, rng_from_seed, CompositeDims, DensityOperator, StateVector,
    UnitaryOperator, TOL_ALG,
};
use crate::optimizer::{sweep_overlap_frontier, OptimizationConfig, TOL_OPT};
use crate::povm::{build_sequential_povm, check_povm, oscillator_preset, outcome_probabilities};
use crate::theorems::{
    actionability_test, adversarial_record_search, bell_phase_demo, mixtures_dont_mix_check,
    purified_orthogonality, verify_record_orthogonality, verify_scalar_product_identity,
    ActionabilityStatus, Repeatability, THR_ACTION, TOL_PROD,
};

/// Tag distinguishability a coupling must stay below for overlapping states.
pub const OVERLAP_DISTINGUISHABILITY: f64 = 1e-4;
/// Tag distinguishability a search must reach for orthogonal states.
pub const ORTHOGONAL_DISTINGUISHABILITY: f64 = 0.5;
/// `|⟨γ_+|γ_-⟩|` bound in the Bell demo.
pub const GLOBAL_ORTHOGONALITY: f64 = 1e-12;

pub(crate) struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub details: Value,
    pub tables: Vec<Table>,
    /// Layout of the scenario's composite system, checked against `dims`.
    pub dims: Option<CompositeDims>,
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

pub(crate) fn execute(config: &ScenarioConfig) -> Result<Outcome> {
    let opt = config.optimization();
    let outcome = match &config.scenario {
        Scenario::Identity(p) => identity(p, config.seed),
        Scenario::RecordOrthogonality(p) => record_orthogonality(p, &opt),
        Scenario::Actionability(p) => actionability(p, &opt),
        Scenario::Mixtures(p) => mixtures(p, &opt),
        Scenario::Purified(p) => purified(p, config.seed),
        Scenario::Bell(_) => bell(&opt),
        Scenario::Povm(p) => povm(p),
        Scenario::Sweep(p) => sweep(p, &opt),
    }?;
    if let (Some(expected), Some(found)) = (&config.dims, &outcome.dims) {
        if expected != found {
            return Err(field_error(
                "dims",
                format!("scenario lives on {:?}, config says {:?}", found.as_slice(), expected.as_slice()),
            ));
        }
    }
    Ok(outcome)
}

fn identity(p: &IdentityParams, seed: u64) -> Result<Outcome> {
    let mut verdicts = Vec::new();
    let mut details = serde_json::Map::new();
    let mut dims = None;
    if let (Some(u), Some(v), Some(coupling)) = (&p.u, &p.v, &p.coupling) {
        let da = match (&p.ready, coupling) {
            (Some(r), _) => r.dim(),
            (None, CouplingSpec::ControlledCopy { decomposition, tags }) => {
                tags.build(decomposition.build()?.len())?.dim()
            }
            (None, _) => 2,
        };
        let (copy, dec) = coupling.build(u.dim(), da)?;
        let ready = match &p.ready {
            Some(r) => r.clone(),
            None => match coupling {
                CouplingSpec::ControlledCopy { decomposition, tags } => {
                    tags.build(decomposition.build()?.len())?.ready().clone()
                }
                _ => StateVector::basis(da, 0)?,
            },
        };
        let mode = match &dec {
            Some(d) => Repeatability::WithinRecords(d),
            None => Repeatability::Strict,
        };
        let report = verify_scalar_product_identity(u, v, &copy, &ready, mode)?;
        verdicts.push(
            Verdict::below("scalar-product-identity", report.identity.residual, TOL_ALG)
                .and(report.satisfied()),
        );
        dims = Some(copy.dims().clone());
        details.insert("explicit".into(), to_value(&report));
    }
    if p.random_trials > 0 {
        let mut rng = rng_from_seed(derive_seed(seed, 0));
        let mut worst: f64 = 0.0;
        let mut dichotomy_failures = 0usize;
        let mut orthogonal = 0usize;
        for _ in 0..p.random_trials {
            let ds = rng.random_range(2..=p.max_system_dim);
            let da = rng.random_range(2..=p.max_apparatus_dim);
            let (dec, bases) = random_decomposition_with(ds, &mut rng)?;
            let app = CompositeDims::single(da);
            let ready = random_state_with(&app, &mut rng);
            let tags = (0..dec.len()).map(|_| random_state_with(&app, &mut rng)).collect();
            let copy = build_controlled_copy(&dec, &TagSpec::new(ready.clone(), tags)?)?;
            let ku = rng.random_range(0..bases.len());
            let kv = if rng.random_bool(0.5) {
                ku
            } else {
                rng.random_range(0..bases.len())
            };
            let u = random_state_in(&bases[ku], &mut rng);
            let v = random_state_in(&bases[kv], &mut rng);
            let r = verify_scalar_product_identity(&u, &v, &copy, &ready, Repeatability::WithinRecords(&dec))?;
            worst = worst.max(r.identity.residual);
            if !r.dichotomy {
                dichotomy_failures += 1;
            }
            if ku != kv {
                orthogonal += 1;
            }
        }
        verdicts.push(
            Verdict::below("random-couplings", worst, TOL_ALG).and(dichotomy_failures == 0),
        );
        details.insert(
            "random".into(),
            json!({
                "trials": p.random_trials,
                "orthogonal_pairs": orthogonal,
                "max_residual": worst,
                "dichotomy_failures": dichotomy_failures,
            }),
        );
    }
    Ok(Outcome {
        verdicts,
        details: Value::Object(details),
        tables: Vec::new(),
        dims,
    })
}

fn record_orthogonality(p: &RecordOrthogonalityParams, opt: &OptimizationConfig) -> Result<Outcome> {
    let dec = p.decomposition.build()?;
    let tags = p
        .apparatuses
        .iter()
        .map(|t| t.build(dec.len()))
        .collect::<Result<Vec<_>>>()?;
    let mut chain = CopyChain::new(dec, tags)?;
    if let Some(env) = &p.environment {
        chain = chain.with_environment(env.build()?);
    }
    let rho_u = p.rho_u.build()?;
    let rho_v = p.rho_v.build()?;
    let run_u = run_copy_chain(&rho_u, &chain)?;
    let run_v = run_copy_chain(&rho_v, &chain)?;
    let report = verify_record_orthogonality(&rho_u, &rho_v, &run_u, &run_v)?;
    let worst = report.steps.iter().map(|s| s.residual).fold(0.0, f64::max);
    let mut verdicts = vec![
        Verdict::below("norm-bookkeeping", worst, TOL_ALG).and(report.satisfied()),
        Verdict::below("conservation", report.trace_drift.max(report.purity_drift), TOL_ALG),
    ];
    let mut details = json!({ "chain": to_value(&report) });
    if let Some(adv) = &p.adversarial {
        let search = adversarial_record_search(&rho_u, &rho_v, adv.apparatus_dim, opt)?;
        let v = if search.system_overlap >= TOL_ALG {
            Verdict::below(
                "adversarial-distinguishability",
                search.max_distinguishability,
                OVERLAP_DISTINGUISHABILITY,
            )
        } else {
            Verdict::above(
                "adversarial-distinguishability",
                search.max_distinguishability,
                ORTHOGONAL_DISTINGUISHABILITY,
            )
            .and(search.feasible)
        };
        verdicts.push(v);
        details["adversarial"] = to_value(&search);
    }
    Ok(Outcome {
        verdicts,
        details,
        tables: Vec::new(),
        dims: Some(chain.dims()),
    })
}

fn composites(spec: &CompositesSpec) -> Result<(DensityOperator, DensityOperator)> {
    match spec {
        CompositesSpec::Explicit { u, v } => Ok((u.build()?, v.build()?)),
        CompositesSpec::MixedRecord {
            system_u,
            system_v,
            ready,
            coupling,
            environment,
        } => {
            let su = system_u.build()?;
            let sv = system_v.build()?;
            let ready = ready.build()?;
            let (u, _) = coupling.build(su.dim(), ready.dim())?;
            let env = match environment {
                Some(e) => Some((e.state.build()?, e.unitary.clone())),
                None => None,
            };
            let env_ref = env.as_ref().map(|(s, u)| (s, u));
            Ok((
                mixed_record_composite(&su, &ready, &u, env_ref)?,
                mixed_record_composite(&sv, &ready, &u, env_ref)?,
            ))
        }
    }
}

fn actionability(p: &ActionabilityParams, opt: &OptimizationConfig) -> Result<Outcome> {
    let (cu, cv) = composites(&p.composites)?;
    if cu.dims() != cv.dims() {
        return Err(field_error("composites", "the two composites have different layouts".into()));
    }
    if p.factor >= cu.dims().len() {
        return Err(field_error(
            "factor",
            format!("factor {} of a {}-factor composite", p.factor, cu.dims().len()),
        ));
    }
    let verdict = actionability_test(&cu, &cv, p.factor, p.test_dim, opt)?;
    let mut verdicts = vec![match p.expect {
        Some(Expectation::Actionable) => {
            Verdict::above("actionability", verdict.best_score, THR_ACTION).and(verdict.actionable)
        }
        Some(Expectation::NotActionable) => {
            Verdict::below("actionability", verdict.best_score, TOL_OPT).and(!verdict.actionable)
        }
        None => Verdict::below(
            "search-conclusive",
            verdict.product_residual.max(verdict.spectrum_residual),
            TOL_PROD,
        )
        .and(verdict.status != ActionabilityStatus::Inconclusive),
    }];
    if verdict.actionable {
        verdicts.push(Verdict::below(
            "system-orthogonality",
            verdict.system_overlap,
            TOL_ALG,
        ));
    }
    verdicts.push(Verdict::below(
        "conservation",
        verdict.trace_drift.max(verdict.purity_drift),
        TOL_ALG,
    ));
    Ok(Outcome {
        verdicts,
        details: to_value(&verdict),
        tables: Vec::new(),
        dims: Some(cu.dims().clone()),
    })
}

fn mixtures(p: &MixturesParams, opt: &OptimizationConfig) -> Result<Outcome> {
    let ru = p.rho_u.build()?;
    let rv = p.rho_v.build()?;
    let mut verdicts = Vec::with_capacity(p.quadruples.len());
    let mut reports = Vec::with_capacity(p.quadruples.len());
    for (i, q) in p.quadruples.iter().enumerate() {
        let cfg = opt.clone().with_seed(derive_seed(opt.seed, i as u64));
        let r = mixtures_dont_mix_check(&ru, &rv, (q[0], q[1]), (q[2], q[3]), &cfg)?;
        let name = format!("mixture-{i}");
        verdicts.push(if r.trivial {
            Verdict::above(name, r.verdict.best_score, THR_ACTION).and(r.consistent)
        } else {
            Verdict::below(name, r.verdict.best_score, TOL_OPT).and(r.consistent)
        });
        reports.push(r);
    }
    Ok(Outcome {
        verdicts,
        details: json!({ "quadruples": to_value(&reports) }),
        tables: Vec::new(),
        dims: Some(CompositeDims::single(ru.dim())),
    })
}

fn purified(p: &PurifiedParams, seed: u64) -> Result<Outcome> {
    let mut verdicts = Vec::new();
    let mut details = serde_json::Map::new();
    let mut dims = None;
    if let (Some(gu), Some(gv)) = (&p.gamma_u, &p.gamma_v) {
        let r = purified_orthogonality(gu, gv)?;
        verdicts.push(Verdict::below("schmidt-sum", r.identity.residual, TOL_ALG));
        match p.expect_copyable {
            Some(true) => verdicts.push(Verdict::below("copyability", r.identity.lhs.norm(), TOL_ALG)),
            Some(false) => verdicts.push(Verdict::above("copyability", r.identity.lhs.norm(), TOL_ALG)),
            None => {}
        }
        dims = Some(gu.dims().clone());
        details.insert("explicit".into(), to_value(&r));
    }
    if p.random_pairs > 0 {
        let mut rng = rng_from_seed(derive_seed(seed, 1));
        let mut worst: f64 = 0.0;
        for _ in 0..p.random_pairs {
            let d = rng.random_range(1..=p.max_dim);
            let rank = rng.random_range(1..=d);
            let rho = random_density_with(d, rank, &mut rng)?;
            let gu = purify(&rho);
            let w = random_unitary_with(d, &mut rng);
            let lifted = w.tensor(&UnitaryOperator::identity(CompositeDims::single(d)));
            let gv = lifted.apply(&gu)?.with_dims(gu.dims().clone())?;
            worst = worst.max(purified_orthogonality(&gu, &gv)?.identity.residual);
        }
        verdicts.push(Verdict::below("random-schmidt-sums", worst, TOL_ALG));
        details.insert(
            "random".into(),
            json!({ "pairs": p.random_pairs, "max_residual": worst }),
        );
    }
    Ok(Outcome {
        verdicts,
        details: Value::Object(details),
        tables: Vec::new(),
        dims,
    })
}

fn bell(opt: &OptimizationConfig) -> Result<Outcome> {
    let r = bell_phase_demo(opt)?;
    let verdicts = vec![
        Verdict::below("reduced-state-equality", (r.reduced_overlap - 0.5).abs(), TOL_ALG),
        Verdict::below("global-orthogonality", r.global_overlap, GLOBAL_ORTHOGONALITY),
        Verdict::below("no-local-actionability", r.local.best_score, TOL_OPT).and(!r.local.actionable),
    ];
    Ok(Outcome {
        verdicts,
        details: to_value(&r),
        tables: Vec::new(),
        dims: Some(CompositeDims::new(vec![2, 2, 2])?),
    })
}

fn povm(p: &PovmParams) -> Result<Outcome> {
    let m = match (&p.preset, &p.y_basis, &p.z_basis, &p.evolution) {
        (Some(PovmPreset::PlusMinus), ..) => build_sequential_povm(
            vec![qubit::plus(), qubit::minus()],
            vec![qubit::ket0(), qubit::ket1()],
            UnitaryOperator::identity(CompositeDims::single(2)),
        )?,
        (Some(PovmPreset::Oscillator { levels, theta }), ..) => oscillator_preset(*levels, *theta)?,
        (None, Some(y), Some(z), Some(u)) => build_sequential_povm(y.clone(), z.clone(), u.clone())?,
        _ => return Err(field_error("preset", "incomplete measurement".into())),
    };
    let rho0 = p.rho0.build()?;
    if rho0.dim() != m.dim() {
        return Err(field_error(
            "rho0",
            format!("dimension {} for a {}-level measurement", rho0.dim(), m.dim()),
        ));
    }
    let validity = check_povm(&m);
    let probs = outcome_probabilities(&m, &rho0)?;
    let total: f64 = probs.iter().map(|q| q.p).sum();
    let verdicts = vec![
        Verdict::below("resolution-of-identity", validity.identity_residual, TOL_ALG),
        Verdict::below("hermiticity", validity.max_hermiticity_residual(), TOL_ALG),
        Verdict::below("positivity", -validity.min_eigenvalue(), TOL_ALG),
        Verdict::below("normalization", (total - 1.0).abs(), TOL_ALG),
    ];
    let mut table = Table::new("probabilities.csv", &["k", "l", "p"]);
    for q in &probs {
        table
            .rows
            .push(vec![q.k.to_string(), q.l.to_string(), format_float(q.p)]);
    }
    Ok(Outcome {
        verdicts,
        details: json!({ "validity": to_value(&validity), "probabilities": to_value(&probs) }),
        tables: vec![table],
        dims: Some(CompositeDims::single(m.dim())),
    })
}

fn sweep(p: &SweepParams, opt: &OptimizationConfig) -> Result<Outcome> {
    let rows = sweep_overlap_frontier(&p.grid, opt)?;
    let mut verdicts = Vec::with_capacity(rows.len());
    let mut table = Table::new("frontier.csv", &["s", "max_distinguishability"]);
    for r in &rows {
        let name = format!("frontier-s-{}", r.overlap);
        verdicts.push(if r.overlap == 0.0 {
            Verdict::above(name, r.max_distinguishability, ORTHOGONAL_DISTINGUISHABILITY)
                .and(r.feasibility_residual < TOL_OPT)
        } else {
            Verdict::below(name, r.max_distinguishability, OVERLAP_DISTINGUISHABILITY)
        });
        table
            .rows
            .push(vec![format_float(r.overlap), format_float(r.max_distinguishability)]);
    }
    Ok(Outcome {
        verdicts,
        details: json!({ "frontier": to_value(&rows) }),
        tables: vec![table],
        dims: Some(CompositeDims::new(vec![2, 2])?),
    })
}
