//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! show up in `cargo test` output; exits nonzero if any criterion fails.
//! Pass criterion numbers as arguments to run a subset.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use recordlab::cli::{run_suite, RunOptions};
use recordlab::copy_dynamics::{
    build_controlled_copy, mixed_record_composite, run_copy_chain, controlled_shift, CopyChain,
    RecordDecomposition, TagSpec,
};
use recordlab::hilbert::{
    hs_inner, purify, qubit, random_density_in_subspace, random_density_with, random_state_with,
    random_unitary_with, rng_from_seed, CompositeDims, DensityOperator, StateVector,
    UnitaryOperator,
};
use recordlab::linalg::{CMatrix, CVector, C64};
use recordlab::optimizer::OptimizationConfig;
use recordlab::povm::{build_sequential_povm, check_povm, outcome_probabilities};
use recordlab::theorems::{
    actionability_test, adversarial_record_search, bell_phase_demo, mixtures_dont_mix_check,
    purified_orthogonality, verify_record_orthogonality, verify_scalar_product_identity,
    Repeatability,
};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: String) -> Outcome {
    Outcome { pass, summary }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Orthonormal columns `start..end` of a Haar unitary.
fn columns(q: &UnitaryOperator, start: usize, end: usize) -> CMatrix {
    q.matrix().columns(start, end - start).into_owned()
}

/// Random state in the span of the columns of `basis`, built by hand.
fn state_in<R: Rng>(basis: &CMatrix, rng: &mut R) -> StateVector {
    let local = random_state_with(&CompositeDims::single(basis.ncols()), rng);
    StateVector::normalized(basis * local.amplitudes(), CompositeDims::single(basis.nrows())).unwrap()
}

/// A random repeatable copy: Haar record subspaces of a `ds`-dimensional
/// system, Haar disturbances inside each, random pure tags.
struct RandomCopy {
    bases: Vec<CMatrix>,
    disturbances: Vec<CMatrix>,
    ready: StateVector,
    tags: Vec<StateVector>,
    decomposition: RecordDecomposition,
}

fn random_copy<R: Rng>(ds: usize, da: usize, rng: &mut R) -> RandomCopy {
    let blocks = rng.random_range(2..=ds);
    // block sizes: one each, the rest spread at random
    let mut sizes = vec![1usize; blocks];
    for _ in blocks..ds {
        let k = rng.random_range(0..blocks);
        sizes[k] += 1;
    }
    let q = random_unitary_with(ds, rng);
    let mut bases = Vec::new();
    let mut start = 0;
    for s in sizes {
        bases.push(columns(&q, start, start + s));
        start += s;
    }
    let id = CMatrix::identity(ds, ds);
    let disturbances: Vec<CMatrix> = bases
        .iter()
        .map(|b| {
            let w = random_unitary_with(b.ncols(), rng);
            b * w.matrix() * b.adjoint() + (&id - b * b.adjoint())
        })
        .collect();
    let app = CompositeDims::single(da);
    let ready = random_state_with(&app, rng);
    let tags = (0..bases.len()).map(|_| random_state_with(&app, rng)).collect();
    let decomposition = RecordDecomposition::from_subspaces(&bases)
        .unwrap()
        .with_disturbances(disturbances.clone())
        .unwrap();
    RandomCopy {
        bases,
        disturbances,
        ready,
        tags,
        decomposition,
    }
}

fn criterion_1() -> Outcome {
    let mut rng = rng_from_seed(101);
    let trials = 1000;
    let mut worst: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    let mut dichotomy_failures = 0;
    let mut orthogonal = 0;
    for _ in 0..trials {
        let ds = rng.random_range(2..=4);
        let da = rng.random_range(2..=3);
        let c = random_copy(ds, da, &mut rng);
        let v_copy = build_controlled_copy(
            &c.decomposition,
            &TagSpec::new(c.ready.clone(), c.tags.clone()).unwrap(),
        )
        .unwrap();
        let ku = rng.random_range(0..c.bases.len());
        let kv = if rng.random_bool(0.5) { ku } else { rng.random_range(0..c.bases.len()) };
        if ku != kv {
            orthogonal += 1;
        }
        let u = state_in(&c.bases[ku], &mut rng);
        let v = state_in(&c.bases[kv], &mut rng);
        let r = verify_scalar_product_identity(&u, &v, &v_copy, &c.ready, Repeatability::WithinRecords(&c.decomposition))
            .unwrap();
        worst = worst.max(r.identity.residual);
        if !r.dichotomy {
            dichotomy_failures += 1;
        }
        // oracle: ⟨D_u u|D_v v⟩⟨A_u|A_v⟩ from the construction itself
        let du = &c.disturbances[ku] * u.amplitudes();
        let dv = &c.disturbances[kv] * v.amplitudes();
        let tag = c.tags[ku].amplitudes().dotc(c.tags[kv].amplitudes());
        let rhs = du.dotc(&dv) * tag;
        oracle_gap = oracle_gap.max((rhs - r.identity.rhs).norm());
        oracle_gap = oracle_gap.max((u.amplitudes().dotc(v.amplitudes()) - r.identity.lhs).norm());
    }
    let pass = worst < 1e-9 && oracle_gap < 1e-9 && dichotomy_failures == 0;
    outcome(
        pass,
        format!(
            "{trials} couplings ({orthogonal} orthogonal pairs), max residual {worst:.2e}, oracle gap {oracle_gap:.2e}, dichotomy failures {dichotomy_failures}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = rng_from_seed(202);
    let chains = 100;
    let mut worst: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..chains {
        let ds = rng.random_range(2..=4);
        let c = random_copy(ds, 2, &mut rng);
        let da2 = rng.random_range(2..=3);
        let app2 = CompositeDims::single(da2);
        let ready2 = random_state_with(&app2, &mut rng);
        let tags2: Vec<StateVector> = (0..c.bases.len()).map(|_| random_state_with(&app2, &mut rng)).collect();
        let da1 = c.ready.dim();
        let chain = CopyChain::new(
            c.decomposition.clone(),
            vec![
                TagSpec::new(c.ready.clone(), c.tags.clone()).unwrap(),
                TagSpec::new(ready2, tags2.clone()).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(chain.apparatus_dims(), &[da1, da2]);
        let ku = rng.random_range(0..c.bases.len());
        let kv = rng.random_range(0..c.bases.len());
        let ru = rng.random_range(1..=c.bases[ku].ncols());
        let rho_u = random_density_in_subspace(&c.bases[ku], ru, &mut rng).unwrap();
        let rv = rng.random_range(1..=c.bases[kv].ncols());
        let rho_v = random_density_in_subspace(&c.bases[kv], rv, &mut rng).unwrap();
        let run_u = run_copy_chain(&rho_u, &chain).unwrap();
        let run_v = run_copy_chain(&rho_v, &chain).unwrap();
        let report = verify_record_orthogonality(&rho_u, &rho_v, &run_u, &run_v).unwrap();
        if !report.satisfied() {
            failures += 1;
        }
        worst = report.steps.iter().map(|s| s.residual).fold(worst, f64::max);
        // oracle: Tr(Dρ_uD† Dρ_vD†)·Π|⟨A_u|A_v⟩|² over both apparatuses
        let su = &c.disturbances[ku] * rho_u.matrix() * c.disturbances[ku].adjoint();
        let sv = &c.disturbances[kv] * rho_v.matrix() * c.disturbances[kv].adjoint();
        let sys = (su * sv).trace().re;
        let t1 = c.tags[ku].amplitudes().dotc(c.tags[kv].amplitudes()).norm_sqr();
        let t2 = tags2[ku].amplitudes().dotc(tags2[kv].amplitudes()).norm_sqr();
        let direct = hs_inner(&rho_u, &rho_v).unwrap();
        oracle_gap = oracle_gap.max((direct - sys * t1 * t2).abs());
        let last = report.steps.last().unwrap();
        oracle_gap = oracle_gap.max((last.lhs.re - direct).abs());
    }
    let pass = worst < 1e-9 && oracle_gap < 1e-9 && failures == 0;
    outcome(
        pass,
        format!("{chains} two-apparatus chains, max residual {worst:.2e}, oracle gap {oracle_gap:.2e}, failures {failures}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(303);
    let config = OptimizationConfig::default().with_seed(3030);
    let mut overlapping_worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 20 {
        let ru = random_density_with(2, rng.random_range(1..=2), &mut rng).unwrap();
        let rv = random_density_with(2, rng.random_range(1..=2), &mut rng).unwrap();
        let overlap = hs_inner(&ru, &rv).unwrap();
        if !(0.05..=0.5).contains(&overlap) {
            continue;
        }
        let cfg = config.clone().with_seed(config.seed + pairs as u64);
        let r = adversarial_record_search(&ru, &rv, 2, &cfg).unwrap();
        overlapping_worst = overlapping_worst.max(r.max_distinguishability);
        pairs += 1;
    }
    let mut orthogonal_best = f64::INFINITY;
    let mut infeasible = 0;
    for i in 0..20 {
        // qubits: a Haar basis split in two; qutrits: a ray against its complement
        let d = if i < 14 { 2 } else { 3 };
        let q = random_unitary_with(d, &mut rng);
        let bu = columns(&q, 0, 1);
        let bv = columns(&q, 1, d);
        let ru = random_density_in_subspace(&bu, 1, &mut rng).unwrap();
        let rv = random_density_in_subspace(&bv, bv.ncols(), &mut rng).unwrap();
        // reaching a feasible coupling takes a longer simplex run than
        // ruling one out; 36 generator coefficients in the qutrit case
        let cfg = OptimizationConfig {
            max_iterations: 50_000,
            ..config.clone().with_seed(config.seed + 100 + i)
        };
        let r = adversarial_record_search(&ru, &rv, 2, &cfg).unwrap();
        orthogonal_best = orthogonal_best.min(r.max_distinguishability);
        if !r.feasible {
            infeasible += 1;
        }
    }
    let pass = overlapping_worst < 1e-4 && orthogonal_best >= 0.5 && infeasible == 0;
    outcome(
        pass,
        format!(
            "overlapping pairs: max distinguishability {overlapping_worst:.2e} (< 1e-4); orthogonal pairs: min {orthogonal_best:.6} (>= 0.5), infeasible {infeasible}"
        ),
    )
}

fn diag(w: &[f64]) -> DensityOperator {
    DensityOperator::from_diagonal(w).unwrap()
}

fn criterion_4() -> Outcome {
    let config = OptimizationConfig::default().with_seed(404);
    let cnot = qubit::cnot();
    let record = |s: &DensityOperator| mixed_record_composite(s, &diag(&[1.0, 0.0]), &cnot, None).unwrap();
    let cnot_verdict = actionability_test(&record(&diag(&[1.0, 0.0])), &record(&diag(&[0.0, 1.0])), 1, 2, &config).unwrap();
    let same = record(&diag(&[1.0, 0.0]));
    let identical = actionability_test(&same, &same, 1, 2, &config).unwrap();

    // record-bearing composites: mixed ready apparatus, decohering apparatus,
    // and an overlapping pair
    let mut verdicts = Vec::new();
    let long = OptimizationConfig {
        restarts: 8,
        max_iterations: 10_000,
        ..config.clone()
    };
    let shift = controlled_shift(2, 4, 2).unwrap();
    let ready = diag(&[0.5, 0.5, 0.0, 0.0]);
    let cu = mixed_record_composite(&diag(&[1.0, 0.0]), &ready, &shift, None).unwrap();
    let cv = mixed_record_composite(&diag(&[0.0, 1.0]), &ready, &shift, None).unwrap();
    verdicts.push(("mixed ready", actionability_test(&cu, &cv, 1, 2, &long).unwrap(), true));

    let env = diag(&[1.0, 0.0]);
    let env_cnot = qubit::cnot();
    let cu = mixed_record_composite(&diag(&[1.0, 0.0]), &diag(&[1.0, 0.0]), &cnot, Some((&env, &env_cnot))).unwrap();
    let cv = mixed_record_composite(&diag(&[0.0, 1.0]), &diag(&[1.0, 0.0]), &cnot, Some((&env, &env_cnot))).unwrap();
    verdicts.push(("decohered", actionability_test(&cu, &cv, 1, 2, &config).unwrap(), true));

    let cu = record(&qubit::ket0().projector());
    let cv = record(&qubit::plus().projector());
    verdicts.push(("overlapping", actionability_test(&cu, &cv, 1, 2, &config).unwrap(), false));

    let mut pass = cnot_verdict.actionable && cnot_verdict.best_score > 0.99 && identical.best_score < 1e-6;
    let mut notes = Vec::new();
    for (name, v, expect) in &verdicts {
        let consistent = !v.actionable || v.system_overlap < 1e-9;
        pass &= consistent && v.consistent_with_orthogonality && v.actionable == *expect;
        notes.push(format!(
            "{name}: actionable={} score {:.4} S-overlap {:.2e}",
            v.actionable, v.best_score, v.system_overlap
        ));
    }
    outcome(
        pass,
        format!(
            "cnot record score {:.6} actionable={}, identical composites score {:.2e}; {}",
            cnot_verdict.best_score,
            cnot_verdict.actionable,
            identical.best_score,
            notes.join("; ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let config = OptimizationConfig::default().with_seed(505);
    let qubit_pair = (diag(&[1.0, 0.0]), diag(&[0.0, 1.0]));
    let qutrit_pair = (diag(&[1.0, 0.0, 0.0]), diag(&[0.0, 0.5, 0.5]));
    let nontrivial = [
        [0.5, 0.5, 0.5, 0.5],
        [0.9, 0.1, 0.1, 0.9],
        [0.7, 0.3, 0.2, 0.8],
        [1.0, 0.0, 0.5, 0.5],
        [0.25, 0.75, 0.0, 1.0],
    ];
    let mut worst: f64 = 0.0;
    let mut inconsistent = 0;
    let mut seed = config.seed;
    for (ru, rv) in [&qubit_pair, &qutrit_pair] {
        for q in &nontrivial {
            seed += 1;
            let r = mixtures_dont_mix_check(ru, rv, (q[0], q[1]), (q[2], q[3]), &config.clone().with_seed(seed)).unwrap();
            worst = worst.max(r.verdict.best_score);
            if !r.consistent || r.trivial {
                inconsistent += 1;
            }
        }
    }
    let mut trivial_ok = true;
    for q in [[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]] {
        seed += 1;
        let r = mixtures_dont_mix_check(&qubit_pair.0, &qubit_pair.1, (q[0], q[1]), (q[2], q[3]), &config.clone().with_seed(seed))
            .unwrap();
        trivial_ok &= r.trivial && r.verdict.actionable;
    }
    let pass = worst < 1e-6 && inconsistent == 0 && trivial_ok;
    outcome(
        pass,
        format!("10 nontrivial quadruples: max score {worst:.2e} (< 1e-6); trivial endpoints actionable={trivial_ok}"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(606);
    let mut worst: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=4);
        let rank = rng.random_range(1..=d);
        let rho = random_density_with(d, rank, &mut rng).unwrap();
        let gu = purify(&rho);
        let w = random_unitary_with(d, &mut rng);
        let lifted = w.tensor(&UnitaryOperator::identity(CompositeDims::single(d)));
        let gv = lifted.apply(&gu).unwrap().with_dims(gu.dims().clone()).unwrap();
        let r = purified_orthogonality(&gu, &gv).unwrap();
        worst = worst.max(r.identity.residual);
        // oracle: the direct inner product summed by hand
        let direct = gu
            .amplitudes()
            .iter()
            .zip(gv.amplitudes().iter())
            .fold(zero(), |acc, (a, b)| acc + a.conj() * b);
        let sum: C64 = r.terms.iter().sum();
        oracle_gap = oracle_gap.max((direct - sum).norm());
    }
    let bell = bell_phase_demo(&OptimizationConfig::default().with_seed(607)).unwrap();
    let pass = worst < 1e-9
        && oracle_gap < 1e-9
        && (bell.reduced_overlap - 0.5).abs() < 1e-9
        && bell.global_overlap < 1e-12
        && bell.local.best_score < 1e-6;
    outcome(
        pass,
        format!(
            "100 purifications: max residual {worst:.2e}, oracle gap {oracle_gap:.2e}; bell: reduced overlap {:.12}, global overlap {:.1e}, local score {:.1e}, record actionable={}",
            bell.reduced_overlap, bell.global_overlap, bell.local.best_score, bell.record.actionable
        ),
    )
}

fn criterion_7() -> Outcome {
    let y = vec![qubit::plus(), qubit::minus()];
    let m = build_sequential_povm(
        y.clone(),
        vec![qubit::ket0(), qubit::ket1()],
        UnitaryOperator::identity(CompositeDims::single(2)),
    )
    .unwrap();
    let mut entry_gap: f64 = 0.0;
    for k in 0..2 {
        let sign = if k == 0 { 1.0 } else { -1.0 };
        // ½|y_k⟩⟨y_k| written out
        let expected = [[0.25, 0.25 * sign], [0.25 * sign, 0.25]];
        for l in 0..2 {
            let f = m.element(k, l);
            for i in 0..2 {
                for j in 0..2 {
                    entry_gap = entry_gap.max((f[(i, j)] - C64::new(expected[i][j], 0.0)).norm());
                }
            }
        }
    }
    let probs = outcome_probabilities(&m, &qubit::ket0().projector()).unwrap();
    let prob_gap = probs.iter().map(|p| (p.p - 0.25).abs()).fold(0.0, f64::max);
    let identity = check_povm(&m).identity_residual;

    let mut rng = rng_from_seed(707);
    let mut oracle_gap: f64 = 0.0;
    for _ in 0..100 {
        let yb = random_unitary_with(3, &mut rng);
        let zb = random_unitary_with(3, &mut rng);
        let u = random_unitary_with(3, &mut rng);
        let rho = random_density_with(3, rng.random_range(1..=3), &mut rng).unwrap();
        let basis = |q: &UnitaryOperator| -> Vec<StateVector> {
            (0..3)
                .map(|k| StateVector::normalized(q.matrix().column(k).into_owned(), CompositeDims::single(3)).unwrap())
                .collect()
        };
        let m = build_sequential_povm(basis(&yb), basis(&zb), u.clone()).unwrap();
        let probs = outcome_probabilities(&m, &rho).unwrap();
        for p in probs {
            // two-step oracle: outcome k, collapse to |y_k⟩, evolve, outcome l
            let yk: CVector = yb.matrix().column(p.k).into_owned();
            let zl: CVector = zb.matrix().column(p.l).into_owned();
            let first = yk.dotc(&(rho.matrix() * &yk)).re;
            let second = zl.dotc(&(u.matrix() * &yk)).norm_sqr();
            oracle_gap = oracle_gap.max((p.p - first * second).abs());
        }
    }
    let pass = entry_gap < 1e-12 && prob_gap < 1e-12 && identity < 1e-9 && oracle_gap < 1e-9;
    outcome(
        pass,
        format!(
            "F(k,l) entry gap {entry_gap:.1e}, p gap {prob_gap:.1e}, identity residual {identity:.1e}, qutrit two-step oracle gap {oracle_gap:.1e}"
        ),
    )
}

fn strip_wall_time(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut all_passed = true;
    let mut count = 0;
    for dir in [a.path(), b.path()] {
        let options = RunOptions {
            outdir: dir.to_path_buf(),
            seed: None,
        };
        let report = run_suite(&suite, &options).unwrap();
        all_passed &= report.passed && !report.has_errors();
        count = report.scenarios.len();
    }
    let fa = files(a.path());
    let fb = files(b.path());
    let mut differing = Vec::new();
    if fa.len() != fb.len() {
        differing.push("file sets".to_string());
    }
    for (x, y) in fa.iter().zip(&fb) {
        let rel = x.strip_prefix(a.path()).unwrap();
        if rel != y.strip_prefix(b.path()).unwrap() {
            differing.push(rel.display().to_string());
            continue;
        }
        let tx = std::fs::read_to_string(x).unwrap();
        let ty = std::fs::read_to_string(y).unwrap();
        if strip_wall_time(&tx) != strip_wall_time(&ty) {
            differing.push(rel.display().to_string());
        }
    }
    let pass = all_passed && differing.is_empty() && count > 0;
    outcome(
        pass,
        format!(
            "bundled suite of {count} scenarios run twice: all passed={all_passed}, {} files compared, differing: {:?}",
            fa.len(),
            differing
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("scalar-product identity over random repeatable couplings", criterion_1),
        ("norm bookkeeping over two-apparatus chains", criterion_2),
        ("adversarial record search", criterion_3),
        ("actionability", criterion_4),
        ("mixtures do not mix", criterion_5),
        ("purified orthogonality and Bell demo", criterion_6),
        ("sequential POVM", criterion_7),
        ("suite reproducibility", criterion_8),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "acceptance {n} [{status}] {name}: {} ({:.1} s)",
            o.summary,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
