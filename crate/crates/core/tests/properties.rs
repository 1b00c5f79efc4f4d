use proptest::prelude::*;
use rand::Rng;
use recordlab::copy_dynamics::{
    build_controlled_copy, random_decomposition_with, random_state_in, TagSpec,
};
use recordlab::hilbert::{
    hs_inner, partial_trace, purify, random_density_with, random_state_with, random_unitary_with,
    rng_from_seed, schmidt_decompose, CompositeDims, DensityOperator, UnitaryOperator,
};
use recordlab::linalg::{frobenius_distance, hermiticity_residual, C64};
use recordlab::povm::{build_sequential_povm, check_povm, outcome_probabilities};
use recordlab::theorems::{
    purified_orthogonality, verify_scalar_product_identity, Repeatability,
};

const TOL: f64 = 1e-9;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

fn density(d: usize, seed: u64) -> DensityOperator {
    let mut rng = rng_from_seed(seed);
    let rank = rng.random_range(1..=d);
    random_density_with(d, rank, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_densities_are_states(d in 1usize..6, seed in any::<u64>()) {
        let rho = density(d, seed);
        prop_assert!((rho.trace() - 1.0).abs() < TOL);
        prop_assert!(hermiticity_residual(rho.matrix()) < TOL);
        prop_assert!(rho.eigenvalues().iter().all(|&x| x > -TOL));
        let p = rho.purity();
        prop_assert!(p <= 1.0 + TOL && p >= 1.0 / d as f64 - TOL);
    }

    #[test]
    fn partial_traces_compose(a in 1usize..4, b in 1usize..4, c in 1usize..3, seed in any::<u64>()) {
        let rho = density(a * b * c, seed)
            .with_dims(CompositeDims::new(vec![a, b, c]).unwrap())
            .unwrap();
        let direct = partial_trace(&rho, &[0]).unwrap();
        let stepwise = partial_trace(&partial_trace(&rho, &[0, 1]).unwrap(), &[0]).unwrap();
        prop_assert!(frobenius_distance(direct.matrix(), stepwise.matrix()) < TOL);
        prop_assert!((direct.trace() - 1.0).abs() < TOL);
        let other = partial_trace(&rho, &[2, 0]).unwrap();
        prop_assert_eq!(other.dims().as_slice(), &[c, a]);
    }

    #[test]
    fn hs_inner_is_a_symmetric_overlap(d in 1usize..5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let rho = density(d, s1);
        let sigma = density(d, s2);
        let ab = hs_inner(&rho, &sigma).unwrap();
        let ba = hs_inner(&sigma, &rho).unwrap();
        prop_assert!((ab - ba).abs() < TOL);
        prop_assert!(ab > -TOL && ab <= 1.0 + TOL);
        prop_assert!((hs_inner(&rho, &rho).unwrap() - rho.purity()).abs() < TOL);
    }

    #[test]
    fn evolution_keeps_the_spectrum(d in 1usize..5, seed in any::<u64>()) {
        let rho = density(d, seed);
        let mut rng = rng_from_seed(seed ^ 1);
        let u = random_unitary_with(d, &mut rng);
        prop_assert!(u.unitarity_residual() < TOL);
        let out = rho.evolve(&u).unwrap();
        for (x, y) in rho.eigenvalues().iter().zip(out.eigenvalues()) {
            prop_assert!((x - y).abs() < TOL);
        }
        let back = out.evolve(&u.adjoint()).unwrap();
        prop_assert!(frobenius_distance(back.matrix(), rho.matrix()) < TOL);
    }

    #[test]
    fn purification_marginal_is_the_state(d in 1usize..5, seed in any::<u64>()) {
        let rho = density(d, seed);
        let gamma = purify(&rho);
        prop_assert!((gamma.amplitudes().norm() - 1.0).abs() < TOL);
        let marginal = partial_trace(&gamma.projector(), &[0]).unwrap();
        prop_assert!(frobenius_distance(marginal.matrix(), rho.matrix()) < TOL);
    }

    #[test]
    fn schmidt_reconstructs(a in 1usize..4, b in 1usize..4, seed in any::<u64>()) {
        let dims = CompositeDims::new(vec![a, b]).unwrap();
        let psi = random_state_with(&dims, &mut rng_from_seed(seed));
        let s = schmidt_decompose(&psi, &[0]).unwrap();
        prop_assert!(s.rank() <= a.min(b));
        let rebuilt = s.reconstruct();
        let gap = (rebuilt.amplitudes() - psi.amplitudes()).norm();
        prop_assert!(gap < TOL);
    }

    #[test]
    fn sequential_povms_are_valid(d in 1usize..5, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let y = random_unitary_with(d, &mut rng);
        let z = random_unitary_with(d, &mut rng);
        let evolution = random_unitary_with(d, &mut rng);
        let columns = |u: &UnitaryOperator| -> Vec<_> {
            (0..d)
                .map(|k| {
                    recordlab::hilbert::StateVector::from_amplitudes(u.matrix().column(k).as_slice())
                        .unwrap()
                })
                .collect()
        };
        let m = build_sequential_povm(columns(&y), columns(&z), evolution).unwrap();
        let validity = check_povm(&m);
        prop_assert!(validity.is_valid());
        let rho = density(d, seed ^ 2);
        let probs = outcome_probabilities(&m, &rho).unwrap();
        prop_assert_eq!(probs.len(), d * d);
        prop_assert!(probs.iter().all(|p| p.p > -TOL));
        prop_assert!((probs.iter().map(|p| p.p).sum::<f64>() - 1.0).abs() < TOL);
        // summing over the second outcome leaves the first measurement alone
        for k in 0..d {
            let marginal: f64 = probs[k * d..(k + 1) * d].iter().map(|p| p.p).sum();
            let yk = m.y_basis()[k].projector();
            prop_assert!((marginal - hs_inner(&yk, &rho).unwrap()).abs() < TOL);
        }
    }

    #[test]
    fn controlled_copies_satisfy_the_identity(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (decomposition, bases) = random_decomposition_with(d, &mut rng).unwrap();
        let n = decomposition.len();
        let tags = TagSpec::basis(n.max(2), n).unwrap();
        let copy = build_controlled_copy(&decomposition, &tags).unwrap();
        prop_assert!(copy.unitarity_residual() < TOL);
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let u = random_state_in(&bases[i], &mut rng);
        let v = random_state_in(&bases[j], &mut rng);
        let r = verify_scalar_product_identity(
            &u, &v, &copy, tags.ready(), Repeatability::WithinRecords(&decomposition),
        ).unwrap();
        prop_assert!(r.satisfied(), "{:?}", r);
        let expected = if i == j { 1.0 } else { 0.0 };
        prop_assert!((r.tag_overlap - C64::new(expected, 0.0)).norm() < TOL);
    }

    #[test]
    fn purified_overlaps_match_their_schmidt_sum(d in 1usize..5, seed in any::<u64>()) {
        let rho = density(d, seed);
        let gu = purify(&rho);
        let w = random_unitary_with(d, &mut rng_from_seed(seed ^ 3));
        let lifted = w.tensor(&UnitaryOperator::identity(CompositeDims::single(d)));
        let gv = lifted.apply(&gu).unwrap().with_dims(gu.dims().clone()).unwrap();
        let r = purified_orthogonality(&gu, &gv).unwrap();
        prop_assert!(r.identity.residual < TOL, "{:?}", r.identity);
        prop_assert!((r.schmidt_weights.iter().sum::<f64>() - 1.0).abs() < TOL);
    }
}
