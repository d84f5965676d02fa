use proptest::prelude::*;
use qaskit::decomp::{optimal_decomposition, Oracle};
use qaskit::maximalize::{extend_to_maximal, is_minmax, reduce_to_minmax, ExtendPolicy, PivotPolicy};
use qaskit::par::Exec;
use qaskit::sample::random_quantum;
use qaskit::scheme::{
    build_scheme2, concat_authorized_family, outer_shares_reconstructed, resource_compare, Scheme2Config,
};
use qaskit::{AccessStructure, PlayerSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn structure() -> impl Strategy<Value = AccessStructure> {
    (any::<u64>(), 2usize..=6, 1usize..=14)
        .prop_map(|(seed, n, attempts)| random_quantum(&mut ChaCha8Rng::seed_from_u64(seed), n, attempts).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_structures_are_quantum(g in structure()) {
        prop_assert!(g.is_quantum());
        for (i, a) in g.minimal_sets().iter().enumerate() {
            for b in &g.minimal_sets()[i + 1..] {
                prop_assert!(!a.is_subset_of(*b) && !b.is_subset_of(*a));
            }
        }
    }

    #[test]
    fn extension_is_maximal_superset(g in structure()) {
        let ext = extend_to_maximal(&g, &ExtendPolicy::default()).unwrap();
        prop_assert!(ext.result.is_maximal().unwrap());
        prop_assert!(ext.result.contains_closure_of(&g));
        // maximal: exactly one of each complementary pair is authorized
        let full = g.universe().full();
        for s in full.subsets() {
            prop_assert!(ext.result.is_authorized(s) != ext.result.is_authorized(full.difference(s)));
        }
    }

    #[test]
    fn reduction_ends_minimal_maximal(g in structure()) {
        let ext = extend_to_maximal(&g, &ExtendPolicy::default()).unwrap();
        if let Ok(red) = reduce_to_minmax(&ext.result, &PivotPolicy::default()) {
            prop_assert!(is_minmax(&red.result).unwrap());
            prop_assert_eq!(red.result.r(), red.result.n());
            for w in red.steps.windows(2) {
                prop_assert!(w[1].r_before < w[0].r_before);
            }
        }
    }

    #[test]
    fn decomposition_partitions_minimal_sets(g in structure()) {
        let d = optimal_decomposition(&g, &Oracle::default()).unwrap();
        d.validate().unwrap();
        prop_assert!(d.l() >= 1 && d.l() <= g.r());
        let mut all: Vec<usize> = d.blocks.iter().flat_map(|b| b.indices.clone()).collect();
        all.sort();
        prop_assert_eq!(all, (0..g.r()).collect::<Vec<_>>());
    }

    #[test]
    fn concatenation_realizes_gamma(g in structure()) {
        let cs = build_scheme2(&g, &Scheme2Config::default()).unwrap();
        prop_assert_eq!(concat_authorized_family(&cs).unwrap(), g.minimal_sets().to_vec());
        for s in g.universe().full().subsets() {
            let shares = outer_shares_reconstructed(&cs, s);
            if g.is_authorized(s) {
                prop_assert!(shares >= cs.l());
            } else {
                prop_assert!(shares < cs.l());
            }
        }
    }

    #[test]
    fn comparison_bounds(g in structure()) {
        let c = resource_compare(&g, &Oracle::default()).unwrap();
        prop_assert!(c.ours.l <= c.trivial.l);
        prop_assert_eq!(c.trivial.l, g.r());
        prop_assert_eq!(c.ours.verification_count, c.minmax.participants().len());
        prop_assert!(c.ours.verification_count <= c.trivial.verification_count);
    }

    #[test]
    fn isomorphism_is_relabeling_invariant(g in structure(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let h = AccessStructure::new(
            g.universe().clone(),
            g.minimal_sets().iter().map(|s| s.permute(&perm)),
        ).unwrap();
        prop_assert!(g.is_isomorphic(&h).unwrap());
    }

    #[test]
    fn sequential_and_parallel_agree(g in structure()) {
        let a = qaskit::decomp::optimal_decomposition_with(&g, &Oracle::default(), Exec::Sequential).unwrap();
        let b = qaskit::decomp::optimal_decomposition_with(&g, &Oracle::default(), Exec::Parallel).unwrap();
        prop_assert_eq!(a, b);
        let sa = g.unauthorized_split_with(Exec::Sequential).unwrap();
        let sb = g.unauthorized_split_with(Exec::Parallel).unwrap();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn subsets_enumerate_power_set(bits in 0u32..1 << 10) {
        let s = PlayerSet::from_bits(bits);
        let subs: Vec<PlayerSet> = s.subsets().collect();
        prop_assert_eq!(subs.len(), 1 << s.len());
        prop_assert!(subs.iter().all(|t| t.is_subset_of(s)));
    }
}
