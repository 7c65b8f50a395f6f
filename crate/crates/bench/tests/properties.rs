use bfeq::oracle::naive_fixpoint;
use bfeq::UpdateOptions;
use bfeq_bench::{agree, compare, Dataset, GenSpec, Strategy as UpdateStrategy};
use proptest::prelude::*;

fn dataset(spec: &GenSpec, seed: u64) -> Dataset {
    let g = spec.generate(seed).unwrap();
    Dataset::parse(&spec.name(), &g.facts, &g.rules).unwrap()
}

fn spec() -> impl proptest::strategy::Strategy<Value = GenSpec> {
    prop_oneof![
        (1usize..6, 0.0..=1.0f64).prop_map(|(blocks, bridge)| GenSpec::Bijective { blocks, bridge }),
        (1usize..16, 1usize..4, 0usize..3, any::<bool>()).prop_map(|(n, g, extra_edges, equality)| {
            GenSpec::Clique { constants: n.max(g), groups: g, extra_edges, equality }
        }),
        (1usize..10, 0usize..3).prop_map(|(length, equalities)| GenSpec::Chain { length, equalities }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn strategies_agree_on_generated_data(spec in spec(), seed in any::<u64>(), fraction in 0.01..=1.0f64) {
        let ds = dataset(&spec, seed);
        let deletions = ds.random_deletions(fraction, seed);
        let outcomes = compare(&ds, &UpdateStrategy::ALL, &deletions, UpdateOptions::default());
        prop_assert!(agree(&outcomes));
        let mut remaining = ds.explicit_set();
        for t in &deletions {
            remaining.delete(t);
        }
        prop_assert_eq!(&outcomes[0].expanded, &naive_fixpoint(&remaining, &ds.program));
    }

    #[test]
    fn reports_repeat_under_the_same_seed(spec in spec(), seed in any::<u64>()) {
        let ds = dataset(&spec, seed);
        let deletions = ds.random_deletions(0.5, seed);
        let strip = |o: Vec<bfeq_bench::Outcome>| {
            o.into_iter().map(|o| { let mut r = o.row; r.wall_ms = 0.0; r }).collect::<Vec<_>>()
        };
        let a = strip(compare(&ds, &UpdateStrategy::ALL, &deletions, UpdateOptions::default()));
        let b = strip(compare(&ds, &UpdateStrategy::ALL, &deletions, UpdateOptions::default()));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn clique_groups_become_complete(n in 1usize..30, groups in 1usize..5, extra in 0usize..4, seed in any::<u64>()) {
        let groups = groups.min(n);
        let spec = GenSpec::Clique { constants: n, groups, extra_edges: extra, equality: false };
        let ds = dataset(&spec, seed);
        let same_town = ds.dict.lookup(":sameTown").unwrap();
        let j = naive_fixpoint(&ds.explicit_set(), &ds.program);
        let expected: usize = (0..groups).map(|g| {
            let size = n / groups + usize::from(g < n % groups);
            if size > 1 { size * size } else { 0 }
        }).sum();
        prop_assert_eq!(j.iter().filter(|t| t.p == same_town).count(), expected);
    }
}

#[test]
fn singleton_groups_derive_only_reflexivity() {
    let ds = dataset(&GenSpec::Clique { constants: 5, groups: 5, extra_edges: 2, equality: true }, 0);
    let e = ds.explicit_set();
    let j = naive_fixpoint(&e, &ds.program);
    assert!(j.iter().filter(|t| !e.contains(t)).all(|t| t.as_reflexive().is_some()));
}
