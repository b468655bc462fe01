use std::collections::BTreeMap;

use proptest::prelude::*;
use spinchaos::randgraph::{explore, growth_stats, sample_diluted, DilutedSpec};
use spinchaos::stats::mean_se;
use spinchaos::{Execution, StreamSeed};

fn spec(n: usize, alphas: &[(usize, f64)]) -> DilutedSpec {
    DilutedSpec::new(n, alphas.iter().copied().collect::<BTreeMap<_, _>>()).unwrap()
}

#[test]
fn edge_counts_have_mean_alpha_n() {
    let s = spec(60, &[(2, 0.6), (3, 0.2)]);
    let seed = StreamSeed::new(21);
    let mut counts: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for k in 0..10_000 {
        let g = sample_diluted(&s, &mut seed.stream("graph", k)).unwrap();
        for p in [2, 3] {
            counts.entry(p).or_default().push(g.edges_of_arity(p).count() as f64);
        }
    }
    for (p, alpha) in [(2, 0.6), (3, 0.2)] {
        let est = mean_se(&counts[&p]).unwrap();
        assert!((est.mean - alpha * 60.0).abs() <= 3.0 * est.se, "p={p}: {est:?}");
    }
}

#[test]
fn mean_neighbour_count_is_lambda() {
    let s = spec(1000, &[(2, 0.6), (3, 0.2)]);
    let seed = StreamSeed::new(22);
    let per_graph: Vec<f64> = (0..200)
        .map(|k| {
            let g = sample_diluted(&s, &mut seed.stream("graph", k)).unwrap();
            let total: usize = g.edges().iter().map(|e| e.len() * (e.len() - 1)).sum();
            total as f64 / 1000.0
        })
        .collect();
    let est = mean_se(&per_graph).unwrap();
    assert!((est.mean - 2.4).abs() <= 3.0 * est.se, "{est:?}");
}

#[test]
fn infected_generations_obey_first_moment_bound() {
    let s = spec(10_000, &[(2, 0.6), (3, 0.2)]);
    let stats = growth_stats(&s, 3, 2000, StreamSeed::new(23), Execution::Parallel, false).unwrap();
    assert_eq!((stats.rows[0].mean_i, stats.rows[0].se_i), (1.0, 0.0));
    let third = &stats.rows[3];
    assert!(third.mean_i <= 2.4f64.powi(3) + 3.0 * third.se_i, "{third:?}");
    assert!((third.bound_lambda_t - 13.824).abs() < 1e-12);
}

#[test]
fn subcritical_component_is_geometrically_small() {
    let s = spec(5000, &[(2, 0.2)]);
    let seed = StreamSeed::new(24);
    let sizes: Vec<f64> = (0..4000)
        .map(|k| {
            let g = sample_diluted(&s, &mut seed.stream("graph", k)).unwrap();
            let trace = explore(&g, 0, None).unwrap();
            assert!(trace.complete);
            trace.infected.iter().map(Vec::len).sum::<usize>() as f64
        })
        .collect();
    let est = mean_se(&sizes).unwrap();
    assert!(est.mean <= 1.0 / (1.0 - 0.4) + 3.0 * est.se, "{est:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exploration_traces_satisfy_structural_properties(
        seed in any::<u64>(),
        n in 10usize..300,
        a2 in 0.0f64..1.5,
        a3 in 0.0f64..0.6,
        a4 in 0.0f64..0.2,
    ) {
        let s = spec(n, &[(2, a2), (3, a3), (4, a4)]);
        let g = sample_diluted(&s, &mut StreamSeed::new(seed).stream("graph", 0)).unwrap();
        for root in [0, n / 2, n - 1] {
            let trace = explore(&g, root, None).unwrap();
            prop_assert!(trace.check_properties(&g).is_ok(), "{:?}", trace.check_properties(&g));
            // Infected generations partition the root's component.
            let mut seen: Vec<usize> = trace.infected.iter().flatten().copied().collect();
            seen.sort_unstable();
            let total = seen.len();
            seen.dedup();
            prop_assert_eq!(seen.len(), total);
            let component: Vec<usize> = (0..n).filter(|&v| g.berge_distance(root, v).unwrap().is_some()).collect();
            prop_assert_eq!(seen, component);
        }
    }

    #[test]
    fn generations_are_distance_shells(seed in any::<u64>(), n in 10usize..200) {
        let s = spec(n, &[(2, 0.9), (3, 0.3)]);
        let g = sample_diluted(&s, &mut StreamSeed::new(seed).stream("graph", 0)).unwrap();
        let trace = explore(&g, 0, None).unwrap();
        for (t, shell) in trace.infected.iter().enumerate() {
            for &v in shell {
                prop_assert_eq!(g.berge_distance(0, v).unwrap(), Some(t));
            }
        }
    }
}
