mod common;

use common::{naive_correlations, small_hypergraph};
use proptest::prelude::*;
use spinchaos::disorder::standard_gaussians;
use spinchaos::fixtures;
use spinchaos::gibbs::{
    anneal, correlations, exact_correlations, exact_correlations_with, ground_state_overlap, ground_states,
    mcmc_correlations, overlap_second_moment, Beta, McmcSettings, SpinSystem,
};
use spinchaos::{Execution, Hypergraph, StreamSeed};

fn random_couplings(g: &Hypergraph, seed: u64) -> Vec<f64> {
    standard_gaussians(g.n_edges(), &mut StreamSeed::new(seed).stream("couplings", 0))
}

/// Erdős–Rényi pair graph with edge probability `p`, drawn from `seed`.
fn random_pair_graph(n: usize, p: f64, seed: u64) -> Hypergraph {
    use rand::Rng;
    let mut rng = StreamSeed::new(seed).stream("graph", 0);
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((a, b));
            }
        }
    }
    Hypergraph::from_pairs(n, &pairs).unwrap()
}

#[test]
fn remark_graph_hamiltonian_by_hand() {
    let g = fixtures::remark_path_graph();
    let (c1, c2, c3) = (0.7, -1.3, 2.1);
    let sys = SpinSystem::new(&g, vec![c1, c2, c3], Beta::Finite(1.0)).unwrap();
    // σ = (+,+,−,−) on vertices 0..3; edges {0,1}, {0,2}, {1,3}.
    assert_eq!(sys.hamiltonian(&[1, 1, -1, -1]).unwrap(), c1 - c2 - c3);
}

// Error bars come from the spread across chains, so enough chains are
// needed for a 3 s.e. rule to behave like its normal-theory counterpart.
#[test]
fn mcmc_matches_exact_on_random_instance() {
    let g = random_pair_graph(8, 0.5, 3);
    let sys = SpinSystem::new(&g, random_couplings(&g, 3), Beta::Finite(0.5)).unwrap();
    let exact = exact_correlations(&sys).unwrap();
    let settings = McmcSettings { sweeps: 5_000, burn_in: 500, chains: 64 };
    let mc = mcmc_correlations(&sys, settings, StreamSeed::new(17), Execution::Parallel).unwrap();
    for i in 0..8 {
        for j in i + 1..8 {
            let se = mc.std_error(i, j).unwrap();
            let diff = (mc.get(i, j) - exact.get(i, j)).abs();
            assert!(diff < 3.0 * se, "({i},{j}): |{diff}| vs se {se}");
        }
    }
}

#[test]
fn mcmc_at_zero_beta_is_uncorrelated() {
    let g = fixtures::ring(6).unwrap();
    let sys = SpinSystem::new(&g, random_couplings(&g, 1), Beta::Finite(0.0)).unwrap();
    let settings = McmcSettings { sweeps: 20_000, burn_in: 500, chains: 64 };
    let mc = mcmc_correlations(&sys, settings, StreamSeed::new(2), Execution::Sequential).unwrap();
    for i in 0..6 {
        for j in i + 1..6 {
            let se = mc.std_error(i, j).unwrap();
            assert!(mc.get(i, j).abs() < 3.0 * se, "({i},{j}): {} vs se {se}", mc.get(i, j));
        }
    }
}

#[test]
fn high_temperature_overlap_is_near_one_over_n() {
    let settings = McmcSettings { sweeps: 3000, burn_in: 200, chains: 4 };
    let band = |n: usize, q: f64| q >= 1.0 / n as f64 && q <= 2.0 / n as f64;

    let big = fixtures::ring(64).unwrap();
    let sys = SpinSystem::new(&big, random_couplings(&big, 8), Beta::Finite(0.2)).unwrap();
    // Two independent runs, so sampling noise does not bias the product.
    let a = mcmc_correlations(&sys, settings, StreamSeed::new(100), Execution::Parallel).unwrap();
    let b = mcmc_correlations(&sys, settings, StreamSeed::new(101), Execution::Parallel).unwrap();
    let q = overlap_second_moment(&a, &b).unwrap();
    assert!(band(64, q), "N=64: {q}");

    let small = fixtures::ring(16).unwrap();
    let sys = SpinSystem::new(&small, random_couplings(&small, 8), Beta::Finite(0.2)).unwrap();
    let exact = exact_correlations(&sys).unwrap();
    let q16 = overlap_second_moment(&exact, &exact).unwrap();
    assert!(band(16, q16), "N=16: {q16}");
}

#[test]
fn low_temperature_gibbs_approaches_ground_state_overlap() {
    let g = random_pair_graph(10, 0.4, 5);
    let sys = SpinSystem::new(&g, random_couplings(&g, 5), Beta::Finite(30.0)).unwrap();
    let gibbs = exact_correlations(&sys).unwrap();
    let q_gibbs = overlap_second_moment(&gibbs, &gibbs).unwrap();
    let cold = SpinSystem::new(&g, sys.couplings().to_vec(), Beta::Infinite).unwrap();
    let q_ground = ground_state_overlap(&cold, &cold).unwrap();
    assert!((q_gibbs - q_ground).abs() < 1e-3, "{q_gibbs} vs {q_ground}");
}

#[test]
fn annealing_finds_the_exhaustive_maximum() {
    let g = Hypergraph::new(6, 3, vec![vec![0, 1], vec![1, 2, 3], vec![3, 4], vec![0, 4, 5], vec![2, 5], vec![1, 5]])
        .unwrap();
    let sys = SpinSystem::new(&g, random_couplings(&g, 9), Beta::Infinite).unwrap();
    let best = ground_states(&sys).unwrap();
    let found = anneal(&sys, 400, 8, &mut StreamSeed::new(4).stream("anneal", 0)).unwrap();
    assert!((found.energy - best.energy).abs() < 1e-12);
}

#[test]
fn zero_couplings_make_every_state_a_ground_state() {
    let g = fixtures::path(5).unwrap();
    let sys = SpinSystem::new(&g, vec![0.0; 4], Beta::Infinite).unwrap();
    assert_eq!(ground_states(&sys).unwrap().multiplicity(), 32);
    assert_eq!(ground_state_overlap(&sys, &sys).unwrap(), 1.0 / 5.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_naive_sum(
        g in small_hypergraph(8, 8),
        raw in proptest::collection::vec(-2.0f64..2.0, 8),
        beta in 0.0f64..2.0,
    ) {
        let couplings = raw[..g.n_edges()].to_vec();
        let sys = SpinSystem::new(&g, couplings.clone(), Beta::Finite(beta)).unwrap();
        let exact = exact_correlations(&sys).unwrap();
        let (corr, mag) = naive_correlations(&g, &couplings, beta);
        for a in 0..g.n_vertices() {
            prop_assert!((exact.magnetization[a] - mag[a]).abs() < 1e-10);
            for b in 0..g.n_vertices() {
                prop_assert!((exact.get(a, b) - corr[a][b]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn execution_modes_agree_bitwise(g in small_hypergraph(8, 8), raw in proptest::collection::vec(-2.0f64..2.0, 8)) {
        let sys = SpinSystem::new(&g, raw[..g.n_edges()].to_vec(), Beta::Finite(0.9)).unwrap();
        prop_assert_eq!(
            exact_correlations_with(&sys, Execution::Parallel).unwrap(),
            exact_correlations_with(&sys, Execution::Sequential).unwrap()
        );
    }

    #[test]
    fn gauge_transform_conjugates_correlations(
        g in small_hypergraph(7, 7),
        raw in proptest::collection::vec(-2.0f64..2.0, 7),
        mask in any::<u8>(),
        infinite in any::<bool>(),
    ) {
        let beta = if infinite { Beta::Infinite } else { Beta::Finite(1.3) };
        let sys = SpinSystem::new(&g, raw[..g.n_edges()].to_vec(), beta).unwrap();
        let a: Vec<i8> = (0..g.n_vertices()).map(|v| if mask >> v & 1 == 1 { -1 } else { 1 }).collect();
        let gauged = sys.gauge(&a).unwrap();
        let sigma: Vec<i8> = (0..g.n_vertices()).map(|v| if v % 3 == 0 { -1 } else { 1 }).collect();
        let flipped: Vec<i8> = sigma.iter().zip(&a).map(|(s, t)| s * t).collect();
        prop_assert!((gauged.hamiltonian(&sigma).unwrap() - sys.hamiltonian(&flipped).unwrap()).abs() < 1e-12);
        let c = correlations(&sys, Execution::Sequential).unwrap();
        let cg = correlations(&gauged, Execution::Sequential).unwrap();
        for i in 0..g.n_vertices() {
            for j in 0..g.n_vertices() {
                let expected = (a[i] * a[j]) as f64 * c.get(i, j);
                prop_assert!((cg.get(i, j) - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn remark_pair_is_tanh_of_its_coupling(raw in proptest::collection::vec(-3.0f64..3.0, 3), beta in 0.0f64..3.0) {
        let g = fixtures::remark_path_graph();
        let sys = SpinSystem::new(&g, raw.clone(), Beta::Finite(beta)).unwrap();
        let c = exact_correlations(&sys).unwrap();
        prop_assert!((c.get(0, 1) - (beta * raw[0]).tanh()).abs() < 1e-12);
    }

    #[test]
    fn two_spin_overlap_closed_form(ca in -3.0f64..3.0, cb in -3.0f64..3.0, beta in 0.0f64..2.0) {
        let g = Hypergraph::from_pairs(2, &[(0, 1)]).unwrap();
        let a = exact_correlations(&SpinSystem::new(&g, vec![ca], Beta::Finite(beta)).unwrap()).unwrap();
        let b = exact_correlations(&SpinSystem::new(&g, vec![cb], Beta::Finite(beta)).unwrap()).unwrap();
        let expected = (1.0 + (beta * ca).tanh() * (beta * cb).tanh()) / 2.0;
        prop_assert!((overlap_second_moment(&a, &b).unwrap() - expected).abs() < 1e-12);
    }
}
