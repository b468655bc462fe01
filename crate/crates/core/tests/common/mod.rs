//! Independent reference implementations used as test oracles. Each one
//! takes a deliberately different route from the library code it checks.
#![allow(dead_code)]

use proptest::prelude::*;
use spinchaos::{Hypergraph, MultiIndex};

/// Random hypergraph with arities 2..=3 and no duplicate edges.
pub fn small_hypergraph(max_vertices: usize, max_edges: usize) -> impl Strategy<Value = Hypergraph> {
    (2..=max_vertices).prop_flat_map(move |n| {
        let arity = if n >= 3 { 2..=3usize } else { 2..=2usize };
        let edge = (arity, any::<u64>()).prop_map(move |(k, bits)| {
            let mut pool: Vec<usize> = (0..n).collect();
            let mut state = bits;
            let mut e = Vec::with_capacity(k);
            for _ in 0..k {
                let idx = (state % pool.len() as u64) as usize;
                state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407) >> 7;
                e.push(pool.swap_remove(idx));
            }
            e.sort_unstable();
            e
        });
        proptest::collection::vec(edge, 0..=max_edges).prop_map(move |mut edges| {
            let mut seen = std::collections::BTreeSet::new();
            edges.retain(|e| seen.insert(e.clone()));
            Hypergraph::new(n, 3, edges).expect("generated edges are valid")
        })
    })
}

/// Berge distances by Floyd–Warshall on the 2-section adjacency matrix.
pub fn floyd_distances(g: &Hypergraph) -> Vec<Vec<Option<usize>>> {
    let n = g.n_vertices();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for e in g.edges() {
        for &a in e {
            for &b in e {
                if a != b {
                    d[a][b] = 1;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter().map(|row| row.into_iter().map(|x| (x < inf).then_some(x)).collect()).collect()
}

/// Exhaustive search for a Berge cycle: distinct vertices `v_1..v_l` and
/// distinct edges `e_1..e_l`, `l >= 2`, with `v_k, v_{k+1} ∈ e_k` cyclically.
pub fn brute_force_berge_cycle(g: &Hypergraph, edges: &[usize]) -> bool {
    fn extend(
        g: &Hypergraph,
        edges: &[usize],
        start: usize,
        current: usize,
        used_v: &mut Vec<bool>,
        used_e: &mut Vec<bool>,
        len: usize,
    ) -> bool {
        for (slot, &e) in edges.iter().enumerate() {
            if used_e[slot] || !g.edge(e).contains(&current) {
                continue;
            }
            used_e[slot] = true;
            for &w in g.edge(e) {
                if w == current {
                    continue;
                }
                if w == start && len + 1 >= 2 {
                    return true;
                }
                if !used_v[w] {
                    used_v[w] = true;
                    if extend(g, edges, start, w, used_v, used_e, len + 1) {
                        return true;
                    }
                    used_v[w] = false;
                }
            }
            used_e[slot] = false;
        }
        false
    }
    let mut unique = edges.to_vec();
    unique.sort_unstable();
    unique.dedup();
    (0..g.n_vertices()).any(|s| {
        let mut used_v = vec![false; g.n_vertices()];
        used_v[s] = true;
        let mut used_e = vec![false; unique.len()];
        extend(g, &unique, s, s, &mut used_v, &mut used_e, 0)
    })
}

/// Whether some sign vector gives `a_i a_j Π_e (Π_{v∈e} a_v)^{n_e} = -1`,
/// by trying all `2^N` of them.
pub fn exhaustive_gauge_flip(g: &Hypergraph, i: usize, j: usize, n: &MultiIndex) -> bool {
    let nv = g.n_vertices();
    (0u64..1 << nv).any(|mask| {
        let a = |v: usize| if mask >> v & 1 == 1 { -1i32 } else { 1 };
        let mut prod = a(i) * a(j);
        for (e, deg) in n.iter() {
            let edge_sign: i32 = g.edge(e).iter().map(|&v| a(v)).product();
            prod *= edge_sign.pow(deg);
        }
        prod == -1
    })
}

/// Spin configuration `mask` as ±1 values.
pub fn spins(mask: u64, n: usize) -> Vec<f64> {
    (0..n).map(|v| if mask >> v & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// `⟨σ_i σ_j⟩` matrix and magnetisations by direct summation over `2^N`
/// states, weights `exp(β H)` shifted by the maximum energy.
pub fn naive_correlations(g: &Hypergraph, couplings: &[f64], beta: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.n_vertices();
    let energy = |s: &[f64]| -> f64 {
        g.edges().iter().zip(couplings).map(|(e, c)| c * e.iter().map(|&v| s[v]).product::<f64>()).sum()
    };
    let energies: Vec<f64> = (0u64..1 << n).map(|m| energy(&spins(m, n))).collect();
    let top = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut corr = vec![vec![0.0; n]; n];
    let mut mag = vec![0.0; n];
    for (m, &h) in energies.iter().enumerate() {
        let w = (beta * (h - top)).exp();
        let s = spins(m as u64, n);
        z += w;
        for a in 0..n {
            mag[a] += w * s[a];
            for b in 0..n {
                corr[a][b] += w * s[a] * s[b];
            }
        }
    }
    corr.iter_mut().flatten().for_each(|x| *x /= z);
    mag.iter_mut().for_each(|x| *x /= z);
    (corr, mag)
}

/// `∫ f(x) φ(x) dx` by the trapezoid rule on `[-12, 12]`; exponentially
/// accurate for smooth integrands of Gaussian decay.
pub fn trapezoid_gaussian(f: impl Fn(f64) -> f64, steps: usize) -> f64 {
    let (a, b) = (-12.0f64, 12.0f64);
    let h = (b - a) / steps as f64;
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    (0..=steps)
        .map(|k| {
            let x = a + k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            w * f(x) * (-0.5 * x * x).exp() / norm
        })
        .sum::<f64>()
        * h
}
