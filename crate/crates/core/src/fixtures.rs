//! Built-in hypergraphs: the two counterexample graphs, lattice and ring
//! Edwards–Anderson geometries, and a seeded diluted sample.

use std::collections::BTreeMap;

use crate::error::{argument, Error, Result};
use crate::hypergraph::Hypergraph;
use crate::randgraph::{sample_diluted, DilutedSpec};
use crate::rng::StreamSeed;

/// Seed behind the `diluted-demo` fixture.
pub const DILUTED_DEMO_SEED: u64 = 20_240_517;

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub graph: Hypergraph,
}

const NAMES: [(&str, &str); 5] = [
    ("remark-path-graph", "4 vertices, edges {0,1},{0,2},{1,3}: <s0 s1> = tanh(beta J_01) ignores the pendant edges"),
    (
        "figure1-hypergraph",
        "7 vertices, two 3+2 edge gadgets joined through the 3-edge {0,3,6}; odd-edge counterexample",
    ),
    ("ea-ring", "8-cycle, 2-spin nearest-neighbour couplings"),
    ("ea-torus-4x4", "4x4 periodic square lattice, 16 vertices, 32 edges"),
    ("diluted-demo", "diluted 2+3-spin sample, N=16, alpha_2=0.6, alpha_3=0.2 (lambda=2.4)"),
];

/// Every built-in fixture, in catalog order.
pub fn catalog() -> Result<Vec<Fixture>> {
    NAMES.iter().map(|(name, _)| fixture(name)).collect()
}

pub fn fixture(name: &str) -> Result<Fixture> {
    let (name, description) = NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .copied()
        .ok_or_else(|| Error::Configuration(format!("unknown fixture {name:?}")))?;
    let graph = match name {
        "remark-path-graph" => remark_path_graph(),
        "figure1-hypergraph" => figure1(),
        "ea-ring" => ring(8)?,
        "ea-torus-4x4" => torus(4, 4)?,
        _ => diluted_demo()?,
    };
    Ok(Fixture { name, description, graph })
}

pub fn remark_path_graph() -> Hypergraph {
    Hypergraph::from_pairs(4, &[(0, 1), (0, 2), (1, 3)]).expect("valid fixture")
}

/// Vertex 0 is the bridge centre, 1..=3 are `1′,2′,3′` and 4..=6 are
/// `1″,2″,3″`. Edges: `{1,2,3}, {2,3}, {4,5,6}, {5,6}` then the bridge
/// `{0,3,6}` (edge id 4).
pub fn figure1() -> Hypergraph {
    figure1_extended(1).expect("valid fixture")
}

/// The Figure-1 gadgets joined by a chain of `k` three-vertex edges
/// `{3′,x1,y1}, {y1,x2,y2}, …, {y_{k-1},x_k,3″}`.
///
/// Labels as in [`figure1`], with `x1 = 0` and the remaining chain vertices
/// numbered from 7 in chain order (`y1, x2, y2, x3, …`). Chain edges follow
/// the four gadget edges, so `k = 1` is exactly [`figure1`].
pub fn figure1_extended(k: usize) -> Result<Hypergraph> {
    if k == 0 {
        return Err(argument("bridge chain needs at least one edge"));
    }
    let mut edges = vec![vec![1, 2, 3], vec![2, 3], vec![4, 5, 6], vec![5, 6]];
    let mut next = 7;
    let mut left = 3;
    let mut centre = 0;
    for step in 0..k {
        let right = if step + 1 == k {
            6
        } else {
            next += 2;
            next - 2
        };
        edges.push(vec![left, centre, right]);
        left = right;
        centre = next - 1;
    }
    Hypergraph::new(2 * k + 5, 3, edges)
}

/// Edge ids of the bridge chain in [`figure1_extended`].
pub fn figure1_bridge_edges(k: usize) -> Vec<usize> {
    (4..4 + k).collect()
}

/// Path `0 – 1 – … – (n-1)`.
pub fn path(n: usize) -> Result<Hypergraph> {
    if n < 2 {
        return Err(argument("a path needs at least two vertices"));
    }
    let pairs: Vec<(usize, usize)> = (0..n - 1).map(|v| (v, v + 1)).collect();
    Hypergraph::from_pairs(n, &pairs)
}

/// Cycle on `n >= 3` vertices; edge `k` joins `k` and `k+1 mod n`.
pub fn ring(n: usize) -> Result<Hypergraph> {
    if n < 3 {
        return Err(argument("a ring needs at least three vertices"));
    }
    let pairs: Vec<(usize, usize)> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    Hypergraph::from_pairs(n, &pairs)
}

/// Periodic `rows × cols` square lattice; vertex `(r, c)` is `r·cols + c`.
/// Each vertex contributes its right then its down edge.
pub fn torus(rows: usize, cols: usize) -> Result<Hypergraph> {
    if rows < 3 || cols < 3 {
        return Err(argument("torus sides must be at least 3 to avoid doubled edges"));
    }
    let id = |r: usize, c: usize| (r % rows) * cols + (c % cols);
    let mut pairs = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            pairs.push((id(r, c), id(r, c + 1)));
            pairs.push((id(r, c), id(r + 1, c)));
        }
    }
    Hypergraph::from_pairs(rows * cols, &pairs)
}

/// All `n(n-1)/2` pairs, ordered lexicographically.
pub fn complete_graph(n: usize) -> Result<Hypergraph> {
    if n < 2 {
        return Err(argument("complete graph needs at least two vertices"));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Hypergraph::from_pairs(n, &pairs)
}

pub fn diluted_demo_spec() -> DilutedSpec {
    DilutedSpec::new(16, BTreeMap::from([(2, 0.6), (3, 0.2)])).expect("valid fixture")
}

pub fn diluted_demo() -> Result<Hypergraph> {
    let mut rng = StreamSeed::new(DILUTED_DEMO_SEED).stream("graph", 0);
    sample_diluted(&diluted_demo_spec(), &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shapes() {
        let all = catalog().unwrap();
        assert_eq!(all.len(), 5);
        let f1 = fixture("figure1-hypergraph").unwrap().graph;
        assert_eq!((f1.n_vertices(), f1.n_edges()), (7, 5));
        assert_eq!(f1.edge(4), &[0, 3, 6]);
        assert_eq!(fixture("ea-ring").unwrap().graph.n_edges(), 8);
        let torus = fixture("ea-torus-4x4").unwrap().graph;
        assert_eq!((torus.n_vertices(), torus.n_edges()), (16, 32));
        assert!(torus.is_even());
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn extended_chain_layout() {
        let g = figure1_extended(2).unwrap();
        assert_eq!(g.n_vertices(), 9);
        assert_eq!(g.edge(4), &[0, 3, 7]);
        assert_eq!(g.edge(5), &[6, 7, 8]);
        let g = figure1_extended(3).unwrap();
        assert_eq!(g.n_vertices(), 11);
        assert_eq!(g.edges()[4..], [vec![0, 3, 7], vec![7, 8, 9], vec![6, 9, 10]]);
        assert_eq!(g.berge_distance(1, 4).unwrap(), Some(5));
    }

    #[test]
    fn diluted_demo_is_reproducible() {
        assert_eq!(diluted_demo().unwrap(), diluted_demo().unwrap());
        assert!((diluted_demo_spec().lambda() - 2.4).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_counts() {
        assert_eq!(complete_graph(6).unwrap().n_edges(), 15);
    }
}
