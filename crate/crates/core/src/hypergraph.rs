//! Hypergraphs and their Berge-path geometry.
//!
//! Vertices are `0..n_vertices`; hyperedges are sorted vertex sets of size
//! `2..=max_arity` identified by their position in the edge list. A graph is
//! immutable once built, so edge ids can key [`MultiIndex`] entries.
//!
//! Distances follow Berge paths: alternating sequences of distinct vertices
//! and distinct hyperedges where consecutive vertices share the hyperedge
//! between them. A shortest such path never reuses a hyperedge, so plain
//! breadth-first search over "shares an edge" adjacency computes them.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n_vertices: usize,
    max_arity: usize,
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Builds a hypergraph, sorting each edge's vertex list.
    ///
    /// Rejects out-of-range vertices, repeated vertices inside an edge,
    /// arities outside `2..=max_arity` and duplicate edges.
    pub fn new(n_vertices: usize, max_arity: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(argument("hypergraph needs at least one vertex"));
        }
        if max_arity < 2 {
            return Err(argument(format!("max arity must be at least 2, got {max_arity}")));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut incidence = vec![Vec::new(); n_vertices];
        let mut sorted_edges = Vec::with_capacity(edges.len());
        for (id, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            if e.len() < 2 || e.len() > max_arity {
                return Err(argument(format!("edge {id} has arity {}, expected 2..={max_arity}", e.len())));
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(argument(format!("edge {id} repeats a vertex")));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n_vertices) {
                return Err(argument(format!("edge {id} uses vertex {v} >= {n_vertices}")));
            }
            if !seen.insert(e.clone()) {
                return Err(argument(format!("edge {id} duplicates an earlier edge {e:?}")));
            }
            for &v in &e {
                incidence[v].push(id);
            }
            sorted_edges.push(e);
        }
        Ok(Hypergraph { n_vertices, max_arity, edges: sorted_edges, incidence })
    }

    /// Ordinary graph (all arities two) from a list of pairs.
    pub fn from_pairs(n_vertices: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n_vertices, 2, pairs.iter().map(|&(a, b)| vec![a, b]).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &[usize] {
        &self.edges[e]
    }

    /// Edge ids containing vertex `v`, ascending.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn edges_of_arity(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].len() == p)
    }

    /// True when every hyperedge has an even number of vertices.
    pub fn is_even(&self) -> bool {
        self.edges.iter().all(|e| e.len() % 2 == 0)
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n_vertices {
            Ok(())
        } else {
            Err(argument(format!("vertex {v} out of range 0..{}", self.n_vertices)))
        }
    }

    pub(crate) fn check_edge(&self, e: usize) -> Result<()> {
        if e < self.edges.len() {
            Ok(())
        } else {
            Err(argument(format!("edge {e} out of range 0..{}", self.edges.len())))
        }
    }

    /// Berge distances from `source` to every vertex; `None` when unreachable.
    pub fn distances_from(&self, source: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(source)?;
        let mut dist = vec![None; self.n_vertices];
        let mut edge_used = vec![false; self.edges.len()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &e in &self.incidence[u] {
                if std::mem::replace(&mut edge_used[e], true) {
                    continue;
                }
                for &w in &self.edges[e] {
                    if dist[w].is_none() {
                        dist[w] = Some(du + 1);
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok(dist)
    }

    /// Length of the shortest Berge path between `u` and `v`, `None` if they
    /// lie in different components.
    pub fn berge_distance(&self, u: usize, v: usize) -> Result<Option<usize>> {
        self.check_vertex(v)?;
        Ok(self.distances_from(u)?[v])
    }

    /// Closed ball `{w : d(v, w) <= r}`, sorted.
    pub fn ball(&self, v: usize, r: usize) -> Result<Vec<usize>> {
        let dist = self.distances_from(v)?;
        Ok((0..self.n_vertices).filter(|&w| matches!(dist[w], Some(d) if d <= r)).collect())
    }

    /// `max_i |B_r(i)|` for every `r` in `0..=max_radius`.
    pub fn max_ball_profile(&self, max_radius: usize) -> Vec<usize> {
        let mut best = vec![0usize; max_radius + 1];
        for v in 0..self.n_vertices {
            let dist = self.distances_from(v).expect("vertex in range");
            let mut counts = vec![0usize; max_radius + 1];
            for d in dist.into_iter().flatten() {
                if d <= max_radius {
                    counts[d] += 1;
                }
            }
            let mut acc = 0;
            for (r, c) in counts.into_iter().enumerate() {
                acc += c;
                best[r] = best[r].max(acc);
            }
        }
        best
    }

    /// Whether the hyperedges in `edge_subset` contain a Berge cycle.
    ///
    /// A Berge cycle of length `l` is exactly a cycle of length `2l` in the
    /// bipartite vertex/edge incidence graph, so this is a forest test on
    /// that graph with a union-find. Repeated ids in the subset are ignored.
    pub fn has_berge_cycle(&self, edge_subset: &[usize]) -> Result<bool> {
        for &e in edge_subset {
            self.check_edge(e)?;
        }
        let unique: BTreeSet<usize> = edge_subset.iter().copied().collect();
        let mut dsu = DisjointSet::new(self.n_vertices + self.edges.len());
        for e in unique {
            let node = self.n_vertices + e;
            for &v in &self.edges[e] {
                if !dsu.union(v, node) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Component label per vertex over the whole graph (labels are the
    /// smallest vertex id of the component).
    pub fn components(&self) -> Vec<usize> {
        let all: Vec<usize> = (0..self.edges.len()).collect();
        self.component_labels(&all)
    }

    fn component_labels(&self, edge_ids: &[usize]) -> Vec<usize> {
        let mut dsu = DisjointSet::new(self.n_vertices);
        for &e in edge_ids {
            let first = self.edges[e][0];
            for &v in &self.edges[e][1..] {
                dsu.union(first, v);
            }
        }
        let mut smallest = vec![usize::MAX; self.n_vertices];
        let roots: Vec<usize> = (0..self.n_vertices).map(|v| dsu.find(v)).collect();
        for v in 0..self.n_vertices {
            smallest[roots[v]] = smallest[roots[v]].min(v);
        }
        roots.into_iter().map(|r| smallest[r]).collect()
    }

    /// The sub-hypergraph `G(n) = (V(n), E(n))` spanned by the support of `n`.
    pub fn sub_hypergraph(&self, n: &MultiIndex) -> Result<SubHypergraph> {
        let edges = n.support();
        for &e in &edges {
            self.check_edge(e)?;
        }
        let vertices: BTreeSet<usize> = edges.iter().flat_map(|&e| self.edges[e].iter().copied()).collect();
        let labels = self.component_labels(&edges);
        let component = vertices.iter().map(|&v| (v, labels[v])).collect();
        Ok(SubHypergraph { vertices: vertices.into_iter().collect(), edges, component })
    }

    /// Interior `{e : V(e) ⊆ B}` and edge boundary `{e : 0 < |V(e) ∩ B| < |V(e)|}`.
    pub fn interior_boundary(&self, set: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut member = vec![false; self.n_vertices];
        for &v in set {
            self.check_vertex(v)?;
            member[v] = true;
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            let inside = e.iter().filter(|&&v| member[v]).count();
            if inside == e.len() {
                interior.push(id);
            } else if inside > 0 {
                boundary.push(id);
            }
        }
        Ok((interior, boundary))
    }

    /// Hypergraph formed by the listed edges on the vertices they touch,
    /// relabelled `0..k` in increasing original order. Returns the new graph
    /// and the original id of each new vertex.
    pub fn restrict(&self, edge_ids: &[usize]) -> Result<(Hypergraph, Vec<usize>)> {
        for &e in edge_ids {
            self.check_edge(e)?;
        }
        let vertices: Vec<usize> =
            edge_ids.iter().flat_map(|&e| self.edges[e].iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
        if vertices.is_empty() {
            return Err(argument("cannot restrict to an empty edge set"));
        }
        let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let edges = edge_ids.iter().map(|&e| self.edges[e].iter().map(|v| index[v]).collect()).collect();
        Ok((Hypergraph::new(vertices.len(), self.max_arity, edges)?, vertices))
    }

    /// Serializes to the text format: `N Δ` followed by one sorted edge per line.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n_vertices, self.max_arity)?;
        for e in &self.edges {
            let line: Vec<String> = e.iter().map(usize::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Hypergraph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(parse_err(1, format!("expected `N Δ`, got {header:?}")));
        }
        let n: usize = head[0].parse().map_err(|_| parse_err(1, "bad vertex count".into()))?;
        let delta: usize = head[1].parse().map_err(|_| parse_err(1, "bad max arity".into()))?;
        let mut edges = Vec::new();
        for (k, line) in lines {
            let ids = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| parse_err(k + 1, format!("bad vertex id in {line:?}")))?;
            if ids.is_empty() {
                return Err(parse_err(k + 1, "blank edge line".into()));
            }
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(parse_err(k + 1, "edge vertices must be strictly increasing".into()));
            }
            edges.push(ids);
        }
        Hypergraph::new(n, delta, edges).map_err(|e| match e {
            Error::Argument(m) => parse_err(0, m),
            other => other,
        })
    }
}

/// Sparse per-edge degrees `n = (n_e)`; absent entries are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(BTreeMap<usize, u32>);

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex(BTreeMap::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut m = MultiIndex::zero();
        for (e, d) in pairs {
            m.set(e, d);
        }
        m
    }

    /// From a dense degree vector indexed by edge id.
    pub fn from_dense(degrees: &[u32]) -> Self {
        Self::from_pairs(degrees.iter().copied().enumerate())
    }

    pub fn to_dense(&self, n_edges: usize) -> Vec<u32> {
        let mut v = vec![0; n_edges];
        for (&e, &d) in &self.0 {
            if e < n_edges {
                v[e] = d;
            }
        }
        v
    }

    pub fn get(&self, e: usize) -> u32 {
        self.0.get(&e).copied().unwrap_or(0)
    }

    pub fn set(&mut self, e: usize, degree: u32) {
        if degree == 0 {
            self.0.remove(&e);
        } else {
            self.0.insert(e, degree);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|(&e, &d)| (e, d))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `|n| = Σ n_e`.
    pub fn total_degree(&self) -> u32 {
        self.0.values().sum()
    }

    /// `E(n)`, ascending edge ids with positive degree.
    pub fn support(&self) -> Vec<usize> {
        self.0.keys().copied().collect()
    }

    /// Edges carrying an odd degree.
    pub fn odd_support(&self) -> Vec<usize> {
        self.0.iter().filter(|(_, &d)| d % 2 == 1).map(|(&e, _)| e).collect()
    }

    pub fn max_edge(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(e, d)| format!("{e}:{d}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `G(n)` with its connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubHypergraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    component: BTreeMap<usize, usize>,
}

impl SubHypergraph {
    /// `C(v, n)`: the component of `v` in `G(n)`, or `None` when `v ∉ V(n)`.
    pub fn component_of(&self, v: usize) -> Option<Vec<usize>> {
        let label = *self.component.get(&v)?;
        Some(self.component.iter().filter(|(_, &l)| l == label).map(|(&w, _)| w).collect())
    }

    /// True when `u` and `v` both lie in `V(n)` and are joined by a path in `G(n)`.
    pub fn connects(&self, u: usize, v: usize) -> bool {
        match (self.component.get(&u), self.component.get(&v)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.component.contains_key(&v)
    }

    pub fn n_components(&self) -> usize {
        self.component.values().collect::<BTreeSet<_>>().len()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.rank[ra] < self.rank[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        if self.rank[ra] == self.rank[rb] {
            self.rank[ra] += 1;
        }
        true
    }
}
