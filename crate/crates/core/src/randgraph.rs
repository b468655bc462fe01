//! Diluted random hypergraphs and the breadth-first exploration process.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{argument, capacity, Error, Result};
use crate::exec::Execution;
use crate::hypergraph::Hypergraph;
use crate::rng::{StreamRng, StreamSeed};
use crate::stats::{Accumulator, Estimate};

const ENUMERATE_LIMIT: u64 = 1 << 20;
const MAX_N_LOW_ARITY: usize = 100_000;
const MAX_N_HIGH_ARITY: usize = 10_000;

/// Parameters of the diluted model: each `p`-subset of `[N]` is an edge
/// independently with probability `α_p N / C(N, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilutedSpec {
    n: usize,
    alphas: BTreeMap<usize, f64>,
}

impl DilutedSpec {
    pub fn new(n: usize, alphas: BTreeMap<usize, f64>) -> Result<Self> {
        let spec = DilutedSpec { n, alphas };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::Configuration("diluted model needs at least one α_p".into()));
        }
        for (&p, &alpha) in &self.alphas {
            if p < 2 {
                return Err(Error::Configuration(format!("arity {p} < 2")));
            }
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::Configuration(format!("α_{p} = {alpha} must be positive")));
            }
            if p > self.n {
                return Err(Error::Configuration(format!("arity {p} exceeds N = {}", self.n)));
            }
            let cap = if p <= 3 { MAX_N_LOW_ARITY } else { MAX_N_HIGH_ARITY };
            if self.n > cap {
                return Err(capacity(format!("N = {} above sampling cap {cap} for arity {p}", self.n)));
            }
            let q = self.edge_probability(p);
            if q > 1.0 {
                return Err(Error::Configuration(format!("edge probability α_p N / C(N,p) = {q} > 1 for p = {p}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphas(&self) -> &BTreeMap<usize, f64> {
        &self.alphas
    }

    pub fn max_arity(&self) -> usize {
        self.alphas.keys().copied().max().unwrap_or(2)
    }

    /// `λ = Σ p(p-1) α_p`.
    pub fn lambda(&self) -> f64 {
        self.alphas.iter().map(|(&p, &a)| (p * (p - 1)) as f64 * a).sum()
    }

    /// `λ' = Σ p(p-1)(p-2) α_p`.
    pub fn lambda_prime(&self) -> f64 {
        self.alphas.iter().map(|(&p, &a)| (p * (p - 1) * (p - 2)) as f64 * a).sum()
    }

    pub fn edge_probability(&self, p: usize) -> f64 {
        match self.alphas.get(&p) {
            Some(&a) => a * self.n as f64 / binomial_f64(self.n, p),
            None => 0.0,
        }
    }
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn binomial_u64(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Draws one diluted hypergraph. Edges are listed by arity, then
/// lexicographically.
pub fn sample_diluted<R: Rng + ?Sized>(spec: &DilutedSpec, rng: &mut R) -> Result<Hypergraph> {
    spec.validate()?;
    let n = spec.n;
    let mut edges = Vec::new();
    for &p in spec.alphas().keys() {
        let q = spec.edge_probability(p);
        let total = binomial_u64(n, p).ok_or_else(|| capacity(format!("C({n},{p}) overflows the sampler")))?;
        let mut family = if total <= ENUMERATE_LIMIT {
            enumerate_bernoulli(n, p, q, rng)
        } else {
            let count = Binomial::new(total, q)
                .map_err(|e| Error::Configuration(format!("binomial({total}, {q}): {e}")))?
                .sample(rng);
            distinct_subsets(n, p, count as usize, rng)
        };
        family.sort_unstable();
        edges.extend(family);
    }
    Hypergraph::new(n, spec.max_arity(), edges)
}

fn enumerate_bernoulli<R: Rng + ?Sized>(n: usize, p: usize, q: f64, rng: &mut R) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut set: Vec<usize> = (0..p).collect();
    loop {
        let u: f64 = rng.random();
        if u < q {
            out.push(set.clone());
        }
        // advance to the next p-subset in lexicographic order
        let mut k = p;
        while k > 0 && set[k - 1] == n - p + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return out;
        }
        set[k - 1] += 1;
        for m in k..p {
            set[m] = set[m - 1] + 1;
        }
    }
}

fn distinct_subsets<R: Rng + ?Sized>(n: usize, p: usize, count: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut set = rand::seq::index::sample(rng, n, p).into_vec();
        set.sort_unstable();
        if seen.insert(set.clone()) {
            out.push(set);
        }
    }
    out
}

/// Record of a breadth-first exploration from one root.
///
/// Step `t` holds the newly infected set `I_t` and the edges `E_t` revealed
/// while producing it (`E_0 = ∅`). Removed and susceptible sets are implied:
/// `R_t` is the union of earlier infected sets, `S_t` the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub root: usize,
    pub n_vertices: usize,
    pub infected: Vec<Vec<usize>>,
    pub revealed: Vec<Vec<usize>>,
    /// Edges of `E_t` meeting `I_{t-1}` in at least two vertices.
    pub case_one: Vec<usize>,
    /// Pairs of distinct edges of `E_t` sharing a vertex of `I_t`, counted
    /// once per shared vertex.
    pub case_two: Vec<usize>,
    /// True when the process stopped because `I_t` became empty.
    pub complete: bool,
}

impl ExplorationTrace {
    /// Last step recorded.
    pub fn depth(&self) -> usize {
        self.infected.len() - 1
    }

    pub fn infected_size(&self, t: usize) -> usize {
        self.infected.get(t).map_or(0, Vec::len)
    }

    /// `|B_t(root)| = Σ_{s<=t} |I_s|`.
    pub fn ball_size(&self, t: usize) -> usize {
        self.infected.iter().take(t + 1).map(Vec::len).sum()
    }

    pub fn has_event(&self, t: usize) -> bool {
        self.case_one.get(t).copied().unwrap_or(0) + self.case_two.get(t).copied().unwrap_or(0) > 0
    }

    /// Smallest step with a case-one or case-two event.
    pub fn first_cycle_step(&self) -> Option<usize> {
        (1..self.infected.len()).find(|&t| self.has_event(t))
    }

    /// Whether the edges revealed in steps `1..=r` contain a Berge cycle.
    pub fn cycle_within(&self, r: usize) -> bool {
        self.first_cycle_step().is_some_and(|t| t <= r)
    }

    pub fn revealed_up_to(&self, r: usize) -> Vec<usize> {
        self.revealed.iter().take(r + 1).flatten().copied().collect()
    }

    /// Rebuilds `R_t`, `I_t`, `S_t` step by step and checks the five
    /// structural properties of the process against `graph`.
    pub fn check_properties(&self, graph: &Hypergraph) -> std::result::Result<(), String> {
        let n = graph.n_vertices();
        if n != self.n_vertices || self.infected.is_empty() || self.infected[0] != [self.root] {
            return Err("trace does not start from its root".into());
        }
        let mut removed = vec![false; n];
        let mut susceptible = vec![true; n];
        susceptible[self.root] = false;
        let mut infected_now = vec![false; n];
        infected_now[self.root] = true;
        let mut edge_seen = vec![false; graph.n_edges()];
        let mut removed_count = 0;

        for t in 0..self.infected.len() {
            // (i) and (ii): the three sets are disjoint and exhaust [N].
            let i_count = self.infected[t].len();
            let s_count = susceptible.iter().filter(|&&s| s).count();
            if removed_count + i_count + s_count != n {
                return Err(format!("step {t}: |R|+|I|+|S| != N"));
            }
            for &v in &self.infected[t] {
                if removed[v] || susceptible[v] {
                    return Err(format!("step {t}: vertex {v} in two of R, I, S"));
                }
            }
            if t + 1 == self.infected.len() {
                break;
            }
            // (iii): every edge revealed at t+1 lives inside I_t ∪ I_{t+1}.
            let mut next = vec![false; n];
            for &v in &self.infected[t + 1] {
                if !susceptible[v] {
                    return Err(format!("step {}: infected vertex {v} not susceptible", t + 1));
                }
                next[v] = true;
            }
            for &e in &self.revealed[t + 1] {
                if std::mem::replace(&mut edge_seen[e], true) {
                    return Err(format!("edge {e} revealed twice"));
                }
                if !graph.edge(e).iter().all(|&v| infected_now[v] || next[v]) {
                    return Err(format!("step {}: edge {e} leaves I_t ∪ I_(t+1)", t + 1));
                }
            }
            for &v in &self.infected[t] {
                removed[v] = true;
                infected_now[v] = false;
            }
            removed_count += i_count;
            for &v in &self.infected[t + 1] {
                susceptible[v] = false;
                infected_now[v] = true;
            }
        }

        // (v): R_{t+1} = B_t(root), i.e. infection time equals distance.
        let dist = graph.distances_from(self.root).map_err(|e| e.to_string())?;
        let mut time = vec![None; n];
        for (t, layer) in self.infected.iter().enumerate() {
            for &v in layer {
                time[v] = Some(t);
            }
        }
        let horizon = self.depth();
        for v in 0..n {
            let expected = dist[v].filter(|&d| d <= horizon);
            if time[v] != expected {
                return Err(format!("vertex {v}: infection step {:?}, distance {:?}", time[v], dist[v]));
            }
        }

        // (iv): a completed run reveals exactly the root's component.
        if self.complete {
            let labels = graph.components();
            let label = labels[self.root];
            for (e, verts) in graph.edges().iter().enumerate() {
                if (labels[verts[0]] == label) != edge_seen[e] {
                    return Err(format!("edge {e}: component membership disagrees with reveal"));
                }
            }
        }
        Ok(())
    }
}

/// Runs the exploration process from `root`, for at most `max_depth` steps
/// when given.
pub fn explore(graph: &Hypergraph, root: usize, max_depth: Option<usize>) -> Result<ExplorationTrace> {
    graph.check_vertex(root)?;
    let n = graph.n_vertices();
    // 0 = susceptible, 1 = infected at the current step, 2 = removed
    let mut state = vec![0u8; n];
    let mut edge_done = vec![false; graph.n_edges()];
    let mut step_of_new = vec![usize::MAX; n];
    let mut trace = ExplorationTrace {
        root,
        n_vertices: n,
        infected: vec![vec![root]],
        revealed: vec![Vec::new()],
        case_one: vec![0],
        case_two: vec![0],
        complete: false,
    };
    state[root] = 1;

    loop {
        let t = trace.depth();
        if trace.infected[t].is_empty() {
            trace.complete = true;
            break;
        }
        if max_depth.is_some_and(|d| t >= d) {
            break;
        }
        let current = &trace.infected[t];
        let mut edges = Vec::new();
        for &v in current {
            for &e in graph.incident_edges(v) {
                if edge_done[e] {
                    continue;
                }
                edge_done[e] = true;
                if graph.edge(e).iter().all(|&w| state[w] != 2) {
                    edges.push(e);
                }
            }
        }
        edges.sort_unstable();

        let mut next = Vec::new();
        let mut case_one = 0;
        let mut multiplicity: BTreeMap<usize, usize> = BTreeMap::new();
        for &e in &edges {
            let mut old = 0;
            for &w in graph.edge(e) {
                match state[w] {
                    1 => old += 1,
                    _ => {
                        if step_of_new[w] != t + 1 {
                            step_of_new[w] = t + 1;
                            next.push(w);
                        }
                        *multiplicity.entry(w).or_default() += 1;
                    }
                }
            }
            if old >= 2 {
                case_one += 1;
            }
        }
        let case_two = multiplicity.values().map(|&k| k * (k - 1) / 2).sum();
        next.sort_unstable();

        for &v in current {
            state[v] = 2;
        }
        for &v in &next {
            state[v] = 1;
        }
        trace.infected.push(next);
        trace.revealed.push(edges);
        trace.case_one.push(case_one);
        trace.case_two.push(case_two);
    }
    Ok(trace)
}

/// Depth `⌊δ log N⌋` with `δ = (1-ε) / (2 log λ)` up to which the diluted
/// graph is locally a hypertree with high probability.
pub fn hypertree_radius(lambda: f64, epsilon: f64, n: usize) -> Result<usize> {
    if lambda <= 1.0 {
        return Err(argument(format!("hypertree radius needs λ > 1, got {lambda}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(argument(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let delta = (1.0 - epsilon) / (2.0 * lambda.ln());
    Ok((delta * (n as f64).ln()).floor() as usize)
}

/// `Σ_{k=t}^{2t} λ^k + λ' Σ_{k=t-1}^{2(t-1)} λ^k`.
pub fn second_moment_bound(lambda: f64, lambda_prime: f64, t: usize) -> f64 {
    let first: f64 = (t..=2 * t).map(|k| lambda.powi(k as i32)).sum();
    let second: f64 = if t == 0 { 0.0 } else { (t - 1..=2 * (t - 1)).map(|k| lambda.powi(k as i32)).sum() };
    first + lambda_prime * second
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub t: usize,
    pub mean_i: f64,
    pub se_i: f64,
    pub mean_i2: f64,
    pub se_i2: f64,
    pub mean_b: f64,
    pub se_b: f64,
    pub bound_lambda_t: f64,
    pub bound_second_moment: f64,
    /// `P(first cycle event at step <= t)`.
    pub cycle_probability: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStats {
    pub spec: DilutedSpec,
    pub depth: usize,
    pub replicas: usize,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub rows: Vec<GrowthRow>,
    /// Replicas whose trace failed the structural property check.
    pub property_failures: usize,
}

impl GrowthStats {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,mean_I,se_I,mean_I2,se_I2,mean_B,bound_lambda_t,bound_second_moment,p_cycle,se_p_cycle\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.t,
                r.mean_i,
                r.se_i,
                r.mean_i2,
                r.se_i2,
                r.mean_b,
                r.bound_lambda_t,
                r.bound_second_moment,
                r.cycle_probability.mean,
                r.cycle_probability.se
            ));
        }
        out
    }
}

struct ReplicaGrowth {
    infected: Vec<f64>,
    first_cycle: Option<usize>,
    ok: bool,
}

/// Growth statistics of the exploration from vertex 0 over independent
/// graph replicas. Replica `k` draws its graph from stream `("graph", k)`.
///
/// With `check` set, every trace is run to completion and validated against
/// the structural properties; otherwise exploration stops at `depth`.
pub fn growth_stats(
    spec: &DilutedSpec,
    depth: usize,
    replicas: usize,
    seed: StreamSeed,
    exec: Execution,
    check: bool,
) -> Result<GrowthStats> {
    if replicas < 2 {
        return Err(Error::Statistics(format!("growth statistics need >= 2 replicas, got {replicas}")));
    }
    spec.validate()?;
    let per_replica = exec.try_map(replicas, |k| -> Result<ReplicaGrowth> {
        let mut rng: StreamRng = seed.stream("graph", k as u64);
        let graph = sample_diluted(spec, &mut rng)?;
        let trace = explore(&graph, 0, if check { None } else { Some(depth) })?;
        let ok = !check || trace.check_properties(&graph).is_ok();
        Ok(ReplicaGrowth {
            infected: (0..=depth).map(|t| trace.infected_size(t) as f64).collect(),
            first_cycle: trace.first_cycle_step(),
            ok,
        })
    })?;

    let lambda = spec.lambda();
    let lambda_prime = spec.lambda_prime();
    let mut rows = Vec::with_capacity(depth + 1);
    for t in 0..=depth {
        let mut i1 = Accumulator::new();
        let mut i2 = Accumulator::new();
        let mut b = Accumulator::new();
        let mut cyc = Accumulator::new();
        for r in &per_replica {
            let x = r.infected[t];
            i1.push(x);
            i2.push(x * x);
            b.push(r.infected[..=t].iter().sum());
            cyc.push(if r.first_cycle.is_some_and(|s| s <= t) { 1.0 } else { 0.0 });
        }
        let (e1, e2, eb) = (i1.estimate(), i2.estimate(), b.estimate());
        rows.push(GrowthRow {
            t,
            mean_i: e1.mean,
            se_i: e1.se,
            mean_i2: e2.mean,
            se_i2: e2.se,
            mean_b: eb.mean,
            se_b: eb.se,
            bound_lambda_t: lambda.powi(t as i32),
            bound_second_moment: second_moment_bound(lambda, lambda_prime, t),
            cycle_probability: cyc.estimate(),
        });
    }
    Ok(GrowthStats {
        spec: spec.clone(),
        depth,
        replicas,
        lambda,
        lambda_prime,
        rows,
        property_failures: per_replica.iter().filter(|r| !r.ok).count(),
    })
}
