use serde::{Deserialize, Serialize};

use crate::disorder::{perturb, standard_gaussians, DisorderModel, PerturbationKind};
use crate::error::{argument, capacity, Result};
use crate::exec::Execution;
use crate::fixtures::{figure1_bridge_edges, figure1_extended, remark_path_graph};
use crate::gibbs::{exact_correlations_with, pair_correlation, Beta, SpinSystem};
use crate::hermite::{coeff_quadrature_orders, coefficient_table, parseval_tail, sign_criterion, MAX_QUADRATURE_DIM};
use crate::hypergraph::{Hypergraph, MultiIndex};
use crate::numerics::mean_j_tanh;
use crate::rng::StreamSeed;
use crate::stats::{Accumulator, Estimate};

/// `J ↦ ⟨σ_i σ_j⟩` for couplings `ρ(J)` on `graph`.
pub fn pair_functional<'a>(
    graph: &'a Hypergraph,
    disorder: &'a DisorderModel,
    beta: f64,
    i: usize,
    j: usize,
) -> impl Fn(&[f64]) -> Result<f64> + Sync + 'a {
    move |x: &[f64]| pair_correlation(&SpinSystem::from_disorder(graph, disorder, x, Beta::Finite(beta))?, i, j)
}

/// Largest `r >= 1` (capped at `N`) whose ball around `v` has Berge-acyclic
/// interior edges, or `None` when already the radius-1 ball has a cycle.
pub fn hypertree_ball_radius(graph: &Hypergraph, v: usize) -> Result<Option<usize>> {
    let mut best = None;
    for r in 1..=graph.n_vertices() {
        let (interior, _) = graph.interior_boundary(&graph.ball(v, r)?)?;
        if graph.has_berge_cycle(&interior)? {
            break;
        }
        best = Some(r);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSettings {
    /// Quadrature order on each edge axis (at most six edges).
    pub order: usize,
    pub degree_cap: u32,
    /// Coefficients larger than this count as nonzero.
    pub threshold: f64,
    /// Coefficients forced to vanish by the sign criterion must be smaller.
    pub zero_tolerance: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings { order: 12, degree_cap: 8, threshold: 1e-6, zero_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub n: MultiIndex,
    pub value: f64,
    pub forced_zero: bool,
    /// `i, j ∈ V(n)` and they are joined inside `G(n)`.
    pub path_exists: bool,
    pub endpoints_covered: bool,
    pub edge_count: usize,
}

/// Every coefficient of `⟨σ_i σ_j⟩` under a degree cap, checked against
/// the vanishing criteria that apply to the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub i: usize,
    pub j: usize,
    pub beta: f64,
    pub even: bool,
    pub distance: Option<usize>,
    pub hypertree_radius: Option<usize>,
    pub entries: Vec<AuditEntry>,
    /// Nonzero coefficients without an `i–j` path in `G(n)`. They break no
    /// rule on odd graphs; on even graphs they are also listed as violations.
    pub pathless_nonzero: Vec<MultiIndex>,
    pub violations: Vec<String>,
    /// `(Σ φ̂², E[φ²] − Σ φ̂²)` over the table.
    pub parseval: (f64, f64),
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tabulates `φ̂_{ij}(n)` for all `|n| <= degree_cap` by tensor quadrature
/// and checks each against
/// - the sign criterion: forced coefficients must vanish;
/// - on even graphs, nonzero coefficients need an `i–j` path in `G(n)`;
/// - when the ball of some radius `r >= 1` around `i` is a hypertree,
///   nonzero coefficients need `i, j ∈ V(n)` and `|E(n)| >= min(r, d(i,j))`.
pub fn coefficient_audit(
    graph: &Hypergraph,
    i: usize,
    j: usize,
    beta: f64,
    disorder: &DisorderModel,
    settings: &AuditSettings,
    exec: Execution,
) -> Result<AuditReport> {
    let dim = graph.n_edges();
    if dim > MAX_QUADRATURE_DIM {
        return Err(capacity(format!("coefficient audit handles at most {MAX_QUADRATURE_DIM} edges, got {dim}")));
    }
    if i == j {
        return Err(argument("audit needs i != j"));
    }
    let phi = pair_functional(graph, disorder, beta, i, j);
    let table = coefficient_table(&phi, &vec![settings.order; dim], settings.degree_cap, exec)?;
    let distance = graph.berge_distance(i, j)?;
    let hypertree_radius = hypertree_ball_radius(graph, i)?;
    let even = graph.is_even();

    let mut entries = Vec::with_capacity(table.entries.len());
    let mut pathless_nonzero = Vec::new();
    let mut violations = Vec::new();
    for e in &table.entries {
        let sub = graph.sub_hypergraph(&e.n)?;
        let criterion = sign_criterion(graph, i, j, &e.n)?;
        let endpoints_covered = sub.contains_vertex(i) && sub.contains_vertex(j);
        let path_exists = endpoints_covered && sub.connects(i, j);
        let edge_count = sub.edges.len();
        let nonzero = e.value.abs() > settings.threshold;
        if criterion.forced_zero && e.value.abs() >= settings.zero_tolerance {
            violations.push(format!("n={}: forced to vanish but φ̂={:e}", e.n, e.value));
        }
        if nonzero && !path_exists {
            pathless_nonzero.push(e.n.clone());
            if even {
                violations.push(format!("n={}: φ̂={:e} without an i–j path on an even graph", e.n, e.value));
            }
        }
        if let (true, Some(r)) = (nonzero, hypertree_radius) {
            let need = distance.map_or(r, |d| d.min(r));
            if !endpoints_covered || edge_count < need {
                violations.push(format!(
                    "n={}: φ̂={:e} with |E(n)|={edge_count} < {need} inside a hypertree ball",
                    e.n, e.value
                ));
            }
        }
        entries.push(AuditEntry {
            n: e.n.clone(),
            value: e.value,
            forced_zero: criterion.forced_zero,
            path_exists,
            endpoints_covered,
            edge_count,
        });
    }
    let parseval = parseval_tail(&table, settings.degree_cap)?;
    Ok(AuditReport { i, j, beta, even, distance, hypertree_radius, entries, pathless_nonzero, violations, parseval })
}

/// One reproduced identity: `|value − reference| <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        let passed = (value - reference).abs() <= tolerance;
        IdentityCheck { name: name.into(), value, reference, tolerance, passed }
    }

    fn flag(name: impl Into<String>, holds: bool) -> Self {
        let v = if holds { 1.0 } else { 0.0 };
        IdentityCheck { name: name.into(), value: v, reference: 1.0, tolerance: 0.0, passed: holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSettings {
    /// Random disorder draws per pointwise identity.
    pub draws: usize,
    /// Gauss–Hermite order on the four gadget axes.
    pub order: usize,
    /// Bridge chain lengths of the odd-edge counterexample.
    pub chain_lengths: Vec<usize>,
}

impl Default for CounterexampleSettings {
    fn default() -> Self {
        CounterexampleSettings { draws: 100, order: 32, chain_lengths: vec![1, 2, 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub beta: f64,
    pub checks: Vec<IdentityCheck>,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `name,value,reference,tolerance,passed` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,reference,tolerance,passed\n");
        for c in &self.checks {
            out.push_str(&format!("{},{},{},{},{}\n", c.name, c.value, c.reference, c.tolerance, c.passed));
        }
        out
    }
}

const POINTWISE_TOL: f64 = 1e-12;
const COEFFICIENT_TOL: f64 = 1e-6;

/// Reproduces the two counterexamples to the converse statements.
///
/// Path graph `{0,1},{0,2},{1,3}`: `⟨σ_0σ_1⟩ = tanh(βJ_{01})` pointwise, and
/// the coefficient at `n = (1,2,0)` vanishes although no gauge forces it.
///
/// Odd-edge graph (see [`figure1_extended`]) for every chain length:
/// `⟨σ_{1′}σ_{1″}⟩` factorises into the two gadget magnetisations, each a
/// product of two `tanh`, and the coefficient with unit degree on the four
/// gadget edges equals `(E[J tanh βJ])⁴` although `G(n)` has no path
/// between `1′` and `1″`.
pub fn counterexample_suite(
    beta: f64,
    seed: StreamSeed,
    settings: &CounterexampleSettings,
    exec: Execution,
) -> Result<CounterexampleReport> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(argument(format!("β must be finite and >= 0, got {beta}")));
    }
    let mut checks = Vec::new();
    let gaussian3 = DisorderModel::gaussian(3);

    let path = remark_path_graph();
    let phi = pair_functional(&path, &gaussian3, beta, 0, 1);
    let mut worst = 0.0f64;
    let mut rng = seed.stream("disorder", 0);
    for _ in 0..settings.draws {
        let x = standard_gaussians(3, &mut rng);
        worst = worst.max((phi(&x)? - (beta * x[0]).tanh()).abs());
    }
    checks.push(IdentityCheck::new("path-graph: <s0 s1> = tanh(beta J01)", worst, 0.0, POINTWISE_TOL));
    let n = MultiIndex::from_dense(&[1, 2, 0]);
    let coefficient = coeff_quadrature_orders(&phi, &[settings.order; 3], &n)?;
    checks.push(IdentityCheck::new("path-graph: coefficient (1;2;0) vanishes", coefficient, 0.0, POINTWISE_TOL));
    let criterion = sign_criterion(&path, 0, 1, &n)?;
    checks.push(IdentityCheck::flag("path-graph: (1;2;0) not forced by any gauge", !criterion.forced_zero));

    let reference = mean_j_tanh(beta)?.powi(4);
    for (c, &k) in settings.chain_lengths.iter().enumerate() {
        let g = figure1_extended(k)?;
        let (left, _) = g.restrict(&[0, 1])?;
        let (right, _) = g.restrict(&[2, 3])?;
        let mut worst_split = 0.0f64;
        let mut worst_closed = 0.0f64;
        let mut rng = seed.stream("disorder", 1 + c as u64);
        for _ in 0..settings.draws {
            let x = standard_gaussians(g.n_edges(), &mut rng);
            let full = pair_correlation(&SpinSystem::from_disorder(&g, &gaussian3, &x, Beta::Finite(beta))?, 1, 4)?;
            // Restricted gadgets relabel 1′,2′,3′ (and 1″,2″,3″) as 0,1,2.
            let m_left = gadget_magnetization(&left, &gaussian3, &x[0..2], beta, exec)?;
            let m_right = gadget_magnetization(&right, &gaussian3, &x[2..4], beta, exec)?;
            worst_split = worst_split.max((full - m_left * m_right).abs());
            let closed_left = (beta * x[0]).tanh() * (beta * x[1]).tanh();
            let closed_right = (beta * x[2]).tanh() * (beta * x[3]).tanh();
            worst_closed = worst_closed.max((m_left - closed_left).abs()).max((m_right - closed_right).abs());
        }
        checks.push(IdentityCheck::new(
            format!("chain {k}: <s1' s1''> = <s1'>_E' <s1''>_E''"),
            worst_split,
            0.0,
            POINTWISE_TOL,
        ));
        checks.push(IdentityCheck::new(
            format!("chain {k}: gadget magnetisation = tanh product"),
            worst_closed,
            0.0,
            POINTWISE_TOL,
        ));

        // The factorisation just checked removes every chain coupling from
        // φ, so the chain axes are integrated with the one-point rule at 0.
        let chain = figure1_bridge_edges(k).len();
        let phi = pair_functional(&g, &gaussian3, beta, 1, 4);
        let gadget_phi = |x: &[f64]| {
            let mut full = x.to_vec();
            full.resize(4 + chain, 0.0);
            phi(&full)
        };
        let n = MultiIndex::from_pairs((0..4).map(|e| (e, 1)));
        let coefficient = coeff_quadrature_orders(gadget_phi, &[settings.order; 4], &n)?;
        checks.push(IdentityCheck::new(
            format!("chain {k}: coefficient = (E[J tanh(beta J)])^4"),
            coefficient,
            reference,
            COEFFICIENT_TOL,
        ));
        let sub = g.sub_hypergraph(&n)?;
        checks.push(IdentityCheck::flag(format!("chain {k}: no 1'-1'' path in G(n)"), !sub.connects(1, 4)));
    }
    Ok(CounterexampleReport { beta, checks })
}

fn gadget_magnetization(
    gadget: &Hypergraph,
    disorder: &DisorderModel,
    x: &[f64],
    beta: f64,
    exec: Execution,
) -> Result<f64> {
    let sys = SpinSystem::from_disorder(gadget, disorder, x, Beta::Finite(beta))?;
    Ok(exact_correlations_with(&sys, exec)?.magnetization[0])
}

/// Monte Carlo against series value of `E[φ(J) φ(J(t))]` at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupRow {
    pub kind: PerturbationKind,
    pub t: f64,
    pub monte_carlo: Estimate,
    /// `Σ_{|n| <= cutoff} w_t(n) φ̂(n)²`.
    pub series: f64,
    /// `E[φ²] − Σ_{|n| <= cutoff} φ̂(n)²`, which bounds the omitted terms.
    pub tail: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSettings {
    pub order: usize,
    pub cutoff: u32,
    pub samples: usize,
}

impl Default for SemigroupSettings {
    fn default() -> Self {
        SemigroupSettings { order: 24, cutoff: 8, samples: 1_000_000 }
    }
}

const SAMPLE_CHUNK: usize = 8192;

/// Checks `E[φ(J)φ(J(t))] = Σ_n w_t(n) φ̂(n)²` for `φ = ⟨σ_iσ_j⟩` with
/// `w_t(n) = e^{-|n|t}` (continuous) or `e^{-|E(n)|t}` (discrete).
/// Agreement means within three standard errors plus the Parseval tail.
#[allow(clippy::too_many_arguments)]
pub fn semigroup_check(
    graph: &Hypergraph,
    i: usize,
    j: usize,
    beta: f64,
    disorder: &DisorderModel,
    kinds: &[PerturbationKind],
    t_grid: &[f64],
    settings: &SemigroupSettings,
    seed: StreamSeed,
    exec: Execution,
) -> Result<Vec<SemigroupRow>> {
    super::curve::check_grid(t_grid)?;
    let dim = graph.n_edges();
    let phi = pair_functional(graph, disorder, beta, i, j);
    let table = coefficient_table(&phi, &vec![settings.order; dim], settings.cutoff, exec)?;
    let (_, tail) = parseval_tail(&table, settings.cutoff)?;
    let mut rows = Vec::new();
    for (kk, &kind) in kinds.iter().enumerate() {
        for (k, &t) in t_grid.iter().enumerate() {
            let stream = seed.child("semigroup", (kk * t_grid.len() + k) as u64);
            let chunks = settings.samples.div_ceil(SAMPLE_CHUNK);
            let parts = exec.try_map(chunks, |c| -> Result<Accumulator> {
                let mut rng = stream.stream("disorder", c as u64);
                let count = SAMPLE_CHUNK.min(settings.samples - c * SAMPLE_CHUNK);
                let mut acc = Accumulator::new();
                for _ in 0..count {
                    let x = standard_gaussians(dim, &mut rng);
                    let y = perturb(kind, &x, t, &mut rng)?;
                    acc.push(phi(&x)? * phi(&y)?);
                }
                Ok(acc)
            })?;
            let mut acc = Accumulator::new();
            parts.iter().for_each(|p| acc.merge(p));
            let monte_carlo = acc.estimate();
            let series = table.weighted_sum(t, kind)?;
            let agrees = (monte_carlo.mean - series).abs() <= 3.0 * monte_carlo.se + tail.max(0.0) + 1e-12;
            rows.push(SemigroupRow { kind, t, monte_carlo, series, tail, agrees });
        }
    }
    Ok(rows)
}

/// Estimate of `E[(E[⟨σ_iσ_j⟩ | J_S])²]` from pairs of independent
/// completions of the couplings off `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMeanReport {
    pub kept: Vec<usize>,
    /// Whether `S` contains an `i–j` path.
    pub path_in_kept: bool,
    pub squared_mean: Estimate,
    /// `|squared_mean| <= 3 se`.
    pub consistent_with_zero: bool,
}

/// For each outer draw of the couplings on `kept`, resamples the remaining
/// couplings twice independently and records `φ(J_S, J′)·φ(J_S, J″)`, an
/// unbiased estimate of the squared conditional mean. It vanishes exactly
/// when `E[φ | J_S] = 0` almost surely.
#[allow(clippy::too_many_arguments)]
pub fn conditional_mean_check(
    graph: &Hypergraph,
    i: usize,
    j: usize,
    beta: f64,
    disorder: &DisorderModel,
    kept: &[usize],
    outer: usize,
    seed: StreamSeed,
    exec: Execution,
) -> Result<ConditionalMeanReport> {
    for &e in kept {
        if e >= graph.n_edges() {
            return Err(argument(format!("edge {e} out of range")));
        }
    }
    let dim = graph.n_edges();
    let mut in_kept = vec![false; dim];
    kept.iter().for_each(|&e| in_kept[e] = true);
    let phi = pair_functional(graph, disorder, beta, i, j);
    let chunks = outer.div_ceil(SAMPLE_CHUNK);
    let parts = exec.try_map(chunks, |c| -> Result<Accumulator> {
        let mut rng = seed.stream("disorder", c as u64);
        let count = SAMPLE_CHUNK.min(outer - c * SAMPLE_CHUNK);
        let mut acc = Accumulator::new();
        for _ in 0..count {
            let shared = standard_gaussians(dim, &mut rng);
            let first = standard_gaussians(dim, &mut rng);
            let second = standard_gaussians(dim, &mut rng);
            let mix = |other: &[f64]| -> Vec<f64> {
                (0..dim).map(|e| if in_kept[e] { shared[e] } else { other[e] }).collect()
            };
            acc.push(phi(&mix(&first))? * phi(&mix(&second))?);
        }
        Ok(acc)
    })?;
    let mut acc = Accumulator::new();
    parts.iter().for_each(|p| acc.merge(p));
    let squared_mean = acc.estimate();
    let n = MultiIndex::from_pairs(kept.iter().map(|&e| (e, 1)));
    let path_in_kept = graph.sub_hypergraph(&n)?.connects(i, j);
    Ok(ConditionalMeanReport {
        kept: kept.to_vec(),
        path_in_kept,
        squared_mean,
        consistent_with_zero: squared_mean.mean.abs() <= 3.0 * squared_mean.se,
    })
}
