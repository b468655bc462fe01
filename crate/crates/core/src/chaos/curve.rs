use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::disorder::{
    levy_a_n, perturb, standard_gaussians, CouplingKind, DisorderModel, PerturbationKind, Rho, SymmetricCoupling,
};
use crate::error::{argument, Error, Result};
use crate::exec::Execution;
use crate::fixtures::complete_graph;
use crate::gibbs::{
    correlations, mcmc_correlations, overlap_second_moment, Beta, CorrelationMatrix, McmcSettings, SpinSystem,
};
use crate::hypergraph::Hypergraph;
use crate::randgraph::{sample_diluted, DilutedSpec};
use crate::rng::StreamSeed;
use crate::stats::{mean_se, Accumulator};

/// Where each replica's hypergraph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Fixed(Hypergraph),
    /// A fresh sample per replica from stream `("graph", replica)`.
    Diluted(DilutedSpec),
}

impl GraphSource {
    pub fn n_vertices(&self) -> usize {
        match self {
            GraphSource::Fixed(g) => g.n_vertices(),
            GraphSource::Diluted(s) => s.n(),
        }
    }

    pub fn graph_for(&self, seed: StreamSeed, replica: usize) -> Result<Cow<'_, Hypergraph>> {
        match self {
            GraphSource::Fixed(g) => Ok(Cow::Borrowed(g)),
            GraphSource::Diluted(spec) => {
                Ok(Cow::Owned(sample_diluted(spec, &mut seed.stream("graph", replica as u64))?))
            }
        }
    }
}

/// How two-point correlations are obtained for one disorder realisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Solver {
    /// Enumeration at finite β, exhaustive ground states at `β = ∞`.
    Exact,
    Mcmc(McmcSettings),
}

/// How the Gaussian disorder vector maps onto edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderLayout {
    /// One Gaussian per hyperedge.
    #[default]
    PerEdge,
    /// Two Gaussians per pair `{i,j}`, one for each ordered pair, so the
    /// coupling is `ρ(J_ij) + ρ(J_ji)` as in `Σ_{i≠j} ρ(J_ij) σ_i σ_j`.
    OrderedPairs,
}

/// Everything needed to turn a Gaussian vector into a Gibbs measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosModel {
    pub graph: GraphSource,
    pub disorder: DisorderModel,
    pub beta: Beta,
    pub coupling: CouplingKind,
    pub solver: Solver,
    pub layout: DisorderLayout,
    /// Multiplies the Hamiltonian.
    pub scale: f64,
    pub label: String,
}

impl ChaosModel {
    /// Per-edge Gaussian couplings with the identity response on every
    /// arity present in the graph source.
    pub fn gaussian(graph: GraphSource, beta: Beta, kind: PerturbationKind) -> Self {
        let max_arity = match &graph {
            GraphSource::Fixed(g) => g.max_arity(),
            GraphSource::Diluted(s) => s.max_arity(),
        };
        ChaosModel {
            graph,
            disorder: DisorderModel::gaussian(max_arity),
            beta,
            coupling: kind.into(),
            solver: Solver::Exact,
            layout: DisorderLayout::PerEdge,
            scale: 1.0,
            label: String::new(),
        }
    }

    /// Fully connected 2-spin model with Pareto-tailed couplings of index
    /// `alpha`, Hamiltonian scaled by `1/a_N`, symmetric disorder pairs.
    pub fn levy(n: usize, alpha: f64, beta: f64, solver: Solver) -> Result<Self> {
        let a_n = levy_a_n(n, alpha)?;
        Ok(ChaosModel {
            graph: GraphSource::Fixed(complete_graph(n)?),
            disorder: DisorderModel::uniform(Rho::ParetoTail { alpha }, 2)?,
            beta: Beta::Finite(beta),
            coupling: CouplingKind::SymmetricPair,
            solver,
            layout: DisorderLayout::OrderedPairs,
            scale: 1.0 / a_n,
            label: format!("levy-n{n}"),
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn validate(&self) -> Result<()> {
        self.beta.validate()?;
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(argument(format!("Hamiltonian scale must be positive, got {}", self.scale)));
        }
        match (&self.solver, self.beta) {
            (Solver::Mcmc(_), Beta::Infinite) => {
                return Err(Error::Configuration("MCMC needs finite β; use the exact solver at β = ∞".into()))
            }
            (Solver::Mcmc(s), _) => s.validate()?,
            _ => {}
        }
        if let GraphSource::Diluted(spec) = &self.graph {
            spec.validate()?;
        }
        if self.layout == DisorderLayout::OrderedPairs {
            let pairwise = match &self.graph {
                GraphSource::Fixed(g) => g.max_arity() == 2,
                GraphSource::Diluted(s) => s.max_arity() == 2,
            };
            if !pairwise {
                return Err(Error::Configuration("ordered-pair disorder needs a 2-spin graph".into()));
            }
        }
        let needed = match &self.graph {
            GraphSource::Fixed(g) => g.edges().iter().map(Vec::len).collect::<Vec<_>>(),
            GraphSource::Diluted(s) => s.alphas().keys().copied().collect(),
        };
        for p in needed {
            self.disorder.rho(p)?;
        }
        Ok(())
    }

    /// Length of the Gaussian vector for `graph`.
    pub fn disorder_dim(&self, graph: &Hypergraph) -> usize {
        match self.layout {
            DisorderLayout::PerEdge => graph.n_edges(),
            DisorderLayout::OrderedPairs => 2 * graph.n_edges(),
        }
    }

    pub fn couplings(&self, graph: &Hypergraph, gaussians: &[f64]) -> Result<Vec<f64>> {
        match self.layout {
            DisorderLayout::PerEdge => self.disorder.couplings(graph, gaussians),
            DisorderLayout::OrderedPairs => {
                if gaussians.len() != 2 * graph.n_edges() {
                    return Err(argument(format!(
                        "{} Gaussians for {} ordered pairs",
                        gaussians.len(),
                        2 * graph.n_edges()
                    )));
                }
                let rho = self.disorder.rho(2)?;
                Ok(gaussians.chunks(2).map(|p| rho.eval(p[0]) + rho.eval(p[1])).collect())
            }
        }
    }

    pub fn system<'g>(&self, graph: &'g Hypergraph, gaussians: &[f64]) -> Result<SpinSystem<'g>> {
        SpinSystem::new(graph, self.couplings(graph, gaussians)?, self.beta)?.with_scale(self.scale)
    }

    /// Correlations for one disorder vector. `mcmc_seed` keys the chains
    /// and is ignored by the exact solver.
    pub fn correlations(
        &self,
        graph: &Hypergraph,
        gaussians: &[f64],
        mcmc_seed: StreamSeed,
        exec: Execution,
    ) -> Result<CorrelationMatrix> {
        let sys = self.system(graph, gaussians)?;
        match self.solver {
            Solver::Exact => correlations(&sys, exec),
            Solver::Mcmc(settings) => mcmc_correlations(&sys, settings, mcmc_seed, exec),
        }
    }

    /// Whether every `ρ` in use is the identity, as the Gaussian lower
    /// bound requires.
    pub fn identity_disorder(&self) -> bool {
        self.layout == DisorderLayout::PerEdge && self.disorder.arities().all(|(_, rho)| rho == Rho::Identity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub estimate: f64,
    pub se: f64,
    pub replicas: usize,
}

/// `E⟨R(σ,τ)²⟩_t` on a grid of perturbation times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosCurve {
    pub label: String,
    pub n: usize,
    pub beta: Beta,
    pub kind: CouplingKind,
    pub points: Vec<CurvePoint>,
    /// Standard error of `estimate(t_{k+1}) − estimate(t_k)` from the
    /// replica-paired differences.
    pub step_se: Vec<f64>,
    /// `max_i |B_r(i)|` for `r = 0..=N`: one profile for a fixed graph,
    /// one per replica for sampled graphs.
    pub ball_profiles: Vec<Vec<usize>>,
    /// Edge counts matching `ball_profiles`.
    pub edge_counts: Vec<usize>,
    /// All hyperedges of every graph have even size.
    pub even: bool,
    pub identity_disorder: bool,
    /// `samples[replica][k]` is the replica's overlap moment at `t_k`.
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

impl ChaosCurve {
    pub fn t_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.points.iter().position(|p| p.t == t)
    }

    /// Mean and s.e. of `Σ_k w_k q_r(t_k)` over replicas, for paired
    /// comparisons between grid points.
    pub fn paired_estimate(&self, weights: &[(usize, f64)]) -> Result<crate::stats::Estimate> {
        let xs: Vec<f64> = self.samples.iter().map(|row| weights.iter().map(|&(k, w)| w * row[k]).sum()).collect();
        mean_se(&xs)
    }

    /// `t,estimate,se,replicas` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,estimate,se,replicas\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.t, p.estimate, p.se, p.replicas));
        }
        out
    }
}

/// Overlaps along the grid, plus ball profile, edge count and evenness of
/// a sampled graph.
type ReplicaRow = (Vec<f64>, Option<(Vec<usize>, usize, bool)>);

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(argument("t grid is empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(argument("t grid values must be finite and >= 0"));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(argument("t grid must be strictly increasing"));
    }
    Ok(())
}

/// Estimates the chaos curve from `replicas` independent disorder draws.
///
/// Replica `r` draws its graph from stream `("graph", r)`, its base disorder
/// from `("disorder", r)` and the perturbation noise from
/// `("perturbation", r)`, restarted at every grid point so all `t` share
/// the same noise. The base correlations are reused across the grid, so at
/// `t = 0` the estimate is the unperturbed second moment bit for bit.
pub fn chaos_curve(
    model: &ChaosModel,
    t_grid: &[f64],
    replicas: usize,
    seed: StreamSeed,
    exec: Execution,
) -> Result<ChaosCurve> {
    model.validate()?;
    check_grid(t_grid)?;
    if replicas < 2 {
        return Err(Error::Statistics(format!("chaos curve needs >= 2 replicas, got {replicas}")));
    }
    let fixed = matches!(model.graph, GraphSource::Fixed(_));
    let rows = exec.try_map(replicas, |r| -> Result<ReplicaRow> {
        let graph = model.graph_for_replica(seed, r)?;
        let q = replica_overlaps(model, &graph, t_grid, seed, r)?;
        let geometry = (!fixed).then(|| (graph.max_ball_profile(graph.n_vertices()), graph.n_edges(), graph.is_even()));
        Ok((q, geometry))
    })?;

    let (ball_profiles, edge_counts, even) = match &model.graph {
        GraphSource::Fixed(g) => (vec![g.max_ball_profile(g.n_vertices())], vec![g.n_edges()], g.is_even()),
        GraphSource::Diluted(_) => {
            let geo: Vec<_> = rows.iter().map(|(_, g)| g.clone().expect("sampled geometry")).collect();
            let even = geo.iter().all(|g| g.2);
            (geo.iter().map(|g| g.0.clone()).collect(), geo.iter().map(|g| g.1).collect(), even)
        }
    };
    let samples: Vec<Vec<f64>> = rows.into_iter().map(|(q, _)| q).collect();

    let mut points = Vec::with_capacity(t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        let est = samples.iter().map(|row| row[k]).collect::<Accumulator>().estimate();
        points.push(CurvePoint { t, estimate: est.mean, se: est.se, replicas });
    }
    let step_se = (1..t_grid.len())
        .map(|k| samples.iter().map(|row| row[k] - row[k - 1]).collect::<Accumulator>().estimate().se)
        .collect();
    Ok(ChaosCurve {
        label: model.label.clone(),
        n: model.n(),
        beta: model.beta,
        kind: model.coupling,
        points,
        step_se,
        ball_profiles,
        edge_counts,
        even,
        identity_disorder: model.identity_disorder(),
        samples,
    })
}

impl ChaosModel {
    fn graph_for_replica(&self, seed: StreamSeed, r: usize) -> Result<Cow<'_, Hypergraph>> {
        self.graph.graph_for(seed, r)
    }
}

/// Overlap second moments of one replica along the grid.
fn replica_overlaps(
    model: &ChaosModel,
    graph: &Hypergraph,
    t_grid: &[f64],
    seed: StreamSeed,
    r: usize,
) -> Result<Vec<f64>> {
    let dim = model.disorder_dim(graph);
    let inner = Execution::Sequential;
    let chains = seed.child("mcmc", r as u64);
    let mut disorder_rng = seed.stream("disorder", r as u64);
    match model.coupling {
        CouplingKind::Continuous | CouplingKind::Discrete => {
            let kind = match model.coupling {
                CouplingKind::Continuous => PerturbationKind::Continuous,
                _ => PerturbationKind::Discrete,
            };
            let base = standard_gaussians(dim, &mut disorder_rng);
            let corr_base = model.correlations(graph, &base, chains.child("base", 0), inner)?;
            t_grid
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    let mut noise = seed.stream("perturbation", r as u64);
                    let partner = perturb(kind, &base, t, &mut noise)?;
                    let corr = model.correlations(graph, &partner, chains.child("partner", k as u64), inner)?;
                    overlap_second_moment(&corr_base, &corr)
                })
                .collect()
        }
        CouplingKind::SymmetricPair => {
            let pair = SymmetricCoupling::draw(dim, &mut disorder_rng);
            t_grid
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    let (a, b) = pair.at(t)?;
                    let ca = model.correlations(graph, &a, chains.child("first", k as u64), inner)?;
                    let cb = model.correlations(graph, &b, chains.child("second", k as u64), inner)?;
                    overlap_second_moment(&ca, &cb)
                })
                .collect()
        }
    }
}
