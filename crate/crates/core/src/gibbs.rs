//! Gibbs measures of hypergraph spin systems: exact enumeration, ground
//! states, Glauber sampling and overlap moments.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::disorder::DisorderModel;
use crate::error::{argument, capacity, Error, Result};
use crate::exec::Execution;
use crate::hypergraph::Hypergraph;
use crate::rng::StreamSeed;

/// Largest system handled by exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 24;
/// Largest system handled by simulated annealing.
pub const ANNEALING_CAP: usize = 200;
const BLOCK_BITS: usize = 14;

/// Inverse temperature; `Infinite` selects the uniform measure on ground
/// states and is never represented as a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::Infinite => None,
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Beta::Finite(b) if b >= 0.0 && b.is_finite() => Ok(()),
            Beta::Finite(b) => Err(argument(format!("β must be finite and >= 0, got {b}"))),
            Beta::Infinite => Ok(()),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(b) => Ok(Beta::Finite(b)),
            Raw::Text(t) if t == "inf" || t == "infinity" => Ok(Beta::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("β must be a number or \"inf\", got {t:?}"))),
        }
    }
}

/// Couplings on a hypergraph together with an inverse temperature.
///
/// `H(σ) = scale · Σ_e c_e Π_{i∈e} σ_i`; the Gibbs weight is `e^{βH}`.
#[derive(Debug, Clone)]
pub struct SpinSystem<'g> {
    graph: &'g Hypergraph,
    couplings: Vec<f64>,
    beta: Beta,
    scale: f64,
}

impl<'g> SpinSystem<'g> {
    pub fn new(graph: &'g Hypergraph, couplings: Vec<f64>, beta: Beta) -> Result<Self> {
        if couplings.len() != graph.n_edges() {
            return Err(argument(format!("{} couplings for {} edges", couplings.len(), graph.n_edges())));
        }
        if couplings.iter().any(|c| !c.is_finite()) {
            return Err(argument("couplings must be finite"));
        }
        beta.validate()?;
        Ok(SpinSystem { graph, couplings, beta, scale: 1.0 })
    }

    /// Couplings `ρ_{|e|}(J_e)` from a Gaussian vector over edges.
    pub fn from_disorder(graph: &'g Hypergraph, model: &DisorderModel, gaussians: &[f64], beta: Beta) -> Result<Self> {
        Self::new(graph, model.couplings(graph, gaussians)?, beta)
    }

    /// Multiplies the Hamiltonian by `scale` (e.g. `1/a_N`).
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(argument(format!("Hamiltonian scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn graph(&self) -> &'g Hypergraph {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn hamiltonian(&self, sigma: &[i8]) -> Result<f64> {
        if sigma.len() != self.n() {
            return Err(argument(format!("{} spins for {} vertices", sigma.len(), self.n())));
        }
        if sigma.iter().any(|&s| s != 1 && s != -1) {
            return Err(argument("spins must be ±1"));
        }
        Ok(self.scale * self.raw_energy(|v| sigma[v] as f64))
    }

    fn raw_energy(&self, spin: impl Fn(usize) -> f64) -> f64 {
        self.graph
            .edges()
            .iter()
            .zip(&self.couplings)
            .map(|(e, &c)| c * e.iter().map(|&v| spin(v)).product::<f64>())
            .sum()
    }

    /// The system with couplings `a_e c_e`, `a_e = Π_{i∈e} a_i`.
    pub fn gauge(&self, a: &[i8]) -> Result<SpinSystem<'g>> {
        if a.len() != self.n() || a.iter().any(|&s| s != 1 && s != -1) {
            return Err(argument("gauge vector must hold N signs"));
        }
        let couplings = self
            .graph
            .edges()
            .iter()
            .zip(&self.couplings)
            .map(|(e, &c)| c * e.iter().map(|&v| a[v] as f64).product::<f64>())
            .collect();
        Ok(SpinSystem { couplings, ..self.clone() })
    }

    fn enumeration_beta(&self) -> Result<f64> {
        if self.n() > ENUMERATION_CAP {
            return Err(capacity(format!("{} spins exceed the enumeration cap {ENUMERATION_CAP}", self.n())));
        }
        self.beta.finite().ok_or_else(|| argument("exact Gibbs enumeration needs finite β"))
    }

    fn coupling_mass(&self) -> f64 {
        self.scale * self.couplings.iter().map(|c| c.abs()).sum::<f64>()
    }
}

/// Walks the `2^low` states of one block in Gray-code order, updating the
/// energy incrementally. The block index fixes the high spins.
struct Walker<'a, 'g> {
    sys: &'a SpinSystem<'g>,
    spins: Vec<f64>,
    signs: Vec<f64>,
    energy: f64,
    mask: u32,
}

impl<'a, 'g> Walker<'a, 'g> {
    fn new(sys: &'a SpinSystem<'g>) -> Self {
        Walker { sys, spins: vec![1.0; sys.n()], signs: vec![1.0; sys.graph.n_edges()], energy: 0.0, mask: 0 }
    }

    fn reset(&mut self, block: usize, low: usize) {
        for (v, s) in self.spins.iter_mut().enumerate() {
            *s = if v >= low && (block >> (v - low)) & 1 == 1 { -1.0 } else { 1.0 };
        }
        self.mask = (block << low) as u32;
        self.energy = 0.0;
        for (e, verts) in self.sys.graph.edges().iter().enumerate() {
            self.signs[e] = verts.iter().map(|&v| self.spins[v]).product();
            self.energy += self.sys.couplings[e] * self.signs[e];
        }
    }

    #[inline]
    fn flip(&mut self, v: usize) {
        let mut delta = 0.0;
        for &e in self.sys.graph.incident_edges(v) {
            delta -= 2.0 * self.sys.couplings[e] * self.signs[e];
            self.signs[e] = -self.signs[e];
        }
        self.energy += delta;
        self.spins[v] = -self.spins[v];
        self.mask ^= 1 << v;
    }

    /// Calls `visit` on every state of `block`.
    fn run(&mut self, block: usize, low: usize, mut visit: impl FnMut(&Self)) {
        self.reset(block, low);
        visit(self);
        for k in 1usize..(1 << low) {
            self.flip(k.trailing_zeros() as usize);
            visit(self);
        }
    }
}

fn block_layout(n: usize) -> (usize, usize) {
    let low = n.min(BLOCK_BITS);
    (low, 1 << (n - low))
}

/// All two-point correlations `⟨σ_i σ_j⟩` of one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    n: usize,
    values: Vec<f64>,
    /// `log Z` for exact enumeration; absent for sampled or ground-state
    /// matrices.
    pub log_partition: Option<f64>,
    pub magnetization: Vec<f64>,
    /// Per-entry standard errors for sampled matrices.
    pub std_errors: Option<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Builds a matrix from row-major values; the diagonal must be 1.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n || n == 0 {
            return Err(argument(format!("{} values for a {n}x{n} matrix", values.len())));
        }
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(argument("correlation diagonal must be 1"));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(-1.0..=1.0).contains(&v) || v != values[j * n + i] {
                    return Err(argument(format!("entry ({i},{j}) = {v} invalid")));
                }
            }
        }
        Ok(CorrelationMatrix { n, values, log_partition: None, magnetization: vec![0.0; n], std_errors: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn std_error(&self, i: usize, j: usize) -> Option<f64> {
        self.std_errors.as_ref().map(|s| s[i * self.n + j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.std_errors.is_some() { "i,j,value,se\n" } else { "i,j,value\n" });
        for i in 0..self.n {
            for j in 0..self.n {
                match self.std_error(i, j) {
                    Some(se) => out.push_str(&format!("{i},{j},{},{se}\n", self.get(i, j))),
                    None => out.push_str(&format!("{i},{j},{}\n", self.get(i, j))),
                }
            }
        }
        out
    }

    fn from_triangle(n: usize, pair: &[f64], mag: Vec<f64>, norm: f64) -> Self {
        let mut values = vec![1.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let v = (pair[k] / norm).clamp(-1.0, 1.0);
                values[i * n + j] = v;
                values[j * n + i] = v;
                k += 1;
            }
        }
        CorrelationMatrix {
            n,
            values,
            log_partition: None,
            magnetization: mag.into_iter().map(|m| (m / norm).clamp(-1.0, 1.0)).collect(),
            std_errors: None,
        }
    }
}

struct Moments {
    log_ref: f64,
    z: f64,
    mag: Vec<f64>,
    pair: Vec<f64>,
}

impl Moments {
    fn rescale(&mut self, factor: f64) {
        self.z *= factor;
        self.mag.iter_mut().for_each(|m| *m *= factor);
        self.pair.iter_mut().for_each(|p| *p *= factor);
    }
}

fn accumulate_pairs(pair: &mut [f64], spins: &[f64], w: f64) {
    let n = spins.len();
    let mut k = 0;
    for i in 0..n {
        let wi = w * spins[i];
        let row = &mut pair[k..k + n - i - 1];
        for (acc, &sj) in row.iter_mut().zip(&spins[i + 1..]) {
            *acc += wi * sj;
        }
        k += n - i - 1;
    }
}

fn block_moments(sys: &SpinSystem, beta: f64, block: usize, low: usize) -> Moments {
    let n = sys.n();
    let b = beta * sys.scale;
    let mut m = Moments { log_ref: f64::NEG_INFINITY, z: 0.0, mag: vec![0.0; n], pair: vec![0.0; n * (n - 1) / 2] };
    let mut walker = Walker::new(sys);
    walker.run(block, low, |w| {
        let x = b * w.energy;
        if x > m.log_ref {
            let factor = (m.log_ref - x).exp();
            m.rescale(factor);
            m.log_ref = x;
        }
        let weight = (x - m.log_ref).exp();
        m.z += weight;
        for (acc, &s) in m.mag.iter_mut().zip(&w.spins) {
            *acc += weight * s;
        }
        accumulate_pairs(&mut m.pair, &w.spins, weight);
    });
    m
}

/// Exact correlations by Gray-code enumeration of all `2^N` states.
pub fn exact_correlations(sys: &SpinSystem) -> Result<CorrelationMatrix> {
    exact_correlations_with(sys, Execution::default())
}

pub fn exact_correlations_with(sys: &SpinSystem, exec: Execution) -> Result<CorrelationMatrix> {
    let beta = sys.enumeration_beta()?;
    let n = sys.n();
    let (low, blocks) = block_layout(n);
    let parts = exec.map(blocks, |b| block_moments(sys, beta, b, low));
    let top = parts.iter().map(|p| p.log_ref).fold(f64::NEG_INFINITY, f64::max);
    let mut total = Moments { log_ref: top, z: 0.0, mag: vec![0.0; n], pair: vec![0.0; n * (n - 1) / 2] };
    for p in &parts {
        let f = (p.log_ref - top).exp();
        total.z += f * p.z;
        for (a, &b) in total.mag.iter_mut().zip(&p.mag) {
            *a += f * b;
        }
        for (a, &b) in total.pair.iter_mut().zip(&p.pair) {
            *a += f * b;
        }
    }
    let mut corr = CorrelationMatrix::from_triangle(n, &total.pair, total.mag, total.z);
    corr.log_partition = Some(top + total.z.ln());
    Ok(corr)
}

/// Single correlation `⟨σ_i σ_j⟩` by enumeration, without the `O(N²)` pair
/// accumulation.
pub fn pair_correlation(sys: &SpinSystem, i: usize, j: usize) -> Result<f64> {
    let beta = sys.enumeration_beta()?;
    sys.graph.check_vertex(i)?;
    sys.graph.check_vertex(j)?;
    if i == j {
        return Ok(1.0);
    }
    let b = beta * sys.scale;
    let (low, blocks) = block_layout(sys.n());
    let mut walker = Walker::new(sys);
    let (mut top, mut z, mut acc) = (f64::NEG_INFINITY, 0.0, 0.0);
    for block in 0..blocks {
        walker.run(block, low, |w| {
            let x = b * w.energy;
            if x > top {
                let f = (top - x).exp();
                z *= f;
                acc *= f;
                top = x;
            }
            let weight = (x - top).exp();
            z += weight;
            acc += weight * w.spins[i] * w.spins[j];
        });
    }
    Ok((acc / z).clamp(-1.0, 1.0))
}

/// Maximisers of `H` found by exhaustive search. States are bit masks with
/// bit `i` set when `σ_i = -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStates {
    pub n: usize,
    pub energy: f64,
    pub states: Vec<u32>,
}

impl GroundStates {
    pub fn multiplicity(&self) -> usize {
        self.states.len()
    }

    /// More ground states than a single global-flip pair.
    pub fn is_degenerate(&self) -> bool {
        self.states.len() > 2
    }

    pub fn spins(&self, k: usize) -> Vec<i8> {
        mask_to_spins(self.states[k], self.n)
    }

    /// Correlations of the uniform measure on the ground states.
    pub fn correlations(&self) -> CorrelationMatrix {
        let n = self.n;
        let mut pair = vec![0.0; n * (n - 1) / 2];
        let mut mag = vec![0.0; n];
        let mut spins = vec![0.0; n];
        for &s in &self.states {
            for (v, x) in spins.iter_mut().enumerate() {
                *x = if (s >> v) & 1 == 1 { -1.0 } else { 1.0 };
            }
            for (m, &x) in mag.iter_mut().zip(&spins) {
                *m += x;
            }
            accumulate_pairs(&mut pair, &spins, 1.0);
        }
        CorrelationMatrix::from_triangle(n, &pair, mag, self.states.len() as f64)
    }
}

fn mask_to_spins(mask: u32, n: usize) -> Vec<i8> {
    (0..n).map(|v| if (mask >> v) & 1 == 1 { -1 } else { 1 }).collect()
}

/// All ground states by exhaustive enumeration. Energies within a relative
/// `1e-12 · max(1, Σ|c|)` of the maximum count as ties; candidates are
/// re-evaluated from scratch before the tie test.
pub fn ground_states(sys: &SpinSystem) -> Result<GroundStates> {
    ground_states_with(sys, Execution::default())
}

pub fn ground_states_with(sys: &SpinSystem, exec: Execution) -> Result<GroundStates> {
    let n = sys.n();
    if n > ENUMERATION_CAP {
        return Err(capacity(format!("{n} spins exceed the exhaustive ground-state cap {ENUMERATION_CAP}")));
    }
    let mass = sys.coupling_mass().max(1.0);
    let tie = 1e-12 * mass;
    let screen = 1e-9 * mass;
    let (low, blocks) = block_layout(n);
    let scale = sys.scale;
    let parts = exec.map(blocks, |block| {
        let mut walker = Walker::new(sys);
        let mut best = f64::NEG_INFINITY;
        let mut cand: Vec<u32> = Vec::new();
        walker.run(block, low, |w| {
            let e = scale * w.energy;
            if e > best + screen {
                best = e;
                cand.clear();
                cand.push(w.mask);
            } else if e >= best - screen {
                best = best.max(e);
                cand.push(w.mask);
            }
        });
        (best, cand)
    });
    let best = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut scored: Vec<(u32, f64)> = Vec::new();
    for (b, cand) in parts {
        if b < best - screen {
            continue;
        }
        for s in cand {
            let e = sys.scale * sys.raw_energy(|v| if (s >> v) & 1 == 1 { -1.0 } else { 1.0 });
            scored.push((s, e));
        }
    }
    let top = scored.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let mut states: Vec<u32> = scored.into_iter().filter(|x| x.1 >= top - tie).map(|x| x.0).collect();
    states.sort_unstable();
    Ok(GroundStates { n, energy: top, states })
}

/// Best state found by simulated annealing; not guaranteed optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub energy: f64,
    pub state: Vec<i8>,
    pub exhaustive: bool,
}

/// Metropolis annealing with a geometric inverse-temperature ladder,
/// restarted `restarts` times; keeps the best state seen.
pub fn anneal<R: Rng + ?Sized>(sys: &SpinSystem, sweeps: usize, restarts: usize, rng: &mut R) -> Result<AnnealResult> {
    let n = sys.n();
    if n > ANNEALING_CAP {
        return Err(capacity(format!("{n} spins exceed the annealing cap {ANNEALING_CAP}")));
    }
    if sweeps == 0 || restarts == 0 {
        return Err(argument("annealing needs at least one sweep and one restart"));
    }
    let typical = (sys.coupling_mass() / sys.graph.n_edges().max(1) as f64).max(1e-12);
    let (b0, b1) = (0.1 / typical, 20.0 / typical);
    let ratio = if sweeps > 1 { (b1 / b0).powf(1.0 / (sweeps - 1) as f64) } else { 1.0 };
    let mut best = AnnealResult { energy: f64::NEG_INFINITY, state: vec![1; n], exhaustive: false };
    for _ in 0..restarts {
        let mut spins: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut energy = sys.raw_energy(|v| spins[v]);
        let mut beta = b0;
        for _ in 0..sweeps {
            for v in 0..n {
                let delta = -2.0 * local_field(sys, &spins, v) * spins[v];
                if delta >= 0.0 || rng.random::<f64>() < (beta * sys.scale * delta).exp() {
                    spins[v] = -spins[v];
                    energy += delta;
                }
                if sys.scale * energy > best.energy {
                    best.energy = sys.scale * energy;
                    best.state = spins.iter().map(|&s| s as i8).collect();
                }
            }
            beta *= ratio;
        }
    }
    best.energy = sys.hamiltonian(&best.state)?;
    Ok(best)
}

/// `Σ_{e∋v} c_e Π_{u∈e, u≠v} σ_u` (unscaled).
fn local_field(sys: &SpinSystem, spins: &[f64], v: usize) -> f64 {
    sys.graph
        .incident_edges(v)
        .iter()
        .map(|&e| {
            let rest: f64 = sys.graph.edge(e).iter().filter(|&&u| u != v).map(|&u| spins[u]).product();
            sys.couplings[e] * rest
        })
        .sum()
}

/// `(1/N²) Σ_{ij} ⟨σ_iσ_j⟩_A ⟨σ_iσ_j⟩_B`: the second moment of the overlap
/// of two independent samples from the two measures.
pub fn overlap_second_moment(a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(argument(format!("overlap of {}- and {}-spin matrices", a.n, b.n)));
    }
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok(s / (a.n * a.n) as f64)
}

/// Overlap second moment of two independent uniform ground-state samples.
pub fn ground_state_overlap(a: &SpinSystem, b: &SpinSystem) -> Result<f64> {
    overlap_second_moment(&ground_states(a)?.correlations(), &ground_states(b)?.correlations())
}

/// Correlations of the system's Gibbs measure: exact enumeration at finite
/// β, uniform over exhaustive ground states at `β = ∞`.
pub fn correlations(sys: &SpinSystem, exec: Execution) -> Result<CorrelationMatrix> {
    match sys.beta {
        Beta::Finite(_) => exact_correlations_with(sys, exec),
        Beta::Infinite => Ok(ground_states_with(sys, exec)?.correlations()),
    }
}

/// Sampling parameters for heat-bath Glauber dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSettings {
    /// Total sweeps per chain, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    pub chains: usize,
}

impl McmcSettings {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(argument(format!("sweeps ({}) must exceed burn-in ({})", self.sweeps, self.burn_in)));
        }
        if self.chains < 2 {
            return Err(Error::Statistics("MCMC needs at least two chains for error bars".into()));
        }
        Ok(())
    }
}

/// Correlation estimates from independent heat-bath chains. Chain `k` uses
/// stream `("mcmc", k)` of `seed`; standard errors are taken across chains.
pub fn mcmc_correlations(
    sys: &SpinSystem,
    settings: McmcSettings,
    seed: StreamSeed,
    exec: Execution,
) -> Result<CorrelationMatrix> {
    settings.validate()?;
    let beta = sys.beta.finite().ok_or_else(|| argument("Glauber dynamics needs finite β"))?;
    let n = sys.n();
    if n < 2 {
        return Err(argument("MCMC needs at least two spins"));
    }
    let b = beta * sys.scale;
    let chains = exec.map(settings.chains, |k| {
        let mut rng = seed.stream("mcmc", k as u64);
        let mut spins: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut pair = vec![0.0; n * (n - 1) / 2];
        let mut mag = vec![0.0; n];
        for sweep in 0..settings.sweeps {
            for v in 0..n {
                let h = local_field(sys, &spins, v);
                let p_up = 1.0 / (1.0 + (-2.0 * b * h).exp());
                spins[v] = if rng.random::<f64>() < p_up { 1.0 } else { -1.0 };
            }
            if sweep >= settings.burn_in {
                for (m, &s) in mag.iter_mut().zip(&spins) {
                    *m += s;
                }
                accumulate_pairs(&mut pair, &spins, 1.0);
            }
        }
        let count = (settings.sweeps - settings.burn_in) as f64;
        pair.iter_mut().for_each(|p| *p /= count);
        mag.iter_mut().for_each(|m| *m /= count);
        (pair, mag)
    });

    let c = chains.len() as f64;
    let m = n * (n - 1) / 2;
    let mut mean = vec![0.0; m];
    let mut mag = vec![0.0; n];
    for (p, g) in &chains {
        for (a, &x) in mean.iter_mut().zip(p) {
            *a += x / c;
        }
        for (a, &x) in mag.iter_mut().zip(g) {
            *a += x / c;
        }
    }
    let mut se_tri = vec![0.0; m];
    for (p, _) in &chains {
        for ((s, &x), &mu) in se_tri.iter_mut().zip(p).zip(&mean) {
            *s += (x - mu) * (x - mu);
        }
    }
    se_tri.iter_mut().for_each(|s| *s = (*s / (c - 1.0) / c).sqrt());
    let mut corr = CorrelationMatrix::from_triangle(n, &mean, mag, 1.0);
    let mut se = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            se[i * n + j] = se_tri[k];
            se[j * n + i] = se_tri[k];
            k += 1;
        }
    }
    corr.std_errors = Some(se);
    Ok(corr)
}
