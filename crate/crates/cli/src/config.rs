//! Experiment configuration files (TOML, strict schema).

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use spinchaos::chaos::{AuditSettings, BoundConstants, BoundTag, CounterexampleSettings, Solver};
use spinchaos::disorder::{CouplingKind, Rho};
use spinchaos::gibbs::Beta;
use spinchaos::randgraph::DilutedSpec;
use spinchaos::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ChaosCurve,
    CoefficientAudit,
    Counterexamples,
    GrowthStats,
    LevyChaos,
    BoundCheck,
    LowerBoundCheck,
}

/// Where the hypergraph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphConfig {
    /// A built-in fixture by name.
    Fixture(String),
    /// A hypergraph text file: `N Δ` then one edge per line.
    File(PathBuf),
    /// A fresh diluted sample per replica.
    Diluted(DilutedConfig),
}

/// Hyperedge size used as a table key; TOML keys are strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Arity(pub usize);

impl Serialize for Arity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Arity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let key = String::deserialize(d)?;
        key.parse()
            .map(Arity)
            .map_err(|_| serde::de::Error::custom(format!("arity key must be an integer, got {key:?}")))
    }
}

/// Diluted model parameters: `alphas` maps arity `p` to the density `α_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilutedConfig {
    pub n: usize,
    pub alphas: BTreeMap<Arity, f64>,
}

impl DilutedConfig {
    pub fn spec(&self) -> Result<DilutedSpec> {
        DilutedSpec::new(self.n, self.alphas.iter().map(|(p, &a)| (p.0, a)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub graph: Option<GraphConfig>,
    /// Applied to every arity.
    #[serde(default = "identity")]
    pub disorder: Rho,
    pub beta: Option<Beta>,
    #[serde(default = "continuous")]
    pub perturbation: CouplingKind,
    #[serde(default = "exact")]
    pub solver: Solver,
}

fn identity() -> Rho {
    Rho::Identity
}

fn continuous() -> CouplingKind {
    CouplingKind::Continuous
}

fn exact() -> Solver {
    Solver::Exact
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericConfig {
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub degree_cap: u32,
    pub quadrature_order: usize,
    pub execution: Execution,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            t_grid: vec![0.0, 0.5, 1.0, 2.0],
            replicas: 200,
            degree_cap: 8,
            quadrature_order: 12,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub i: usize,
    pub j: usize,
    /// Restrict the graph to these edge ids before auditing.
    pub edges: Option<Vec<usize>>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    AuditSettings::default().threshold
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub tags: Vec<BoundTag>,
    pub constants: BoundConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyConfig {
    pub alpha: f64,
    pub beta: f64,
    pub sizes: Vec<usize>,
    pub t0: Option<f64>,
    #[serde(default = "exact")]
    pub solver: Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub depth: usize,
    /// Validate every trace's structural properties.
    #[serde(default)]
    pub check: bool,
}

/// One experiment: kind, seed, output directory and the blocks it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output: PathBuf,
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub numeric: NumericConfig,
    pub audit: Option<AuditConfig>,
    pub bounds: Option<BoundsConfig>,
    pub levy: Option<LevyConfig>,
    pub growth: Option<GrowthConfig>,
    pub counterexamples: Option<CounterexampleSettings>,
}

fn missing(block: &str, kind: ExperimentKind) -> Error {
    Error::Configuration(format!("experiment {} needs a [{block}] block", kind_name(kind)))
}

pub fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::ChaosCurve => "chaos-curve",
        ExperimentKind::CoefficientAudit => "coefficient-audit",
        ExperimentKind::Counterexamples => "counterexamples",
        ExperimentKind::GrowthStats => "growth-stats",
        ExperimentKind::LevyChaos => "levy-chaos",
        ExperimentKind::BoundCheck => "bound-check",
        ExperimentKind::LowerBoundCheck => "lower-bound-check",
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0);
            Error::Parse { line, message: e.message().to_string() }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn model(&self) -> Result<&ModelConfig> {
        self.model.as_ref().ok_or_else(|| missing("model", self.experiment))
    }

    pub fn graph(&self) -> Result<&GraphConfig> {
        self.model()?.graph.as_ref().ok_or_else(|| Error::Configuration("model block needs a graph".into()))
    }

    pub fn beta(&self) -> Result<Beta> {
        self.model()?.beta.ok_or_else(|| Error::Configuration("model block needs beta".into()))
    }

    pub fn audit(&self) -> Result<&AuditConfig> {
        self.audit.as_ref().ok_or_else(|| missing("audit", self.experiment))
    }

    pub fn levy(&self) -> Result<&LevyConfig> {
        self.levy.as_ref().ok_or_else(|| missing("levy", self.experiment))
    }

    pub fn growth(&self) -> Result<&GrowthConfig> {
        self.growth.as_ref().ok_or_else(|| missing("growth", self.experiment))
    }

    /// Blocks that belong to other experiment kinds are rejected rather
    /// than silently ignored.
    pub fn check_blocks(&self) -> Result<()> {
        use ExperimentKind::*;
        let k = self.experiment;
        let allowed = |block: &str| -> bool {
            match block {
                "model" => k != LevyChaos,
                "audit" => k == CoefficientAudit,
                "bounds" => matches!(k, BoundCheck | LowerBoundCheck),
                "levy" => k == LevyChaos,
                "growth" => k == GrowthStats,
                "counterexamples" => k == Counterexamples,
                _ => false,
            }
        };
        let present = [
            ("model", self.model.is_some()),
            ("audit", self.audit.is_some()),
            ("bounds", self.bounds.is_some()),
            ("levy", self.levy.is_some()),
            ("growth", self.growth.is_some()),
            ("counterexamples", self.counterexamples.is_some()),
        ];
        for (block, there) in present {
            if there && !allowed(block) {
                return Err(Error::Configuration(format!(
                    "block [{block}] does not apply to experiment {}",
                    kind_name(k)
                )));
            }
        }
        Ok(())
    }
}
