//! Turns a validated configuration into result files.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use spinchaos::chaos::{
    chaos_curve, coefficient_audit, counterexample_suite, levy_chaos, lower_bound_checks, monotonicity_check,
    theorem_bound_check, AuditSettings, BoundCheck, BoundTag, ChaosCurve, ChaosModel, GraphSource,
};
use spinchaos::disorder::{CouplingKind, DisorderModel, PerturbationKind};
use spinchaos::fixtures;
use spinchaos::randgraph::growth_stats;
use spinchaos::{Error, Hypergraph, StreamSeed};

use crate::config::{kind_name, ExperimentConfig, ExperimentKind, GraphConfig};

/// Fixtures the counterexample suite is built on.
const COUNTEREXAMPLE_FIXTURES: [&str; 2] = ["remark-path-graph", "figure1-hypergraph"];

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for invalid input, 3 for capacity, 4 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Capacity(_)) => 3,
            CliError::Core(Error::Numerical(_)) => 4,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "I/O error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn read_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(ExperimentConfig::parse(&text)?)
}

/// What a finished run reports back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub files: Vec<PathBuf>,
    pub bound_tags: Vec<BoundTag>,
    /// `None` when the experiment asserts nothing.
    pub passed: Option<bool>,
    pub headline: String,
}

/// Everything resolved from a configuration before any heavy work.
struct Plan<'c> {
    cfg: &'c ExperimentConfig,
    seed: StreamSeed,
    graph: Option<GraphSource>,
}

fn load_graph(cfg: &GraphConfig, base_dir: &Path) -> CliResult<GraphSource> {
    Ok(match cfg {
        GraphConfig::Fixture(name) => GraphSource::Fixed(fixtures::fixture(name)?.graph),
        GraphConfig::File(path) => {
            let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
            let text = fs::read_to_string(&full).map_err(io_err(&full))?;
            GraphSource::Fixed(Hypergraph::parse(&text)?)
        }
        GraphConfig::Diluted(diluted) => GraphSource::Diluted(diluted.spec()?),
    })
}

fn fixed_graph<'a>(plan: &'a Plan) -> CliResult<&'a Hypergraph> {
    match &plan.graph {
        Some(GraphSource::Fixed(g)) => Ok(g),
        _ => Err(Error::Configuration(format!(
            "experiment {} needs a fixed graph (fixture or file)",
            kind_name(plan.cfg.experiment)
        ))
        .into()),
    }
}

fn finite_beta(cfg: &ExperimentConfig) -> CliResult<f64> {
    let beta = cfg.beta()?;
    beta.validate()?;
    beta.finite().ok_or_else(|| {
        Error::Configuration(format!("experiment {} needs a finite beta", kind_name(cfg.experiment))).into()
    })
}

fn chaos_model(plan: &Plan) -> CliResult<ChaosModel> {
    let cfg = plan.cfg;
    let model_cfg = cfg.model()?;
    let graph = plan.graph.clone().ok_or_else(|| Error::Configuration("model block needs a graph".into()))?;
    let beta = cfg.beta()?;
    beta.validate()?;
    let max_arity = match &graph {
        GraphSource::Fixed(g) => g.max_arity(),
        GraphSource::Diluted(s) => s.max_arity(),
    };
    let mut model = ChaosModel::gaussian(graph, beta, PerturbationKind::Continuous);
    model.disorder = DisorderModel::uniform(model_cfg.disorder, max_arity)?;
    model.coupling = model_cfg.perturbation;
    model.solver = model_cfg.solver;
    model.label = kind_name(cfg.experiment).to_string();
    model.validate()?;
    Ok(model)
}

fn plan<'c>(cfg: &'c ExperimentConfig, base_dir: &Path) -> CliResult<Plan<'c>> {
    cfg.check_blocks()?;
    let graph = match cfg.model.as_ref().and_then(|m| m.graph.as_ref()) {
        Some(g) => Some(load_graph(g, base_dir)?),
        None => None,
    };
    let plan = Plan { cfg, seed: StreamSeed::new(cfg.seed), graph };
    let numeric = &cfg.numeric;
    match cfg.experiment {
        ExperimentKind::ChaosCurve | ExperimentKind::BoundCheck | ExperimentKind::LowerBoundCheck => {
            chaos_model(&plan)?;
            lower_tags_consistent(cfg)?;
        }
        ExperimentKind::CoefficientAudit => {
            let g = fixed_graph(&plan)?;
            finite_beta(cfg)?;
            let audit = cfg.audit()?;
            if let Some(edges) = &audit.edges {
                g.restrict(edges)?;
            }
        }
        ExperimentKind::Counterexamples => {
            finite_beta(cfg)?;
            match &cfg.model()?.graph {
                None => {}
                Some(GraphConfig::Fixture(name)) if COUNTEREXAMPLE_FIXTURES.contains(&name.as_str()) => {}
                Some(_) => {
                    return Err(Error::Configuration(format!(
                        "counterexamples run on the fixtures {COUNTEREXAMPLE_FIXTURES:?} only"
                    ))
                    .into())
                }
            }
        }
        ExperimentKind::GrowthStats => {
            if !matches!(plan.graph, Some(GraphSource::Diluted(_))) {
                return Err(Error::Configuration("growth-stats needs a diluted graph".into()).into());
            }
            cfg.growth()?;
        }
        ExperimentKind::LevyChaos => {
            cfg.levy()?;
        }
    }
    if numeric.replicas < 2 {
        return Err(Error::Statistics(format!("replicas must be >= 2, got {}", numeric.replicas)).into());
    }
    Ok(plan)
}

fn lower_tags_consistent(cfg: &ExperimentConfig) -> CliResult<()> {
    let tags = cfg.bounds.as_ref().map(|b| b.tags.as_slice()).unwrap_or(&[]);
    let lower = cfg.experiment == ExperimentKind::LowerBoundCheck;
    if let Some(t) = tags.iter().find(|t| t.is_lower() != lower) {
        return Err(Error::Configuration(format!(
            "bound tag {t} does not belong to experiment {}",
            kind_name(cfg.experiment)
        ))
        .into());
    }
    Ok(())
}

/// Checks the configuration and everything it references without running it.
pub fn validate(cfg: &ExperimentConfig, base_dir: &Path) -> CliResult<()> {
    plan(cfg, base_dir).map(|_| ())
}

struct Writer<'c> {
    dir: PathBuf,
    cfg: &'c ExperimentConfig,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    /// CSV body behind a `#` preamble that records the seed and full config.
    fn csv(&mut self, name: &str, body: &str) -> CliResult<()> {
        let config = serde_json::to_string(self.cfg).expect("configuration serialises");
        let text = format!(
            "# experiment={} seed={}\n# config={config}\n{body}",
            kind_name(self.cfg.experiment),
            self.cfg.seed
        );
        self.write(name, &text)
    }

    fn json(&mut self, name: &str, result: Value) -> CliResult<()> {
        let doc = json!({ "seed": self.cfg.seed, "config": self.cfg, "result": result });
        let text = serde_json::to_string_pretty(&doc).expect("results serialise") + "\n";
        self.write(name, &text)
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

fn csv_table<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn curve_json(curve: &ChaosCurve) -> Value {
    json!({ "curve": curve, "monotonicity": monotonicity_check(curve) })
}

fn default_lower_tags(kind: CouplingKind) -> Vec<BoundTag> {
    match kind {
        CouplingKind::Discrete => vec![BoundTag::DiscreteLower],
        _ => vec![BoundTag::GaussianLower],
    }
}

fn checks_pass(checks: &[BoundCheck]) -> bool {
    checks.iter().all(|c| !c.fails())
}

/// Runs the experiment and writes its CSV and JSON results plus
/// `manifest.json` into the configured output directory. Relative graph
/// file paths resolve against `base_dir`.
pub fn run(cfg: &ExperimentConfig, base_dir: &Path) -> CliResult<RunSummary> {
    let started = Instant::now();
    let plan = plan(cfg, base_dir)?;
    let exec = cfg.numeric.execution;
    let dir = cfg.output.clone();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut out = Writer { dir, cfg, files: Vec::new() };
    let mut bound_tags = Vec::new();
    let numeric = &cfg.numeric;

    let (passed, headline) = match cfg.experiment {
        ExperimentKind::ChaosCurve => {
            let model = chaos_model(&plan)?;
            let curve = chaos_curve(&model, &numeric.t_grid, numeric.replicas, plan.seed, exec)?;
            out.csv("curve.csv", &curve.to_csv())?;
            out.json("curve.json", curve_json(&curve))?;
            let last = curve.points.last().expect("non-empty grid");
            (None, format!("E<R^2> at t={} is {:.6} ± {:.2e}", last.t, last.estimate, last.se))
        }
        ExperimentKind::BoundCheck => {
            let model = chaos_model(&plan)?;
            let curve = chaos_curve(&model, &numeric.t_grid, numeric.replicas, plan.seed, exec)?;
            let bounds = cfg.bounds.clone().unwrap_or_default();
            let checks = theorem_bound_check(&curve, &bounds.tags, &bounds.constants)?;
            bound_tags = distinct_tags(&checks);
            out.csv("curve.csv", &curve.to_csv())?;
            out.csv("bounds.csv", &spinchaos::chaos::bound_checks_csv(&checks))?;
            out.json("bounds.json", json!({ "chaos": curve_json(&curve), "checks": checks }))?;
            let ok = checks_pass(&checks);
            let asserted = checks.iter().filter(|c| c.asserted).count();
            (Some(ok), format!("{} checks, {asserted} asserted, {}", checks.len(), verdict(ok)))
        }
        ExperimentKind::LowerBoundCheck => {
            let model = chaos_model(&plan)?;
            let curve = chaos_curve(&model, &numeric.t_grid, numeric.replicas, plan.seed, exec)?;
            let tags = match cfg.bounds.as_ref().map(|b| b.tags.clone()) {
                Some(t) if !t.is_empty() => t,
                _ => default_lower_tags(model.coupling),
            };
            let checks = lower_bound_checks(&curve, &tags)?;
            bound_tags = distinct_tags(&checks);
            out.csv("curve.csv", &curve.to_csv())?;
            out.csv("bounds.csv", &spinchaos::chaos::bound_checks_csv(&checks))?;
            out.json("bounds.json", json!({ "chaos": curve_json(&curve), "checks": checks }))?;
            let ok = checks_pass(&checks);
            (Some(ok), format!("{} lower-bound checks, {}", checks.len(), verdict(ok)))
        }
        ExperimentKind::CoefficientAudit => {
            let audit = cfg.audit()?;
            let full = fixed_graph(&plan)?;
            let (graph, i, j) = match &audit.edges {
                None => (full.clone(), audit.i, audit.j),
                Some(edges) => {
                    let (g, original) = full.restrict(edges)?;
                    let find = |v: usize| {
                        original.iter().position(|&o| o == v).ok_or_else(|| {
                            Error::Configuration(format!("vertex {v} is not covered by the selected edges"))
                        })
                    };
                    (g, find(audit.i)?, find(audit.j)?)
                }
            };
            let beta = finite_beta(cfg)?;
            let disorder = DisorderModel::uniform(cfg.model()?.disorder, graph.max_arity())?;
            let settings = AuditSettings {
                order: numeric.quadrature_order,
                degree_cap: numeric.degree_cap,
                threshold: audit.threshold,
                ..AuditSettings::default()
            };
            let report = coefficient_audit(&graph, i, j, beta, &disorder, &settings, exec)?;
            let rows = report.entries.iter().map(|e| {
                vec![
                    e.n.to_string(),
                    e.value.to_string(),
                    e.forced_zero.to_string(),
                    e.path_exists.to_string(),
                    e.endpoints_covered.to_string(),
                    e.edge_count.to_string(),
                ]
            });
            let header = ["multi_index", "value", "forced_zero", "path_exists", "endpoints_covered", "edge_count"];
            out.csv("audit.csv", &csv_table(&header, rows))?;
            out.json("audit.json", to_value(&report))?;
            let ok = report.passed();
            (
                Some(ok),
                format!(
                    "{} coefficients, {} violations, Parseval tail {:.2e}",
                    report.entries.len(),
                    report.violations.len(),
                    report.parseval.1
                ),
            )
        }
        ExperimentKind::Counterexamples => {
            let beta = finite_beta(cfg)?;
            let settings = cfg.counterexamples.clone().unwrap_or_default();
            let report = counterexample_suite(beta, plan.seed, &settings, exec)?;
            out.csv("counterexamples.csv", &report.to_csv())?;
            out.json("counterexamples.json", to_value(&report))?;
            let ok = report.passed();
            let passing = report.checks.iter().filter(|c| c.passed).count();
            (Some(ok), format!("{passing}/{} identities hold", report.checks.len()))
        }
        ExperimentKind::GrowthStats => {
            let Some(GraphSource::Diluted(spec)) = &plan.graph else { unreachable!("checked in plan") };
            let growth = cfg.growth()?;
            let stats = growth_stats(spec, growth.depth, numeric.replicas, plan.seed, exec, growth.check)?;
            out.csv("growth.csv", &stats.to_csv())?;
            out.json("growth.json", to_value(&stats))?;
            let ok = !growth.check || stats.property_failures == 0;
            (
                growth.check.then_some(ok),
                format!("λ={:.4}, {} structural failures", stats.lambda, stats.property_failures),
            )
        }
        ExperimentKind::LevyChaos => {
            let levy = cfg.levy()?;
            let report = levy_chaos(
                levy.alpha,
                levy.beta,
                &levy.sizes,
                &numeric.t_grid,
                levy.t0,
                numeric.replicas,
                plan.seed,
                levy.solver,
                exec,
            )?;
            bound_tags = vec![BoundTag::Levy];
            out.csv("levy.csv", &report.to_csv())?;
            let fits = report.fits.iter().map(|f| {
                vec![
                    f.t.to_string(),
                    f.slope.to_string(),
                    f.intercept.to_string(),
                    f.reference_slope.to_string(),
                    f.non_increasing.to_string(),
                ]
            });
            out.csv(
                "levy_fits.csv",
                &csv_table(&["t", "slope", "intercept", "reference_slope", "non_increasing"], fits),
            )?;
            out.json("levy.json", to_value(&report))?;
            let ok = report.fits.iter().all(|f| f.non_increasing && f.slope < 0.0);
            (Some(ok), format!("{} fitted grid points, decay in N {}", report.fits.len(), verdict(ok)))
        }
    };

    let mut files = out.files.clone();
    files.push(PathBuf::from("manifest.json"));
    let manifest = json!({
        "experiment": kind_name(cfg.experiment),
        "seed": cfg.seed,
        "config": cfg,
        "config_toml": cfg.to_toml(),
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "versions": {
            "spinchaos": spinchaos::VERSION,
            "spinchaos-cli": env!("CARGO_PKG_VERSION"),
        },
        "parallel": exec.is_parallel(),
        "bound_tags": bound_tags,
        "files": files,
        "passed": passed,
        "summary": headline,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    let path = out.dir.join("manifest.json");
    fs::write(&path, text).map_err(io_err(&path))?;

    Ok(RunSummary { experiment: cfg.experiment, files, bound_tags, passed, headline })
}

fn distinct_tags(checks: &[BoundCheck]) -> Vec<BoundTag> {
    let mut tags: Vec<BoundTag> = Vec::new();
    for c in checks {
        if !tags.contains(&c.tag) {
            tags.push(c.tag);
        }
    }
    tags
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

/// Graph of a fixture in the hypergraph text format.
pub fn fixture_text(name: &str) -> CliResult<String> {
    Ok(fixtures::fixture(name)?.graph.to_text())
}
