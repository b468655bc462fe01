use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use spinchaos::fixtures;
use spinchaos::{Error, Hypergraph};
use spinchaos_cli::config::ExperimentConfig;
use spinchaos_cli::{run, validate, CliError};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped_configs() -> Vec<PathBuf> {
    let mut paths: Vec<_> = fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
}

fn with_output(text: &str, dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::parse(text).unwrap();
    cfg.output = dir.to_path_buf();
    cfg
}

/// Strips the `#` preamble and returns the CSV rows.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    reader.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

const SMALL_CURVE: &str = r#"
experiment = "chaos-curve"
seed = 99
output = "unused"

[model]
graph = { fixture = "ea-ring" }
beta = 0.7
perturbation = "discrete"

[numeric]
t_grid = [0.0, 0.5, 1.0]
replicas = 16
"#;

#[test]
fn shipped_configs_round_trip_and_validate() {
    let paths = shipped_configs();
    assert!(paths.len() >= 8);
    for path in paths {
        let text = fs::read_to_string(&path).unwrap();
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{}", path.display());
        validate(&cfg, &configs_dir()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_output(SMALL_CURVE, dir.path());
    run(&cfg, dir.path()).unwrap();
    let first = fs::read(dir.path().join("curve.csv")).unwrap();
    run(&cfg, dir.path()).unwrap();
    assert_eq!(fs::read(dir.path().join("curve.csv")).unwrap(), first);

    let mut other = cfg.clone();
    other.seed += 1;
    run(&other, dir.path()).unwrap();
    assert_ne!(fs::read(dir.path().join("curve.csv")).unwrap(), first);
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = with_output(SMALL_CURVE, dir.path());
    run(&cfg, dir.path()).unwrap();
    let par = csv_rows(&dir.path().join("curve.csv"));
    cfg.numeric.execution = spinchaos::Execution::Sequential;
    run(&cfg, dir.path()).unwrap();
    assert_eq!(csv_rows(&dir.path().join("curve.csv")), par);
}

#[test]
fn infinite_temperature_curve_is_one_over_n() {
    let dir = tempfile::tempdir().unwrap();
    for fixture in ["ea-ring", "figure1-hypergraph", "remark-path-graph"] {
        let text = SMALL_CURVE.replace("ea-ring", fixture).replace("beta = 0.7", "beta = 0.0");
        let cfg = with_output(&text, dir.path());
        run(&cfg, dir.path()).unwrap();
        let n = fixtures::fixture(fixture).unwrap().graph.n_vertices() as f64;
        let rows = csv_rows(&dir.path().join("curve.csv"));
        assert_eq!(rows.len(), 3);
        for row in rows {
            assert_eq!(row[1].parse::<f64>().unwrap(), 1.0 / n, "{fixture}");
        }
    }
}

#[test]
fn counterexamples_on_path_fixture_all_hold() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
experiment = "counterexamples"
seed = 5
output = "unused"
[model]
graph = { fixture = "remark-path-graph" }
beta = 0.5
[counterexamples]
draws = 50
order = 24
chain_lengths = [1, 2]
"#;
    let summary = run(&with_output(text, dir.path()), dir.path()).unwrap();
    assert_eq!(summary.passed, Some(true));
    let rows = csv_rows(&dir.path().join("counterexamples.csv"));
    assert!(rows.len() >= 8);
    assert!(rows.iter().all(|r| r[4] == "true"), "{rows:?}");
}

#[test]
fn manifest_names_evaluated_bound_tags() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_CURVE.replace("\"chaos-curve\"", "\"bound-check\"")
        + "\n[bounds]\ntags = [\"exponential-growth\"]\nconstants = { prefactor = 1.0, gamma = 2.0 }\n";
    let summary = run(&with_output(&text, dir.path()), dir.path()).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let tags: Vec<&str> = manifest["bound_tags"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
    assert_eq!(tags, ["general", "exponential-growth"]);
    assert_eq!(manifest["seed"], 99);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(manifest["files"].as_array().unwrap().iter().any(|f| f == "bounds.csv"));
    assert_eq!(summary.passed, Some(true));

    let header = &csv_rows(&dir.path().join("bounds.csv"));
    assert_eq!(header.len(), 6);
    let raw = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert!(raw.lines().any(|l| l.starts_with("bound_tag,t,bound_value,estimate,se,margin")));
}

#[test]
fn config_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let audit_torus = r#"
experiment = "coefficient-audit"
seed = 1
output = "unused"
[model]
graph = { fixture = "ea-torus-4x4" }
beta = 1.0
[audit]
i = 0
j = 1
"#;
    let err = run(&with_output(audit_torus, dir.path()), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");

    let growth_on_fixture = SMALL_CURVE.replace("\"chaos-curve\"", "\"growth-stats\"") + "[growth]\ndepth = 2\n";
    let err = validate(&with_output(&growth_on_fixture, dir.path()), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    let one_replica = SMALL_CURVE.replace("replicas = 16", "replicas = 1");
    assert_eq!(validate(&with_output(&one_replica, dir.path()), dir.path()).unwrap_err().exit_code(), 2);

    let mcmc_ground_states = SMALL_CURVE
        .replace("beta = 0.7", "beta = \"inf\"")
        .replace("[numeric]", "solver = { mode = \"mcmc\", sweeps = 10, burn_in = 2, chains = 1 }\n[numeric]");
    assert_eq!(validate(&with_output(&mcmc_ground_states, dir.path()), dir.path()).unwrap_err().exit_code(), 2);

    assert_eq!(CliError::Core(Error::Numerical("x".into())).exit_code(), 4);
}

#[test]
fn graph_files_resolve_against_the_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    let ring = fixtures::ring(6).unwrap();
    fs::write(dir.path().join("ring6.hg"), ring.to_text()).unwrap();
    let text =
        SMALL_CURVE.replace("{ fixture = \"ea-ring\" }", "{ file = \"ring6.hg\" }").replace("beta = 0.7", "beta = 0.0");
    run(&with_output(&text, dir.path()), dir.path()).unwrap();
    let rows = csv_rows(&dir.path().join("curve.csv"));
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0 / 6.0);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinchaos"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    let cfg = with_output(SMALL_CURVE, &dir.path().join("out"));
    fs::write(&good, cfg.to_toml()).unwrap();

    let status = binary().args(["validate", good.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let status = binary().args(["run", good.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("out/manifest.json").exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, SMALL_CURVE.replace("replicas = 16", "replicas = 16\nsurprise = 1")).unwrap();
    let out = binary().args(["validate", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surprise"));

    let missing = dir.path().join("missing.toml");
    let status = binary().args(["run", missing.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(1));

    let status = binary().args(["run", good.to_str().unwrap()]).env("SPINCHAOS_THREADS", "zero").status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = binary().args(["run", good.to_str().unwrap()]).env("SPINCHAOS_THREADS", "2").status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn fixtures_subcommand_lists_and_writes_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = binary().args(["fixtures", "--write", dir.path().to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let listing = String::from_utf8(out.stdout).unwrap();
    let catalog = fixtures::catalog().unwrap();
    assert!(!catalog.is_empty());
    for f in &catalog {
        assert!(listing.contains(f.name));
        let text = fs::read_to_string(dir.path().join(format!("{}.hg", f.name))).unwrap();
        assert_eq!(Hypergraph::parse(&text).unwrap(), f.graph);
    }
    let figure = Hypergraph::parse(&fs::read_to_string(dir.path().join("figure1-hypergraph.hg")).unwrap()).unwrap();
    assert_eq!((figure.n_vertices(), figure.n_edges()), (7, 5));
    let ring = Hypergraph::parse(&fs::read_to_string(dir.path().join("ea-ring.hg")).unwrap()).unwrap();
    assert_eq!((ring.n_vertices(), ring.n_edges()), (8, 8));
}
