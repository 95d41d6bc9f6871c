//! The `nactree` command-line tool.
//!
//! Input data is expected to be continuous and already free of marginal
//! dynamics (for financial returns, standardized GARCH residuals); only the
//! ranks of each column are used.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use nactree::data::{load_csv, write_csv, Dataset};
use nactree::kendall::{ecdf, pair_pseudo_obs, triple_pseudo_obs};
use nactree::reconstruct::estimate_structure;
use nactree::rng::random_source;
use nactree::sampler::{sample_nac, NacModel};
use nactree::simlab::{run_experiment, write_rows, ExperimentConfig, ExperimentJson};
use nactree::triad::{triple_test, DEFAULT_BOOTSTRAP};
use nactree::{TreeStructure, TripleKey};

/// Version of every JSON document this tool writes.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "nactree", version, about = "Estimate nested Archimedean copula tree structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the tree structure of all (or the selected) columns.
    Estimate(EstimateArgs),
    /// Test the trivariate structure of three columns.
    TripleTest(TripleTestArgs),
    /// Draw a sample from a nested Archimedean copula model.
    Sample(SampleArgs),
    /// Run a simulation experiment and write the success rates.
    Simulate(SimulateArgs),
    /// Pseudo-observations and the empirical Kendall CDF of two or three columns.
    Kendall(KendallArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated column names (default: all columns, or those of --config).
    #[arg(long, value_delimiter = ',')]
    cols: Option<Vec<String>>,
    /// JSON file with default `columns`, `alpha` and `bootstrap`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Starting significance level of the triple tests [default: 0.10].
    #[arg(long)]
    alpha: Option<f64>,
    /// Bootstrap replications per triple [default: 200].
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: u64,
    /// Write the tree JSON here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the diagnostics JSON here (default: alongside the tree).
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TripleTestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Exactly three comma-separated column names.
    #[arg(long, value_delimiter = ',', required = true)]
    cols: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Model JSON: a tree and one generator per branching node.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Experiment JSON.
    #[arg(long)]
    config: PathBuf,
    /// Base seed; replaces any seed in the config file.
    #[arg(long)]
    seed: u64,
    #[arg(long, alias = "output")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KendallArgs {
    #[arg(long)]
    input: PathBuf,
    /// Two or three comma-separated column names.
    #[arg(long, value_delimiter = ',', required = true)]
    cols: Vec<String>,
    /// Number of equally spaced grid points on [0, 1] for the CDF.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateConfig {
    #[serde(default)]
    schema: Option<u32>,
    #[serde(default)]
    columns: Option<Vec<String>>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    bootstrap: Option<usize>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<nactree::Error> for Failure {
    fn from(e: nactree::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

/// Runs the tool; returns the process exit code (0 success, 1 runtime
/// error, 2 usage error).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => estimate(a, stdout, stderr),
        Command::TripleTest(a) => triple(a, stdout, stderr),
        Command::Sample(a) => sample(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Kendall(a) => kendall(a, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(message)) => {
            let _ = writeln!(stderr, "error: {message}");
            2
        }
        Err(Failure::Runtime(message)) => {
            let _ = writeln!(stderr, "error: {message}");
            1
        }
    }
}

/// Opens `path` for writing, or returns standard output.
fn sink<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| io_failure(p, e))?))),
        None => Ok(Box::new(stdout)),
    }
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value, path: &Option<PathBuf>) -> Outcome {
    let target = path.as_deref().unwrap_or(Path::new("<stdout>"));
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| io_failure(target, e))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| io_failure(target, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_failure(path, e))
}

fn load(path: &Path, cols: Option<&[String]>, stderr: &mut dyn Write) -> Result<Dataset, Failure> {
    let data = load_csv(path, cols)?;
    for label in data.tied_columns() {
        let _ = writeln!(
            stderr,
            "warning: column {label:?} contains ties; tied values never count as smaller than each other"
        );
    }
    Ok(data)
}

fn check_alpha(alpha: f64) -> Outcome {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Failure::Usage(format!("--alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

fn check_bootstrap(b: usize) -> Outcome {
    if b < 1 {
        return Err(Failure::Usage("--bootstrap must be at least 1".into()));
    }
    Ok(())
}

fn tree_json(tree: &TreeStructure) -> serde_json::Value {
    let json = tree.to_json();
    json!({ "schema": SCHEMA, "text": tree.format(), "leaves": json.leaves, "nodes": json.nodes })
}

fn estimate(a: EstimateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let config: EstimateConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => EstimateConfig::default(),
    };
    if let Some(s) = config.schema.filter(|&s| s != SCHEMA) {
        return Err(Failure::Usage(format!("unsupported config schema {s}")));
    }
    let alpha = a.alpha.or(config.alpha).unwrap_or(0.10);
    let bootstrap = a.bootstrap.or(config.bootstrap).unwrap_or(DEFAULT_BOOTSTRAP);
    check_alpha(alpha)?;
    check_bootstrap(bootstrap)?;
    let cols = a.cols.or(config.columns);
    let data = load(&a.input, cols.as_deref(), stderr)?;
    if data.d() < 3 {
        return Err(Failure::Usage(format!("estimate needs at least 3 columns, got {}", data.d())));
    }
    if data.n() < 10 {
        return Err(Failure::Usage(format!("estimate needs at least 10 rows, got {}", data.n())));
    }
    let est = estimate_structure(&data, alpha, bootstrap, a.seed)?;
    let tree = tree_json(&est.tree);
    let diagnostics = serde_json::to_value(est.diagnostics()).expect("diagnostics serialize");
    let mut diagnostics_doc = json!({ "schema": SCHEMA, "seed": a.seed, "bootstrap": bootstrap });
    diagnostics_doc.as_object_mut().unwrap().extend(diagnostics.as_object().unwrap().clone());
    if !est.faulty.is_empty() {
        let _ = writeln!(
            stderr,
            "note: {} threshold(s) gave a faulty triple set; accepted alpha = {}",
            est.faulty.len(),
            est.alpha
        );
    }
    match (&a.output, &a.diagnostics) {
        (None, None) => {
            let doc = json!({ "schema": SCHEMA, "tree": tree, "diagnostics": diagnostics_doc });
            write_json(stdout, &doc, &None)
        }
        (output, diag) => {
            let diag_path = diag.clone().or_else(|| {
                output.as_ref().map(|p| p.with_extension("diagnostics.json"))
            });
            let mut out = sink(output, stdout)?;
            write_json(&mut *out, &tree, output)?;
            drop(out);
            let path = diag_path.expect("one of the paths is set");
            let mut devnull = io::sink();
            let mut file = sink(&Some(path.clone()), &mut devnull)?;
            write_json(&mut *file, &diagnostics_doc, &Some(path))
        }
    }
}

fn triple(a: TripleTestArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    if a.cols.len() != 3 {
        return Err(Failure::Usage(format!("--cols needs exactly 3 names, got {}", a.cols.len())));
    }
    check_bootstrap(a.bootstrap)?;
    let data = load(&a.input, Some(&a.cols), stderr)?;
    if data.n() < 10 {
        return Err(Failure::Usage(format!("triple-test needs at least 10 rows, got {}", data.n())));
    }
    let c = data.columns();
    let key = TripleKey::new(0, 1, 2)?;
    let decision = triple_test(&c[0], &c[1], &c[2], key, a.bootstrap, a.seed)?;
    let mut doc = json!({ "schema": SCHEMA, "seed": a.seed });
    let report = serde_json::to_value(decision.report(data.labels())).expect("report serializes");
    doc.as_object_mut().unwrap().extend(report.as_object().unwrap().clone());
    let mut out = sink(&a.output, stdout)?;
    write_json(&mut *out, &doc, &a.output)
}

fn sample(a: SampleArgs, stdout: &mut dyn Write) -> Outcome {
    if a.n < 1 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let model: NacModel = read_json(&a.model)?;
    let cols = sample_nac(&model, a.n, &mut random_source(a.seed))?;
    let tree = model.tree();
    let labels: Vec<String> = tree.leaves().iter().map(|i| tree.labels()[i].clone()).collect();
    let mut out = sink(&a.output, stdout)?;
    write_csv(&mut out, &labels, &cols)?;
    Ok(())
}

fn simulate(a: SimulateArgs, stdout: &mut dyn Write) -> Outcome {
    let json: ExperimentJson = read_json(&a.config)?;
    let cfg = ExperimentConfig::from_json(&json, Some(a.seed)).map_err(|e| io_failure(&a.config, e))?;
    let rows = run_experiment(&cfg)?;
    let mut out = sink(&a.out, stdout)?;
    write_rows(&mut out, &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct KendallRow {
    series: &'static str,
    x: f64,
    value: f64,
}

fn kendall(a: KendallArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    if !(2..=3).contains(&a.cols.len()) {
        return Err(Failure::Usage(format!("--cols needs 2 or 3 names, got {}", a.cols.len())));
    }
    if a.grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    let data = load(&a.input, Some(&a.cols), stderr)?;
    let c = data.columns();
    let ks = if c.len() == 2 { pair_pseudo_obs(&c[0], &c[1])? } else { triple_pseudo_obs(&c[0], &c[1], &c[2])? };
    let mut rows = Vec::new();
    for (m, w) in ks.sorted_values().into_iter().enumerate() {
        rows.push(KendallRow { series: "pseudo_obs", x: (m + 1) as f64, value: w });
    }
    for i in 0..a.grid {
        let w = i as f64 / (a.grid - 1) as f64;
        rows.push(KendallRow { series: "ecdf", x: w, value: ecdf(&ks, w) });
    }
    let mut out = sink(&a.output, stdout)?;
    let target = a.output.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let mut writer = csv::Writer::from_writer(&mut out);
    for row in rows {
        writer.serialize(row).map_err(|e| io_failure(&target, e))?;
    }
    writer.flush().map_err(|e| io_failure(&target, e))?;
    Ok(())
}
