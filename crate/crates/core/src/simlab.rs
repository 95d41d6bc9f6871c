//! Monte Carlo experiments: how often does the estimator return the true
//! tree, as a function of the sample size.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::generator::Family;
use crate::reconstruct::estimate_structure;
use crate::rng::{random_source, substream_seed};
use crate::sampler::{sample_nac, NacModel};
use crate::tree::{label_set, LeafSet, TreeSpec, TreeStructure};
use crate::triad::DEFAULT_BOOTSTRAP;

/// A simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: NacModel,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub alpha: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeTau {
    pub node: Vec<String>,
    pub tau: f64,
}

/// JSON form of [`ExperimentConfig`]: one family for the whole tree and a
/// Kendall's tau per branching node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentJson {
    pub tree: TreeSpec,
    pub family: Family,
    pub taus: Vec<NodeTau>,
    #[serde(default = "default_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_sizes() -> Vec<usize> {
    vec![50, 100, 200, 500]
}

fn default_replications() -> usize {
    100
}

fn default_alpha() -> f64 {
    0.10
}

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP
}

impl ExperimentConfig {
    /// Builds a design for one family with a tau per branching node.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tree: TreeStructure,
        family: Family,
        taus: &BTreeMap<LeafSet, f64>,
        sample_sizes: Vec<usize>,
        replications: usize,
        alpha: f64,
        bootstrap: usize,
        seed: u64,
    ) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            model: NacModel::from_taus(tree, family, taus)?,
            sample_sizes,
            replications,
            alpha,
            bootstrap,
            seed,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Builds a design from its JSON form; `seed` overrides the file's seed.
    pub fn from_json(json: &ExperimentJson, seed: Option<u64>) -> Result<ExperimentConfig> {
        let tree = json.tree.build()?;
        let mut taus = BTreeMap::new();
        for entry in &json.taus {
            let node = label_set(&entry.node, tree.labels())?;
            if taus.insert(node, entry.tau).is_some() {
                return Err(Error::Config(format!("node {:?} has two taus", entry.node)));
            }
        }
        let seed = seed
            .or(json.seed)
            .ok_or_else(|| Error::Config("a base seed is required".into()))?;
        ExperimentConfig::new(
            tree,
            json.family,
            &taus,
            json.sample_sizes.clone(),
            json.replications,
            json.alpha,
            json.bootstrap,
            seed,
        )
    }

    fn check(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::Config("sample_sizes must not be empty".into()));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < crate::triad::radial::MIN_OBSERVATIONS) {
            return Err(Error::Config(format!(
                "sample size {n} is below the minimum of {}",
                crate::triad::radial::MIN_OBSERVATIONS
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if self.bootstrap < 1 {
            return Err(Error::Config("bootstrap must be at least 1".into()));
        }
        if self.model.tree().dim() < 3 {
            return Err(Error::Config("the tree needs at least 3 leaves".into()));
        }
        Ok(())
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub correct_fraction: f64,
    pub se: f64,
    pub replications: usize,
}

/// Seed of replication `rep` at sample size `n`.
pub fn replication_seed(base: u64, rep: usize, n: usize) -> u64 {
    substream_seed(base ^ rep as u64, n as u64)
}

/// Samples one data set and estimates its tree.
pub fn run_replication(cfg: &ExperimentConfig, n: usize, rep: usize) -> Result<TreeStructure> {
    let wrap = |e: Error| Error::Replication { n, replication: rep, source: Box::new(e) };
    let mut rng = random_source(replication_seed(cfg.seed, rep, n));
    let columns = sample_nac(&cfg.model, n, &mut rng).map_err(wrap)?;
    let tree = cfg.model.tree();
    let data = Dataset::new(tree.labels().to_vec(), columns).map_err(wrap)?;
    let estimate = estimate_structure(&data, cfg.alpha, cfg.bootstrap, rng.random()).map_err(wrap)?;
    Ok(estimate.tree)
}

/// Fraction of replications recovering the true tree, per sample size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    cfg.check()?;
    let truth = cfg.model.tree();
    cfg.sample_sizes
        .iter()
        .map(|&n| {
            let hits = (0..cfg.replications)
                .into_par_iter()
                .map(|rep| run_replication(cfg, n, rep).map(|tree| tree == *truth))
                .collect::<Result<Vec<bool>>>()?;
            let r = cfg.replications as f64;
            let f = hits.iter().filter(|&&h| h).count() as f64 / r;
            Ok(ExperimentRow {
                n,
                correct_fraction: f,
                se: (f * (1.0 - f) / r).sqrt(),
                replications: cfg.replications,
            })
        })
        .collect()
}

/// Writes rows as CSV with header `n,correct_fraction,se,replications`.
pub fn write_rows<W: std::io::Write>(writer: W, rows: &[ExperimentRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row).map_err(|e| Error::Domain(format!("writing CSV: {e}")))?;
    }
    out.flush().map_err(|e| Error::Domain(format!("writing CSV: {e}")))?;
    Ok(())
}
