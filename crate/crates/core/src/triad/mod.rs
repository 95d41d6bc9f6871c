//! The trivariate structure test.
//!
//! For a triple of variables the three bivariate empirical Kendall
//! distributions are compared pairwise. Under a fan all three agree; under a
//! structure with inner node `{j, k}` the two pairs that share the outer
//! leaf `i` agree with each other, so the distance between them is the
//! smallest. The gap between the smallest distance and the other two is
//! tested with a bootstrap from a nonparametric Archimedean fit.

pub mod radial;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kendall::{l1_distance, pair_counts_from_ranks, pair_pseudo_obs, rank_permutation, triple_pseudo_obs};
use crate::rng::{random_source, substream_seed};
use crate::tree::{TripleKey, TripleShape};

pub use radial::{fit_radial, h0_resample, RadialFit};

/// Default number of bootstrap replications.
pub const DEFAULT_BOOTSTRAP: usize = 200;

/// The three distances of a triple. `shared[i]` compares the two pairs that
/// contain position `i`: `shared[0] = d(K_01, K_02)`,
/// `shared[1] = d(K_01, K_12)`, `shared[2] = d(K_02, K_12)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub shared: [f64; 3],
}

impl Deltas {
    fn argmin(&self) -> (usize, bool) {
        let d = self.shared;
        let min = d[0].min(d[1]).min(d[2]);
        let hits: Vec<usize> = (0..3).filter(|&i| d[i] == min).collect();
        (hits[0], hits.len() > 1)
    }

    /// Whether the minimum is attained more than once.
    pub fn tie(&self) -> bool {
        self.argmin().1
    }
}

/// Distances between the bivariate Kendall samples of three columns.
pub fn triple_distances(x: &[f64], y: &[f64], z: &[f64]) -> Result<Deltas> {
    let k01 = pair_pseudo_obs(x, y)?;
    let k02 = pair_pseudo_obs(x, z)?;
    let k12 = pair_pseudo_obs(y, z)?;
    Ok(Deltas {
        shared: [
            l1_distance(&k01, &k02)?,
            l1_distance(&k01, &k12)?,
            l1_distance(&k02, &k12)?,
        ],
    })
}

/// `|min - mean of the other two|`.
pub fn test_statistic(deltas: &Deltas) -> f64 {
    let (i, _) = deltas.argmin();
    let d = deltas.shared;
    let others: f64 = (0..3).filter(|&k| k != i).map(|k| d[k]).sum();
    (d[i] - others / 2.0).abs()
}

/// The structure suggested by the smallest distance: if the pairs sharing
/// leaf `i` agree best, the other two leaves form the inner node. Exact
/// ties give a fan.
pub fn candidate_structure(deltas: &Deltas, key: TripleKey) -> TripleShape {
    let (i, tie) = deltas.argmin();
    if tie {
        return TripleShape::Fan;
    }
    let leaves = key.leaves();
    let others: Vec<usize> = (0..3).filter(|&k| k != i).map(|k| leaves[k]).collect();
    TripleShape::inner(others[0], others[1])
}

/// Result of testing one triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleDecision {
    pub triple: TripleKey,
    pub deltas: Deltas,
    pub statistic: f64,
    pub p_value: f64,
    pub candidate: TripleShape,
    pub tie_flag: bool,
    pub bootstrap: usize,
    pub fit_residual: f64,
}

impl TripleDecision {
    /// The shape adopted at level `alpha`: the candidate when `p < alpha`,
    /// otherwise the fan.
    pub fn decide(&self, alpha: f64) -> TripleShape {
        if self.p_value < alpha {
            self.candidate
        } else {
            TripleShape::Fan
        }
    }

    /// A label-based view for reports.
    pub fn report(&self, labels: &[String]) -> TripleReport {
        let leaves = self.triple.leaves();
        let name = |i: usize| labels[i].clone();
        let pair = |a: usize, b: usize| [name(leaves[a]), name(leaves[b])];
        let pairs = [(0, 1, 0, 2), (0, 1, 1, 2), (0, 2, 1, 2)];
        TripleReport {
            triple: leaves.map(name),
            distances: (0..3)
                .map(|i| {
                    let (a, b, c, d) = pairs[i];
                    DistanceReport {
                        shared: name(leaves[i]),
                        pairs: [pair(a, b), pair(c, d)],
                        delta: self.deltas.shared[i],
                    }
                })
                .collect(),
            statistic: self.statistic,
            p_value: self.p_value,
            candidate: shape_text(self.candidate, self.triple, labels),
            tie_flag: self.tie_flag,
            bootstrap: self.bootstrap,
            fit_residual: self.fit_residual,
        }
    }
}

/// Text form of a trivariate shape, e.g. `(A,(B,C))` or `(A,B,C)`.
pub fn shape_text(shape: TripleShape, key: TripleKey, labels: &[String]) -> String {
    shape.to_tree(key, labels).format()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub shared: String,
    pub pairs: [[String; 2]; 2],
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub triple: [String; 3],
    pub distances: Vec<DistanceReport>,
    pub statistic: f64,
    pub p_value: f64,
    pub candidate: String,
    pub tie_flag: bool,
    pub bootstrap: usize,
    pub fit_residual: f64,
}

/// Statistic of one bootstrap sample drawn from `fit`.
///
/// Ranks are taken on the latent values `-R S_i`; `psi_n` is strictly
/// decreasing below the largest atom, so these ranks are those of
/// `psi_n(R S_i)` without the cost of evaluating it.
fn bootstrap_statistic(fit: &RadialFit, n: usize, seed: u64) -> f64 {
    let mut rng = random_source(seed);
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let row = radial::latent_row(fit, &mut rng);
        for (col, x) in cols.iter_mut().zip(row) {
            col.push(-x);
        }
    }
    let mut order = Vec::with_capacity(n);
    let ranks: Vec<Vec<u32>> = cols.iter().map(|c| rank_permutation(c, &mut order)).collect();
    let (mut by_x, mut tree) = (vec![0u32; n], vec![0u32; n + 1]);
    let mut sorted = |a: usize, b: usize| {
        let counts = pair_counts_from_ranks(&ranks[a], &ranks[b], &mut by_x, &mut tree);
        counting_sorted(&counts, n)
    };
    let k01 = sorted(0, 1);
    let k02 = sorted(0, 2);
    let k12 = sorted(1, 2);
    let dist = |a: &[u32], b: &[u32]| {
        let total: u64 = a.iter().zip(b).map(|(&p, &q)| p.abs_diff(q) as u64).sum();
        total as f64 / (n as f64 * (n as f64 + 1.0))
    };
    test_statistic(&Deltas { shared: [dist(&k01, &k02), dist(&k01, &k12), dist(&k02, &k12)] })
}

fn counting_sorted(counts: &[u32], n: usize) -> Vec<u32> {
    let mut freq = vec![0u32; n];
    for &c in counts {
        freq[c as usize] += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (value, &k) in freq.iter().enumerate() {
        out.extend(std::iter::repeat_n(value as u32, k as usize));
    }
    out
}

/// Bootstrap statistics of `bootstrap` samples of size `n` from `fit`;
/// sample `b` uses the substream `b` of `seed`.
pub fn bootstrap_statistics(fit: &RadialFit, n: usize, bootstrap: usize, seed: u64) -> Vec<f64> {
    (0..bootstrap)
        .into_par_iter()
        .map(|b| bootstrap_statistic(fit, n, substream_seed(seed, b as u64)))
        .collect()
}

/// `#{T_b >= T_obs} / B`.
pub fn p_value(observed: f64, statistics: &[f64]) -> f64 {
    statistics.iter().filter(|&&t| t >= observed).count() as f64 / statistics.len() as f64
}

/// Runs the full test on three columns. `key` names the columns' leaves
/// (in the column order `x, y, z`, which must be increasing).
pub fn triple_test(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    key: TripleKey,
    bootstrap: usize,
    seed: u64,
) -> Result<TripleDecision> {
    if bootstrap < 1 {
        return Err(Error::Domain("need at least one bootstrap replication".into()));
    }
    let deltas = triple_distances(x, y, z)?;
    let statistic = test_statistic(&deltas);
    let fit = fit_radial(&triple_pseudo_obs(x, y, z)?)?;
    let stats = bootstrap_statistics(&fit, x.len(), bootstrap, seed);
    Ok(TripleDecision {
        triple: key,
        deltas,
        statistic,
        p_value: p_value(statistic, &stats),
        candidate: candidate_structure(&deltas, key),
        tie_flag: deltas.tie(),
        bootstrap,
        fit_residual: fit.residual(),
    })
}

/// Convenience wrapper drawing the seed from `rng`.
pub fn triple_test_with_rng<R: Rng + ?Sized>(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    key: TripleKey,
    bootstrap: usize,
    rng: &mut R,
) -> Result<TripleDecision> {
    triple_test(x, y, z, key, bootstrap, rng.random())
}
