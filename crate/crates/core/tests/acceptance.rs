//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to the real
//! standard output (not the captured one) before asserting.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use common::{ks_distance, labels, lca_counterexamples, merged_grid_integral, uniform_cdf};
use nactree::data::Dataset;
use nactree::kendall::{kendall_tau, l1_distance, pair_pseudo_obs, triple_pseudo_obs, KendallSample};
use nactree::reconstruct::{estimate_structure, recover, TripleSet};
use nactree::rng::{random_source, substream_seed};
use nactree::sampler::{sample_archimedean, sample_inner_frailty, sample_nac, NacModel};
use nactree::simlab::{run_experiment, ExperimentConfig, ExperimentRow};
use nactree::tree::{label_set, random_tree};
use nactree::triad::fit_radial;
use nactree::{Family, Generator, LeafSet, TreeStructure};
use rand::Rng;

fn report(id: &str, pass: bool, detail: String) {
    let line = format!("{} {id}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "{id}: {detail}");
}

fn clayton(theta: f64) -> Generator {
    Generator::new(Family::Clayton, theta).unwrap()
}

fn node(tree: &TreeStructure, names: &[&str]) -> LeafSet {
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    label_set(&names, tree.labels()).unwrap()
}

fn experiment(tree: &str, taus: &[(&[&str], f64)], sizes: &[usize], reps: usize, seed: u64) -> Vec<ExperimentRow> {
    let tree = TreeStructure::parse(tree).unwrap();
    let taus: BTreeMap<LeafSet, f64> = taus.iter().map(|&(names, tau)| (node(&tree, names), tau)).collect();
    let cfg = ExperimentConfig::new(tree, Family::Clayton, &taus, sizes.to_vec(), reps, 0.10, 200, seed).unwrap();
    run_experiment(&cfg).unwrap()
}

fn rates(rows: &[ExperimentRow]) -> String {
    rows.iter().map(|r| format!("n={} rate={:.3}", r.n, r.correct_fraction)).collect::<Vec<_>>().join(", ")
}

#[test]
fn ac01_exact_recovery() {
    let mut rng = random_source(101);
    let start = Instant::now();
    let mut failures = 0;
    for _ in 0..1000 {
        let d = rng.random_range(4..=8);
        let tree = random_tree(labels(d), &mut rng);
        let ts = TripleSet::from_tree(&tree).unwrap();
        if recover(&ts).ok().as_ref() != Some(&tree) {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report("AC1 exact recovery", failures == 0 && secs < 10.0, format!("1000 trees, {failures} failures, {secs:.2} s"));
}

#[test]
fn ac02_lca_properties() {
    let mut rng = random_source(102);
    let mut bad = 0;
    for _ in 0..500 {
        let d = rng.random_range(3..=7);
        bad += lca_counterexamples(&random_tree(labels(d), &mut rng));
    }
    report("AC2 lca properties", bad == 0, format!("500 trees, {bad} counterexamples"));
}

#[test]
fn ac03_distance_identity() {
    let mut rng = random_source(103);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.random_range(2..=60);
        let mut draw = || {
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            pair_pseudo_obs(&x, &y).unwrap()
        };
        let (a, b): (KendallSample, KendallSample) = (draw(), draw());
        worst = worst.max((l1_distance(&a, &b).unwrap() - merged_grid_integral(&a, &b)).abs());
    }
    report("AC3 distance identity", worst <= 1e-12, format!("10000 pairs, max difference {worst:e}"));
}

#[test]
fn ac04_sampler_oracles() {
    let n = 100_000;
    let mut detail = Vec::new();
    let mut pass = true;
    for (family, seed) in [(Family::Clayton, 1041u64), (Family::Gumbel, 1042)] {
        let gen = Generator::new(family, 2.0).unwrap();
        let cols = sample_archimedean(&gen, 2, n, &mut random_source(seed)).unwrap();
        let tau = kendall_tau(&cols[0], &cols[1]).unwrap();
        let target = gen.tau();
        let se = ((1.0 - target * target) / n as f64).sqrt();
        let z = (tau - target).abs() / se;
        let ks = pair_pseudo_obs(&cols[0], &cols[1]).unwrap();
        let kd = ks_distance(&ks.values(), |w| if w <= 0.0 { 0.0 } else { gen.kendall_cdf(w.min(1.0 - 1e-15)).unwrap() });
        let margin = cols.iter().map(|c| ks_distance(c, uniform_cdf)).fold(0.0, f64::max);
        pass &= z <= 3.0 && kd <= 0.02 && margin < 0.01;
        detail.push(format!("{gen}: tau {tau:.4} ({z:.2} se), K distance {kd:.4}, margins {margin:.4}"));
    }

    // Laplace transforms of inner frailties.
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
    let cases = [
        (Family::Gumbel, 1.0, 2.0, 1.0),
        (Family::Clayton, 1.0, 2.0, 0.5),
        (Family::Clayton, 1.0, 2.0, 1.0),
        (Family::Clayton, 1.0, 2.0, 2.5),
        (Family::Frank, 2.0, 5.0, 2.0),
        (Family::Joe, 1.5, 3.0, 2.0),
        (Family::Amh, 0.3, 0.7, 2.0),
    ];
    let mut worst: f64 = 0.0;
    let mut rng = random_source(1043);
    for (family, t0, t1, v0) in cases {
        let (outer, inner) = (Generator::new(family, t0).unwrap(), Generator::new(family, t1).unwrap());
        let draws: Vec<f64> =
            (0..n).map(|_| sample_inner_frailty(&outer, &inner, v0, &mut rng).unwrap()).collect();
        for &x in &grid {
            let mc = draws.iter().map(|v| (-x * v).exp()).sum::<f64>() / n as f64;
            let exact = (-v0 * outer.psi_inv(inner.psi(x).unwrap()).unwrap()).exp();
            worst = worst.max((mc - exact).abs());
        }
    }
    pass &= worst <= 0.01;
    detail.push(format!("nested LT max error {worst:.4}"));
    report("AC4 sampler oracles", pass, detail.join("; "));
}

#[test]
fn ac05_fan_calibration() {
    let rows = experiment("(U1,U2,U3)", &[(&["U1", "U2", "U3"], 0.5)], &[500], 500, 105);
    let rate = rows[0].correct_fraction;
    report("AC5 fan calibration", (0.85..=0.95).contains(&rate), rates(&rows));
}

#[test]
fn ac06_triple_consistency() {
    let rows = experiment(
        "(U1,(U2,U3))",
        &[(&["U1", "U2", "U3"], 0.2), (&["U2", "U3"], 0.8)],
        &[50, 100, 200, 500],
        100,
        106,
    );
    let last = rows.last().unwrap().correct_fraction;
    let monotone = rows.windows(2).all(|w| w[1].correct_fraction >= w[0].correct_fraction - 0.05);
    report("AC6 triple consistency", last >= 0.90 && monotone, rates(&rows));
}

#[test]
fn ac07_five_fan() {
    let rows = experiment("(U1,U2,U3,U4,U5)", &[(&["U1", "U2", "U3", "U4", "U5"], 0.5)], &[200], 100, 107);
    report("AC7 five-variate fan", rows[0].correct_fraction >= 0.95, rates(&rows));
}

#[test]
fn ac08_four_variate() {
    let rows = experiment(
        "(U1,U2,(U3,U4))",
        &[(&["U1", "U2", "U3", "U4"], 0.3), (&["U3", "U4"], 0.7)],
        &[500],
        100,
        108,
    );
    report("AC8 four-variate mixed", rows[0].correct_fraction >= 0.90, rates(&rows));
}

#[test]
fn ac09_seven_variate() {
    let rows = experiment(
        "((U1,(U2,U3)),(U4,(U5,(U6,U7))))",
        &[
            (&["U1", "U2", "U3", "U4", "U5", "U6", "U7"], 0.1),
            (&["U1", "U2", "U3"], 0.3),
            (&["U2", "U3"], 0.6),
            (&["U4", "U5", "U6", "U7"], 0.3),
            (&["U5", "U6", "U7"], 0.5),
            (&["U6", "U7"], 0.8),
        ],
        &[200, 1000],
        50,
        109,
    );
    let (small, large) = (rows[0].correct_fraction, rows[1].correct_fraction);
    report("AC9 seven-variate", large >= 0.70 && large > small, rates(&rows));
}

#[test]
fn ac10_radial_fit() {
    let gen = clayton(2.0);
    let cols = sample_archimedean(&gen, 3, 2000, &mut random_source(110)).unwrap();
    let fit = fit_radial(&triple_pseudo_obs(&cols[0], &cols[1], &cols[2]).unwrap()).unwrap();
    let distance = (1..10_000)
        .map(|i| i as f64 / 10_000.0)
        .map(|w| (fit.implied_kendall_cdf(w) - gen.kendall_cdf(w).unwrap()).abs())
        .fold(0.0, f64::max);
    let pass = distance <= 0.05 && fit.converged() && fit.residual() <= 1e-8;
    report(
        "AC10 radial fit",
        pass,
        format!("K distance {distance:.4}, residual {:e}, converged {}", fit.residual(), fit.converged()),
    );
}

fn random_model(rng: &mut impl Rng) -> NacModel {
    let d = rng.random_range(3..=5);
    let tree = random_tree(labels(d), rng);
    let depth = |node: LeafSet| {
        let mut k = 0;
        let mut cur = node;
        while let Some(p) = tree.parent(cur) {
            cur = p;
            k += 1;
        }
        k
    };
    let taus = tree.branching_nodes().into_iter().map(|b| (b, 0.2 + 0.2 * depth(b) as f64)).collect();
    NacModel::from_taus(tree.clone(), Family::Clayton, &taus).unwrap()
}

#[test]
fn ac11_rank_invariance() {
    let transforms: [fn(f64) -> f64; 4] = [|u| u.ln(), |u| (3.0 * u - 1.0).powi(3), |u| u / (1.0 - u), |u| 7.5 * u - 2.0];
    let mut rng = random_source(111);
    let mut mismatches = 0;
    for case in 0..50u64 {
        let model = random_model(&mut rng);
        let cols = sample_nac(&model, 80, &mut rng).unwrap();
        let labels = model.tree().labels().to_vec();
        let moved: Vec<Vec<f64>> = cols
            .iter()
            .enumerate()
            .map(|(j, c)| c.iter().map(|&u| transforms[(j + case as usize) % 4](u)).collect())
            .collect();
        let seed = substream_seed(111, case);
        let a = estimate_structure(&Dataset::new(labels.clone(), cols).unwrap(), 0.10, 40, seed).unwrap();
        let b = estimate_structure(&Dataset::new(labels, moved).unwrap(), 0.10, 40, seed).unwrap();
        if a != b {
            mismatches += 1;
        }
    }
    report("AC11 rank invariance", mismatches == 0, format!("50 cases, {mismatches} mismatches"));
}
