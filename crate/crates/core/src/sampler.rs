//! Frailty samplers for Archimedean and nested Archimedean copulas.
//!
//! A row of an Archimedean copula is `U_i = psi(E_i / V)` with `E_i` unit
//! exponential and `V` a frailty whose Laplace transform is `psi`. Nested
//! copulas draw one frailty per branching node, each conditioned on its
//! parent's frailty (the McNeil recursion).
//!
//! Samples are returned column-major: `out[j][i]` is row `i` of column `j`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Geometric, Open01, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::generator::{check_nesting, Family, Generator};
use crate::tree::{label_set, LeafSet, TreeSpec, TreeStructure};

/// Iteration budget for the rejection and summation samplers.
pub const ITERATION_CAP: u64 = 1_000_000;

/// Largest double below one; sampled uniforms are clamped into
/// `[f64::MIN_POSITIVE, ONE_MINUS]`.
const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Positive stable variate with Laplace transform `exp(-t^alpha)`,
/// `alpha` in `(0, 1]`, by the Kanter / Chambers-Mallows-Stuck formula
/// `S = sin(aU) / sin(U)^(1/a) * (sin((1-a)U) / E)^((1-a)/a)` evaluated in
/// the log domain.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    assert!(alpha > 0.0 && alpha <= 1.0, "stable index {alpha} outside (0, 1]");
    if alpha == 1.0 {
        return 1.0;
    }
    let u = std::f64::consts::PI * open01(rng);
    let e = exp1(rng);
    let ln_s = (alpha * u).sin().ln() - u.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln());
    ln_s.exp()
}

/// Logarithmic variate, `P(X = k) = p^k / (-k ln(1 - p))`, by Kemp's LK
/// algorithm. `ln_q` is `ln(1 - p)`, passed separately for precision.
pub fn sample_logarithmic<R: Rng + ?Sized>(p: f64, ln_q: f64, rng: &mut R) -> f64 {
    let v = open01(rng);
    if v >= p {
        return 1.0;
    }
    let q = -(ln_q * open01(rng)).exp_m1();
    if v <= q * q {
        (1.0 + v.ln() / q.ln()).floor().max(1.0)
    } else if v <= q {
        2.0
    } else {
        1.0
    }
}

/// `ln P(X > k)` for `X ~ Sibuya(alpha)`, `k >= 1`.
fn sibuya_ln_survival(alpha: f64, k: f64, ln_gamma_1ma: f64) -> f64 {
    if k >= 1e5 {
        let z = k + 1.0;
        -alpha * z.ln() + alpha * (alpha + 1.0) / (2.0 * z) - ln_gamma_1ma
    } else {
        ln_gamma(k + 1.0 - alpha) - ln_gamma(k + 1.0) - ln_gamma_1ma
    }
}

/// Sibuya variate with generating function `1 - (1 - s)^alpha`, by
/// inversion of the survival function.
pub fn sample_sibuya<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(1.0);
    }
    let u = open01(rng);
    if u >= 1.0 - alpha {
        return Ok(1.0);
    }
    let lu = u.ln();
    let lg = ln_gamma(1.0 - alpha);
    let survives = |k: f64| sibuya_ln_survival(alpha, k, lg) > lu;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while survives(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::SamplerCap {
                iterations: 1000,
                message: format!("Sibuya({alpha}) draw exceeds the floating-point range"),
            });
        }
    }
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if mid <= lo || mid >= hi {
            break;
        }
        if survives(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// One frailty draw `V` whose Laplace transform is `gen`'s `psi`.
pub fn sample_frailty<R: Rng + ?Sized>(gen: &Generator, rng: &mut R) -> Result<f64> {
    let t = gen.theta();
    match gen.family() {
        Family::Clayton => {
            let gamma = Gamma::new(1.0 / t, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
            Ok(gamma.sample(rng))
        }
        Family::Gumbel => Ok(sample_positive_stable(1.0 / t, rng)),
        Family::Frank => Ok(sample_logarithmic(-(-t).exp_m1(), -t, rng)),
        Family::Joe => sample_sibuya(1.0 / t, rng),
        Family::Amh => {
            if t == 0.0 {
                return Ok(1.0);
            }
            let geom = Geometric::new(1.0 - t).map_err(|e| Error::Domain(e.to_string()))?;
            Ok(1.0 + geom.sample(rng) as f64)
        }
    }
}

fn clamp_unit(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, ONE_MINUS)
}

/// `n` rows of the `d`-variate Archimedean copula generated by `gen`.
pub fn sample_archimedean<R: Rng + ?Sized>(
    gen: &Generator,
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if d < 2 || n < 1 {
        return Err(Error::Domain(format!("need d >= 2 and n >= 1, got d = {d}, n = {n}")));
    }
    let mut cols: Vec<Vec<f64>> = (0..d).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let v = sample_frailty(gen, rng)?;
        for col in cols.iter_mut() {
            col.push(clamp_unit(gen.psi_unchecked(exp1(rng) / v)));
        }
    }
    Ok(cols)
}

fn cap_error(message: String) -> Error {
    Error::SamplerCap { iterations: ITERATION_CAP, message }
}

/// Frailty of an inner node given its parent's frailty `v0`: a draw with
/// Laplace transform `exp(-v0 * psi_outer^-1(psi_inner(t)))`.
pub fn sample_inner_frailty<R: Rng + ?Sized>(
    outer: &Generator,
    inner: &Generator,
    v0: f64,
    rng: &mut R,
) -> Result<f64> {
    if !check_nesting(outer, inner) {
        return Err(Error::Nesting { outer: outer.to_string(), inner: inner.to_string() });
    }
    if !(v0 >= 0.0 && v0.is_finite()) {
        return Err(Error::Domain(format!("parent frailty must be finite and nonnegative, got {v0}")));
    }
    if v0 == 0.0 {
        return Ok(0.0);
    }
    let alpha = outer.theta() / inner.theta();
    match outer.family() {
        Family::Gumbel => Ok(v0.powf(1.0 / alpha) * sample_positive_stable(alpha, rng)),
        Family::Clayton => sample_tilted_stable(alpha, v0, rng),
        Family::Joe => {
            let count = v0.round();
            if count > ITERATION_CAP as f64 {
                // Stable limit of the Sibuya sum: the Laplace transforms
                // differ by O(t^(2 alpha) / count), below 1e-6 here.
                return Ok(count.powf(1.0 / alpha) * sample_positive_stable(alpha, rng));
            }
            let m = count as u64;
            let mut total = 0.0;
            for _ in 0..m {
                total += sample_sibuya(alpha, rng)?;
            }
            Ok(total)
        }
        Family::Frank => {
            let m = integer_count(v0)?;
            let ln_c1 = (-(-inner.theta()).exp_m1()).ln();
            let mut total = 0.0;
            let mut iterations = 0u64;
            for _ in 0..m {
                loop {
                    iterations += 1;
                    if iterations > ITERATION_CAP {
                        return Err(cap_error(format!("tilted Sibuya for {outer} / {inner}")));
                    }
                    let k = sample_sibuya(alpha, rng)?;
                    if open01(rng).ln() <= k * ln_c1 {
                        total += k;
                        break;
                    }
                }
            }
            Ok(total)
        }
        Family::Amh => {
            let m = integer_count(v0)?;
            let p = (1.0 - inner.theta()) / (1.0 - outer.theta());
            if p >= 1.0 {
                return Ok(m as f64);
            }
            // Sum of m geometric failure counts is negative binomial, drawn as
            // a gamma-mixed Poisson.
            let gamma = Gamma::new(m as f64, (1.0 - p) / p).map_err(|e| Error::Domain(e.to_string()))?;
            let lambda: f64 = gamma.sample(rng);
            let extra = if lambda > 0.0 {
                Poisson::new(lambda).map_err(|e| Error::Domain(e.to_string()))?.sample(rng)
            } else {
                0.0
            };
            Ok(m as f64 + extra)
        }
    }
}

fn integer_count(v0: f64) -> Result<u64> {
    if v0 > ITERATION_CAP as f64 {
        return Err(cap_error(format!("discrete parent frailty {v0} needs too many summands")));
    }
    Ok(v0.round() as u64)
}

/// Exponentially tilted stable law with Laplace transform
/// `exp(-v0 ((1 + t)^alpha - 1))`, as a sum of `ceil(v0)` pieces each drawn
/// by rejection from a scaled stable proposal.
pub fn sample_tilted_stable<R: Rng + ?Sized>(alpha: f64, v0: f64, rng: &mut R) -> Result<f64> {
    let m = v0.ceil();
    if m > ITERATION_CAP as f64 {
        return Err(cap_error(format!("tilted stable with v0 = {v0}")));
    }
    let c = v0 / m;
    let scale = c.powf(1.0 / alpha);
    let mut total = 0.0;
    let mut iterations = 0u64;
    for _ in 0..m as u64 {
        loop {
            iterations += 1;
            if iterations > ITERATION_CAP {
                return Err(cap_error(format!("tilted stable with alpha = {alpha}, v0 = {v0}")));
            }
            let x = scale * sample_positive_stable(alpha, rng);
            if open01(rng) <= (-x).exp() {
                total += x;
                break;
            }
        }
    }
    Ok(total)
}

/// A tree structure with one generator per branching node.
#[derive(Debug, Clone, PartialEq)]
pub struct NacModel {
    tree: TreeStructure,
    generators: BTreeMap<LeafSet, Generator>,
}

impl NacModel {
    /// Checks that every branching node has a generator, that no other node
    /// has one, and that every parent/child pair nests.
    pub fn new(tree: TreeStructure, generators: BTreeMap<LeafSet, Generator>) -> Result<NacModel> {
        let branching = tree.branching_nodes();
        for node in &branching {
            if !generators.contains_key(node) {
                return Err(Error::Config(format!("branching node {} has no generator", tree.describe(*node))));
            }
        }
        for node in generators.keys() {
            if !branching.contains(node) {
                return Err(Error::Config(format!(
                    "{} is not a branching node of {}",
                    tree.describe(*node),
                    tree
                )));
            }
        }
        for &node in &branching {
            if let Some(parent) = tree.parent(node) {
                let (outer, inner) = (&generators[&parent], &generators[&node]);
                if !check_nesting(outer, inner) {
                    return Err(Error::Nesting {
                        outer: format!("{outer} at {}", tree.describe(parent)),
                        inner: format!("{inner} at {}", tree.describe(node)),
                    });
                }
            }
        }
        Ok(NacModel { tree, generators })
    }

    /// One family for the whole tree with a Kendall's tau per branching node.
    pub fn from_taus(tree: TreeStructure, family: Family, taus: &BTreeMap<LeafSet, f64>) -> Result<NacModel> {
        let generators = taus
            .iter()
            .map(|(&node, &tau)| Ok((node, Generator::from_tau(family, tau)?)))
            .collect::<Result<_>>()?;
        NacModel::new(tree, generators)
    }

    pub fn tree(&self) -> &TreeStructure {
        &self.tree
    }

    pub fn generators(&self) -> &BTreeMap<LeafSet, Generator> {
        &self.generators
    }

    pub fn generator(&self, node: LeafSet) -> Option<&Generator> {
        self.generators.get(&node)
    }
}

/// One generator entry of the model JSON. Exactly one of `theta`, `tau`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct NodeGeneratorJson {
    node: Vec<String>,
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NacModelJson {
    tree: TreeSpec,
    generators: Vec<NodeGeneratorJson>,
}

impl Serialize for NacModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let labels = self.tree.labels();
        let json = NacModelJson {
            tree: TreeSpec::Json(self.tree.to_json()),
            generators: self
                .tree
                .branching_nodes()
                .into_iter()
                .map(|node| {
                    let g = self.generators[&node];
                    NodeGeneratorJson {
                        node: node.iter().map(|i| labels[i].clone()).collect(),
                        family: g.family(),
                        theta: Some(g.theta()),
                        tau: None,
                    }
                })
                .collect(),
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NacModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = NacModelJson::deserialize(deserializer)?;
        model_from_json(json).map_err(serde::de::Error::custom)
    }
}

fn model_from_json(json: NacModelJson) -> Result<NacModel> {
    let tree = json.tree.build()?;
    let mut generators = BTreeMap::new();
    for entry in json.generators {
        let node = label_set(&entry.node, tree.labels())?;
        let gen = match (entry.theta, entry.tau) {
            (Some(theta), None) => Generator::new(entry.family, theta)?,
            (None, Some(tau)) => Generator::from_tau(entry.family, tau)?,
            _ => {
                return Err(Error::Config(format!(
                    "generator for {:?} needs exactly one of theta and tau",
                    entry.node
                )))
            }
        };
        if generators.insert(node, gen).is_some() {
            return Err(Error::Config(format!("node {:?} has two generators", entry.node)));
        }
    }
    NacModel::new(tree, generators)
}

/// `n` rows of the nested Archimedean copula `model`. Columns follow the
/// leaf indices of the tree.
pub fn sample_nac<R: Rng + ?Sized>(model: &NacModel, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let tree = model.tree();
    if n < 1 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    // Pre-order plan: (node, parent index into plan) with leaves attached.
    struct Step {
        node: LeafSet,
        parent: Option<usize>,
        leaves: Vec<usize>,
    }
    let mut plan: Vec<Step> = Vec::new();
    fn visit(tree: &TreeStructure, node: LeafSet, parent: Option<usize>, plan: &mut Vec<Step>) {
        let idx = plan.len();
        plan.push(Step { node, parent, leaves: Vec::new() });
        for child in tree.children(node) {
            if child.len() == 1 {
                plan[idx].leaves.push(child.min_leaf().unwrap());
            } else {
                visit(tree, child, Some(idx), plan);
            }
        }
    }
    visit(tree, tree.leaves(), None, &mut plan);

    let width = tree.labels().len();
    let mut cols = vec![Vec::with_capacity(n); width];
    let mut frailties = vec![0.0; plan.len()];
    for _ in 0..n {
        for (i, step) in plan.iter().enumerate() {
            let gen = &model.generators[&step.node];
            frailties[i] = match step.parent {
                None => sample_frailty(gen, rng)?,
                Some(p) => {
                    let outer = &model.generators[&plan[p].node];
                    sample_inner_frailty(outer, gen, frailties[p], rng)?
                }
            };
            for &leaf in &step.leaves {
                cols[leaf].push(clamp_unit(gen.psi_unchecked(exp1(rng) / frailties[i])));
            }
        }
    }
    Ok(tree.leaves().iter().map(|j| std::mem::take(&mut cols[j])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_source;

    fn gen(family: Family, theta: f64) -> Generator {
        Generator::new(family, theta).unwrap()
    }

    /// Monte Carlo Laplace transform of `draw` against `expected` on a grid.
    fn check_lt(draws: &[f64], expected: impl Fn(f64) -> f64, tol: f64, what: &str) {
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let mc = draws.iter().map(|v| (-x * v).exp()).sum::<f64>() / draws.len() as f64;
            let want = expected(x);
            assert!((mc - want).abs() < tol, "{what}: x = {x}, mc {mc}, want {want}");
        }
    }

    #[test]
    fn frailty_laplace_transforms() {
        let mut rng = random_source(5);
        for g in [
            gen(Family::Clayton, 2.0),
            gen(Family::Clayton, 0.5),
            gen(Family::Gumbel, 1.5),
            gen(Family::Gumbel, 4.0),
            gen(Family::Frank, 1.0),
            gen(Family::Frank, 10.0),
            gen(Family::Joe, 1.5),
            gen(Family::Joe, 4.0),
            gen(Family::Amh, 0.6),
        ] {
            let draws: Vec<f64> = (0..40_000).map(|_| sample_frailty(&g, &mut rng).unwrap()).collect();
            check_lt(&draws, |x| g.psi(x).unwrap(), 0.01, &g.to_string());
        }
    }

    #[test]
    fn degenerate_frailties() {
        let mut rng = random_source(1);
        assert_eq!(sample_frailty(&gen(Family::Amh, 0.0), &mut rng).unwrap(), 1.0);
        assert_eq!(sample_frailty(&gen(Family::Gumbel, 1.0), &mut rng).unwrap(), 1.0);
        assert_eq!(sample_frailty(&gen(Family::Joe, 1.0), &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn clayton_frailty_mean() {
        let mut rng = random_source(2);
        let g = gen(Family::Clayton, 2.0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_frailty(&g, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        // Gamma(0.5, 1): variance 0.5.
        let se = (0.5f64 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn sibuya_probabilities() {
        let mut rng = random_source(3);
        let alpha = 0.4;
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_sibuya(alpha, &mut rng).unwrap()).collect();
        // P(X = 1) = alpha, P(X = 2) = alpha (1 - alpha) / 2.
        let p1 = draws.iter().filter(|&&k| k == 1.0).count() as f64 / n as f64;
        let p2 = draws.iter().filter(|&&k| k == 2.0).count() as f64 / n as f64;
        assert!((p1 - 0.4).abs() < 0.006, "{p1}");
        assert!((p2 - 0.12).abs() < 0.005, "{p2}");
        assert!(draws.iter().all(|&k| k >= 1.0 && k.fract() == 0.0));
    }

    #[test]
    fn sibuya_survival_switch_is_continuous() {
        let lg = ln_gamma(0.7);
        let exact = ln_gamma(1e5 + 0.7) - ln_gamma(1e5 + 1.0) - lg;
        let asym = sibuya_ln_survival(0.3, 1e5, lg);
        assert!((exact - asym).abs() < 1e-9, "{exact} vs {asym}");
    }

    #[test]
    fn logarithmic_probabilities() {
        let mut rng = random_source(4);
        let p: f64 = 0.8;
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_logarithmic(p, (1.0 - p).ln(), &mut rng)).collect();
        for k in 1..=4 {
            let want = p.powi(k) / (-(k as f64) * (1.0 - p).ln());
            let got = draws.iter().filter(|&&v| v == k as f64).count() as f64 / n as f64;
            assert!((got - want).abs() < 0.006, "k = {k}: {got} vs {want}");
        }
    }

    #[test]
    fn inner_frailty_laplace_transforms() {
        let mut rng = random_source(6);
        let pairs = [
            (gen(Family::Gumbel, 1.0), gen(Family::Gumbel, 2.0)),
            (gen(Family::Gumbel, 1.5), gen(Family::Gumbel, 3.0)),
            (gen(Family::Clayton, 1.0), gen(Family::Clayton, 2.0)),
            (gen(Family::Clayton, 0.5), gen(Family::Clayton, 4.0)),
            (gen(Family::Frank, 2.0), gen(Family::Frank, 6.0)),
            (gen(Family::Joe, 1.5), gen(Family::Joe, 3.0)),
            (gen(Family::Amh, 0.3), gen(Family::Amh, 0.8)),
        ];
        for (outer, inner) in pairs {
            for v0 in [1.0, 3.0] {
                let draws: Vec<f64> = (0..40_000)
                    .map(|_| sample_inner_frailty(&outer, &inner, v0, &mut rng).unwrap())
                    .collect();
                let expected = |x: f64| (-v0 * outer.psi_inv(inner.psi(x).unwrap()).unwrap()).exp();
                check_lt(&draws, expected, 0.01, &format!("{outer} / {inner}, v0 = {v0}"));
            }
        }
    }

    #[test]
    fn joe_inner_frailty_beyond_the_summation_budget() {
        let mut rng = random_source(16);
        let (outer, inner) = (gen(Family::Joe, 1.5), gen(Family::Joe, 3.0));
        let alpha: f64 = 0.5;
        let v0: f64 = 4e6;
        let scale = v0.powf(-1.0 / alpha);
        let draws: Vec<f64> =
            (0..40_000).map(|_| scale * sample_inner_frailty(&outer, &inner, v0, &mut rng).unwrap()).collect();
        // (1 - (1 - e^-x)^alpha)^v0 at x = t * scale.
        let expected = |t: f64| (v0 * (-(-(-t * scale).exp_m1()).powf(alpha)).ln_1p()).exp();
        check_lt(&draws, expected, 0.01, "Joe sum above the budget");
    }

    #[test]
    fn inner_frailty_rejects_bad_nesting() {
        let mut rng = random_source(0);
        let err = sample_inner_frailty(&gen(Family::Clayton, 2.0), &gen(Family::Clayton, 1.0), 1.0, &mut rng);
        assert!(matches!(err, Err(Error::Nesting { .. })));
        let err = sample_inner_frailty(&gen(Family::Clayton, 1.0), &gen(Family::Gumbel, 2.0), 1.0, &mut rng);
        assert!(matches!(err, Err(Error::Nesting { .. })));
    }

    #[test]
    fn archimedean_entries_inside_unit_interval() {
        let mut rng = random_source(7);
        for g in [gen(Family::Clayton, 20.0), gen(Family::Gumbel, 15.0), gen(Family::Joe, 30.0), gen(Family::Frank, 40.0)] {
            let cols = sample_archimedean(&g, 3, 2000, &mut rng).unwrap();
            assert!(cols.iter().flatten().all(|&u| u > 0.0 && u < 1.0), "{g}");
        }
        assert!(sample_archimedean(&gen(Family::Clayton, 1.0), 1, 10, &mut rng).is_err());
    }

    #[test]
    fn fan_model_matches_archimedean_sampler() {
        let g = gen(Family::Clayton, 2.0);
        let tree = TreeStructure::fan(TreeStructure::default_labels(4)).unwrap();
        let model = NacModel::new(tree.clone(), BTreeMap::from([(tree.leaves(), g)])).unwrap();
        let a = sample_nac(&model, 50, &mut random_source(9)).unwrap();
        let b = sample_archimedean(&g, 4, 50, &mut random_source(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn same_seed_same_sample() {
        let tree = TreeStructure::parse("(U1,(U2,U3))").unwrap();
        let taus = BTreeMap::from([(tree.leaves(), 0.2), (LeafSet::from_bits(0b110), 0.8)]);
        let model = NacModel::from_taus(tree, Family::Clayton, &taus).unwrap();
        let a = sample_nac(&model, 100, &mut random_source(3)).unwrap();
        let b = sample_nac(&model, 100, &mut random_source(3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_nac(&model, 100, &mut random_source(4)).unwrap());
    }

    #[test]
    fn model_validation() {
        let tree = TreeStructure::parse("(U1,(U2,U3))").unwrap();
        let root = tree.leaves();
        let inner = LeafSet::from_bits(0b110);
        let bad = BTreeMap::from([(root, gen(Family::Clayton, 3.0)), (inner, gen(Family::Clayton, 2.0))]);
        assert!(matches!(NacModel::new(tree.clone(), bad), Err(Error::Nesting { .. })));
        let missing = BTreeMap::from([(root, gen(Family::Clayton, 1.0))]);
        assert!(matches!(NacModel::new(tree.clone(), missing), Err(Error::Config(_))));
        let extra = BTreeMap::from([
            (root, gen(Family::Clayton, 1.0)),
            (inner, gen(Family::Clayton, 2.0)),
            (LeafSet::from_bits(0b011), gen(Family::Clayton, 2.0)),
        ]);
        assert!(matches!(NacModel::new(tree, extra), Err(Error::Config(_))));
    }

    #[test]
    fn model_json() {
        let text = r#"{
            "tree": "(U1,(U2,U3))",
            "generators": [
                {"node": ["U1","U2","U3"], "family": "clayton", "tau": 0.2},
                {"node": ["U2","U3"], "family": "clayton", "theta": 8.0}
            ]
        }"#;
        let model: NacModel = serde_json::from_str(text).unwrap();
        assert!((model.generator(model.tree().leaves()).unwrap().theta() - 0.5).abs() < 1e-12);
        let back: NacModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        assert_eq!(back, model);
        let both = text.replace("\"tau\": 0.2", "\"tau\": 0.2, \"theta\": 1.0");
        assert!(serde_json::from_str::<NacModel>(&both).is_err());
    }
}
