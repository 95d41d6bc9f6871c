//! Pseudo-observations and empirical Kendall distribution functions.
//!
//! A pseudo-observation is `w_m = #{l : x_l < x_m, y_l < y_m, ...} / (n + 1)`.
//! Samples keep the integer counts, so distances between samples are exact
//! rational numbers up to a single final division.

use crate::error::{Error, Result};

/// Pseudo-observations of one sample, stored as dominance counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KendallSample {
    counts: Vec<u32>,
    sorted: Vec<u32>,
}

impl KendallSample {
    /// Builds a sample from counts `c_m`, with `w_m = c_m / (n + 1)`.
    pub fn from_counts(counts: Vec<u32>) -> Result<KendallSample> {
        let n = counts.len();
        if let Some(&c) = counts.iter().find(|&&c| c as usize >= n.max(1)) {
            return Err(Error::Domain(format!("count {c} is out of range for n = {n}")));
        }
        let sorted = counting_sort(&counts, n);
        Ok(KendallSample { counts, sorted })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// Counts in row order.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Counts in increasing order.
    pub fn sorted_counts(&self) -> &[u32] {
        &self.sorted
    }

    fn scale(&self) -> f64 {
        (self.n() + 1) as f64
    }

    /// Pseudo-observations in row order.
    pub fn values(&self) -> Vec<f64> {
        let s = self.scale();
        self.counts.iter().map(|&c| c as f64 / s).collect()
    }

    /// Pseudo-observations in increasing order.
    pub fn sorted_values(&self) -> Vec<f64> {
        let s = self.scale();
        self.sorted.iter().map(|&c| c as f64 / s).collect()
    }
}

fn counting_sort(counts: &[u32], n: usize) -> Vec<u32> {
    let mut freq = vec![0usize; n.max(1)];
    for &c in counts {
        freq[c as usize] += 1;
    }
    let mut out = Vec::with_capacity(counts.len());
    for (value, &k) in freq.iter().enumerate() {
        out.extend(std::iter::repeat_n(value as u32, k));
    }
    out
}

fn check_lengths(columns: &[&[f64]]) -> Result<usize> {
    let n = columns[0].len();
    for col in &columns[1..] {
        if col.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: col.len() });
        }
    }
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 observations, got {n}")));
    }
    if columns.iter().any(|c| c.iter().any(|v| v.is_nan())) {
        return Err(Error::Domain("pseudo-observations are undefined for NaN".into()));
    }
    Ok(n)
}

/// Dense ranks starting at 0; equal values share a rank.
fn dense_ranks(x: &[f64]) -> (Vec<u32>, usize) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0u32; x.len()];
    let mut rank = 0u32;
    for w in 0..order.len() {
        if w > 0 && x[order[w]] != x[order[w - 1]] {
            rank += 1;
        }
        ranks[order[w]] = rank;
    }
    (ranks, rank as usize + 1)
}

/// Bivariate pseudo-observations in `O(n log n)`.
pub fn pair_pseudo_obs(x: &[f64], y: &[f64]) -> Result<KendallSample> {
    let n = check_lengths(&[x, y])?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]));
    let (ry, levels) = dense_ranks(y);
    let mut tree = vec![0u32; levels + 1];
    let mut counts = vec![0u32; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        for &m in &order[start..end] {
            // Rows already in the tree have strictly smaller x.
            let mut i = ry[m] as usize;
            let mut acc = 0;
            while i > 0 {
                acc += tree[i];
                i &= i - 1;
            }
            counts[m] = acc;
        }
        for &m in &order[start..end] {
            let mut i = ry[m] as usize + 1;
            while i <= levels {
                tree[i] += 1;
                i += i & i.wrapping_neg();
            }
        }
        start = end;
    }
    KendallSample::from_counts(counts)
}

/// Pair counts for tie-free data given as rank permutations of `0..n`.
pub(crate) fn pair_counts_from_ranks(rank_x: &[u32], rank_y: &[u32], by_x: &mut [u32], tree: &mut [u32]) -> Vec<u32> {
    let n = rank_x.len();
    for (row, &r) in rank_x.iter().enumerate() {
        by_x[r as usize] = row as u32;
    }
    tree[..=n].fill(0);
    let mut counts = vec![0u32; n];
    for &row in by_x.iter() {
        let row = row as usize;
        let mut i = rank_y[row] as usize;
        let mut acc = 0;
        while i > 0 {
            acc += tree[i];
            i &= i - 1;
        }
        counts[row] = acc;
        let mut i = rank_y[row] as usize + 1;
        while i <= n {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
    counts
}

/// Rank permutation of tie-free data.
pub(crate) fn rank_permutation(x: &[f64], order: &mut Vec<u32>) -> Vec<u32> {
    order.clear();
    order.extend(0..x.len() as u32);
    order.sort_unstable_by(|&a, &b| x[a as usize].total_cmp(&x[b as usize]));
    let mut ranks = vec![0u32; x.len()];
    for (r, &row) in order.iter().enumerate() {
        ranks[row as usize] = r as u32;
    }
    ranks
}

/// The literal double sum, kept as the reference for [`pair_pseudo_obs`].
pub fn pair_pseudo_obs_reference(x: &[f64], y: &[f64]) -> Result<KendallSample> {
    let n = check_lengths(&[x, y])?;
    let counts = (0..n)
        .map(|m| (0..n).filter(|&l| x[l] < x[m] && y[l] < y[m]).count() as u32)
        .collect();
    KendallSample::from_counts(counts)
}

/// Trivariate pseudo-observations, `O(n^2)` after sorting on the first column.
pub fn triple_pseudo_obs(x: &[f64], y: &[f64], z: &[f64]) -> Result<KendallSample> {
    let n = check_lengths(&[x, y, z])?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]));
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let zs: Vec<f64> = order.iter().map(|&i| z[i]).collect();
    let mut counts = vec![0u32; n];
    let mut below = 0;
    for pos in 0..n {
        if pos > 0 && x[order[pos]] != x[order[pos - 1]] {
            below = pos;
        }
        let (ym, zm) = (ys[pos], zs[pos]);
        let c = ys[..below]
            .iter()
            .zip(&zs[..below])
            .filter(|&(&yl, &zl)| yl < ym && zl < zm)
            .count();
        counts[order[pos]] = c as u32;
    }
    KendallSample::from_counts(counts)
}

/// Empirical Kendall CDF `K_n(w) = #{m : w_m <= w} / n`.
pub fn ecdf(ks: &KendallSample, w: f64) -> f64 {
    let s = ks.scale();
    let k = ks.sorted.partition_point(|&c| c as f64 / s <= w);
    k as f64 / ks.n() as f64
}

/// `(1/n) sum_m |w_(m),a - w_(m),b|`, the L1 distance between the two
/// empirical Kendall CDFs.
pub fn l1_distance(a: &KendallSample, b: &KendallSample) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch { expected: a.n(), actual: b.n() });
    }
    let total: u64 = a
        .sorted
        .iter()
        .zip(&b.sorted)
        .map(|(&p, &q)| p.abs_diff(q) as u64)
        .sum();
    let n = a.n() as f64;
    Ok(total as f64 / (n * (n + 1.0)))
}

/// Kendall's tau-b, via Knight's merge-sort algorithm.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = check_lengths(&[x, y])?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let pairs = |run: u64| run * run.saturating_sub(1) / 2;
    let (mut tied_x, mut tied_xy) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in 1..=n {
        let same_x = w < n && x[order[w]] == x[order[w - 1]];
        let same_xy = same_x && y[order[w]] == y[order[w - 1]];
        if same_x {
            run_x += 1;
        } else {
            tied_x += pairs(run_x);
            run_x = 1;
        }
        if same_xy {
            run_xy += 1;
        } else {
            tied_xy += pairs(run_xy);
            run_xy = 1;
        }
    }
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let swaps = merge_count(&mut ys);
    let mut tied_y = 0u64;
    let mut run = 1u64;
    for w in 1..=n {
        if w < n && ys[w] == ys[w - 1] {
            run += 1;
        } else {
            tied_y += pairs(run);
            run = 1;
        }
    }
    let total = pairs(n as u64);
    let numer = total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    let denom = ((total - tied_x) as f64 * (total - tied_y) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::Domain("Kendall's tau is undefined for a constant column".into()));
    }
    Ok(numer / denom)
}

/// Sorts `v` and returns the number of strictly inverted pairs.
fn merge_count(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid]) + merge_count(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            merged.push(v[j]);
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    swaps
}

/// True when some value occurs more than once.
pub fn has_ties(x: &[f64]) -> bool {
    let mut v = x.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v.windows(2).any(|w| w[0] == w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn quarter(counts: &[u32]) -> KendallSample {
        KendallSample::from_counts(counts.to_vec()).unwrap()
    }

    #[test]
    fn pair_examples() {
        let ks = pair_pseudo_obs(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(ks.values(), vec![0.0, 0.25, 0.25]);

        let x: Vec<f64> = (1..=20).map(f64::from).collect();
        let ks = pair_pseudo_obs(&x, &x).unwrap();
        let expect: Vec<f64> = (0..20).map(|m| m as f64 / 21.0).collect();
        assert_eq!(ks.values(), expect);

        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let ks = pair_pseudo_obs(&x, &rev).unwrap();
        assert!(ks.values().iter().all(|&w| w == 0.0));

        assert!(matches!(
            pair_pseudo_obs(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn triple_examples() {
        let ks = triple_pseudo_obs(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(ks.values(), vec![0.0, 0.25, 0.25]);

        let x: Vec<f64> = (1..=15).map(f64::from).collect();
        let ks = triple_pseudo_obs(&x, &x, &x).unwrap();
        let expect: Vec<f64> = (0..15).map(|m| m as f64 / 16.0).collect();
        assert_eq!(ks.values(), expect);
    }

    #[test]
    fn ties_use_strict_inequalities() {
        let x = [1.0, 1.0, 2.0, 2.0, 3.0];
        let y = [1.0, 2.0, 2.0, 1.0, 3.0];
        let fast = pair_pseudo_obs(&x, &y).unwrap();
        assert_eq!(fast, pair_pseudo_obs_reference(&x, &y).unwrap());
        assert_eq!(fast.counts(), &[0, 0, 1, 0, 4]);
        assert!(has_ties(&x));
        assert!(!has_ties(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn ecdf_examples() {
        let ks = quarter(&[0, 1, 1]);
        assert_eq!(ecdf(&ks, 0.1), 1.0 / 3.0);
        assert_eq!(ecdf(&ks, 0.25), 1.0);
        assert_eq!(ecdf(&ks, -0.01), 0.0);
        assert_eq!(ecdf(&ks, 0.0), 1.0 / 3.0);
    }

    #[test]
    fn l1_examples() {
        let a = quarter(&[0, 1, 1]);
        let b = quarter(&[1, 1, 2]);
        assert!((l1_distance(&a, &b).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        let c = quarter(&[0, 1]);
        assert!(l1_distance(&a, &c).is_err());
    }

    #[test]
    fn tau_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        // Concordant: 4 of 6 pairs; discordant 2.
        assert!((kendall_tau(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // Ties: scipy.stats.kendalltau([1,2,2,3],[1,3,2,2]) = 0.4
        let t = kendall_tau(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 2.0]).unwrap();
        assert!((t - 0.4).abs() < 1e-12, "{t}");
    }

    fn tau_reference(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut s, mut tx, mut ty) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let a = (x[i] - x[j]).signum() * (x[i] != x[j]) as i32 as f64;
                let b = (y[i] - y[j]).signum() * (y[i] != y[j]) as i32 as f64;
                s += a * b;
                tx += a * a;
                ty += b * b;
            }
        }
        s / (tx * ty).sqrt()
    }

    /// The fast pair routine agrees with the literal double sum on 10^4
    /// random instances with heavy ties.
    #[test]
    fn fast_pair_matches_reference_on_many_instances() {
        let mut rng = crate::rng::random_source(11);
        for _ in 0..10_000 {
            let n = rng.random_range(2..40);
            let levels = rng.random_range(1..12);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
            assert_eq!(pair_pseudo_obs(&x, &y).unwrap(), pair_pseudo_obs_reference(&x, &y).unwrap());
        }
    }

    #[test]
    fn rank_path_matches_general_path() {
        let mut rng = crate::rng::random_source(12);
        for _ in 0..200 {
            let n = rng.random_range(2..60);
            let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let mut order = Vec::new();
            let rx = rank_permutation(&x, &mut order);
            let ry = rank_permutation(&y, &mut order);
            let (mut by_x, mut tree) = (vec![0; n], vec![0; n + 1]);
            let counts = pair_counts_from_ranks(&rx, &ry, &mut by_x, &mut tree);
            assert_eq!(counts, pair_pseudo_obs(&x, &y).unwrap().counts());
        }
    }

    proptest! {
        #[test]
        fn triple_matches_literal_sum(rows in prop::collection::vec((0u8..6, 0u8..6, 0u8..6), 2..30)) {
            let x: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
            let z: Vec<f64> = rows.iter().map(|r| r.2 as f64).collect();
            let ks = triple_pseudo_obs(&x, &y, &z).unwrap();
            let n = x.len();
            for m in 0..n {
                let c = (0..n).filter(|&l| x[l] < x[m] && y[l] < y[m] && z[l] < z[m]).count();
                prop_assert_eq!(ks.counts()[m] as usize, c);
                prop_assert!(c < n);
            }
        }

        #[test]
        fn rank_invariance(rows in prop::collection::vec((-50i32..50, -50i32..50), 2..40)) {
            let x: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
            let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| v.powi(3) + 7.0).collect();
            prop_assert_eq!(pair_pseudo_obs(&x, &y).unwrap(), pair_pseudo_obs(&tx, &ty).unwrap());
        }

        #[test]
        fn row_permutation_keeps_multiset(rows in prop::collection::vec((0u8..9, 0u8..9), 2..30), shift in 0usize..30) {
            let x: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
            let k = shift % x.len();
            let (mut px, mut py) = (x.clone(), y.clone());
            px.rotate_left(k);
            py.rotate_left(k);
            let (a, b) = (pair_pseudo_obs(&x, &y).unwrap(), pair_pseudo_obs(&px, &py).unwrap());
            prop_assert_eq!(a.sorted_counts(), b.sorted_counts());
        }

        #[test]
        fn l1_symmetric_and_triangle(
            a in prop::collection::vec(0u32..20, 20),
            b in prop::collection::vec(0u32..20, 20),
            c in prop::collection::vec(0u32..20, 20),
        ) {
            let (a, b, c) = (quarter(&a), quarter(&b), quarter(&c));
            let ab = l1_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, l1_distance(&b, &a).unwrap());
            prop_assert!(l1_distance(&a, &c).unwrap() <= ab + l1_distance(&b, &c).unwrap() + 1e-15);
        }

        #[test]
        fn tau_matches_pairwise_count(rows in prop::collection::vec((0u8..8, 0u8..8), 3..30)) {
            let x: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
            let reference = tau_reference(&x, &y);
            match kendall_tau(&x, &y) {
                Ok(t) => prop_assert!((t - reference).abs() < 1e-12),
                Err(_) => prop_assert!(reference.is_nan()),
            }
        }
    }
}
