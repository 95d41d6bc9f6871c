//! Nonparametric Archimedean fit used as the resampling model under the
//! trivariate fan hypothesis.
//!
//! The generator is the Williamson 3-transform of a discrete radial law with
//! one atom per observation,
//! `psi_n(x) = (1/n) sum_m (1 - x / r_m)_+^2`, and the atoms are chosen so
//! that `psi_n(r_m) = w_(m)` for the ordered trivariate pseudo-observations.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::kendall::KendallSample;

/// Residuals up to this are reported as converged.
pub const CONVERGED_RESIDUAL: f64 = 1e-8;
/// Largest residual accepted as a usable fit.
pub const FALLBACK_RESIDUAL: f64 = 1e-3;
/// Smallest sample size accepted by [`fit_radial`].
pub const MIN_OBSERVATIONS: usize = 10;

/// A fitted radial law and the generator it implies.
#[derive(Debug, Clone)]
pub struct RadialFit {
    n: usize,
    /// Distinct atoms in increasing order, with their multiplicities.
    atoms: Vec<f64>,
    weights: Vec<u32>,
    /// Suffix sums over `atoms[k..]` of `weight`, `weight / r`, `weight / r^2`.
    suffix: Vec<[f64; 3]>,
    residual: f64,
}

impl RadialFit {
    /// Builds the fit from atoms with multiplicities; `atoms` must be
    /// positive and strictly increasing.
    fn from_atoms(atoms: Vec<f64>, weights: Vec<u32>) -> RadialFit {
        let n = weights.iter().map(|&k| k as usize).sum();
        let mut suffix = vec![[0.0; 3]; atoms.len() + 1];
        for k in (0..atoms.len()).rev() {
            let (w, r) = (weights[k] as f64, atoms[k]);
            suffix[k] = [suffix[k + 1][0] + w, suffix[k + 1][1] + w / r, suffix[k + 1][2] + w / (r * r)];
        }
        RadialFit { n, atoms, weights, suffix, residual: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// All `n` atoms in increasing order.
    pub fn atoms(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .zip(&self.weights)
            .flat_map(|(&r, &k)| std::iter::repeat_n(r, k as usize))
            .collect()
    }

    /// `sup_m |psi_n(r_m) - w_(m)|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn converged(&self) -> bool {
        self.residual <= CONVERGED_RESIDUAL
    }

    /// Largest atom; `psi_n` vanishes from here on.
    pub fn r_max(&self) -> f64 {
        *self.atoms.last().unwrap()
    }

    fn direct(&self, x: f64, from: usize) -> (f64, f64) {
        let (mut value, mut slope) = (0.0, 0.0);
        for k in from..self.atoms.len() {
            let (w, r) = (self.weights[k] as f64, self.atoms[k]);
            let t = 1.0 - x / r;
            value += w * t * t;
            slope += w * t / r;
        }
        (value, slope)
    }

    /// `n psi_n(x)` and `-n psi_n'(x) / 2`.
    fn scaled(&self, x: f64) -> (f64, f64) {
        let from = self.atoms.partition_point(|&r| r <= x);
        let [c, s1, s2] = self.suffix[from];
        let value = c - 2.0 * x * s1 + x * x * s2;
        let slope = s1 - x * s2;
        if value < 1e-6 * c || slope < 1e-6 * s1 {
            self.direct(x, from)
        } else {
            (value, slope)
        }
    }

    /// `psi_n(x)` for `x >= 0`.
    pub fn psi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (self.scaled(x).0 / self.n as f64).clamp(0.0, 1.0)
    }

    /// Inverse of `psi_n` on `(0, 1]`, by bisection on `[0, r_max]`.
    pub fn psi_inv(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("psi_inv needs u in (0, 1], got {u}")));
        }
        if u == 1.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0, self.r_max());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.psi(mid) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Bivariate Kendall distribution function of the copula generated by
    /// `psi_n`: `K(w) = psi_n(x) - x psi_n'(x)` at `x = psi_n^-1(w)`.
    pub fn implied_kendall_cdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        if w >= 1.0 {
            return 1.0;
        }
        let x = self.psi_inv(w).expect("w is inside (0, 1)");
        let (value, slope) = self.scaled(x);
        ((value + 2.0 * x * slope) / self.n as f64).clamp(w, 1.0)
    }

    /// Draws one atom uniformly, i.e. from the fitted radial law.
    pub(crate) fn draw_atom<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let target = rng.random_range(0..self.n) as f64 + 0.5;
        // suffix[k][0] counts atoms at index >= k; cumulative from the top.
        let k = self.suffix.partition_point(|s| s[0] > target);
        self.atoms[k - 1]
    }
}

/// Fits the radial law to ordered trivariate pseudo-observations.
///
/// Atoms are solved exactly group by group, from the smallest
/// pseudo-observation upward: the group at `w = 0` is pinned at `r = 1`
/// (any value works, `psi_n` vanishes at its largest atom, so this only fixes
/// the scale), and each further group solves
/// `sum_{i<j} p_i (1 - x / r_i)^2 = w_j`, a quadratic in `x` whose smaller
/// root lies below every atom already placed.
pub fn fit_radial(ks: &KendallSample) -> Result<RadialFit> {
    let n = ks.n();
    if n < MIN_OBSERVATIONS {
        return Err(Error::Domain(format!(
            "radial fit needs at least {MIN_OBSERVATIONS} observations, got {n}"
        )));
    }
    let mut groups: Vec<(u32, u32)> = Vec::new();
    for &c in ks.sorted_counts() {
        match groups.last_mut() {
            Some((value, k)) if *value == c => *k += 1,
            _ => groups.push((c, 1)),
        }
    }
    let scale = (n + 1) as f64;
    let nf = n as f64;
    // Radii in decreasing order, aligned with `groups`.
    let mut radii = Vec::with_capacity(groups.len());
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for (j, &(count, k)) in groups.iter().enumerate() {
        let w = count as f64 / scale;
        let r = if j == 0 {
            if count != 0 {
                return Err(Error::Domain(
                    "the smallest pseudo-observation must be zero".into(),
                ));
            }
            1.0
        } else {
            let gap = a - w;
            let disc = (b * b - c * gap).max(0.0);
            let mut x = gap / (b + disc.sqrt());
            // One Newton step on the exact sums removes accumulated rounding.
            let (mut f, mut df) = (-w, 0.0);
            for (i, &ri) in radii.iter().enumerate() {
                let p = groups[i].1 as f64 / nf;
                let t = 1.0 - x / ri;
                f += p * t * t;
                df -= 2.0 * p * t / ri;
            }
            if df < 0.0 {
                let polished = x - f / df;
                if polished > 0.0 && polished < *radii.last().unwrap() {
                    x = polished;
                }
            }
            x
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::FitFailed { residual: f64::INFINITY });
        }
        radii.push(r);
        let p = k as f64 / nf;
        a += p;
        b += p / r;
        c += p / (r * r);
    }
    let atoms: Vec<f64> = radii.iter().rev().copied().collect();
    let weights: Vec<u32> = groups.iter().rev().map(|g| g.1).collect();
    let mut fit = RadialFit::from_atoms(atoms, weights);
    fit.residual = groups
        .iter()
        .zip(&radii)
        .map(|(&(count, _), &r)| (fit.psi(r) - count as f64 / scale).abs())
        .fold(0.0, f64::max);
    if fit.residual > FALLBACK_RESIDUAL || fit.residual.is_nan() {
        return Err(Error::FitFailed { residual: fit.residual });
    }
    Ok(fit)
}

/// One draw of the latent radial decomposition: `R * S_i` for `R` from the
/// fitted law and `S` uniform on the 2-simplex.
pub(crate) fn latent_row<R: Rng + ?Sized>(fit: &RadialFit, rng: &mut R) -> [f64; 3] {
    let r = fit.draw_atom(rng);
    let e: [f64; 3] = [Exp1.sample(rng), Exp1.sample(rng), Exp1.sample(rng)];
    let total = e[0] + e[1] + e[2];
    [r * e[0] / total, r * e[1] / total, r * e[2] / total]
}

/// `n` rows from the fitted trivariate Archimedean copula, column-major:
/// `U_i = psi_n(R * S_i)`.
pub fn h0_resample<R: Rng + ?Sized>(fit: &RadialFit, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let row = latent_row(fit, rng);
        for (col, x) in cols.iter_mut().zip(row) {
            col.push(fit.psi(x));
        }
    }
    cols
}
