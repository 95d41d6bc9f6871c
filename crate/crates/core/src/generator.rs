//! Archimedean generator families.
//!
//! Five one-parameter families are supported. Each provides the generator
//! `psi`, its inverse, the Kendall's tau calibration in both directions and
//! the closed-form bivariate Kendall distribution function
//! `K(w) = w - phi(w) / phi'(w)` with `phi = psi^-1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Amh,
    Clayton,
    Frank,
    Gumbel,
    Joe,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Amh,
        Family::Clayton,
        Family::Frank,
        Family::Gumbel,
        Family::Joe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Amh => "amh",
            Family::Clayton => "clayton",
            Family::Frank => "frank",
            Family::Gumbel => "gumbel",
            Family::Joe => "joe",
        }
    }

    fn admits(self, theta: f64) -> bool {
        if !theta.is_finite() {
            return false;
        }
        match self {
            Family::Amh => (0.0..1.0).contains(&theta),
            Family::Clayton | Family::Frank => theta > 0.0,
            Family::Gumbel | Family::Joe => theta >= 1.0,
        }
    }

    fn range_text(self) -> &'static str {
        match self {
            Family::Amh => "[0, 1)",
            Family::Clayton | Family::Frank => "(0, inf)",
            Family::Gumbel | Family::Joe => "[1, inf)",
        }
    }

    /// Attainable Kendall's tau interval, as `(lower, upper, lower_inclusive)`.
    /// The upper end is never attained.
    fn tau_range(self) -> (f64, f64, bool) {
        match self {
            Family::Amh => (0.0, 1.0 / 3.0, true),
            Family::Clayton | Family::Frank => (0.0, 1.0, false),
            Family::Gumbel | Family::Joe => (0.0, 1.0, true),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A generator family together with an admissible parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGenerator")]
pub struct Generator {
    family: Family,
    theta: f64,
}

#[derive(Deserialize)]
struct RawGenerator {
    family: Family,
    theta: f64,
}

impl TryFrom<RawGenerator> for Generator {
    type Error = Error;

    fn try_from(raw: RawGenerator) -> Result<Self> {
        Generator::new(raw.family, raw.theta)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family, self.theta)
    }
}

impl Generator {
    pub fn new(family: Family, theta: f64) -> Result<Self> {
        if !family.admits(theta) {
            return Err(Error::Domain(format!(
                "{family} requires theta in {}, got {theta}",
                family.range_text()
            )));
        }
        Ok(Generator { family, theta })
    }

    /// The generator of `family` whose Kendall's tau equals `tau`.
    pub fn from_tau(family: Family, tau: f64) -> Result<Self> {
        Generator::new(family, theta_from_tau(family, tau)?)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> f64 {
        tau_unchecked(self.family, self.theta)
    }

    /// Evaluates `psi(x)` for `x >= 0` (including `+inf`).
    pub fn psi(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("psi needs x >= 0, got {x}")));
        }
        Ok(self.psi_unchecked(x))
    }

    pub(crate) fn psi_unchecked(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        let t = self.theta;
        match self.family {
            Family::Amh => (1.0 - t) / (x.exp() - t),
            Family::Clayton => (-x.ln_1p() / t).exp(),
            Family::Frank => {
                let c = -(-t).exp_m1();
                -(-c * (-x).exp()).ln_1p() / t
            }
            Family::Gumbel => (-x.powf(1.0 / t)).exp(),
            Family::Joe => {
                // ln(1 - e^-x), accurate at both ends.
                let ln_one_minus = if x < 1.0 { (-(-x).exp_m1()).ln() } else { (-(-x).exp()).ln_1p() };
                -(ln_one_minus / t).exp_m1()
            }
        }
    }

    /// Evaluates `psi^-1(u)` for `u` in `(0, 1]`.
    pub fn psi_inv(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("psi_inv needs u in (0, 1], got {u}")));
        }
        Ok(self.psi_inv_unchecked(u))
    }

    pub(crate) fn psi_inv_unchecked(&self, u: f64) -> f64 {
        let t = self.theta;
        let x = match self.family {
            Family::Amh => ((1.0 - t) / u + t).ln(),
            Family::Clayton => (-t * u.ln()).exp_m1(),
            Family::Frank => -((-t * u).exp_m1() / (-t).exp_m1()).ln(),
            Family::Gumbel => (-u.ln()).powf(t),
            Family::Joe => -(-(t * (-u).ln_1p()).exp_m1()).ln(),
        };
        x.max(0.0)
    }

    /// Bivariate Kendall distribution function of the Archimedean copula
    /// generated by `self`, for `w` in `(0, 1)`.
    pub fn kendall_cdf(&self, w: f64) -> Result<f64> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::Domain(format!("Kendall CDF needs w in (0, 1), got {w}")));
        }
        Ok(self.kendall_cdf_unchecked(w))
    }

    pub(crate) fn kendall_cdf_unchecked(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        if w >= 1.0 {
            return 1.0;
        }
        let t = self.theta;
        // -phi(w) / phi'(w), written per family to avoid cancellation.
        let correction = match self.family {
            Family::Amh => self.psi_inv_unchecked(w) * w * (1.0 - t + t * w) / (1.0 - t),
            Family::Clayton => w * (1.0 - w.powf(t)) / t,
            Family::Frank => self.psi_inv_unchecked(w) * (t * w).exp_m1() / t,
            Family::Gumbel => -w * w.ln() / t,
            Family::Joe => {
                let one_minus = 1.0 - w;
                let denom = t * one_minus.powf(t - 1.0);
                self.psi_inv_unchecked(w) * (-(t * (-w).ln_1p()).exp_m1()) / denom
            }
        };
        (w + correction).clamp(w, 1.0)
    }
}

/// Kendall's tau of the bivariate copula of `family` at `theta`.
pub fn tau_from_theta(family: Family, theta: f64) -> Result<f64> {
    if !family.admits(theta) {
        return Err(Error::Domain(format!(
            "{family} requires theta in {}, got {theta}",
            family.range_text()
        )));
    }
    Ok(tau_unchecked(family, theta))
}

fn tau_unchecked(family: Family, t: f64) -> f64 {
    match family {
        Family::Amh => amh_tau(t),
        Family::Clayton => t / (t + 2.0),
        Family::Frank => frank_tau(t),
        Family::Gumbel => (t - 1.0) / t,
        Family::Joe => joe_tau(t),
    }
}

fn amh_tau(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if t < 0.5 {
        // (4/3) sum_j t^j / (j (j+1) (j+2)); the closed form cancels badly near 0.
        let mut sum = 0.0;
        let mut power = 1.0;
        for j in 1..200 {
            power *= t;
            let jf = j as f64;
            let term = power / (jf * (jf + 1.0) * (jf + 2.0));
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        return 4.0 / 3.0 * sum;
    }
    let one_minus = 1.0 - t;
    1.0 - 2.0 * (t + one_minus * one_minus * (-t).ln_1p()) / (3.0 * t * t)
}

/// Debye function `D1(theta) = (1/theta) int_0^theta s / (e^s - 1) ds`.
pub fn debye1(theta: f64) -> f64 {
    let integrand = |s: f64| if s == 0.0 { 1.0 } else { s / s.exp_m1() };
    quad::integrate(integrand, 0.0, theta, 1e-12) / theta
}

fn frank_tau(t: f64) -> f64 {
    if t < 0.1 {
        // Bernoulli expansion of the integrand; the next term is below 4e-14 here.
        let t2 = t * t;
        return t / 9.0 - t * t2 / 900.0 + t * t2 * t2 / 52_920.0;
    }
    1.0 + 4.0 * (debye1(t) - 1.0) / t
}

fn joe_tau(t: f64) -> f64 {
    // Terms decrease monotonically like 1/(t^2 k^3). Summation stops once a
    // term drops below 1e-14; the remainder is then close to the integral
    // of the leading behaviour from k + 1/2, which is added back.
    let mut sum = 0.0;
    let mut k = 1.0_f64;
    loop {
        let term = 1.0 / (k * (t * k + 2.0) * (t * (k - 1.0) + 2.0));
        sum += term;
        if term < 1e-14 {
            break;
        }
        k += 1.0;
    }
    let tail_start = k + 0.5;
    sum += 1.0 / (2.0 * t * t * tail_start * tail_start);
    1.0 - 4.0 * sum
}

/// Inverse of [`tau_from_theta`].
pub fn theta_from_tau(family: Family, tau: f64) -> Result<f64> {
    let (lo, hi, lo_inclusive) = family.tau_range();
    let attainable = tau.is_finite() && tau < hi && (tau > lo || (lo_inclusive && tau == lo));
    if !attainable {
        let open = if lo_inclusive { "[" } else { "(" };
        return Err(Error::Range(format!(
            "{family} attains tau in {open}{lo}, {hi}), got {tau}"
        )));
    }
    let theta = match family {
        Family::Clayton => 2.0 * tau / (1.0 - tau),
        Family::Gumbel => 1.0 / (1.0 - tau),
        Family::Amh => {
            if tau == 0.0 {
                0.0
            } else {
                bisect(|t| amh_tau(t) - tau, 0.0, 1.0)
            }
        }
        Family::Frank => {
            let hi = expand_upper(frank_tau, tau, 1.0);
            bisect(|t| frank_tau(t) - tau, 0.0, hi)
        }
        Family::Joe => {
            if tau == 0.0 {
                1.0
            } else {
                let hi = expand_upper(joe_tau, tau, 2.0);
                bisect(|t| joe_tau(t) - tau, 1.0, hi)
            }
        }
    };
    Ok(theta)
}

fn expand_upper(tau_of: fn(f64) -> f64, target: f64, start: f64) -> f64 {
    let mut hi = start;
    while tau_of(hi) <= target {
        hi *= 2.0;
    }
    hi
}

/// Bisection on an increasing function with `f(lo) <= 0 < f(hi)`, run to
/// floating-point resolution.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Whether `inner` may be nested below `outer`: same family and strictly
/// larger parameter. Cross-family pairs are always rejected.
pub fn check_nesting(outer: &Generator, inner: &Generator) -> bool {
    outer.family == inner.family && outer.theta < inner.theta
}
