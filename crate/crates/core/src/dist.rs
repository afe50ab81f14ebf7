//! Parametric gain distributions: densities, CDFs, quantiles and sampling.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Exponential,
    LogLogistic,
    Burr,
    LogNormal,
    Nakagami,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Exponential,
        Family::LogLogistic,
        Family::Burr,
        Family::LogNormal,
        Family::Nakagami,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::LogLogistic => "log_logistic",
            Family::Burr => "burr",
            Family::LogNormal => "log_normal",
            Family::Nakagami => "nakagami",
        }
    }

    /// Parameter names in serialization order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Exponential => &["rate"],
            Family::LogLogistic => &["a", "b"],
            Family::Burr => &["c", "k"],
            Family::LogNormal => &["sigma", "mu"],
            Family::Nakagami => &["m", "g"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', ' '], "_");
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == key || f.as_str().replace('_', "") == key)
            .ok_or_else(|| Error::invalid(format!("unknown distribution family `{s}`")))
    }
}

/// A distribution law with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// Density `rate exp(-rate y)`.
    Exponential { rate: f64 },
    /// Density `(b/a)(y/a)^(b-1) / (1 + (y/a)^b)^2`; `a` is the median.
    LogLogistic { a: f64, b: f64 },
    /// Density `c k y^(c-1) / (1 + y^c)^(k+1)`.
    Burr { c: f64, k: f64 },
    /// `ln y ~ N(mu, sigma^2)`.
    LogNormal { sigma: f64, mu: f64 },
    /// Density `2 m^m / (Gamma(m) g^m) y^(2m-1) exp(-m y^2 / g)`.
    Nakagami { m: f64, g: f64 },
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

fn std_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Value of `y^(e)` style density factors at `y = 0`: zero when the power is
/// positive, `at_one` when it vanishes, and zero (guarded) when it diverges.
fn density_at_zero(power: f64, at_one: f64) -> f64 {
    if power == 0.0 {
        at_one
    } else {
        0.0
    }
}

impl Law {
    pub fn family(&self) -> Family {
        match self {
            Law::Exponential { .. } => Family::Exponential,
            Law::LogLogistic { .. } => Family::LogLogistic,
            Law::Burr { .. } => Family::Burr,
            Law::LogNormal { .. } => Family::LogNormal,
            Law::Nakagami { .. } => Family::Nakagami,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Law::Exponential { rate } => vec![rate],
            Law::LogLogistic { a, b } => vec![a, b],
            Law::Burr { c, k } => vec![c, k],
            Law::LogNormal { sigma, mu } => vec![sigma, mu],
            Law::Nakagami { m, g } => vec![m, g],
        }
    }

    pub fn from_params(family: Family, p: &[f64]) -> Result<Law> {
        if p.len() != family.param_names().len() {
            return Err(Error::invalid(format!(
                "{family} takes {} parameters, got {}",
                family.param_names().len(),
                p.len()
            )));
        }
        let law = match family {
            Family::Exponential => Law::Exponential { rate: p[0] },
            Family::LogLogistic => Law::LogLogistic { a: p[0], b: p[1] },
            Family::Burr => Law::Burr { c: p[0], k: p[1] },
            Family::LogNormal => Law::LogNormal {
                sigma: p[0],
                mu: p[1],
            },
            Family::Nakagami => Law::Nakagami { m: p[0], g: p[1] },
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.params();
        let names = self.family().param_names();
        for (i, (name, v)) in names.iter().zip(&p).enumerate() {
            // log-normal location may take any real value
            let must_be_positive = !(matches!(self, Law::LogNormal { .. }) && i == 1);
            if !v.is_finite() || (must_be_positive && *v <= 0.0) {
                return Err(Error::invalid(format!(
                    "{} parameter `{name}` must be {}finite, got {v}",
                    self.family(),
                    if must_be_positive {
                        "positive and "
                    } else {
                        ""
                    }
                )));
            }
        }
        Ok(())
    }

    /// Natural log of the density at `y > 0`.
    pub fn ln_pdf(&self, y: f64) -> f64 {
        let ly = y.ln();
        match *self {
            Law::Exponential { rate } => rate.ln() - rate * y,
            Law::LogLogistic { a, b } => {
                let z = b * (ly - a.ln());
                b.ln() + z - ly - 2.0 * softplus(z)
            }
            Law::Burr { c, k } => c.ln() + k.ln() + (c - 1.0) * ly - (k + 1.0) * softplus(c * ly),
            Law::LogNormal { sigma, mu } => {
                let z = (ly - mu) / sigma;
                -ly - sigma.ln() - 0.5 * (2.0 * PI).ln() - 0.5 * z * z
            }
            Law::Nakagami { m, g } => {
                std::f64::consts::LN_2 + m * (m.ln() - g.ln()) - ln_gamma(m) + (2.0 * m - 1.0) * ly
                    - m * y * y / g
            }
        }
    }

    /// Density at `y >= 0`; unchecked.
    pub fn density(&self, y: f64) -> f64 {
        if y > 0.0 {
            if y.is_infinite() {
                return 0.0;
            }
            return self.ln_pdf(y).exp();
        }
        match *self {
            Law::Exponential { rate } => rate,
            Law::LogLogistic { a, b } => density_at_zero(b - 1.0, 1.0 / a),
            Law::Burr { c, k } => density_at_zero(c - 1.0, k),
            Law::LogNormal { .. } => 0.0,
            Law::Nakagami { m, g } => density_at_zero(
                2.0 * m - 1.0,
                (2.0 * (m / g).sqrt()) / statrs::function::gamma::gamma(m),
            ),
        }
    }

    /// CDF at `y >= 0`; unchecked.
    pub fn distribution(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y.is_infinite() {
            return 1.0;
        }
        match *self {
            Law::Exponential { rate } => -(-rate * y).exp_m1(),
            Law::LogLogistic { a, b } => 1.0 / (1.0 + (-(b * (y.ln() - a.ln()))).exp()),
            Law::Burr { c, k } => -(-k * softplus(c * y.ln())).exp_m1(),
            Law::LogNormal { sigma, mu } => std_normal_cdf((y.ln() - mu) / sigma),
            Law::Nakagami { m, g } => gamma_lr(m, m * y * y / g),
        }
    }

    /// Inverse CDF for `p` in `(0, 1)`. Nakagami has no closed form and
    /// is inverted by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Law::Exponential { rate } => -(-p).ln_1p() / rate,
            Law::LogLogistic { a, b } => a * (p / (1.0 - p)).powf(1.0 / b),
            Law::Burr { c, k } => ((-(-p).ln_1p() / k).exp_m1()).powf(1.0 / c),
            Law::LogNormal { sigma, mu } => (mu + sigma * std_normal_quantile(p)).exp(),
            Law::Nakagami { .. } => {
                // bisection in log space
                let (mut lo, mut hi) = (-700.0f64, 700.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.distribution(mid.exp()) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }

    pub fn median(&self) -> f64 {
        match *self {
            Law::LogLogistic { a, .. } => a,
            Law::LogNormal { mu, .. } => mu.exp(),
            _ => self.quantile(0.5),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Law::Nakagami { m, g } => {
                let omega = Gamma::new(m, g / m)
                    .expect("validated parameters")
                    .sample(rng);
                omega.sqrt()
            }
            _ => {
                let u: f64 = rng.random();
                // open interval keeps the quantile finite
                let u = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                self.quantile(u)
            }
        }
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + e^-x)`.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A fitted (or published) gain distribution with an optional upper support
/// cap used by the coverage integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRecord", into = "DistRecord")]
pub struct FittedDist {
    pub law: Law,
    pub truncation_cap: Option<f64>,
}

impl FittedDist {
    pub fn new(law: Law, truncation_cap: Option<f64>) -> Result<Self> {
        law.validate()?;
        if let Some(cap) = truncation_cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::invalid(format!(
                    "truncation cap must be positive, got {cap}"
                )));
            }
        }
        Ok(FittedDist {
            law,
            truncation_cap,
        })
    }

    pub fn uncapped(law: Law) -> Result<Self> {
        FittedDist::new(law, None)
    }

    pub fn capped(law: Law, cap: f64) -> Result<Self> {
        FittedDist::new(law, Some(cap))
    }

    pub fn with_cap(self, cap: Option<f64>) -> Result<Self> {
        FittedDist::new(self.law, cap)
    }

    pub fn family(&self) -> Family {
        self.law.family()
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        Ok(self.law.density(y))
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        check_support(y)?;
        Ok(self.law.distribution(y))
    }

    /// Probability mass above the cap (zero when uncapped).
    pub fn tail_mass(&self) -> f64 {
        self.truncation_cap
            .map(|cap| 1.0 - self.law.distribution(cap))
            .unwrap_or(0.0)
    }
}

/// Evaluates a density at `y`; wraps [`FittedDist::pdf`].
pub fn pdf_eval(dist: &FittedDist, y: f64) -> Result<f64> {
    dist.pdf(y)
}

/// Evaluates a CDF at `y`; wraps [`FittedDist::cdf`].
pub fn cdf_eval(dist: &FittedDist, y: f64) -> Result<f64> {
    dist.cdf(y)
}

fn check_support(y: f64) -> Result<()> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::invalid(format!("gain must be >= 0, got {y}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistRecord {
    family: Family,
    params: BTreeMap<String, f64>,
    truncation_cap: Option<f64>,
}

impl TryFrom<DistRecord> for FittedDist {
    type Error = Error;

    fn try_from(r: DistRecord) -> Result<Self> {
        let names = r.family.param_names();
        let mut values = Vec::with_capacity(names.len());
        for name in names {
            let v = r.params.get(*name).ok_or_else(|| {
                Error::invalid(format!("{} is missing parameter `{name}`", r.family))
            })?;
            values.push(*v);
        }
        if let Some(extra) = r.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::invalid(format!(
                "{} has no parameter `{extra}`",
                r.family
            )));
        }
        FittedDist::new(Law::from_params(r.family, &values)?, r.truncation_cap)
    }
}

impl From<FittedDist> for DistRecord {
    fn from(d: FittedDist) -> Self {
        let family = d.family();
        let params = family
            .param_names()
            .iter()
            .map(|n| n.to_string())
            .zip(d.law.params())
            .collect();
        DistRecord {
            family,
            params,
            truncation_cap: d.truncation_cap,
        }
    }
}

impl fmt::Display for FittedDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family())?;
        for (i, (n, v)) in self
            .family()
            .param_names()
            .iter()
            .zip(self.law.params())
            .enumerate()
        {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}={v}")?;
        }
        if let Some(cap) = self.truncation_cap {
            write!(f, "; cap={cap}")?;
        }
        f.write_str(")")
    }
}
