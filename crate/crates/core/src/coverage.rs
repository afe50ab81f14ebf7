//! Closed-form SIR coverage of a Poisson mmWave network: path loss, LoS
//! probability, the association-distance density, interference Laplace
//! functionals and the outer coverage integral.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Family, FittedDist, Law};
use crate::error::{Error, Result};
use crate::params::{LinkState, SystemParams};
use crate::quadrature::Integrator;

/// Mass of the association density left beyond the outer integration limit.
pub const ASSOCIATION_TAIL: f64 = 1e-6;

/// `beta_j r^-alpha_j`.
pub fn path_loss(r: f64, state: LinkState, params: &SystemParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("distance must be > 0, got {r}")));
    }
    Ok(gain_at(r, state, params))
}

fn gain_at(r: f64, state: LinkState, params: &SystemParams) -> f64 {
    params.beta(state) * r.powf(-params.alpha(state))
}

/// LoS probability `exp(-los_decay r)`.
pub fn p_los(r: f64, params: &SystemParams) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::invalid(format!("distance must be >= 0, got {r}")));
    }
    Ok((-params.los_decay * r).exp())
}

/// Probability that a link of length `r` is in `state`.
pub fn state_probability(r: f64, state: LinkState, params: &SystemParams) -> f64 {
    let los = (-params.los_decay * r).exp();
    match state {
        LinkState::Los => los,
        LinkState::Nlos => -(-params.los_decay * r).exp_m1(),
    }
}

/// Distance at which a state-`j` link has the same path loss as a state-`i`
/// link of length `r`: `(beta_j r^alpha_i / beta_i)^(1/alpha_j)`.
pub fn equal_pathloss_boundary(
    r: f64,
    i: LinkState,
    j: LinkState,
    params: &SystemParams,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("distance must be > 0, got {r}")));
    }
    Ok(boundary(r, i, j, params))
}

fn boundary(r: f64, i: LinkState, j: LinkState, params: &SystemParams) -> f64 {
    if i == j {
        return r;
    }
    let ln_b =
        (params.beta(j).ln() - params.beta(i).ln() + params.alpha(i) * r.ln()) / params.alpha(j);
    ln_b.exp()
}

/// `1 - e^-u (1 + u)`, accurate for small `u`.
fn gamma2_lower(u: f64) -> f64 {
    if u < 1e-3 {
        // u^2/2 - u^3/3 + u^4/8 - ...
        u * u * (0.5 - u / 3.0 + u * u / 8.0)
    } else {
        -(-u).exp_m1() - u * (-u).exp()
    }
}

/// `int_0^x v p_state(v) dv` in closed form.
pub fn state_moment(x: f64, state: LinkState, params: &SystemParams) -> f64 {
    let c = params.los_decay;
    let los = gamma2_lower(c * x) / (c * c);
    match state {
        LinkState::Los => los,
        LinkState::Nlos => 0.5 * x * x - los,
    }
}

/// Density of the association distance jointly with the serving link being in
/// state `i`.
pub fn association_pdf(r: f64, i: LinkState, params: &SystemParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("distance must be > 0, got {r}")));
    }
    Ok(association_density(r, i, params))
}

fn association_density(r: f64, i: LinkState, params: &SystemParams) -> f64 {
    let lambda = params.bs_density;
    let b = boundary(r, i, i.opposite(), params);
    let void = state_moment(r, i, params) + state_moment(b, i.opposite(), params);
    2.0 * PI * lambda * state_probability(r, i, params) * r * (-2.0 * PI * lambda * void).exp()
}

fn mass_integrator() -> Integrator {
    Integrator::new(1e-12, 1e-10).with_max_intervals(2000)
}

/// Panels for radial integrals: a geometric ladder from `hi * 2^-20` to `hi`.
fn radial_breaks(hi: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend((0..=20).rev().map(|k| hi * 0.5f64.powi(k)));
    v
}

/// `Pr[associated in state i, association distance <= r]`.
pub fn association_mass(r: f64, i: LinkState, params: &SystemParams) -> f64 {
    mass_integrator()
        .integrate_panels(&|x| association_density(x, i, params), &radial_breaks(r))
        .value
}

/// Probability that the serving link is in state `i`.
pub fn association_probability(i: LinkState, params: &SystemParams) -> f64 {
    let hi = association_radius(params, 1e-12);
    association_mass(hi, i, params)
}

/// Smallest radius whose association CDF leaves at most `tail` of the mass
/// outside, by bisection.
pub fn association_radius(params: &SystemParams, tail: f64) -> f64 {
    let cdf = |r: f64| {
        LinkState::ALL
            .iter()
            .map(|&i| association_mass(r, i, params))
            .sum::<f64>()
    };
    let mut hi = 1.0 / params.bs_density.sqrt();
    while 1.0 - cdf(hi) > tail {
        hi *= 2.0;
        if hi > 1e9 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - cdf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 * hi {
            break;
        }
    }
    hi
}

/// The truncated interference transform
/// `Lambda(t) = int_0^cap (1 - exp(-t g)) f(g) dg`, tabulated on a log grid.
#[derive(Debug, Clone)]
pub struct TruncatedLaplace {
    law: Law,
    u_lo: f64,
    u_hi: f64,
    /// First and second truncated moments over `(0, cap]`.
    m1: f64,
    m2: f64,
    x0: f64,
    step: f64,
    ln_value: Vec<f64>,
    ln_slope: Vec<f64>,
}

const TABLE_STEP: f64 = 0.02;
const TABLE_T_MAX: f64 = 1e6;

impl TruncatedLaplace {
    pub fn new(gx: &FittedDist) -> Result<Self> {
        let cap = gx.truncation_cap.ok_or_else(|| {
            Error::InvalidConfiguration(format!(
                "misaligned-gain law {} needs a finite truncation cap for the interference integral",
                gx.family()
            ))
        })?;
        let law = gx.law;
        let u_hi = cap.ln();
        let mut u_lo = u_hi - 12.0 * std::f64::consts::LN_10;
        while law.distribution(u_lo.exp()) > 1e-12 && u_lo > u_hi - 300.0 {
            u_lo -= std::f64::consts::LN_10;
        }
        let mut table = TruncatedLaplace {
            law,
            u_lo,
            u_hi,
            m1: 0.0,
            m2: 0.0,
            x0: 0.0,
            step: TABLE_STEP,
            ln_value: Vec::new(),
            ln_slope: Vec::new(),
        };
        table.m1 = table.moment(1);
        table.m2 = table.moment(2);
        if !(table.m1 > 0.0) {
            return Err(Error::InvalidConfiguration(format!(
                "{gx} has no mass below its cap"
            )));
        }
        let t_lo = 1e-8 / cap;
        table.x0 = t_lo.ln();
        let n = ((TABLE_T_MAX.ln() - table.x0) / TABLE_STEP).ceil() as usize + 1;
        let nodes: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|k| {
                let t = (table.x0 + k as f64 * TABLE_STEP).exp();
                let v = table.direct(t);
                let d = table.direct_derivative(t);
                (v.ln(), t * d / v)
            })
            .collect();
        (table.ln_value, table.ln_slope) = nodes.into_iter().unzip();
        Ok(table)
    }

    fn panels(&self, pivot: Option<f64>) -> Vec<f64> {
        let mut breaks: Vec<f64> = (0..=24)
            .map(|k| self.u_lo + (self.u_hi - self.u_lo) * k as f64 / 24.0)
            .collect();
        if let Some(p) = pivot {
            if p > self.u_lo && p < self.u_hi {
                breaks.push(p);
                breaks.sort_by(f64::total_cmp);
            }
        }
        breaks
    }

    fn integrate_log<F: Fn(f64) -> f64>(&self, f: F, pivot: Option<f64>) -> f64 {
        let law = self.law;
        Integrator::new(0.0, 1e-12)
            .with_max_intervals(4000)
            .integrate_panels(
                &|u: f64| {
                    let g = u.exp();
                    f(g) * law.density(g) * g
                },
                &self.panels(pivot),
            )
            .value
    }

    fn moment(&self, k: i32) -> f64 {
        self.integrate_log(|g| g.powi(k), None)
    }

    /// Direct quadrature of `Lambda(t)`.
    pub fn direct(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.integrate_log(|g| -(-t * g).exp_m1(), Some(-t.ln()))
    }

    fn direct_derivative(&self, t: f64) -> f64 {
        self.integrate_log(|g| g * (-t * g).exp(), Some(-t.ln()))
    }

    /// Upper end of the support.
    pub fn cap(&self) -> f64 {
        self.u_hi.exp()
    }

    /// `int_0^cap g f(g) dg`.
    pub fn truncated_mean(&self) -> f64 {
        self.m1
    }

    /// `Lambda(t)` from the table (cubic Hermite in log-log coordinates), the
    /// two-term series below the table and direct quadrature above it.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t.ln();
        if x < self.x0 {
            return t * self.m1 - 0.5 * t * t * self.m2;
        }
        let pos = (x - self.x0) / self.step;
        let k = pos.floor() as usize;
        if k + 1 >= self.ln_value.len() {
            return self.direct(t);
        }
        let s = pos - k as f64;
        let (y0, y1) = (self.ln_value[k], self.ln_value[k + 1]);
        let (d0, d1) = (
            self.ln_slope[k] * self.step,
            self.ln_slope[k + 1] * self.step,
        );
        let s2 = s * s;
        let s3 = s2 * s;
        let y = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        y.exp()
    }
}

/// Precomputed analytic coverage model for one misaligned-gain law, aligned
/// rate and parameter set.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    params: SystemParams,
    gx: FittedDist,
    mu_o: f64,
    laplace: TruncatedLaplace,
    r_max: f64,
}

impl CoverageModel {
    pub fn new(gx: &FittedDist, mu_o: f64, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        if !(mu_o.is_finite() && mu_o > 0.0) {
            return Err(Error::invalid(format!(
                "aligned-gain rate must be > 0, got {mu_o}"
            )));
        }
        if params.alpha_nlos <= 2.0 {
            return Err(Error::InvalidConfiguration(format!(
                "NLoS interference diverges for alpha_nlos = {} <= 2",
                params.alpha_nlos
            )));
        }
        let laplace = TruncatedLaplace::new(gx)?;
        Ok(CoverageModel {
            params: params.clone(),
            gx: *gx,
            mu_o,
            laplace,
            r_max: association_radius(params, ASSOCIATION_TAIL),
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn gx(&self) -> &FittedDist {
        &self.gx
    }

    pub fn mu_o(&self) -> f64 {
        self.mu_o
    }

    /// Outer integration limit of the association distance.
    pub fn radius_limit(&self) -> f64 {
        self.r_max
    }

    /// `int_B^inf v p_j(v) Lambda(mu_o T l_j(v) / l_j(B)) dv` with `B` the
    /// equal-path-loss boundary; substituting `v = B y` pins the argument at
    /// `v = B` to `mu_o T`.
    fn exposure(&self, t: f64, b: f64, j: LinkState) -> f64 {
        let t0 = self.mu_o * t;
        let alpha = self.params.alpha(j);
        let c = self.params.los_decay;
        let cap = self.laplace.cap();
        let w_linear = ((t0 * cap / 1e-8).ln() / alpha).max(0.0);
        let w_max = match j {
            LinkState::Los => (60.0 / (c * b)).ln(),
            LinkState::Nlos => w_linear.max((40.0 / (c * b)).ln()).max(1.0),
        };
        if w_max <= 0.0 {
            return 0.0;
        }
        let integrand = |w: f64| {
            let y = w.exp();
            y * y
                * state_probability(b * y, j, &self.params)
                * self.laplace.eval(t0 * (-alpha * w).exp())
        };
        let mut breaks = vec![0.0];
        let mut w = 0.25;
        while w < w_max {
            breaks.push(w);
            w *= 2.0;
        }
        breaks.push(w_max);
        let body = Integrator::new(0.0, 1e-10)
            .with_max_intervals(1000)
            .integrate_panels(&integrand, &breaks)
            .value;
        let tail = match j {
            LinkState::Los => 0.0,
            // linear regime of Lambda with p_N = 1
            LinkState::Nlos => {
                self.laplace.truncated_mean() * t0 * ((2.0 - alpha) * w_max).exp() / (alpha - 2.0)
            }
        };
        b * b * (body + tail)
    }

    /// Laplace functional of the state-`j` interference at
    /// `s = mu_o T / l_i(r)` for a state-`i` server at distance `r`.
    pub fn laplace_interference(&self, t: f64, r: f64, i: LinkState, j: LinkState) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::invalid(format!("threshold must be >= 0, got {t}")));
        }
        if !(r > 0.0) {
            return Err(Error::invalid(format!("distance must be > 0, got {r}")));
        }
        Ok(self.laplace_unchecked(t, r, i, j))
    }

    fn laplace_unchecked(&self, t: f64, r: f64, i: LinkState, j: LinkState) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        let b = boundary(r, i, j, &self.params);
        (-2.0 * PI * self.params.bs_density * self.exposure(t, b, j)).exp()
    }

    /// Joint probability of coverage and a state-`i` serving link.
    pub fn coverage_given_state(&self, t: f64, i: LinkState) -> f64 {
        let integrand = |r: f64| {
            let f = association_density(r, i, &self.params);
            if f == 0.0 {
                return 0.0;
            }
            f * self.laplace_unchecked(t, r, i, LinkState::Los)
                * self.laplace_unchecked(t, r, i, LinkState::Nlos)
        };
        Integrator::new(1e-7, 1e-8)
            .with_max_intervals(400)
            .integrate_panels(&integrand, &radial_breaks(self.r_max))
            .value
    }

    /// `Pr[SIR >= t]` for a linear threshold.
    pub fn coverage(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::invalid(format!("threshold must be >= 0, got {t}")));
        }
        let c: f64 = LinkState::ALL
            .iter()
            .map(|&i| self.coverage_given_state(t, i))
            .sum();
        Ok(c.clamp(0.0, 1.0))
    }

    /// Coverage on a dB threshold grid.
    pub fn curve(&self, thresholds_db: &[f64]) -> Result<CoverageCurve> {
        if thresholds_db.is_empty() {
            return Err(Error::invalid("threshold grid is empty"));
        }
        let coverages = thresholds_db
            .par_iter()
            .map(|&db| self.coverage(db_to_linear(db)))
            .collect::<Result<Vec<_>>>()?;
        CoverageCurve::new(
            thresholds_db.to_vec(),
            coverages,
            Method::Analytic,
            self.gx.family(),
            self.params.clone(),
            None,
        )
    }
}

/// Nested-quadrature evaluation of the Laplace functional in its original
/// order (gain outside, distance inside), without the transform table.
/// Slow; kept as an independent reference.
pub fn laplace_interference_nested(
    t: f64,
    r: f64,
    i: LinkState,
    j: LinkState,
    gx: &FittedDist,
    mu_o: f64,
    params: &SystemParams,
) -> Result<f64> {
    let cap = gx
        .truncation_cap
        .ok_or_else(|| Error::InvalidConfiguration("truncation cap required".into()))?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let b = boundary(r, i, j, params);
    let s = mu_o * t / gain_at(r, i, params);
    let beta = params.beta(j);
    let alpha = params.alpha(j);
    let inner_q = Integrator::new(0.0, 1e-9).with_max_intervals(1000);
    let inner = |g: f64| {
        // v = b e^w
        let x = s * g * beta;
        let f = |w: f64| {
            let v = b * w.exp();
            -(-x * v.powf(-alpha)).exp_m1() * v * v * state_probability(v, j, params)
        };
        let w_max = match j {
            LinkState::Los => (80.0 / (params.los_decay * b)).ln().max(1e-3),
            LinkState::Nlos => 60.0,
        };
        let breaks: Vec<f64> = (0..=60).map(|k| w_max * k as f64 / 60.0).collect();
        let mut v = inner_q.integrate_panels(&f, &breaks).value;
        if j == LinkState::Nlos {
            let v_max = b * w_max.exp();
            v += x * v_max.powf(2.0 - alpha) / (alpha - 2.0);
        }
        v
    };
    let law = gx.law;
    let u_hi = cap.ln();
    let u_lo = u_hi - 12.0 * std::f64::consts::LN_10;
    let breaks: Vec<f64> = (0..=24)
        .map(|k| u_lo + (u_hi - u_lo) * k as f64 / 24.0)
        .collect();
    let outer = Integrator::new(0.0, 1e-8)
        .with_max_intervals(1000)
        .integrate_panels(
            &|u: f64| {
                let g = u.exp();
                inner(g) * law.density(g) * g
            },
            &breaks,
        );
    Ok((-2.0 * PI * params.bs_density * outer.value).exp())
}

/// Laplace functional for one configuration; builds a throwaway model.
pub fn laplace_interference(
    t: f64,
    r: f64,
    i: LinkState,
    j: LinkState,
    gx: &FittedDist,
    mu_o: f64,
    params: &SystemParams,
) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid(format!("threshold must be >= 0, got {t}")));
    }
    CoverageModel::new(gx, mu_o, params)?.laplace_interference(t, r, i, j)
}

/// `Pr[SIR >= t]` for a linear threshold; builds a throwaway model.
pub fn coverage_probability(
    t: f64,
    gx: &FittedDist,
    mu_o: f64,
    params: &SystemParams,
) -> Result<f64> {
    CoverageModel::new(gx, mu_o, params)?.coverage(t)
}

/// Analytic coverage curve on a dB grid.
pub fn coverage_curve(
    thresholds_db: &[f64],
    gx: &FittedDist,
    mu_o: f64,
    params: &SystemParams,
) -> Result<CoverageCurve> {
    CoverageModel::new(gx, mu_o, params)?.curve(thresholds_db)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Method::Analytic),
            "monte_carlo" => Ok(Method::MonteCarlo),
            other => Err(Error::invalid(format!("unknown method `{other}`"))),
        }
    }
}

/// Coverage probability against SIR threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub thresholds_db: Vec<f64>,
    pub coverages: Vec<f64>,
    pub method: Method,
    pub gx_family: Family,
    pub params_snapshot: SystemParams,
    /// Per-point standard error, Monte Carlo only.
    pub stderr: Option<Vec<f64>>,
}

/// Slack allowed on monotonicity for quadrature noise.
const MONOTONE_SLACK: f64 = 1e-6;

impl CoverageCurve {
    pub fn new(
        thresholds_db: Vec<f64>,
        mut coverages: Vec<f64>,
        method: Method,
        gx_family: Family,
        params_snapshot: SystemParams,
        stderr: Option<Vec<f64>>,
    ) -> Result<Self> {
        if thresholds_db.len() != coverages.len()
            || stderr.as_ref().is_some_and(|s| s.len() != coverages.len())
        {
            return Err(Error::invalid("coverage curve columns differ in length"));
        }
        if thresholds_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("thresholds must be strictly increasing"));
        }
        if let Some(c) = coverages.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::invalid(format!("coverage {c} outside [0, 1]")));
        }
        for k in 1..coverages.len() {
            let excess = coverages[k] - coverages[k - 1];
            if excess > MONOTONE_SLACK {
                return Err(Error::invalid(format!(
                    "coverage increases by {excess:.3e} between {} and {} dB",
                    thresholds_db[k - 1],
                    thresholds_db[k]
                )));
            }
            if excess > 0.0 {
                coverages[k] = coverages[k - 1];
            }
        }
        Ok(CoverageCurve {
            thresholds_db,
            coverages,
            method,
            gx_family,
            params_snapshot,
            stderr,
        })
    }

    pub fn len(&self) -> usize {
        self.coverages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coverages.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> SystemParams {
        SystemParams::default()
    }

    fn loglogistic() -> FittedDist {
        FittedDist::capped(Law::LogLogistic { a: 1.98, b: 0.551 }, 16384.0).unwrap()
    }

    #[test]
    fn unit_distance_path_loss() {
        assert_relative_eq!(
            path_loss(1.0, LinkState::Los, &p()).unwrap(),
            10f64.powf(-7.2),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            path_loss(1.0, LinkState::Nlos, &p()).unwrap(),
            10f64.powf(-6.14),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            path_loss(100.0, LinkState::Los, &p()).unwrap(),
            10f64.powf(-11.2),
            max_relative = 1e-12
        );
        assert!(path_loss(0.0, LinkState::Los, &p()).is_err());
    }

    #[test]
    fn los_probability() {
        assert_eq!(p_los(0.0, &p()).unwrap(), 1.0);
        assert_relative_eq!(
            p_los(1.0 / 0.0149, &p()).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-12
        );
        assert!(p_los(50.0, &p()).unwrap() > p_los(100.0, &p()).unwrap());
        assert!(p_los(-1.0, &p()).is_err());
    }

    #[test]
    fn boundary_values() {
        for s in LinkState::ALL {
            assert_relative_eq!(equal_pathloss_boundary(123.4, s, s, &p()).unwrap(), 123.4);
        }
        let b = equal_pathloss_boundary(100.0, LinkState::Los, LinkState::Nlos, &p()).unwrap();
        assert_relative_eq!(b, 10f64.powf(5.06 / 2.92), max_relative = 1e-12);
        assert!((b - 54.06).abs() < 0.01);
        let b2 = equal_pathloss_boundary(200.0, LinkState::Los, LinkState::Nlos, &p()).unwrap();
        assert!(b2 > b);
        assert!(equal_pathloss_boundary(0.0, LinkState::Los, LinkState::Nlos, &p()).is_err());
        // equal path loss at the boundary
        let lhs = path_loss(b, LinkState::Nlos, &p()).unwrap();
        let rhs = path_loss(100.0, LinkState::Los, &p()).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn moments_match_quadrature() {
        let q = Integrator::new(1e-14, 1e-13);
        for s in LinkState::ALL {
            for x in [1e-3, 0.5, 30.0, 400.0] {
                let num = q
                    .integrate(|v| v * state_probability(v, s, &p()), 0.0, x)
                    .value;
                assert_relative_eq!(state_moment(x, s, &p()), num, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn association_normalizes() {
        for lambda in [1e-5, 1e-4, 1e-3] {
            let params = SystemParams {
                bs_density: lambda,
                ..p()
            };
            let total: f64 = LinkState::ALL
                .iter()
                .map(|&i| association_probability(i, &params))
                .sum();
            assert!((total - 1.0).abs() < 1e-4, "lambda {lambda}: {total}");
        }
    }

    #[test]
    fn association_density_nonnegative() {
        for k in 1..2000 {
            let r = k as f64 * 0.5;
            for i in LinkState::ALL {
                assert!(association_pdf(r, i, &p()).unwrap() >= 0.0);
            }
        }
        assert!(association_pdf(0.0, LinkState::Los, &p()).is_err());
    }

    #[test]
    fn laplace_requires_cap() {
        let gx = FittedDist::uncapped(Law::LogLogistic { a: 1.98, b: 0.551 }).unwrap();
        let err = laplace_interference(1.0, 50.0, LinkState::Los, LinkState::Los, &gx, 1e-4, &p());
        assert!(matches!(err, Err(Error::InvalidConfiguration(_))));
        assert!(laplace_interference(
            -1.0,
            50.0,
            LinkState::Los,
            LinkState::Los,
            &loglogistic(),
            1e-4,
            &p()
        )
        .is_err());
    }

    #[test]
    fn table_matches_direct_quadrature() {
        for gx in [
            loglogistic(),
            FittedDist::capped(Law::Burr { c: 0.692, k: 0.518 }, 16384.0).unwrap(),
            FittedDist::capped(Law::Nakagami { m: 0.099, g: 50.53 }, 16384.0).unwrap(),
        ] {
            let table = TruncatedLaplace::new(&gx).unwrap();
            for k in 0..200 {
                let t = 10f64.powf(-13.0 + 18.0 * k as f64 / 199.0 + 0.00123);
                let (a, b) = (table.eval(t), table.direct(t));
                assert!(
                    (a - b).abs() <= 1e-8 * b,
                    "{gx}: t={t} table={a} direct={b}"
                );
            }
        }
    }

    #[test]
    fn laplace_at_zero_threshold_is_one() {
        let m = CoverageModel::new(&loglogistic(), 1e-4, &p()).unwrap();
        for i in LinkState::ALL {
            for j in LinkState::ALL {
                assert_eq!(m.laplace_interference(0.0, 40.0, i, j).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn laplace_nonincreasing_in_threshold() {
        let m = CoverageModel::new(&loglogistic(), 1e-4, &p()).unwrap();
        for (i, j) in [
            (LinkState::Los, LinkState::Los),
            (LinkState::Los, LinkState::Nlos),
            (LinkState::Nlos, LinkState::Los),
        ] {
            let mut prev = 1.0;
            for k in 0..20 {
                let t = 10f64.powf(-2.0 + 5.0 * k as f64 / 19.0);
                let v = m.laplace_interference(t, 60.0, i, j).unwrap();
                assert!(v <= prev + 1e-12 && v > 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn laplace_tends_to_one_near_zero_distance() {
        let m = CoverageModel::new(&loglogistic(), 1e-4, &p()).unwrap();
        let v = m
            .laplace_interference(1.0, 1e-3, LinkState::Los, LinkState::Nlos)
            .unwrap();
        assert!(v > 0.999 && v <= 1.0);
    }

    #[test]
    fn table_route_matches_nested_route() {
        let gx = loglogistic();
        let params = p();
        let m = CoverageModel::new(&gx, 1e-4, &params).unwrap();
        for (t, r, i, j) in [
            (1.0, 50.0, LinkState::Los, LinkState::Los),
            (10.0, 80.0, LinkState::Los, LinkState::Nlos),
            (0.3, 150.0, LinkState::Nlos, LinkState::Los),
            (3.0, 120.0, LinkState::Nlos, LinkState::Nlos),
        ] {
            let fast = m.laplace_interference(t, r, i, j).unwrap();
            let slow = laplace_interference_nested(t, r, i, j, &gx, 1e-4, &params).unwrap();
            assert!(
                (fast.ln() - slow.ln()).abs() < 1e-5,
                "{i:?}/{j:?}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn coverage_limits_and_monotonicity() {
        let m = CoverageModel::new(&loglogistic(), 0.814 * 16384f64.powf(-0.927), &p()).unwrap();
        assert!((m.coverage(1e-9).unwrap() - 1.0).abs() < 1e-3);
        let curve = m.curve(&[-10.0, 0.0, 10.0]).unwrap();
        assert_eq!(curve.len(), 3);
        assert!(curve.coverages.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.curve(&[]).is_err());
    }

    #[test]
    fn curve_validation() {
        let ok = CoverageCurve::new(
            vec![0.0, 1.0],
            vec![0.6, 0.6 + 1e-9],
            Method::Analytic,
            Family::Burr,
            p(),
            None,
        )
        .unwrap();
        assert_eq!(ok.coverages[1], 0.6);
        assert!(CoverageCurve::new(
            vec![0.0, 1.0],
            vec![0.5, 0.6],
            Method::Analytic,
            Family::Burr,
            p(),
            None
        )
        .is_err());
        assert!(CoverageCurve::new(
            vec![1.0, 0.0],
            vec![0.5, 0.4],
            Method::Analytic,
            Family::Burr,
            p(),
            None
        )
        .is_err());
    }
}
