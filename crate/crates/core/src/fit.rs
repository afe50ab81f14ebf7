//! Maximum-likelihood fitting of gain distributions, Kolmogorov-Smirnov
//! scoring, and the power-law fit of the aligned-gain rate over antenna counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::dist::{sigmoid, softplus, Family, FittedDist, Law};
use crate::error::{Error, Result};
use crate::gains::{GainKind, GainSampleSet};

pub const MIN_FIT_SAMPLES: usize = 100;
pub const GRADIENT_TOL: f64 = 1e-8;
pub const RESTARTS: usize = 5;
const MAX_ITERATIONS: usize = 500;
const RESTART_SEED: u64 = 0x6d6d_7761_7665;

/// Log-transformed, validated sample data shared by every likelihood.
struct Data {
    y: Vec<f64>,
    ly: Vec<f64>,
}

impl Data {
    fn prepare(samples: &[f64]) -> Result<Data> {
        if samples.len() < MIN_FIT_SAMPLES {
            return Err(Error::TooFewSamples {
                needed: MIN_FIT_SAMPLES,
                got: samples.len(),
            });
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index, value });
        }
        if let Some(v) = samples.iter().find(|v| **v < 0.0) {
            return Err(Error::invalid(format!(
                "gain samples must be >= 0, got {v}"
            )));
        }
        let min_pos = samples
            .iter()
            .copied()
            .filter(|v| *v > 0.0)
            .fold(f64::INFINITY, f64::min);
        if !min_pos.is_finite() {
            return Err(Error::invalid("all samples are zero"));
        }
        // zeros (underflow) are pushed just below the smallest positive sample
        let y: Vec<f64> = samples
            .iter()
            .map(|&v| if v > 0.0 { v } else { min_pos * 1e-3 })
            .collect();
        let ly = y.iter().map(|v| v.ln()).collect();
        Ok(Data { y, ly })
    }

    fn n(&self) -> f64 {
        self.y.len() as f64
    }

    fn mean_ln(&self) -> f64 {
        self.ly.iter().sum::<f64>() / self.n()
    }

    fn std_ln(&self) -> f64 {
        let m = self.mean_ln();
        (self.ly.iter().map(|l| (l - m) * (l - m)).sum::<f64>() / self.n()).sqrt()
    }
}

/// Maps the unconstrained optimizer vector to a law. Positive parameters live
/// on a log scale; the log-normal location is left as is.
fn law_from_theta(family: Family, theta: &[f64]) -> Law {
    match family {
        Family::Exponential => Law::Exponential {
            rate: theta[0].exp(),
        },
        Family::LogLogistic => Law::LogLogistic {
            a: theta[0].exp(),
            b: theta[1].exp(),
        },
        Family::Burr => Law::Burr {
            c: theta[0].exp(),
            k: theta[1].exp(),
        },
        Family::LogNormal => Law::LogNormal {
            sigma: theta[0].exp(),
            mu: theta[1],
        },
        Family::Nakagami => Law::Nakagami {
            m: theta[0].exp(),
            g: theta[1].exp(),
        },
    }
}

fn theta_from_law(law: &Law) -> Vec<f64> {
    match *law {
        Law::Exponential { rate } => vec![rate.ln()],
        Law::LogLogistic { a, b } => vec![a.ln(), b.ln()],
        Law::Burr { c, k } => vec![c.ln(), k.ln()],
        Law::LogNormal { sigma, mu } => vec![sigma.ln(), mu],
        Law::Nakagami { m, g } => vec![m.ln(), g.ln()],
    }
}

/// Mean negative log-likelihood and its gradient in optimizer coordinates.
fn objective(family: Family, theta: &[f64], data: &Data) -> (f64, Vec<f64>) {
    let law = law_from_theta(family, theta);
    let mut nll = 0.0;
    let mut grad = vec![0.0; theta.len()];
    match law {
        Law::Exponential { rate } => {
            for &y in &data.y {
                nll -= rate.ln() - rate * y;
                grad[0] -= 1.0 - rate * y;
            }
        }
        Law::LogLogistic { a, b } => {
            let la = a.ln();
            for &ly in &data.ly {
                let z = b * (ly - la);
                nll -= b.ln() + z - ly - 2.0 * softplus(z);
                let dz = 1.0 - 2.0 * sigmoid(z);
                grad[0] -= -b * dz;
                grad[1] -= 1.0 + z * dz;
            }
        }
        Law::Burr { c, k } => {
            let (lc, lk) = (c.ln(), k.ln());
            for &ly in &data.ly {
                let t = c * ly;
                let sp = softplus(t);
                nll -= lc + lk + (c - 1.0) * ly - (k + 1.0) * sp;
                grad[0] -= 1.0 + t * (1.0 - (k + 1.0) * sigmoid(t));
                grad[1] -= 1.0 - k * sp;
            }
        }
        Law::LogNormal { sigma, mu } => {
            let ls = sigma.ln();
            let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
            for &ly in &data.ly {
                let z = (ly - mu) / sigma;
                nll -= -ly - ls - half_ln_2pi - 0.5 * z * z;
                grad[0] -= -1.0 + z * z;
                grad[1] -= z / sigma;
            }
        }
        Law::Nakagami { m, g } => {
            let (lm, lg) = (m.ln(), g.ln());
            let lgam = statrs::function::gamma::ln_gamma(m);
            let psi = digamma(m);
            for (&y, &ly) in data.y.iter().zip(&data.ly) {
                let r = y * y / g;
                nll -= std::f64::consts::LN_2 + m * (lm - lg) - lgam + (2.0 * m - 1.0) * ly - m * r;
                grad[0] -= m * (lm + 1.0 - lg - psi + 2.0 * ly - r);
                grad[1] -= m * (r - 1.0);
            }
        }
    }
    let n = data.n();
    grad.iter_mut().for_each(|g| *g /= n);
    (nll / n, grad)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Minimum {
    theta: Vec<f64>,
    value: f64,
    grad_norm: f64,
}

/// BFGS with a backtracking line search. Near the optimum the objective stops
/// resolving descent, so a step that fails Armijo is still taken when it
/// shrinks the gradient and leaves the objective flat to rounding.
fn bfgs(family: Family, theta0: Vec<f64>, data: &Data) -> Minimum {
    let dim = theta0.len();
    let mut theta = theta0;
    let (mut f, mut g) = objective(family, &theta, data);
    let mut h_inv = identity(dim);
    for _ in 0..MAX_ITERATIONS {
        let gn = norm(&g);
        if !f.is_finite() || gn < GRADIENT_TOL {
            break;
        }
        let mut p: Vec<f64> = (0..dim)
            .map(|i| -(0..dim).map(|j| h_inv[i][j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            h_inv = identity(dim);
            p = g.iter().map(|x| -x).collect();
            slope = -gn * gn;
        }
        // cap the step: parameters are on a log scale
        let pn = norm(&p);
        let mut alpha = if pn > 2.0 { 2.0 / pn } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&p).map(|(t, d)| t + alpha * d).collect();
            let (ft, gt) = objective(family, &trial, data);
            if ft.is_finite() {
                let armijo = ft <= f + 1e-4 * alpha * slope;
                let flat = (ft - f).abs() <= 1e-13 * f.abs().max(1.0) && norm(&gt) < gn;
                if armijo || flat {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((next, f_next, g_next)) = accepted else {
            break;
        };
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..dim)
                .map(|i| (0..dim).map(|j| h_inv[i][j] * yv[j]).sum())
                .collect();
            let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..dim {
                for j in 0..dim {
                    h_inv[i][j] +=
                        ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        theta = next;
        f = f_next;
        g = g_next;
    }
    Minimum {
        grad_norm: norm(&g),
        theta,
        value: f,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn initial_theta(family: Family, data: &Data) -> Vec<f64> {
    let m = data.mean_ln();
    let s = data.std_ln().max(1e-6);
    let logistic_shape = std::f64::consts::PI / (3f64.sqrt() * s);
    match family {
        Family::Exponential => vec![-(data.y.iter().sum::<f64>() / data.n()).ln()],
        Family::LogLogistic => {
            let mut ly = data.ly.clone();
            ly.sort_by(f64::total_cmp);
            vec![ly[ly.len() / 2], logistic_shape.ln()]
        }
        Family::Burr => {
            // profile k given c
            let c = logistic_shape;
            let k = data.n() / data.ly.iter().map(|l| softplus(c * l)).sum::<f64>();
            vec![c.ln(), k.ln()]
        }
        Family::LogNormal => vec![s.ln(), m],
        Family::Nakagami => {
            let omega = data.y.iter().map(|y| y * y).sum::<f64>() / data.n();
            let delta = (omega.ln() - 2.0 * m).max(1e-9);
            let shape = (1.0 + (1.0 + 4.0 * delta / 3.0).sqrt()) / (4.0 * delta);
            vec![shape.ln(), omega.ln()]
        }
    }
}

/// Numerical MLE for any family, with up to [`RESTARTS`] perturbed restarts
/// when the first descent does not reach the gradient tolerance.
pub fn fit_numeric(samples: &[f64], family: Family) -> Result<Law> {
    let data = Data::prepare(samples)?;
    numeric_mle(&data, family)
}

fn numeric_mle(data: &Data, family: Family) -> Result<Law> {
    let start = initial_theta(family, data);
    let mut best = bfgs(family, start.clone(), data);
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let jitter = Normal::new(0.0, 0.5).expect("positive std");
    let mut restarts = 0;
    while best.grad_norm >= GRADIENT_TOL && restarts < RESTARTS {
        restarts += 1;
        let theta: Vec<f64> = start.iter().map(|t| t + jitter.sample(&mut rng)).collect();
        let run = bfgs(family, theta, data);
        if run.grad_norm < GRADIENT_TOL || (run.value.is_finite() && run.value < best.value) {
            best = run;
        }
    }
    if best.grad_norm >= GRADIENT_TOL || !best.value.is_finite() {
        return Err(Error::ConvergenceFailure {
            family: family.to_string(),
            restarts,
            grad_norm: best.grad_norm,
            log_likelihood: -best.value * data.n(),
        });
    }
    let law = law_from_theta(family, &best.theta);
    law.validate()?;
    Ok(law)
}

/// MLE of `family` on raw samples. Exponential and log-normal use their
/// closed forms; the other families are maximized numerically.
pub fn fit_values(samples: &[f64], family: Family) -> Result<Law> {
    let data = Data::prepare(samples)?;
    let law = match family {
        Family::Exponential => Law::Exponential {
            rate: data.n() / data.y.iter().sum::<f64>(),
        },
        Family::LogNormal => Law::LogNormal {
            sigma: data.std_ln(),
            mu: data.mean_ln(),
        },
        _ => return numeric_mle(&data, family),
    };
    law.validate()?;
    Ok(law)
}

/// Fits `family` to a gain sample set. Misaligned fits carry the
/// `n_tx * n_rx` truncation cap; aligned fits are uncapped.
pub fn fit_family(samples: &GainSampleSet, family: Family) -> Result<FittedDist> {
    let law = fit_values(&samples.samples, family)?;
    let cap = match samples.kind {
        GainKind::Aligned => None,
        GainKind::Misaligned => Some((samples.n_tx * samples.n_rx) as f64),
    };
    FittedDist::new(law, cap)
}

/// Mean log-likelihood of `law` on the samples (zeros handled as in fitting).
pub fn mean_log_likelihood(samples: &[f64], law: &Law) -> Result<f64> {
    let data = Data::prepare(samples)?;
    Ok(-objective(law.family(), &theta_from_law(law), &data).0)
}

/// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and `dist`.
pub fn ks_statistic(samples: &[f64], dist: &FittedDist) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut v = samples.to_vec();
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| x.is_nan()) {
        return Err(Error::NonFiniteSample { index, value });
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = dist.law.distribution(x.max(0.0));
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Power law `mu_o = coeff (n_tx n_rx)^expo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFit {
    pub coeff: f64,
    pub expo: f64,
}

impl SurfaceFit {
    /// Published fit of the aligned-gain rate.
    pub const PUBLISHED: SurfaceFit = SurfaceFit {
        coeff: 0.814,
        expo: -0.927,
    };

    pub fn rate(&self, n_tx: usize, n_rx: usize) -> f64 {
        self.coeff * ((n_tx * n_rx) as f64).powf(self.expo)
    }
}

/// Least-squares fit of `ln mu = ln coeff + expo ln(n_tx n_rx)`.
pub fn fit_power_surface(grid: &[(usize, usize, f64)]) -> Result<SurfaceFit> {
    if grid.len() < 3 {
        return Err(Error::invalid(format!(
            "surface fit needs >= 3 grid points, got {}",
            grid.len()
        )));
    }
    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &(t, r, mu) in grid {
        if t == 0 || r == 0 || !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid(format!("bad grid point ({t}, {r}, {mu})")));
        }
        xs.push(((t * r) as f64).ln());
        ys.push(mu.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-12 * n {
        return Err(Error::invalid(
            "degenerate grid: all antenna products are equal",
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let expo = sxy / sxx;
    Ok(SurfaceFit {
        coeff: (my - expo * mx).exp(),
        expo,
    })
}
