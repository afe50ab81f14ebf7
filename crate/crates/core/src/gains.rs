//! Monte Carlo samples of the aligned (serving-link) and misaligned
//! (interfering-link) beamforming gains.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{beamformed_gain, sample_cluster_realization, ClusterRealization};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::rng::par_map_streams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainKind {
    Aligned,
    Misaligned,
}

impl GainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GainKind::Aligned => "aligned",
            GainKind::Misaligned => "misaligned",
        }
    }
}

impl std::str::FromStr for GainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aligned" => Ok(GainKind::Aligned),
            "misaligned" => Ok(GainKind::Misaligned),
            other => Err(Error::invalid(format!("unknown gain kind `{other}`"))),
        }
    }
}

/// Gain of the serving link with both beams steered at the AoA/AoD of the
/// strongest subpath.
pub fn aligned_gain(realization: &ClusterRealization, params: &SystemParams) -> Result<f64> {
    let best = realization.strongest();
    beamformed_gain(realization, params, best.aoa, best.aod)
}

/// Gain of an interfering link: both beams point in independent uniform
/// directions, unrelated to the channel's angles.
pub fn misaligned_gain<R: Rng + ?Sized>(
    realization: &ClusterRealization,
    rng: &mut R,
    params: &SystemParams,
) -> Result<f64> {
    let rx = rng.random_range(0.0..TAU);
    let tx = rng.random_range(0.0..TAU);
    beamformed_gain(realization, params, rx, tx)
}

/// Triangle-inequality bound `n_tx n_rx (sum_kl sqrt(P_kl))^2` on any
/// beamformed gain of a realization.
pub fn gain_bound(realization: &ClusterRealization, params: &SystemParams) -> f64 {
    let amp: f64 = realization.subpaths().map(|s| s.power.sqrt()).sum();
    params.array_gain() * amp * amp
}

/// One fresh realization and one gain draw.
pub fn sample_gain<R: Rng + ?Sized>(
    kind: GainKind,
    rng: &mut R,
    params: &SystemParams,
) -> Result<f64> {
    let realization = sample_cluster_realization(rng, params);
    let g = match kind {
        GainKind::Aligned => aligned_gain(&realization, params)?,
        GainKind::Misaligned => misaligned_gain(&realization, rng, params)?,
    };
    debug_assert!(g >= 0.0 && g <= gain_bound(&realization, params) * (1.0 + 1e-9));
    Ok(g)
}

/// A batch of i.i.d. gain samples for one antenna configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSampleSet {
    pub kind: GainKind,
    pub n_tx: usize,
    pub n_rx: usize,
    pub seed: u64,
    pub samples: Vec<f64>,
}

impl GainSampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn median(&self) -> f64 {
        let mut v = self.samples.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// Draws `n_samples` gains with a fresh realization per sample, seeded from
/// `params.rng_seed`.
pub fn sample_gain_set(
    kind: GainKind,
    n_samples: usize,
    params: &SystemParams,
) -> Result<GainSampleSet> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    params.validate()?;
    let samples = par_map_streams(params.rng_seed, n_samples, |rng, _| {
        sample_gain(kind, rng, params)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(GainSampleSet {
        kind,
        n_tx: params.n_tx,
        n_rx: params.n_rx,
        seed: params.rng_seed,
        samples,
    })
}
