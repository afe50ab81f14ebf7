//! Cluster/subpath channel model: random realizations, spatial signatures,
//! channel matrices and matched beamforming vectors.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{ArrayGeometry, SystemParams};

/// Mean of the Poisson cluster count before the `max{., 1}` clamp.
pub const CLUSTER_MEAN: f64 = 1.8;
pub const MAX_SUBPATHS: usize = 10;
/// Mean of the exponential intra-cluster angular spread, radians.
pub const SPREAD_MEAN: f64 = 0.178;
/// Floor applied to the angular spread, radians.
pub const SPREAD_FLOOR: f64 = 0.0122;
/// Power-decay exponent of the cluster power law.
pub const POWER_DECAY: f64 = 2.8;
/// Standard deviation of the per-cluster lognormal shadowing term, dB.
pub const SHADOW_STD_DB: f64 = 4.0;
/// Upper end of the per-subpath uniform power perturbation.
pub const SUBPATH_JITTER: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subpath {
    /// Angle of arrival, radians.
    pub aoa: f64,
    /// Angle of departure, radians.
    pub aod: f64,
    /// Normalized power; powers of a realization sum to one.
    pub power: f64,
    /// Phase in `[0, 2pi)`.
    pub phase: f64,
}

impl Subpath {
    /// Complex small-scale gain `sqrt(P) exp(-j phase)`.
    pub fn gain(&self) -> Complex64 {
        Complex64::from_polar(self.power.sqrt(), -self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub aoa_center: f64,
    pub aod_center: f64,
    pub spread: f64,
    pub subpaths: Vec<Subpath>,
}

/// One random draw of clusters and subpaths for a link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRealization {
    pub clusters: Vec<Cluster>,
}

impl ClusterRealization {
    pub fn subpaths(&self) -> impl Iterator<Item = &Subpath> {
        self.clusters.iter().flat_map(|c| c.subpaths.iter())
    }

    pub fn subpath_count(&self) -> usize {
        self.clusters.iter().map(|c| c.subpaths.len()).sum()
    }

    /// The subpath with the largest power (first one on ties).
    pub fn strongest(&self) -> &Subpath {
        self.subpaths()
            .reduce(|best, s| if s.power > best.power { s } else { best })
            .expect("realization has at least one subpath")
    }

    /// A single subpath carrying all the power, mostly for tests.
    pub fn single_path(aoa: f64, aod: f64, phase: f64) -> Self {
        ClusterRealization {
            clusters: vec![Cluster {
                aoa_center: aoa,
                aod_center: aod,
                spread: SPREAD_FLOOR,
                subpaths: vec![Subpath {
                    aoa,
                    aod,
                    power: 1.0,
                    phase,
                }],
            }],
        }
    }
}

/// Draws a realization from the cluster/subpath law.
///
/// Cluster count `max{Poisson(1.8), 1}`; subpaths per cluster uniform on
/// `1..=10`; central angles uniform; spread `max{Exp(mean 0.178), 0.0122}`;
/// subpath `l` (1-based) sits at `center + (-1)^l spread / 2`. Unnormalized
/// power `U^(tau-1) 10^(-0.1 Z + V) / L` with `U ~ U[0,1]`, `Z ~ N(0, 4^2)`,
/// `V ~ U[0, 0.6]`, then normalized to unit sum. Phases are uniform.
pub fn sample_cluster_realization<R: Rng + ?Sized>(
    rng: &mut R,
    _params: &SystemParams,
) -> ClusterRealization {
    let poisson = Poisson::new(CLUSTER_MEAN).expect("positive mean");
    let spread = Exp::new(1.0 / SPREAD_MEAN).expect("positive rate");
    let shadow = Normal::new(0.0, SHADOW_STD_DB).expect("positive std");

    let k = (poisson.sample(rng) as usize).max(1);
    let mut clusters = Vec::with_capacity(k);
    let mut total = 0.0;
    for _ in 0..k {
        let l_count = rng.random_range(1..=MAX_SUBPATHS);
        let aoa_center = rng.random_range(0.0..TAU);
        let aod_center = rng.random_range(0.0..TAU);
        let s_a = spread.sample(rng).max(SPREAD_FLOOR);
        let u: f64 = rng.random();
        let z = shadow.sample(rng);
        let cluster_power = u.powf(POWER_DECAY - 1.0) / l_count as f64;
        let mut subpaths = Vec::with_capacity(l_count);
        for l in 1..=l_count {
            let v = rng.random_range(0.0..SUBPATH_JITTER);
            let offset = if l % 2 == 0 { 0.5 * s_a } else { -0.5 * s_a };
            let power = cluster_power * 10f64.powf(-0.1 * z + v);
            total += power;
            subpaths.push(Subpath {
                aoa: aoa_center + offset,
                aod: aod_center + offset,
                power,
                phase: rng.random_range(0.0..TAU),
            });
        }
        clusters.push(Cluster {
            aoa_center,
            aod_center,
            spread: s_a,
            subpaths,
        });
    }
    if total > 0.0 && total.is_finite() {
        for s in clusters.iter_mut().flat_map(|c| c.subpaths.iter_mut()) {
            s.power /= total;
        }
    } else {
        // U = 0 exactly on every cluster; spread the power evenly
        let n = clusters.iter().map(|c| c.subpaths.len()).sum::<usize>() as f64;
        for s in clusters.iter_mut().flat_map(|c| c.subpaths.iter_mut()) {
            s.power = 1.0 / n;
        }
    }
    ClusterRealization { clusters }
}

/// Horizontal ULA signature, element `m` equal to `exp(j pi m cos(theta))`.
pub fn spatial_signature(theta: f64, n: usize) -> Result<Vec<Complex64>> {
    signature(ArrayGeometry::Linear, theta, n)
}

/// Spatial signature for the given geometry. Unit-modulus entries.
pub fn signature(geometry: ArrayGeometry, theta: f64, n: usize) -> Result<Vec<Complex64>> {
    let side = geometry.horizontal_elements(n)?;
    let c = theta.cos();
    Ok((0..n)
        .map(|m| Complex64::from_polar(1.0, PI * (m % side) as f64 * c))
        .collect())
}

/// Unit-norm beamforming weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector {
    pub entries: Vec<Complex64>,
    pub steer_angle: f64,
}

impl BeamVector {
    /// Receive weights `conj(u(theta)) / sqrt(n)`, so `w^T u(theta) = sqrt(n)`.
    pub fn receive(geometry: ArrayGeometry, theta: f64, n: usize) -> Result<Self> {
        let scale = 1.0 / (n as f64).sqrt();
        let entries = signature(geometry, theta, n)?
            .into_iter()
            .map(|u| u.conj() * scale)
            .collect();
        Ok(BeamVector {
            entries,
            steer_angle: theta,
        })
    }

    /// Transmit weights `u(theta) / sqrt(n)`, so `u(theta)^H w = sqrt(n)`.
    pub fn transmit(geometry: ArrayGeometry, theta: f64, n: usize) -> Result<Self> {
        let scale = 1.0 / (n as f64).sqrt();
        let entries = signature(geometry, theta, n)?
            .into_iter()
            .map(|u| u * scale)
            .collect();
        Ok(BeamVector {
            entries,
            steer_angle: theta,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Unconjugated inner product `w^T x`.
    pub fn dot(&self, x: &[Complex64]) -> Complex64 {
        self.entries.iter().zip(x).map(|(w, x)| w * x).sum()
    }
}

/// Matched (receive-side) beamforming vector on a ULA: `conj(u(theta))/sqrt(n)`.
pub fn beamforming_vector(theta: f64, n: usize) -> Result<BeamVector> {
    BeamVector::receive(ArrayGeometry::Linear, theta, n)
}

/// Dense `n_rx x n_tx` channel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `w_rx^T H w_tx`.
    pub fn bilinear(&self, w_rx: &BeamVector, w_tx: &BeamVector) -> Complex64 {
        assert_eq!(w_rx.len(), self.rows);
        assert_eq!(w_tx.len(), self.cols);
        self.entries
            .chunks_exact(self.cols)
            .zip(&w_rx.entries)
            .map(|(row, wr)| {
                wr * row
                    .iter()
                    .zip(&w_tx.entries)
                    .map(|(h, wt)| h * wt)
                    .sum::<Complex64>()
            })
            .sum()
    }
}

/// `H = sum_kl g_kl u_rx(aoa_kl) u_tx(aod_kl)^*`.
pub fn channel_matrix(
    realization: &ClusterRealization,
    params: &SystemParams,
) -> Result<ChannelMatrix> {
    let (rows, cols) = (params.n_rx, params.n_tx);
    let mut entries = vec![Complex64::new(0.0, 0.0); rows * cols];
    for s in realization.subpaths() {
        let u_rx = signature(params.array_geometry, s.aoa, rows)?;
        let u_tx = signature(params.array_geometry, s.aod, cols)?;
        let g = s.gain();
        for (r, ur) in u_rx.iter().enumerate() {
            let gr = g * ur;
            for (c, ut) in u_tx.iter().enumerate() {
                entries[r * cols + c] += gr * ut.conj();
            }
        }
    }
    Ok(ChannelMatrix {
        rows,
        cols,
        entries,
    })
}

/// `sum_{h < n} exp(j h psi)`.
pub(crate) fn geometric_phasor_sum(n: usize, psi: f64) -> Complex64 {
    let half = 0.5 * psi;
    let s = half.sin();
    if s.abs() < 1e-7 {
        return (0..n)
            .map(|h| Complex64::from_polar(1.0, h as f64 * psi))
            .sum();
    }
    let ratio = (n as f64 * half).sin() / s;
    Complex64::from_polar(ratio, (n as f64 - 1.0) * half)
}

/// Array factors of a steered array: the receive factor `w_rx(steer)^T u(theta)`
/// and the transmit factor `u(theta)^H w_tx(steer)`, without forming vectors.
#[derive(Debug, Clone, Copy)]
pub struct ArrayFactor {
    side: usize,
    coherent: f64,
    steer_cos: f64,
}

impl ArrayFactor {
    pub fn new(geometry: ArrayGeometry, n: usize, steer: f64) -> Result<Self> {
        let side = geometry.horizontal_elements(n)?;
        let vertical = (n / side) as f64;
        Ok(ArrayFactor {
            side,
            coherent: vertical / (n as f64).sqrt(),
            steer_cos: steer.cos(),
        })
    }

    pub fn receive(&self, theta: f64) -> Complex64 {
        geometric_phasor_sum(self.side, PI * (theta.cos() - self.steer_cos)) * self.coherent
    }

    pub fn transmit(&self, theta: f64) -> Complex64 {
        geometric_phasor_sum(self.side, PI * (self.steer_cos - theta.cos())) * self.coherent
    }
}

/// Beamformed link gain `|w_rx^T H w_tx|^2` via the per-subpath factorization
/// `sum_kl g_kl (w_rx^T u_rx)(u_tx^H w_tx)`.
pub fn beamformed_gain(
    realization: &ClusterRealization,
    params: &SystemParams,
    rx_steer: f64,
    tx_steer: f64,
) -> Result<f64> {
    let rx = ArrayFactor::new(params.array_geometry, params.n_rx, rx_steer)?;
    let tx = ArrayFactor::new(params.array_geometry, params.n_tx, tx_steer)?;
    let amp: Complex64 = realization
        .subpaths()
        .map(|s| s.gain() * rx.receive(s.aoa) * tx.transmit(s.aod))
        .sum();
    Ok(amp.norm_sqr())
}
