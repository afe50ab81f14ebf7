//! System-level constants of the 28 GHz network and the LoS/NLoS link state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Antenna array layout used to build spatial signatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArrayGeometry {
    /// Uniform linear array, half-wavelength spacing, in the horizontal plane.
    Linear,
    /// Square `sqrt(n) x sqrt(n)` planar array, half-wavelength spacing, with the
    /// vertical angle pinned at pi/2. Every column sees the same horizontal phase
    /// progression, so the horizontal pattern is that of a `sqrt(n)`-element
    /// linear array carrying the full `n`-element coherent gain.
    #[default]
    Planar,
}

impl ArrayGeometry {
    /// Number of elements along the horizontal axis for an `n`-element array.
    pub fn horizontal_elements(self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::invalid("antenna count must be at least 1"));
        }
        match self {
            ArrayGeometry::Linear => Ok(n),
            ArrayGeometry::Planar => {
                let side = (n as f64).sqrt().round() as usize;
                if side * side != n {
                    return Err(Error::invalid(format!(
                        "planar array needs a square antenna count, got {n}"
                    )));
                }
                Ok(side)
            }
        }
    }
}

/// Scalar constants of the network and channel model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    /// Base-station density in BS per square meter.
    pub bs_density: f64,
    /// LoS probability decay constant in 1/m: `p_L(r) = exp(-los_decay * r)`.
    pub los_decay: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta_los: f64,
    pub beta_nlos: f64,
    /// Antennas at the base station.
    pub n_tx: usize,
    /// Antennas at the user equipment.
    pub n_rx: usize,
    pub array_geometry: ArrayGeometry,
    pub rng_seed: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            carrier_freq: 28.0e9,
            bs_density: 1.0e-4,
            los_decay: 0.0149,
            alpha_los: 2.0,
            alpha_nlos: 2.92,
            beta_los: 10f64.powf(-7.2),
            beta_nlos: 10f64.powf(-6.14),
            n_tx: 256,
            n_rx: 64,
            array_geometry: ArrayGeometry::Planar,
            rng_seed: 0,
        }
    }
}

impl SystemParams {
    /// Default parameters with the given antenna counts.
    pub fn with_antennas(n_tx: usize, n_rx: usize) -> Self {
        SystemParams {
            n_tx,
            n_rx,
            ..SystemParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq", self.carrier_freq),
            ("bs_density", self.bs_density),
            ("los_decay", self.los_decay),
            ("alpha_los", self.alpha_los),
            ("alpha_nlos", self.alpha_nlos),
            ("beta_los", self.beta_los),
            ("beta_nlos", self.beta_nlos),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(
                    format!("system.{name}"),
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        for (name, n) in [("n_tx", self.n_tx), ("n_rx", self.n_rx)] {
            if n == 0 {
                return Err(Error::validation(format!("system.{name}"), "must be >= 1"));
            }
            self.array_geometry
                .horizontal_elements(n)
                .map_err(|e| Error::validation(format!("system.{name}"), e.to_string()))?;
        }
        Ok(())
    }

    /// Product `n_tx * n_rx`, the peak coherent array gain.
    pub fn array_gain(&self) -> f64 {
        (self.n_tx * self.n_rx) as f64
    }

    pub fn alpha(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.alpha_los,
            LinkState::Nlos => self.alpha_nlos,
        }
    }

    pub fn beta(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.beta_los,
            LinkState::Nlos => self.beta_nlos,
        }
    }
}

/// Propagation state of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const ALL: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];

    pub fn opposite(self) -> LinkState {
        match self {
            LinkState::Los => LinkState::Nlos,
            LinkState::Nlos => LinkState::Los,
        }
    }
}
