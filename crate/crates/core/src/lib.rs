//! Beamforming-gain statistics and SIR coverage for random mmWave networks.
//!
//! The pipeline runs from a clustered channel model to Monte Carlo gain
//! samples, maximum-likelihood fits, an analytic coverage integral and a
//! network-level simulation to check it against.

pub mod channel;
pub mod config;
pub mod coverage;
pub mod dist;
pub mod error;
pub mod fit;
pub mod gains;
pub mod io;
pub mod netsim;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod tables;

pub use channel::{ClusterRealization, Subpath};
pub use config::RunConfig;
pub use coverage::{CoverageCurve, CoverageModel, Method};
pub use dist::{Family, FittedDist, Law};
pub use error::{Error, Result};
pub use fit::{fit_family, ks_statistic, SurfaceFit};
pub use gains::{GainKind, GainSampleSet};
pub use netsim::{GainSource, NetworkSnapshot, SirSample};
pub use params::{ArrayGeometry, LinkState, SystemParams};
