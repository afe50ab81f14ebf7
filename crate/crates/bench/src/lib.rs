//! Fixtures shared by the benchmarks.

use mmwave_sir::coverage::CoverageModel;
use mmwave_sir::tables::{bundled_gx, published_aligned_rate};
use mmwave_sir::{Family, FittedDist, GainSource, SystemParams};

/// Published log-logistic interference law and aligned rate for one array
/// pair.
pub fn published_laws(n_tx: usize, n_rx: usize) -> (FittedDist, f64) {
    let gx = bundled_gx(Family::LogLogistic, n_tx, n_rx).expect("bundled entry");
    (gx, published_aligned_rate(n_tx, n_rx))
}

pub fn coverage_model(n_tx: usize, n_rx: usize) -> CoverageModel {
    let (gx, mu_o) = published_laws(n_tx, n_rx);
    CoverageModel::new(&gx, mu_o, &SystemParams::with_antennas(n_tx, n_rx)).expect("valid model")
}

pub fn fitted_source(n_tx: usize, n_rx: usize) -> GainSource {
    let (gx, mu_o) = published_laws(n_tx, n_rx);
    GainSource::Fitted { mu_o, gx }
}
