//! Bundled published fits: log-logistic misaligned-gain parameters for every
//! antenna pair, alternative laws at 256x64 and the aligned-rate surface.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::dist::{Family, FittedDist, Law};
use crate::error::{Error, Result};
use crate::fit::SurfaceFit;

const TABLE_JSON: &str = include_str!("../data/table2.json");

#[derive(Debug, Deserialize)]
struct LogLogisticEntry {
    n_tx: usize,
    n_rx: usize,
    a: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
struct AlternativeEntry {
    n_tx: usize,
    n_rx: usize,
    #[serde(flatten)]
    dist: FittedDist,
}

#[derive(Debug, Deserialize)]
struct Bundle {
    aligned_rate: SurfaceFit,
    log_logistic: Vec<LogLogisticEntry>,
    alternatives: Vec<AlternativeEntry>,
}

fn bundle() -> &'static Bundle {
    static CELL: OnceLock<Bundle> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(TABLE_JSON).expect("bundled table is valid JSON"))
}

/// The antenna sizes covered by the bundled table.
pub const ANTENNA_SIZES: [usize; 4] = [4, 16, 64, 256];

/// Published aligned-gain rate surface.
pub fn aligned_rate_surface() -> SurfaceFit {
    bundle().aligned_rate
}

/// Published aligned-gain rate for one antenna pair.
pub fn published_aligned_rate(n_tx: usize, n_rx: usize) -> f64 {
    aligned_rate_surface().rate(n_tx, n_rx)
}

/// Bundled misaligned-gain law, capped at `n_tx n_rx`.
pub fn bundled_gx(family: Family, n_tx: usize, n_rx: usize) -> Result<FittedDist> {
    let cap = (n_tx * n_rx) as f64;
    let missing = || {
        Error::validation(
            "coverage.gx",
            format!("no bundled {family} entry for n_tx={n_tx}, n_rx={n_rx}"),
        )
    };
    match family {
        Family::LogLogistic => {
            let e = bundle()
                .log_logistic
                .iter()
                .find(|e| e.n_tx == n_tx && e.n_rx == n_rx)
                .ok_or_else(missing)?;
            FittedDist::capped(Law::LogLogistic { a: e.a, b: e.b }, cap)
        }
        _ => bundle()
            .alternatives
            .iter()
            .find(|e| e.n_tx == n_tx && e.n_rx == n_rx && e.dist.family() == family)
            .ok_or_else(missing)?
            .dist
            .with_cap(Some(cap)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_pair_has_a_log_logistic_entry() {
        for t in ANTENNA_SIZES {
            for r in ANTENNA_SIZES {
                let d = bundled_gx(Family::LogLogistic, t, r).unwrap();
                assert_eq!(d.truncation_cap, Some((t * r) as f64));
            }
        }
        assert!(bundled_gx(Family::LogLogistic, 8, 8).is_err());
    }

    #[test]
    fn table_orientation() {
        assert_eq!(
            bundled_gx(Family::LogLogistic, 256, 64).unwrap().law,
            Law::LogLogistic { a: 1.98, b: 0.551 }
        );
        assert_eq!(
            bundled_gx(Family::LogLogistic, 64, 16).unwrap().law,
            Law::LogLogistic { a: 3.28, b: 0.612 }
        );
        assert_eq!(
            bundled_gx(Family::LogLogistic, 16, 4).unwrap().law,
            Law::LogLogistic { a: 2.51, b: 0.743 }
        );
        assert_eq!(
            bundled_gx(Family::LogLogistic, 4, 16).unwrap().law,
            Law::LogLogistic { a: 2.52, b: 0.743 }
        );
    }

    #[test]
    fn alternatives_at_largest_pair() {
        assert_eq!(
            bundled_gx(Family::Burr, 256, 64).unwrap().law,
            Law::Burr { c: 0.692, k: 0.518 }
        );
        assert_eq!(
            bundled_gx(Family::LogNormal, 256, 64).unwrap().law,
            Law::LogNormal {
                sigma: 2.962,
                mu: 0.908
            }
        );
        assert_eq!(
            bundled_gx(Family::Nakagami, 256, 64).unwrap().law,
            Law::Nakagami { m: 0.099, g: 50.53 }
        );
        assert!(bundled_gx(Family::Burr, 64, 16).is_err());
        assert!(bundled_gx(Family::Exponential, 256, 64).is_err());
    }

    #[test]
    fn aligned_surface() {
        let s = aligned_rate_surface();
        assert_eq!((s.coeff, s.expo), (0.814, -0.927));
    }
}
