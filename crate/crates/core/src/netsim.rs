//! Monte Carlo drops of a Poisson network around a typical user at the
//! origin, with max-received-power association and per-drop SIR.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::coverage::{db_to_linear, CoverageCurve, Method};
use crate::dist::{Family, FittedDist};
use crate::error::{Error, Result};
use crate::gains::{sample_gain, GainKind};
use crate::params::{LinkState, SystemParams};
use crate::rng::par_map_streams;

/// Default simulation disc radius in meters.
pub const DEFAULT_REGION_RADIUS: f64 = 2000.0;

/// Seed offset separating network drops from gain sampling runs.
const DROP_SALT: u64 = 0x5eed_d209;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub bs_positions: Vec<[f64; 2]>,
    pub bs_states: Vec<LinkState>,
    pub serving_index: usize,
    pub serving_state: LinkState,
    /// Empty draws discarded before this one.
    pub resampled: u32,
}

impl NetworkSnapshot {
    /// Builds a snapshot from explicit positions and states, associating by
    /// largest path gain.
    pub fn from_parts(
        bs_positions: Vec<[f64; 2]>,
        bs_states: Vec<LinkState>,
        params: &SystemParams,
    ) -> Result<Self> {
        if bs_positions.is_empty() {
            return Err(Error::invalid("a snapshot needs at least one base station"));
        }
        if bs_positions.len() != bs_states.len() {
            return Err(Error::invalid("positions and states differ in length"));
        }
        let mut snap = NetworkSnapshot {
            bs_positions,
            bs_states,
            serving_index: 0,
            serving_state: LinkState::Los,
            resampled: 0,
        };
        let mut best = f64::NEG_INFINITY;
        for k in 0..snap.len() {
            let g = snap.path_gain(k, params);
            if g > best {
                best = g;
                snap.serving_index = k;
            }
        }
        snap.serving_state = snap.bs_states[snap.serving_index];
        Ok(snap)
    }

    pub fn len(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bs_positions.is_empty()
    }

    pub fn distance(&self, k: usize) -> f64 {
        let [x, y] = self.bs_positions[k];
        x.hypot(y)
    }

    /// `beta r^-alpha` of BS `k` in its drawn state.
    pub fn path_gain(&self, k: usize, params: &SystemParams) -> f64 {
        let s = self.bs_states[k];
        params.beta(s) * self.distance(k).powf(-params.alpha(s))
    }

    /// Index of the closest BS.
    pub fn nearest_index(&self) -> usize {
        (0..self.len())
            .min_by(|&a, &b| self.distance(a).total_cmp(&self.distance(b)))
            .unwrap_or(0)
    }
}

/// Drops one network on a disc of radius `region_radius`; empty draws are
/// redrawn.
pub fn generate_snapshot<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SystemParams,
    region_radius: f64,
) -> Result<NetworkSnapshot> {
    if !(region_radius.is_finite() && region_radius > 0.0) {
        return Err(Error::invalid(format!(
            "region radius must be > 0, got {region_radius}"
        )));
    }
    let mean = params.bs_density * std::f64::consts::PI * region_radius * region_radius;
    let poisson =
        Poisson::new(mean).map_err(|e| Error::invalid(format!("BS count mean {mean}: {e}")))?;
    let mut resampled = 0;
    let count = loop {
        let n = poisson.sample(rng) as usize;
        if n > 0 {
            break n;
        }
        resampled += 1;
    };
    let mut positions = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        let r = region_radius * rng.random::<f64>().sqrt();
        let phi = rng.random_range(0.0..TAU);
        positions.push([r * phi.cos(), r * phi.sin()]);
        let los = rng.random::<f64>() < (-params.los_decay * r).exp();
        states.push(if los { LinkState::Los } else { LinkState::Nlos });
    }
    let mut snap = NetworkSnapshot::from_parts(positions, states, params)?;
    snap.resampled = resampled;
    Ok(snap)
}

/// Where the beamforming gains of a drop come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GainSource {
    /// Fresh channel realization per link through the full array model.
    FullChannel,
    /// `G_o ~ Exp(mu_o)` and `G_x ~ gx`; a `G_x` draw above the cap counts
    /// as zero, which is the transform used by the analytic integral.
    Fitted { mu_o: f64, gx: FittedDist },
    /// Deterministic gains, for testing.
    Constant { aligned: f64, misaligned: f64 },
}

impl GainSource {
    pub fn validate(&self) -> Result<()> {
        match self {
            GainSource::FullChannel => Ok(()),
            GainSource::Fitted { mu_o, .. } if !(mu_o.is_finite() && *mu_o > 0.0) => Err(
                Error::invalid(format!("aligned-gain rate must be > 0, got {mu_o}")),
            ),
            GainSource::Fitted { .. } => Ok(()),
            GainSource::Constant {
                aligned,
                misaligned,
            } => {
                if *aligned > 0.0
                    && *misaligned >= 0.0
                    && aligned.is_finite()
                    && misaligned.is_finite()
                {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "constant gains must be finite with aligned > 0",
                    ))
                }
            }
        }
    }

    fn family(&self) -> Family {
        match self {
            GainSource::Fitted { gx, .. } => gx.family(),
            // no fitted law; tagged with the aligned-gain family
            _ => Family::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirSample {
    /// `+inf` when there are no interferers.
    pub sir_linear: f64,
    pub serving_state: LinkState,
    /// Whether the serving BS is also the nearest one.
    pub nearest: bool,
}

impl SirSample {
    pub fn interference_free(&self) -> bool {
        self.sir_linear.is_infinite()
    }
}

/// One gain per BS of the drop: the aligned gain for the serving BS and a
/// misaligned gain for every other.
pub fn draw_gains<R: Rng + ?Sized>(
    snapshot: &NetworkSnapshot,
    source: &GainSource,
    rng: &mut R,
    params: &SystemParams,
) -> Result<Vec<f64>> {
    let aligned_exp = match source {
        GainSource::Fitted { mu_o, .. } => {
            Some(Exp::new(*mu_o).map_err(|e| Error::invalid(e.to_string()))?)
        }
        _ => None,
    };
    let draw = |kind: GainKind, rng: &mut R| -> Result<f64> {
        Ok(match source {
            GainSource::FullChannel => sample_gain(kind, rng, params)?,
            GainSource::Constant {
                aligned,
                misaligned,
            } => match kind {
                GainKind::Aligned => *aligned,
                GainKind::Misaligned => *misaligned,
            },
            GainSource::Fitted { gx, .. } => match kind {
                GainKind::Aligned => aligned_exp.as_ref().map_or(0.0, |d| d.sample(rng)),
                GainKind::Misaligned => {
                    let g = gx.law.sample(rng);
                    match gx.truncation_cap {
                        Some(cap) if g > cap => 0.0,
                        _ => g,
                    }
                }
            },
        })
    };
    (0..snapshot.len())
        .map(|k| {
            let kind = if k == snapshot.serving_index {
                GainKind::Aligned
            } else {
                GainKind::Misaligned
            };
            draw(kind, rng)
        })
        .collect()
}

/// SIR from per-BS gains, counting only interferers within `radius`.
pub fn sir_from_gains(
    snapshot: &NetworkSnapshot,
    gains: &[f64],
    params: &SystemParams,
    radius: f64,
) -> SirSample {
    let serving = snapshot.serving_index;
    let signal = gains[serving] * snapshot.path_gain(serving, params);
    let interference: f64 = (0..snapshot.len())
        .filter(|&k| k != serving && snapshot.distance(k) <= radius)
        .map(|k| gains[k] * snapshot.path_gain(k, params))
        .sum();
    let sir_linear = if interference > 0.0 {
        signal / interference
    } else {
        f64::INFINITY
    };
    SirSample {
        sir_linear,
        serving_state: snapshot.serving_state,
        nearest: snapshot.nearest_index() == serving,
    }
}

/// SIR of a drop under unit transmit power and no noise.
pub fn snapshot_sir<R: Rng + ?Sized>(
    snapshot: &NetworkSnapshot,
    source: &GainSource,
    rng: &mut R,
    params: &SystemParams,
) -> Result<SirSample> {
    let gains = draw_gains(snapshot, source, rng, params)?;
    Ok(sir_from_gains(snapshot, &gains, params, f64::INFINITY))
}

/// SIR of `n_drops` independent drops, seeded from `params.rng_seed`.
pub fn simulate_sir(
    n_drops: usize,
    source: &GainSource,
    params: &SystemParams,
    region_radius: f64,
) -> Result<Vec<SirSample>> {
    if n_drops == 0 {
        return Err(Error::invalid("n_drops must be at least 1"));
    }
    params.validate()?;
    source.validate()?;
    par_map_streams(params.rng_seed ^ DROP_SALT, n_drops, |rng, _| {
        let snap = generate_snapshot(rng, params, region_radius)?;
        snapshot_sir(&snap, source, rng, params)
    })
    .into_iter()
    .collect()
}

/// Per-threshold fraction of drops with `SIR >= T`, with binomial standard
/// errors.
pub fn empirical_coverage(
    n_drops: usize,
    thresholds_db: &[f64],
    source: &GainSource,
    params: &SystemParams,
    region_radius: f64,
) -> Result<CoverageCurve> {
    if thresholds_db.is_empty() {
        return Err(Error::invalid("threshold grid is empty"));
    }
    let sirs = simulate_sir(n_drops, source, params, region_radius)?;
    coverage_from_samples(&sirs, thresholds_db, source.family(), params)
}

pub fn coverage_from_samples(
    sirs: &[SirSample],
    thresholds_db: &[f64],
    family: Family,
    params: &SystemParams,
) -> Result<CoverageCurve> {
    let n = sirs.len() as f64;
    let mut coverages = Vec::with_capacity(thresholds_db.len());
    let mut stderr = Vec::with_capacity(thresholds_db.len());
    for &db in thresholds_db {
        let t = db_to_linear(db);
        let hits = sirs.iter().filter(|s| s.sir_linear >= t).count() as f64;
        let p = hits / n;
        coverages.push(p);
        stderr.push((p * (1.0 - p) / n).sqrt());
    }
    CoverageCurve::new(
        thresholds_db.to_vec(),
        coverages,
        Method::MonteCarlo,
        family,
        params.clone(),
        Some(stderr),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Law;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    #[test]
    fn poisson_count_concentrates() {
        let params = SystemParams::default();
        let mut rng = stream(3, 0);
        let n = 1000;
        let counts: Vec<f64> = (0..n)
            .map(|_| generate_snapshot(&mut rng, &params, 2000.0).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let expect = 1e-4 * std::f64::consts::PI * 4e6;
        assert!(
            (mean - expect).abs() < 3.0 * (expect / n as f64).sqrt(),
            "mean {mean}"
        );
    }

    #[test]
    fn serving_bs_has_largest_path_gain() {
        let params = SystemParams::default();
        let mut rng = stream(4, 0);
        for _ in 0..50 {
            let s = generate_snapshot(&mut rng, &params, 1000.0).unwrap();
            let best = s.path_gain(s.serving_index, &params);
            assert!((0..s.len()).all(|k| s.path_gain(k, &params) <= best));
            assert_eq!(s.serving_state, s.bs_states[s.serving_index]);
        }
    }

    #[test]
    fn nearby_base_stations_are_mostly_los() {
        let params = SystemParams::default();
        // ~0.03 stations fall within 10 m per drop, so a small disc and many
        // drops are needed for the binomial estimate to concentrate
        let mut rng = stream(5, 0);
        let (mut los, mut total) = (0usize, 0usize);
        for _ in 0..100_000 {
            let s = generate_snapshot(&mut rng, &params, 200.0).unwrap();
            for k in (0..s.len()).filter(|&k| s.distance(k) < 10.0) {
                total += 1;
                los += (s.bs_states[k] == LinkState::Los) as usize;
            }
        }
        assert!(total > 0);
        assert!(los as f64 / total as f64 > 0.85, "{los}/{total}");
    }

    #[test]
    fn two_station_sir() {
        let params = SystemParams::default();
        let snap = NetworkSnapshot::from_parts(
            vec![[100.0, 0.0], [0.0, -200.0]],
            vec![LinkState::Los; 2],
            &params,
        )
        .unwrap();
        assert_eq!(snap.serving_index, 0);
        let source = GainSource::Constant {
            aligned: 1.0,
            misaligned: 1.0,
        };
        let s = snapshot_sir(&snap, &source, &mut stream(0, 0), &params).unwrap();
        assert_relative_eq!(s.sir_linear, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn lone_station_is_interference_free() {
        let params = SystemParams::default();
        let snap = NetworkSnapshot::from_parts(vec![[30.0, 40.0]], vec![LinkState::Nlos], &params)
            .unwrap();
        let s = snapshot_sir(&snap, &GainSource::FullChannel, &mut stream(0, 0), &params).unwrap();
        assert!(s.interference_free());
        let curve =
            coverage_from_samples(&[s], &[0.0, 60.0], Family::Exponential, &params).unwrap();
        assert_eq!(curve.coverages, vec![1.0, 1.0]);
    }

    #[test]
    fn invalid_inputs() {
        let params = SystemParams::default();
        assert!(generate_snapshot(&mut stream(0, 0), &params, 0.0).is_err());
        assert!(empirical_coverage(0, &[0.0], &GainSource::FullChannel, &params, 100.0).is_err());
        assert!(empirical_coverage(10, &[], &GainSource::FullChannel, &params, 100.0).is_err());
        assert!(NetworkSnapshot::from_parts(vec![], vec![], &params).is_err());
    }

    #[test]
    fn association_can_skip_nearest() {
        let params = SystemParams::default();
        let source = GainSource::Constant {
            aligned: 1.0,
            misaligned: 1.0,
        };
        let sirs = simulate_sir(2000, &source, &params, 1000.0).unwrap();
        assert!(sirs.iter().any(|s| !s.nearest));
    }

    #[test]
    fn low_threshold_is_covered() {
        let params = SystemParams::default();
        let gx = FittedDist::capped(Law::LogLogistic { a: 1.98, b: 0.551 }, 16384.0).unwrap();
        let source = GainSource::Fitted {
            mu_o: 0.814 * 16384f64.powf(-0.927),
            gx,
        };
        let c = empirical_coverage(1000, &[-40.0, 0.0, 20.0], &source, &params, 2000.0).unwrap();
        assert!(c.coverages[0] > 0.99);
        assert!(c.coverages.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(c.method, Method::MonteCarlo);
        assert_eq!(c.stderr.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn drops_are_reproducible() {
        let params = SystemParams {
            rng_seed: 11,
            ..SystemParams::default()
        };
        let source = GainSource::Constant {
            aligned: 1.0,
            misaligned: 0.5,
        };
        let a = simulate_sir(300, &source, &params, 1500.0).unwrap();
        let b = simulate_sir(300, &source, &params, 1500.0).unwrap();
        assert_eq!(a, b);
    }
}
