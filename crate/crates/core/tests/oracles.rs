//! Monte Carlo oracles for the analytic coverage pieces.

use std::f64::consts::PI;

use mmwave_sir::coverage::{association_probability, CoverageModel};
use mmwave_sir::netsim::simulate_sir;
use mmwave_sir::rng::par_map_streams;
use mmwave_sir::tables::{bundled_gx, published_aligned_rate};
use mmwave_sir::{Family, GainSource, LinkState, SystemParams};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

#[test]
fn laplace_functional_matches_ppp_expectation() {
    let params = SystemParams::default();
    let gx = bundled_gx(Family::LogLogistic, 256, 64).unwrap();
    let cap = gx.truncation_cap.unwrap();
    let mu_o = published_aligned_rate(256, 64);
    let (t, r) = (1.0, 50.0);
    let model = CoverageModel::new(&gx, mu_o, &params).unwrap();
    let analytic = model
        .laplace_interference(t, r, LinkState::Los, LinkState::Los)
        .unwrap();

    let radius = 3000.0;
    let s = mu_o * t / (params.beta_los * r.powf(-params.alpha_los));
    let count = Poisson::new(params.bs_density * PI * radius * radius).unwrap();
    let draws = par_map_streams(21, 10_000, |rng, _| {
        let n = count.sample(rng) as usize;
        let mut load = 0.0;
        for _ in 0..n {
            let d = radius * rng.random::<f64>().sqrt();
            let los = rng.random::<f64>() < (-params.los_decay * d).exp();
            if los && d > r {
                let g = gx.law.sample(rng);
                if g <= cap {
                    load += g * params.beta_los * d.powf(-params.alpha_los);
                }
            }
        }
        (-s * load).exp()
    });
    let mc = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!(
        (mc / analytic - 1.0).abs() < 0.02,
        "analytic {analytic}, Monte Carlo {mc}"
    );
}

#[test]
fn los_association_fraction_matches_density() {
    let params = SystemParams {
        rng_seed: 8,
        ..SystemParams::default()
    };
    let source = GainSource::Constant {
        aligned: 1.0,
        misaligned: 1.0,
    };
    let sirs = simulate_sir(10_000, &source, &params, 2000.0).unwrap();
    let mc = sirs
        .iter()
        .filter(|s| s.serving_state == LinkState::Los)
        .count() as f64
        / sirs.len() as f64;
    let analytic = association_probability(LinkState::Los, &params);
    assert!(
        (mc - analytic).abs() < 0.02,
        "analytic {analytic}, Monte Carlo {mc}"
    );
}

#[test]
fn full_channel_simulation_runs_on_small_arrays() {
    let params = SystemParams {
        rng_seed: 9,
        bs_density: 2e-5,
        ..SystemParams::with_antennas(16, 4)
    };
    let sirs = simulate_sir(50, &GainSource::FullChannel, &params, 1000.0).unwrap();
    assert!(sirs.iter().all(|s| s.sir_linear > 0.0));
}
