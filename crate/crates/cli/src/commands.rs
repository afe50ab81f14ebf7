use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mmwave_sir::coverage::{CoverageCurve, CoverageModel};
use mmwave_sir::fit::{fit_family, fit_power_surface, ks_statistic, mean_log_likelihood};
use mmwave_sir::gains::sample_gain_set;
use mmwave_sir::io::{
    compare_curves, read_gain_csv, write_comparison_csv, write_coverage_csv, write_curve_set_csv,
    write_gain_csv, write_json, write_records, FitEntry, FitReport,
};
use mmwave_sir::netsim::empirical_coverage;
use mmwave_sir::tables::{aligned_rate_surface, bundled_gx, published_aligned_rate, ANTENNA_SIZES};
use mmwave_sir::{
    Error, Family, FittedDist, GainKind, GainSource, Law, RunConfig, SurfaceFit, SystemParams,
};
use serde::Serialize;

type Outputs = Result<Vec<PathBuf>, Error>;

fn create(config: &RunConfig, name: &str) -> Result<(PathBuf, BufWriter<File>), Error> {
    let path = config.output_dir.join(name);
    Ok((path.clone(), BufWriter::new(File::create(&path)?)))
}

fn with_antennas(system: &SystemParams, n_tx: usize, n_rx: usize) -> SystemParams {
    SystemParams {
        n_tx,
        n_rx,
        ..system.clone()
    }
}

pub fn gains(config: &RunConfig) -> Outputs {
    let p = &config.system;
    let set = sample_gain_set(config.sampling.kind, config.sampling.n_samples, p)?;
    let (path, w) = create(
        config,
        &format!("gains_{}_{}x{}.csv", set.kind.as_str(), p.n_tx, p.n_rx),
    )?;
    write_gain_csv(w, &set)?;
    Ok(vec![path])
}

pub fn fit(config: &RunConfig, input: Option<&Path>) -> Outputs {
    let set = match input {
        Some(path) => read_gain_csv(File::open(path)?)?,
        None => sample_gain_set(
            config.sampling.kind,
            config.sampling.n_samples,
            &config.system,
        )?,
    };
    let fits = config
        .fitting
        .families
        .iter()
        .map(|&family| {
            let dist = fit_family(&set, family)?;
            Ok(FitEntry {
                ks: ks_statistic(&set.samples, &dist)?,
                mean_log_likelihood: mean_log_likelihood(&set.samples, &dist.law)?,
                dist,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    for f in &fits {
        eprintln!(
            "{}  KS={:.4}  mean log-likelihood={:.5}",
            f.dist, f.ks, f.mean_log_likelihood
        );
    }
    let report = FitReport {
        kind: set.kind,
        n_tx: set.n_tx,
        n_rx: set.n_rx,
        n_samples: set.len(),
        fits,
    };
    let (path, w) = create(
        config,
        &format!("fit_{}_{}x{}.json", set.kind.as_str(), set.n_tx, set.n_rx),
    )?;
    write_json(w, &report)?;
    Ok(vec![path])
}

fn analytic(config: &RunConfig) -> Result<CoverageCurve, Error> {
    CoverageModel::new(
        &config.resolve_gx()?,
        config.resolve_mu_o()?,
        &config.system,
    )?
    .curve(&config.coverage.t_grid_db)
}

fn monte_carlo(config: &RunConfig) -> Result<CoverageCurve, Error> {
    let sim = &config.simulation;
    empirical_coverage(
        sim.n_drops,
        &config.coverage.t_grid_db,
        &config.gain_source()?,
        &config.system,
        sim.region_radius,
    )
}

pub fn coverage(config: &RunConfig) -> Outputs {
    let curve = analytic(config)?;
    let (path, w) = create(config, "coverage_analytic.csv")?;
    write_coverage_csv(w, &curve)?;
    Ok(vec![path])
}

pub fn simulate(config: &RunConfig) -> Outputs {
    let curve = monte_carlo(config)?;
    let (path, w) = create(config, "coverage_mc.csv")?;
    write_coverage_csv(w, &curve)?;
    Ok(vec![path])
}

pub fn compare(config: &RunConfig) -> Outputs {
    let p = &config.system;
    let rows = compare_curves(
        &format!("{}x{}", p.n_tx, p.n_rx),
        &analytic(config)?,
        &monte_carlo(config)?,
    )?;
    let (path, w) = create(config, "compare.csv")?;
    write_comparison_csv(w, &rows)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct CdfRow {
    label: String,
    gain: f64,
    empirical_cdf: f64,
    exponential_cdf: f64,
}

#[derive(Serialize)]
struct ExponentialFit {
    label: String,
    dist: FittedDist,
    ks: f64,
}

/// Aligned-gain CDFs against their exponential fits.
pub fn fig2(config: &RunConfig) -> Outputs {
    const POINTS: usize = 200;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (t, r) in [(256, 64), (64, 16)] {
        let label = format!("{t}x{r}");
        let mut set = sample_gain_set(
            GainKind::Aligned,
            config.sampling.n_samples,
            &with_antennas(&config.system, t, r),
        )?;
        let dist = fit_family(&set, Family::Exponential)?;
        let ks = ks_statistic(&set.samples, &dist)?;
        set.samples.sort_by(f64::total_cmp);
        let n = set.samples.len();
        for k in 1..=POINTS {
            let idx = (k * n / POINTS).max(1) - 1;
            let gain = set.samples[idx];
            rows.push(CdfRow {
                label: label.clone(),
                gain,
                empirical_cdf: (idx + 1) as f64 / n as f64,
                exponential_cdf: dist.law.distribution(gain),
            });
        }
        fits.push(ExponentialFit { label, dist, ks });
    }
    let (csv_path, w) = create(config, "fig2.csv")?;
    write_records(w, &rows)?;
    let (json_path, w) = create(config, "fig2_fits.json")?;
    write_json(w, &fits)?;
    Ok(vec![csv_path, json_path])
}

#[derive(Serialize)]
struct RateRow {
    n_tx: usize,
    n_rx: usize,
    mu_o: f64,
    surface: f64,
    published: f64,
}

#[derive(Serialize)]
struct SurfaceReport {
    fitted: SurfaceFit,
    published: SurfaceFit,
}

/// Aligned-gain rate over the antenna grid with its power-law fit.
pub fn fig3(config: &RunConfig) -> Outputs {
    let mut grid = Vec::new();
    for &t in &ANTENNA_SIZES {
        for &r in &ANTENNA_SIZES {
            let set = sample_gain_set(
                GainKind::Aligned,
                config.sampling.n_samples,
                &with_antennas(&config.system, t, r),
            )?;
            let Law::Exponential { rate } = fit_family(&set, Family::Exponential)?.law else {
                unreachable!("exponential fit returns an exponential law")
            };
            grid.push((t, r, rate));
        }
    }
    let fitted = fit_power_surface(&grid)?;
    let rows: Vec<RateRow> = grid
        .iter()
        .map(|&(n_tx, n_rx, mu_o)| RateRow {
            n_tx,
            n_rx,
            mu_o,
            surface: fitted.rate(n_tx, n_rx),
            published: published_aligned_rate(n_tx, n_rx),
        })
        .collect();
    let (csv_path, w) = create(config, "fig3.csv")?;
    write_records(w, &rows)?;
    let (json_path, w) = create(config, "fig3_surface.json")?;
    write_json(
        w,
        &SurfaceReport {
            fitted,
            published: aligned_rate_surface(),
        },
    )?;
    Ok(vec![csv_path, json_path])
}

/// Analytic against fitted-mode Monte Carlo coverage at two antenna sizes,
/// with the published laws.
pub fn fig5(config: &RunConfig) -> Outputs {
    let grid = &config.coverage.t_grid_db;
    let sim = &config.simulation;
    let mut rows = Vec::new();
    for (t, r) in [(64, 16), (256, 64)] {
        let p = with_antennas(&config.system, t, r);
        let gx = bundled_gx(Family::LogLogistic, t, r)?;
        let mu_o = published_aligned_rate(t, r);
        let analytic = CoverageModel::new(&gx, mu_o, &p)?.curve(grid)?;
        let mc = empirical_coverage(
            sim.n_drops,
            grid,
            &GainSource::Fitted { mu_o, gx },
            &p,
            sim.region_radius,
        )?;
        rows.extend(compare_curves(&format!("{t}x{r}"), &analytic, &mc)?);
    }
    let (path, w) = create(config, "fig5.csv")?;
    write_comparison_csv(w, &rows)?;
    Ok(vec![path])
}

/// Analytic coverage at 256x64 under each published misaligned-gain law.
pub fn fig6(config: &RunConfig) -> Outputs {
    let p = with_antennas(&config.system, 256, 64);
    let mu_o = published_aligned_rate(256, 64);
    let curves = [
        Family::LogLogistic,
        Family::Burr,
        Family::LogNormal,
        Family::Nakagami,
    ]
    .iter()
    .map(|&f| {
        let curve = CoverageModel::new(&bundled_gx(f, 256, 64)?, mu_o, &p)?
            .curve(&config.coverage.t_grid_db)?;
        Ok((f.to_string(), curve))
    })
    .collect::<Result<Vec<_>, Error>>()?;
    let (path, w) = create(config, "fig6.csv")?;
    write_curve_set_csv(w, &curves)?;
    Ok(vec![path])
}
