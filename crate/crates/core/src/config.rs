//! Run configuration: a JSON document with one section per pipeline stage,
//! every field defaulted.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dist::{Family, FittedDist};
use crate::error::{Error, Result};
use crate::fit::fit_family;
use crate::gains::{sample_gain_set, GainKind};
use crate::netsim::{GainSource, DEFAULT_REGION_RADIUS};
use crate::params::SystemParams;
use crate::tables::{bundled_gx, published_aligned_rate};

/// Prefix of environment variables that override config keys; nested keys
/// are joined with `__`, e.g. `MMWAVE_SIR_SYSTEM__N_TX=16`.
pub const ENV_PREFIX: &str = "MMWAVE_SIR_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub kind: GainKind,
    pub n_samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            kind: GainKind::Aligned,
            n_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FittingConfig {
    pub families: Vec<Family>,
}

impl Default for FittingConfig {
    fn default() -> Self {
        FittingConfig {
            families: Family::ALL.to_vec(),
        }
    }
}

/// Source of the misaligned-gain law used by the coverage integral and
/// fitted-mode simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum GxSource {
    /// Fit `family` to fresh misaligned-gain samples.
    Fitted {
        family: Family,
        n_samples: usize,
    },
    /// Published parameters shipped with the crate.
    Bundled {
        family: Family,
    },
    Explicit {
        dist: FittedDist,
    },
}

/// Source of the aligned-gain exponential rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlignedRate {
    /// `0.814 (n_tx n_rx)^-0.927`.
    Published,
    /// `1 / mean` of fresh aligned-gain samples.
    Fitted {
        n_samples: usize,
    },
    Explicit {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageConfig {
    pub t_grid_db: Vec<f64>,
    pub gx: GxSource,
    pub mu_o: AlignedRate,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            t_grid_db: (-2..=6).map(|k| 5.0 * k as f64).collect(),
            gx: GxSource::Bundled {
                family: Family::LogLogistic,
            },
            mu_o: AlignedRate::Published,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainSourceKind {
    FullChannel,
    /// Uses the laws of the `coverage` section.
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_drops: usize,
    pub region_radius: f64,
    pub gain_source: GainSourceKind,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_drops: 10_000,
            region_radius: DEFAULT_REGION_RADIUS,
            gain_source: GainSourceKind::Fitted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemParams,
    pub sampling: SamplingConfig,
    pub fitting: FittingConfig,
    pub coverage: CoverageConfig,
    pub simulation: SimulationConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemParams::default(),
            sampling: SamplingConfig::default(),
            fitting: FittingConfig::default(),
            coverage: CoverageConfig::default(),
            simulation: SimulationConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.sampling.n_samples == 0 {
            return Err(Error::validation("sampling.n_samples", "must be >= 1"));
        }
        if self.fitting.families.is_empty() {
            return Err(Error::validation(
                "fitting.families",
                "must name at least one family",
            ));
        }
        validate_grid(&self.coverage.t_grid_db)?;
        match &self.coverage.gx {
            GxSource::Fitted { n_samples: 0, .. } => {
                return Err(Error::validation("coverage.gx.n_samples", "must be >= 1"));
            }
            GxSource::Bundled { family } => {
                bundled_gx(*family, self.system.n_tx, self.system.n_rx)?;
            }
            GxSource::Explicit { dist } if dist.truncation_cap.is_none() => {
                return Err(Error::validation(
                    "coverage.gx.dist.truncation_cap",
                    "a finite cap is required",
                ));
            }
            _ => {}
        }
        match self.coverage.mu_o {
            AlignedRate::Fitted { n_samples: 0 } => {
                return Err(Error::validation("coverage.mu_o.n_samples", "must be >= 1"));
            }
            AlignedRate::Explicit { value } if !(value.is_finite() && value > 0.0) => {
                return Err(Error::validation(
                    "coverage.mu_o.value",
                    format!("must be > 0, got {value}"),
                ));
            }
            _ => {}
        }
        if self.simulation.n_drops == 0 {
            return Err(Error::validation("simulation.n_drops", "must be >= 1"));
        }
        let r = self.simulation.region_radius;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::validation(
                "simulation.region_radius",
                format!("must be > 0, got {r}"),
            ));
        }
        Ok(())
    }

    /// The misaligned-gain law named by `coverage.gx`, capped at
    /// `n_tx n_rx` unless an explicit law carries its own cap.
    pub fn resolve_gx(&self) -> Result<FittedDist> {
        let p = &self.system;
        match &self.coverage.gx {
            GxSource::Bundled { family } => bundled_gx(*family, p.n_tx, p.n_rx),
            GxSource::Explicit { dist } => Ok(*dist),
            GxSource::Fitted { family, n_samples } => {
                let set = sample_gain_set(GainKind::Misaligned, *n_samples, p)?;
                fit_family(&set, *family)
            }
        }
    }

    /// The aligned-gain rate named by `coverage.mu_o`.
    pub fn resolve_mu_o(&self) -> Result<f64> {
        let p = &self.system;
        match self.coverage.mu_o {
            AlignedRate::Published => Ok(published_aligned_rate(p.n_tx, p.n_rx)),
            AlignedRate::Explicit { value } => Ok(value),
            AlignedRate::Fitted { n_samples } => {
                Ok(1.0 / sample_gain_set(GainKind::Aligned, n_samples, p)?.mean())
            }
        }
    }

    /// Gain source of the `simulation` section.
    pub fn gain_source(&self) -> Result<GainSource> {
        Ok(match self.simulation.gain_source {
            GainSourceKind::FullChannel => GainSource::FullChannel,
            GainSourceKind::Fitted => GainSource::Fitted {
                mu_o: self.resolve_mu_o()?,
                gx: self.resolve_gx()?,
            },
        })
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation("coverage.t_grid_db", "must not be empty"));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::validation(
            "coverage.t_grid_db",
            format!("non-finite threshold {x}"),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(
            "coverage.t_grid_db",
            "must be strictly increasing",
        ));
    }
    Ok(())
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(parse_error)?;
    config.validate()?;
    Ok(config)
}

/// Like [`parse_config`], applying `MMWAVE_SIR_*` overrides from `vars`.
/// Values are read as JSON when they parse as JSON and as strings otherwise.
pub fn parse_config_with_env<I>(text: &str, vars: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = (String, String)>,
{
    let overrides: Vec<(Vec<String>, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            let path = k.strip_prefix(ENV_PREFIX)?;
            Some((path.split("__").map(str::to_ascii_lowercase).collect(), v))
        })
        .collect();
    if overrides.is_empty() {
        return parse_config(text);
    }
    let mut doc: Value = serde_json::from_str(text).map_err(parse_error)?;
    for (path, raw) in overrides {
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        set_path(&mut doc, &path, value).map_err(|m| {
            Error::validation(
                format!("{ENV_PREFIX}{}", path.join("__").to_ascii_uppercase()),
                m,
            )
        })?;
    }
    let config: RunConfig = serde_json::from_value(doc).map_err(parse_error)?;
    config.validate()?;
    Ok(config)
}

fn set_path(doc: &mut Value, path: &[String], value: Value) -> std::result::Result<(), String> {
    let mut node = doc;
    for (depth, key) in path.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(format!("`{}` is not an object", path[..depth].join(".")));
        };
        if depth + 1 == path.len() {
            map.insert(key.clone(), value);
            return Ok(());
        }
        node = map
            .entry(key.clone())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err("empty key".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c = parse_config("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.system.carrier_freq, 28e9);
        assert_eq!(c.system.bs_density, 1e-4);
        assert_eq!(c.system.rng_seed, 0);
    }

    #[test]
    fn zero_antennas_names_field() {
        match parse_config(r#"{"system": {"n_tx": 0}}"#) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "system.n_tx"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_document_reports_line() {
        match parse_config("{\n  \"system\": {\n    \"n_tx\": ,\n  }\n}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_config(r#"{"sytem": {}}"#),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn round_trip() {
        let doc = r#"{
            "system": {"n_tx": 64, "n_rx": 16, "rng_seed": 7, "array_geometry": "linear"},
            "sampling": {"kind": "misaligned", "n_samples": 500},
            "fitting": {"families": ["log_logistic", "burr"]},
            "coverage": {
                "t_grid_db": [-5, 0, 5],
                "gx": {"source": "explicit", "dist": {"family": "burr", "params": {"c": 0.7, "k": 0.5}, "truncation_cap": 1024}},
                "mu_o": {"source": "explicit", "value": 0.002}
            },
            "simulation": {"n_drops": 10, "region_radius": 1500, "gain_source": "full_channel"},
            "output_dir": "results"
        }"#;
        let c = parse_config(doc).unwrap();
        let again = parse_config(&serde_json::to_string_pretty(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn grid_and_counts_validated() {
        for (doc, field) in [
            (
                r#"{"coverage": {"t_grid_db": [0, 0]}}"#,
                "coverage.t_grid_db",
            ),
            (r#"{"coverage": {"t_grid_db": []}}"#, "coverage.t_grid_db"),
            (r#"{"sampling": {"n_samples": 0}}"#, "sampling.n_samples"),
            (r#"{"simulation": {"n_drops": 0}}"#, "simulation.n_drops"),
            (r#"{"system": {"n_tx": 8}}"#, "system.n_tx"),
            (
                r#"{"system": {"n_tx": 16, "n_rx": 4}, "coverage": {"gx": {"source": "bundled", "family": "burr"}}}"#,
                "coverage.gx",
            ),
        ] {
            match parse_config(doc) {
                Err(Error::Validation { field: f, .. }) => assert_eq!(f, field, "{doc}"),
                other => panic!("{doc}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn resolves_sources() {
        let c = parse_config(r#"{"system": {"n_tx": 64, "n_rx": 16}}"#).unwrap();
        assert_eq!(
            c.resolve_gx().unwrap().law,
            crate::dist::Law::LogLogistic { a: 3.28, b: 0.612 }
        );
        assert_eq!(c.resolve_mu_o().unwrap(), 0.814 * 1024f64.powf(-0.927));
        let doc = r#"{"system": {"n_tx": 16, "n_rx": 4},
            "coverage": {"gx": {"source": "fitted", "family": "log_logistic", "n_samples": 2000},
                         "mu_o": {"source": "fitted", "n_samples": 2000}}}"#;
        let c = parse_config(doc).unwrap();
        assert_eq!(c.resolve_gx().unwrap().truncation_cap, Some(64.0));
        assert!(c.resolve_mu_o().unwrap() > 0.0);
        assert!(matches!(
            c.gain_source().unwrap(),
            GainSource::Fitted { .. }
        ));
    }

    #[test]
    fn env_overrides() {
        let vars = vec![
            ("MMWAVE_SIR_SYSTEM__N_TX".to_string(), "64".to_string()),
            ("MMWAVE_SIR_SYSTEM__N_RX".to_string(), "16".to_string()),
            ("MMWAVE_SIR_OUTPUT_DIR".to_string(), "elsewhere".to_string()),
            ("UNRELATED".to_string(), "1".to_string()),
        ];
        let c = parse_config_with_env("{}", vars).unwrap();
        assert_eq!((c.system.n_tx, c.system.n_rx), (64, 16));
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
        let bad = parse_config_with_env("{}", vec![("MMWAVE_SIR_SYSTEM__N_TX".into(), "0".into())]);
        assert!(matches!(bad, Err(Error::Validation { .. })));
    }
}
