//! Import options, fuel mappings, and the plain key-value config format.
//!
//! A config file is UTF-8 text with one `key = value` pair per line and `#`
//! comments. Recognized keys mirror [`ScenarioConfig`] plus import knobs:
//!
//! ```text
//! target_res_share = 0.5
//! alpha_mean = 5.0
//! alpha_std = 1.0
//! rng_seed = 1
//! homes_per_mw = 800
//! blocks_per_generator = 3
//! load_bid_value = 20.0
//! class.wind = green          # fuel-to-class override
//! emission.coal = 1000        # kg CO2e/MWh override
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::orderbook::EnergyClass;
use crate::scenario::ScenarioConfig;

use super::IoError;

/// Knobs for turning a case file into a network and order book.
#[derive(Debug, Clone)]
pub struct ImportOptions {
    /// Maximum offer blocks produced when linearizing generator cost curves.
    pub blocks_per_generator: usize,
    /// $/MWh bid assigned to fixed demand imported from case files.
    pub load_bid_value: f64,
    /// Fuel name to energy class.
    pub fuel_classes: BTreeMap<String, EnergyClass>,
    /// Fuel name to kg CO2e/MWh.
    pub emission_factors: BTreeMap<String, f64>,
}

impl Default for ImportOptions {
    fn default() -> Self {
        let mut fuel_classes = BTreeMap::new();
        for fuel in ["wind", "solar", "hydro", "nuclear"] {
            fuel_classes.insert(fuel.to_string(), EnergyClass::Green);
        }
        for fuel in ["coal", "gas", "ng", "oil", "dfo", "lignite"] {
            fuel_classes.insert(fuel.to_string(), EnergyClass::Black);
        }
        let mut emission_factors = BTreeMap::new();
        for (fuel, factor) in [
            ("coal", 1000.0),
            ("lignite", 1000.0),
            ("gas", 500.0),
            ("ng", 500.0),
            ("oil", 800.0),
            ("dfo", 800.0),
            ("nuclear", 5.0),
            ("hydro", 10.0),
            ("wind", 12.0),
            ("solar", 45.0),
        ] {
            emission_factors.insert(fuel.to_string(), factor);
        }
        ImportOptions {
            blocks_per_generator: 3,
            load_bid_value: 20.0,
            fuel_classes,
            emission_factors,
        }
    }
}

impl ImportOptions {
    pub fn class_for_fuel(&self, fuel: &str) -> Option<EnergyClass> {
        self.fuel_classes.get(&fuel.to_ascii_lowercase()).copied()
    }

    /// Emission factor for a fuel, falling back to a class-level default
    /// (green 50, black 700) when the fuel is unmapped.
    pub fn emission_for_fuel(&self, fuel: &str, class: EnergyClass) -> f64 {
        self.emission_factors
            .get(&fuel.to_ascii_lowercase())
            .copied()
            .unwrap_or(match class {
                EnergyClass::Green => 50.0,
                EnergyClass::Black => 700.0,
            })
    }
}

/// Parsed contents of a config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub scenario: ScenarioConfigPatch,
    pub import: ImportOptionsPatch,
}

/// Partial scenario settings; unset keys keep their defaults.
#[derive(Debug, Clone, Default)]
pub struct ScenarioConfigPatch {
    pub target_res_share: Option<f64>,
    pub alpha_mean: Option<f64>,
    pub alpha_std: Option<f64>,
    pub rng_seed: Option<u64>,
    pub homes_per_mw: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ImportOptionsPatch {
    pub blocks_per_generator: Option<usize>,
    pub load_bid_value: Option<f64>,
    pub fuel_classes: BTreeMap<String, EnergyClass>,
    pub emission_factors: BTreeMap<String, f64>,
}

impl ConfigFile {
    pub fn apply_scenario(&self, base: ScenarioConfig) -> ScenarioConfig {
        let p = &self.scenario;
        ScenarioConfig {
            target_res_share: p.target_res_share.unwrap_or(base.target_res_share),
            alpha_mean: p.alpha_mean.unwrap_or(base.alpha_mean),
            alpha_std: p.alpha_std.unwrap_or(base.alpha_std),
            rng_seed: p.rng_seed.unwrap_or(base.rng_seed),
            homes_per_mw: p.homes_per_mw.unwrap_or(base.homes_per_mw),
        }
    }

    pub fn apply_import(&self, mut base: ImportOptions) -> ImportOptions {
        let p = &self.import;
        if let Some(k) = p.blocks_per_generator {
            base.blocks_per_generator = k;
        }
        if let Some(v) = p.load_bid_value {
            base.load_bid_value = v;
        }
        for (fuel, class) in &p.fuel_classes {
            base.fuel_classes.insert(fuel.clone(), *class);
        }
        for (fuel, factor) in &p.emission_factors {
            base.emission_factors.insert(fuel.clone(), *factor);
        }
        base
    }
}

/// Reads a key-value config file.
pub fn read_config(path: &Path) -> Result<ConfigFile, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

pub fn parse_config(text: &str, path: &str) -> Result<ConfigFile, IoError> {
    let mut cfg = ConfigFile::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(path, lineno, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        let bad_num = |_| parse_err(path, lineno, format!("`{value}` is not a number"));
        match key {
            "target_res_share" => {
                cfg.scenario.target_res_share = Some(value.parse().map_err(bad_num)?)
            }
            "alpha_mean" => cfg.scenario.alpha_mean = Some(value.parse().map_err(bad_num)?),
            "alpha_std" => cfg.scenario.alpha_std = Some(value.parse().map_err(bad_num)?),
            "rng_seed" => {
                cfg.scenario.rng_seed = Some(value.parse().map_err(|_| {
                    parse_err(path, lineno, format!("`{value}` is not an integer seed"))
                })?)
            }
            "homes_per_mw" => cfg.scenario.homes_per_mw = Some(value.parse().map_err(bad_num)?),
            "blocks_per_generator" => {
                cfg.import.blocks_per_generator = Some(value.parse().map_err(|_| {
                    parse_err(path, lineno, format!("`{value}` is not a block count"))
                })?)
            }
            "load_bid_value" => cfg.import.load_bid_value = Some(value.parse().map_err(bad_num)?),
            _ => {
                if let Some(fuel) = key.strip_prefix("class.") {
                    let class = match value {
                        "green" => EnergyClass::Green,
                        "black" => EnergyClass::Black,
                        other => {
                            return Err(parse_err(
                                path,
                                lineno,
                                format!("class must be green or black, got `{other}`"),
                            ))
                        }
                    };
                    cfg.import
                        .fuel_classes
                        .insert(fuel.trim().to_ascii_lowercase(), class);
                } else if let Some(fuel) = key.strip_prefix("emission.") {
                    cfg.import
                        .emission_factors
                        .insert(fuel.trim().to_ascii_lowercase(), value.parse().map_err(bad_num)?);
                } else {
                    return Err(parse_err(path, lineno, format!("unknown key `{key}`")));
                }
            }
        }
    }
    Ok(cfg)
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}
