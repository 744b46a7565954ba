//! Scenario configuration: defaults, file loading, `key=value` overrides and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{dbm_to_watts, megabytes_to_bits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deployment {
    /// One macro BS per cell.
    Sa,
    /// One macro BS plus a ring of small BSs per cell.
    Nsa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Affinity-propagation clusters with bargaining power control.
    ApComp,
    /// Each edge user served by its `cluster_size` strongest BSs.
    CommonComp,
    /// Each edge user served by its strongest BS only.
    NoComp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::ApComp, Algorithm::CommonComp, Algorithm::NoComp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::ApComp => "ap_comp",
            Algorithm::CommonComp => "common_comp",
            Algorithm::NoComp => "no_comp",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ap_comp" => Ok(Algorithm::ApComp),
            "common_comp" => Ok(Algorithm::CommonComp),
            "no_comp" => Ok(Algorithm::NoComp),
            other => Err(Error::config(
                "algorithm",
                format!("unknown algorithm `{other}` (expected ap_comp, common_comp or no_comp)"),
            )),
        }
    }
}

/// Traffic model for BSs that serve no scheduled edge user on a PRB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Load {
    /// Idle BSs fill the PRB with one of their own cell-centre users (reuse factor 1).
    FullBuffer,
    /// Only BSs serving scheduled edge users transmit.
    EdgeOnly,
}

/// Every tunable of one simulated scenario. Defaults reproduce the reference
/// parameter table: 19 cells, 3 MHz, 43 dBm, 15 PRBs, 100 users per cell,
/// 5 dB antenna gain and -174 dBm/Hz noise density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub deployment: Deployment,
    pub algorithm: Algorithm,
    pub n_cells: usize,
    pub cell_radius_m: f64,
    pub users_per_cell: usize,
    pub small_bs_per_cell: usize,
    pub macro_small_distance_m: f64,
    pub bs_max_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub n_prb: usize,
    pub antenna_gain_db: f64,
    pub noise_psd_dbm_hz: f64,
    /// CBS size of the common-CoMP baseline.
    pub cluster_size: usize,
    pub damping: f64,
    pub max_iterations: usize,
    pub stability_window: usize,
    /// Affinity-propagation preference in dBm; `None` uses the median similarity.
    pub ap_preference_dbm: Option<f64>,
    pub edge_margin_db: f64,
    pub edge_users_per_cell: usize,
    pub rho0_dbm: f64,
    pub p0_dbm: f64,
    pub file_size_mb: f64,
    /// 2^20-byte megabytes when true, 10^6 otherwise.
    pub binary_megabytes: bool,
    pub load: Load,
    pub n_drops: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            deployment: Deployment::Sa,
            algorithm: Algorithm::ApComp,
            n_cells: 19,
            cell_radius_m: 50.0,
            users_per_cell: 100,
            small_bs_per_cell: 6,
            macro_small_distance_m: 50.0,
            bs_max_power_dbm: 43.0,
            bandwidth_hz: 3.0e6,
            n_prb: 15,
            antenna_gain_db: 5.0,
            noise_psd_dbm_hz: -174.0,
            cluster_size: 3,
            damping: 0.5,
            max_iterations: 200,
            stability_window: 10,
            ap_preference_dbm: None,
            edge_margin_db: 6.0,
            edge_users_per_cell: 15,
            rho0_dbm: -75.0,
            p0_dbm: -110.0,
            file_size_mb: 100.0,
            binary_megabytes: true,
            load: Load::FullBuffer,
            n_drops: 20,
            seed: 1,
        }
    }
}

/// Keys accepted in config files and `--set` overrides.
pub const CONFIG_KEYS: &[&str] = &[
    "deployment",
    "algorithm",
    "n_cells",
    "cell_radius_m",
    "users_per_cell",
    "small_bs_per_cell",
    "macro_small_distance_m",
    "bs_max_power_dbm",
    "bandwidth_hz",
    "n_prb",
    "antenna_gain_db",
    "noise_psd_dbm_hz",
    "cluster_size",
    "damping",
    "max_iterations",
    "stability_window",
    "ap_preference_dbm",
    "edge_margin_db",
    "edge_users_per_cell",
    "rho0_dbm",
    "p0_dbm",
    "file_size_mb",
    "binary_megabytes",
    "load",
    "n_drops",
    "seed",
];

impl ScenarioConfig {
    /// Parses a TOML document, applies `key=value` overrides on top and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::config("<config file>", e.to_string()))?;
        for key in table.keys() {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::config(key.clone(), "unknown configuration key"));
            }
        }
        for ov in overrides {
            let (key, value) = parse_override(ov)?;
            table.insert(key, value);
        }
        let cfg: ScenarioConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("<config file>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("config", format!("cannot read `{}`: {e}", path.display()))
        })?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let c = self;
        if !(50.0..=500.0).contains(&c.cell_radius_m) {
            return Err(Error::config(
                "cell_radius_m",
                format!("{} m is outside [50, 500] m", c.cell_radius_m),
            ));
        }
        if c.users_per_cell == 0 {
            return Err(Error::config("users_per_cell", "must be at least 1"));
        }
        if rings_for_cells(c.n_cells).is_none() {
            return Err(Error::config(
                "n_cells",
                format!(
                    "{} is not a hexagonal ring count (1, 7, 19, 37, ...)",
                    c.n_cells
                ),
            ));
        }
        if c.deployment == Deployment::Nsa {
            if c.small_bs_per_cell == 0 {
                return Err(Error::config(
                    "small_bs_per_cell",
                    "NSA needs at least one small BS",
                ));
            }
            if !(c.macro_small_distance_m > 0.0 && c.macro_small_distance_m <= c.cell_radius_m) {
                return Err(Error::config(
                    "macro_small_distance_m",
                    "must lie in (0, cell_radius_m]",
                ));
            }
        }
        if !(c.bandwidth_hz > 0.0) {
            return Err(Error::config("bandwidth_hz", "must be positive"));
        }
        if c.n_prb == 0 {
            return Err(Error::config("n_prb", "must be at least 1"));
        }
        if c.cluster_size == 0 {
            return Err(Error::config("cluster_size", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&c.damping) {
            return Err(Error::config("damping", "must lie in [0, 1)"));
        }
        if c.max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be at least 1"));
        }
        if c.stability_window == 0 {
            return Err(Error::config("stability_window", "must be at least 1"));
        }
        if !(c.edge_margin_db > 0.0) {
            return Err(Error::config("edge_margin_db", "must be positive"));
        }
        if c.edge_users_per_cell == 0 {
            return Err(Error::config("edge_users_per_cell", "must be at least 1"));
        }
        if !(c.file_size_mb > 0.0) {
            return Err(Error::config("file_size_mb", "must be positive"));
        }
        if c.n_drops == 0 {
            return Err(Error::config("n_drops", "must be at least 1"));
        }
        for (name, v) in [
            ("bs_max_power_dbm", c.bs_max_power_dbm),
            ("antenna_gain_db", c.antenna_gain_db),
            ("noise_psd_dbm_hz", c.noise_psd_dbm_hz),
            ("rho0_dbm", c.rho0_dbm),
            ("p0_dbm", c.p0_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn p_max_w(&self) -> f64 {
        dbm_to_watts(self.bs_max_power_dbm)
    }

    pub fn p0_w(&self) -> f64 {
        dbm_to_watts(self.p0_dbm)
    }

    pub fn rho0_w(&self) -> f64 {
        dbm_to_watts(self.rho0_dbm)
    }

    pub fn file_size_bits(&self) -> f64 {
        megabytes_to_bits(self.file_size_mb, self.binary_megabytes)
    }

    /// Bandwidth of one PRB in Hz.
    pub fn prb_bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_prb as f64
    }
}

/// Number of hexagonal rings around the centre cell giving `n` cells, if any.
pub fn rings_for_cells(n: usize) -> Option<usize> {
    (0..64).find(|&k| 1 + 3 * k * (k + 1) == n)
}

fn parse_override(ov: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| Error::config(ov, "override must have the form key=value"))?;
    let key = key.trim();
    if !CONFIG_KEYS.contains(&key) {
        return Err(Error::config(key, "unknown configuration key"));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}
