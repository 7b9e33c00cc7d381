//! Experiment configuration.
//!
//! A config is a TOML file deep-merged over the embedded defaults in
//! `data/defaults.toml`, then deserialized strictly: unknown keys are
//! rejected with their full path. `experiment.name` and `experiment.mode`
//! have no default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::analysis::AnalysisOptions;
use crate::error::{Error, Result};
use crate::fec::DecoderMode;
use crate::lifetime::{Currents, DutyProfile};
use crate::network::NetworkConfig;
use crate::phy::{PhyProfile, SfIndex};
use crate::schemes::SchemeConfig;

pub const DEFAULTS_TOML: &str = include_str!("../data/defaults.toml");

const REQUIRED: [&str; 2] = ["experiment.name", "experiment.mode"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analysis,
    Simulate,
    Both,
}

impl Mode {
    pub fn analysis(self) -> bool {
        matches!(self, Mode::Analysis | Mode::Both)
    }

    pub fn simulate(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Fresh uniform positions on the disc every run.
    Uniform,
    /// Fixed equal-area rings, same positions every run.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    pub mode: Mode,
    pub seed: u64,
    pub runs: u32,
    pub proposed_decoder: DecoderMode,
    pub schemes: Vec<SchemeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    pub recipients: u32,
    pub radius_m: f64,
    pub placement: Placement,
    pub distance_bins: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(flatten)]
    pub options: AnalysisOptions,
    pub distance_panels: usize,
    pub distance_order: usize,
    /// Nodes per distance bin for the per-distance analytical values.
    pub bin_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub w: Vec<u32>,
    pub l: Vec<SfIndex>,
    pub m: SfIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    pub cap_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeCase {
    pub radius_fraction: f64,
    pub uplink_sf: SfIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeSection {
    pub battery_mah: f64,
    pub updates_per_month: f64,
    pub uplink_period_hr: f64,
    pub uplink_payload_bytes: u32,
    pub currents_ma: Currents,
    pub cases: Vec<LifetimeCase>,
    pub lifetime_schemes: Vec<SchemeConfig>,
}

impl LifetimeSection {
    pub fn profile(&self, uplink_sf: SfIndex) -> DutyProfile {
        DutyProfile {
            battery_mah: self.battery_mah,
            updates_per_month: self.updates_per_month,
            uplink_period_hr: self.uplink_period_hr,
            uplink_payload_bytes: self.uplink_payload_bytes,
            uplink_sf,
            currents_ma: self.currents_ma,
        }
    }
}

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub layout: Layout,
    pub analysis: AnalysisSection,
    pub sweep: Sweep,
    pub simulation: Simulation,
    pub network: NetworkConfig,
    pub phy: PhyProfile,
    pub lifetime: LifetimeSection,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        self.phy.validate()?;
        self.network.validate()?;
        if self.experiment.schemes.is_empty() {
            return bad("experiment.schemes must not be empty");
        }
        for s in &self.experiment.schemes {
            s.validate()?;
        }
        if !(self.layout.radius_m > 0.0) {
            return bad("layout.radius_m must be positive");
        }
        if self.layout.recipients == 0 || self.layout.distance_bins == 0 {
            return bad("layout.recipients and layout.distance_bins must be positive");
        }
        if self.analysis.distance_panels == 0
            || self.analysis.distance_order == 0
            || self.analysis.bin_order == 0
        {
            return bad("analysis quadrature sizes must be positive");
        }
        if self.sweep.w.contains(&0) || self.sweep.l.iter().any(|&l| l > self.sweep.m) {
            return bad("sweep needs w >= 1 and every L <= M");
        }
        if !(self.simulation.cap_factor >= 1.0) {
            return bad("simulation.cap_factor must be at least 1");
        }
        for case in &self.lifetime.cases {
            if !(case.radius_fraction > 0.0) {
                return bad("lifetime case radius_fraction must be positive");
            }
        }
        self.lifetime.profile(SfIndex::MAX).validate()?;
        for s in &self.experiment.schemes {
            if let SchemeConfig::FixedSf { sf, .. } = s {
                if sf.value() < 10 {
                    log::warn!("{} may not reach recipients near the edge", s.label());
                }
            }
        }
        Ok(())
    }

    /// Decoder statistics for `scheme`.
    pub fn fec_for(&self, scheme: &SchemeConfig) -> crate::fec::RatelessModel {
        self.network.fec.with_mode(scheme.decoder(self.experiment.proposed_decoder))
    }

    /// Canonical JSON form, stable across runs.
    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Hex SHA-256 of the canonical JSON, truncated to 16 characters.
    pub fn fingerprint(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical_json()?.as_bytes());
        Ok(hex::encode(digest)[..16].to_string())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Config { path: "<spec>".into(), message: e.to_string() })
    }
}

fn merge(base: &mut Table, overlay: Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn lookup<'a>(table: &'a Table, dotted: &str) -> Option<&'a Value> {
    let mut parts = dotted.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

/// Parses config text merged over the defaults. `origin` labels errors.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentSpec> {
    let cfg_err = |message: String| Error::Config { path: origin.into(), message };
    let user: Table = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
    let missing: Vec<String> =
        REQUIRED.iter().filter(|k| lookup(&user, k).is_none()).map(|k| k.to_string()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingFields(missing));
    }
    let mut merged: Table = toml::from_str(DEFAULTS_TOML).expect("embedded defaults parse");
    merge(&mut merged, user);
    let merged_text = toml::to_string(&merged).map_err(|e| cfg_err(e.to_string()))?;
    let de = toml::Deserializer::parse(&merged_text).map_err(|e| cfg_err(e.to_string()))?;
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| cfg_err(format!("at `{}`: {}", e.path(), e.inner())))?;
    spec.validate().map_err(|e| cfg_err(e.to_string()))?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

/// Spec holding only the defaults plus a name and mode.
pub fn default_spec(name: &str, mode: Mode) -> ExperimentSpec {
    let mode = serde_json::to_value(mode).expect("mode serializes");
    let text = format!("[experiment]\nname = {name:?}\nmode = {mode}\n");
    parse_config(&text, "<defaults>").expect("defaults are valid")
}
