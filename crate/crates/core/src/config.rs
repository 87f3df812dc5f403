//! Run configuration (TOML, schema version 1) and the bundled figure presets.
//!
//! ```toml
//! version = 1                    # required
//! [physical]                     # optional, defaults shown by `PhysicalConfig::default`
//! [mission]                      # optional
//! [links]                        # mbs_ue, uav_ue, backhaul: "ohplm" | "mplm" | "fspl" | "uma_av_los"
//! [mplm]                         # building statistics and LoS exponent variant
//! [relay]                        # rule = "backhaul_sir" (default) | "best_direct"
//! [planner]                      # cell_m
//! [experiment]                   # required: master_seed; sweep axes and realization count
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::antenna::AntennaMode;
use crate::grid::Lattice;
use crate::metrics::{SweepAxes, SweepInput};
use crate::pathloss::{MixtureParams, PathLossModel, BACKHAUL_MAX_ALTITUDE, BACKHAUL_MIN_ALTITUDE};
use crate::planner::{feasibility_check, ActionSet};
use crate::radio::{Criterion, LinkModels, Mode, RadioSetup, RelayRule};
use crate::scenario::{Mission, PhysicalConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Ohplm,
    Mplm,
    Fspl,
    UmaAvLos,
}

impl LinkKind {
    pub fn model(self, mplm: &MixtureParams) -> PathLossModel {
        match self {
            LinkKind::Ohplm => PathLossModel::Ohplm,
            LinkKind::Mplm => PathLossModel::Mplm(*mplm),
            LinkKind::Fspl => PathLossModel::Fspl,
            LinkKind::UmaAvLos => PathLossModel::Backhaul3gpp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinksConfig {
    pub mbs_ue: LinkKind,
    pub uav_ue: LinkKind,
    pub backhaul: Option<LinkKind>,
}

impl Default for LinksConfig {
    fn default() -> Self {
        Self { mbs_ue: LinkKind::Ohplm, uav_ue: LinkKind::Ohplm, backhaul: Some(LinkKind::UmaAvLos) }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelayConfig {
    pub rule: RelayRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub cell_m: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { cell_m: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// Defaults to `[mission.duration_s]`.
    #[serde(default)]
    pub durations_s: Option<Vec<f64>>,
    /// Defaults to `[physical.lambda_mbs]`.
    #[serde(default)]
    pub mbs_densities: Option<Vec<f64>>,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    /// Defaults to `[links.uav_ue]`.
    #[serde(default)]
    pub uav_ue_models: Option<Vec<LinkKind>>,
    #[serde(default = "default_antennas")]
    pub antennas: Vec<AntennaMode>,
}

fn default_realizations() -> usize {
    30
}
fn default_criteria() -> Vec<Criterion> {
    Criterion::ALL.to_vec()
}
fn default_modes() -> Vec<Mode> {
    vec![Mode::Standalone]
}
fn default_antennas() -> Vec<AntennaMode> {
    vec![AntennaMode::Omni]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub physical: PhysicalConfig,
    #[serde(default)]
    pub mission: Mission,
    #[serde(default)]
    pub links: LinksConfig,
    #[serde(default)]
    pub mplm: MixtureParams,
    #[serde(default)]
    pub relay: RelayConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{} violation(s):\n  {}", .0.len(), .0.join("\n  "))]
    Invalid(Vec<String>),
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn durations(&self) -> Vec<f64> {
        self.experiment.durations_s.clone().unwrap_or_else(|| vec![self.mission.duration_s])
    }

    pub fn densities(&self) -> Vec<f64> {
        self.experiment.mbs_densities.clone().unwrap_or_else(|| vec![self.physical.lambda_mbs])
    }

    pub fn uav_ue_kinds(&self) -> Vec<LinkKind> {
        self.experiment.uav_ue_models.clone().unwrap_or_else(|| vec![self.links.uav_ue])
    }

    pub fn base_setup(&self) -> RadioSetup {
        RadioSetup {
            models: LinkModels {
                mbs_ue: self.links.mbs_ue.model(&self.mplm),
                uav_ue: self.links.uav_ue.model(&self.mplm),
                backhaul: self.links.backhaul.map(|k| k.model(&self.mplm)),
            },
            antenna: AntennaMode::Omni,
            mode: Mode::Standalone,
            relay_rule: self.relay.rule,
        }
    }

    /// Every violated constraint; empty means the configuration is runnable.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.version != SCHEMA_VERSION {
            out.push(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version));
        }
        let p = &self.physical;
        out.extend(p.violations().into_iter().map(|v| format!("physical: {v}")));
        let m = &self.mission;
        for t in self.durations() {
            let mission = Mission { duration_s: t, ..m.clone() };
            for v in mission.violations(p.v_max) {
                let v = format!("mission: {v}");
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out.extend(self.mplm.buildings.violations().into_iter().map(|v| format!("mplm: {v}")));

        let e = &self.experiment;
        if e.realizations == 0 {
            out.push("experiment: realizations must be at least 1".into());
        }
        let lists = [
            ("criteria", e.criteria.is_empty()),
            ("modes", e.modes.is_empty()),
            ("antennas", e.antennas.is_empty()),
            ("durations_s", self.durations().is_empty()),
            ("mbs_densities", self.densities().is_empty()),
            ("uav_ue_models", self.uav_ue_kinds().is_empty()),
        ];
        for (name, empty) in lists {
            if empty {
                out.push(format!("experiment: {name} must not be empty"));
            }
        }
        for d in self.densities() {
            if !(d > 0.0) {
                out.push(format!("experiment: MBS density must be positive, got {d}"));
            }
        }

        let mut used = vec![self.links.mbs_ue];
        used.extend(self.uav_ue_kinds());
        if used.contains(&LinkKind::UmaAvLos) {
            out.push("links: the backhaul model cannot serve an access link".into());
        }
        if used.contains(&LinkKind::Ohplm) && !(150.0..=1500.0).contains(&p.f_c_mhz) {
            out.push(format!(
                "physical: carrier {} MHz outside the Okumura-Hata range 150-1500 MHz",
                p.f_c_mhz
            ));
        }
        if e.modes.contains(&Mode::Relay) {
            match self.links.backhaul {
                None => out.push("links: relay mode requires a backhaul model".into()),
                Some(LinkKind::UmaAvLos) => {
                    if !(BACKHAUL_MIN_ALTITUDE..=BACKHAUL_MAX_ALTITUDE).contains(&p.h_uav) {
                        out.push(format!(
                            "physical: h_uav {} m outside the backhaul model range [{BACKHAUL_MIN_ALTITUDE}, {BACKHAUL_MAX_ALTITUDE}] m",
                            p.h_uav
                        ));
                    }
                }
                Some(_) => {}
            }
        }

        let cell = self.planner.cell_m;
        if !(cell > 0.0) {
            out.push(format!("planner: cell_m must be positive, got {cell}"));
            return out;
        }
        let lattice = match Lattice::covering(&m.area_uav, cell) {
            Ok(l) => l,
            Err(err) => {
                out.push(format!("planner: {err}"));
                return out;
            }
        };
        if m.stage_s > 0.0 {
            let actions = ActionSet::standard(cell, m.stage_s);
            if let Err(err) = actions.check_speed(p.v_max) {
                out.push(format!("planner: {err}"));
            }
            for t in self.durations() {
                if t < m.t_min(p.v_max) || mission_stages(m, t).is_none() {
                    continue;
                }
                let mission = Mission { duration_s: t, ..m.clone() };
                match feasibility_check(&mission, &lattice, &actions) {
                    Ok(r) if !r.feasible() => out.push(format!(
                        "experiment: duration {t} s gives {} stages but the finish needs {}",
                        r.available,
                        r.min_stages.map_or("∞".to_string(), |v| v.to_string())
                    )),
                    Ok(_) => {}
                    Err(err) => out.push(format!("experiment: duration {t} s: {err}")),
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(d))
        }
    }

    pub fn sweep_input(&self) -> SweepInput {
        SweepInput {
            physical: self.physical.clone(),
            mission: self.mission.clone(),
            base_setup: self.base_setup(),
            cell_m: self.planner.cell_m,
            axes: SweepAxes {
                durations_s: self.durations(),
                mbs_densities: self.densities(),
                criteria: self.experiment.criteria.clone(),
                modes: self.experiment.modes.clone(),
                uav_ue_models: self.uav_ue_kinds().into_iter().map(|k| k.model(&self.mplm)).collect(),
                antennas: self.experiment.antennas.clone(),
            },
            realizations: self.experiment.realizations,
            master_seed: self.experiment.master_seed,
        }
    }
}

fn mission_stages(m: &Mission, t: f64) -> Option<usize> {
    Mission { duration_s: t, ..m.clone() }.stages().ok()
}

/// Configuration text from a TOML file, or from the `config_toml` field of a
/// run manifest (any `.json` path).
pub fn read_config_text(path: &Path) -> Result<String, ConfigError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Unreadable { path: path.display().to_string(), source })?;
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        return v
            .get("config_toml")
            .and_then(|c| c.as_str())
            .map(str::to_owned)
            .ok_or_else(|| ConfigError::Parse(format!("{}: manifest has no config_toml field", path.display())));
    }
    Ok(raw)
}

pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

/// Text of a bundled preset.
pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => include_str!("../presets/fig2.toml"),
        "fig3" => include_str!("../presets/fig3.toml"),
        "fig4" => include_str!("../presets/fig4.toml"),
        "fig5" => include_str!("../presets/fig5.toml"),
        "fig6" => include_str!("../presets/fig6.toml"),
        "fig7" => include_str!("../presets/fig7.toml"),
        _ => return None,
    })
}
