//! `run` orchestration: sweep, showcase artifacts, manifest, and the
//! all-or-nothing writer.
//!
//! Output layout (all CSV is UTF-8 with LF line endings):
//!
//! | file | columns |
//! |---|---|
//! | `sweep.csv` | duration_s, mbs_density, criterion, mode, uav_ue_model, antenna, path, mean_capacity, stderr_capacity, mean_outage, stderr_outage, n |
//! | `trajectory_<tag>_<criterion>.csv` | stage, t, x, y, v, heading, stage_reward |
//! | `smoothed_<tag>_<criterion>.csv` | t, x, y, speed |
//! | `heatmap_<tag>_<criterion>.csv` | x, y, reward, max_sir_db |
//!
//! `<tag>` is `<mode>_<uav_ue_model>_<antenna>`. `sweep.json` holds the
//! per-realization samples, `trajectories.json` the showcase paths,
//! `scenario.json` the showcase network, and `manifest.json` the config echo
//! plus the size and SHA-256 of every other file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::Result;
use crate::metrics::{monte_carlo_sweep, plan_and_measure, PlannedRun, SweepResult};
use crate::planner::{ActionSet, StateGrid};
use crate::radio::{build_reward_map, Criterion, LinkModels, Mode, RadioSetup, RewardMap};
use crate::antenna::AntennaMode;
use crate::pathloss::PathLossModel;
use crate::rng::realization_seed;
use crate::scenario::{generate_scenario, Mission, PhysicalConfig, Scenario};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub master_seed: u64,
    pub realizations: usize,
    pub config: &'a RunConfig,
    /// Exact configuration text; `run --config manifest.json` replays it.
    pub config_toml: &'a str,
    pub files: Vec<FileEntry>,
}

/// One (mode, UAV→UE model, antenna) combination with its planned runs.
struct Showcase {
    tag: String,
    map: RewardMap,
    runs: Vec<(Criterion, PlannedRun)>,
}

#[derive(Serialize)]
struct ShowcaseJson<'a> {
    tag: &'a str,
    criterion: Criterion,
    trajectory: &'a crate::planner::Trajectory,
    smoothed: &'a crate::smoothing::SmoothedTrajectory,
    discrete_metrics: &'a crate::metrics::RunMetrics,
    smoothed_metrics: &'a crate::metrics::RunMetrics,
}

fn combo_tag(mode: Mode, model: &PathLossModel, antenna: AntennaMode) -> String {
    format!("{}_{}_{}", mode.name(), model.name(), antenna.name())
}

/// Showcase point: the configured mission time and MBS density when they are
/// on the sweep axes, otherwise the first axis value.
fn showcase_point(config: &RunConfig) -> (f64, f64) {
    let durations = config.durations();
    let densities = config.densities();
    let t = if durations.contains(&config.mission.duration_s) { config.mission.duration_s } else { durations[0] };
    let l = if densities.contains(&config.physical.lambda_mbs) { config.physical.lambda_mbs } else { densities[0] };
    (t, l)
}

/// Realization 0 of the showcase point, as used for the trajectory and heat
/// map files.
pub fn showcase_scenario(config: &RunConfig) -> Result<Scenario> {
    let (t, lambda) = showcase_point(config);
    let physical = PhysicalConfig { lambda_mbs: lambda, ..config.physical.clone() };
    let mission = Mission { duration_s: t, ..config.mission.clone() };
    generate_scenario(&physical, &mission, realization_seed(config.experiment.master_seed, 0))
}

fn showcases(config: &RunConfig, scenario: &Scenario) -> Result<Vec<Showcase>> {
    let base = config.base_setup();
    let grid = StateGrid::for_mission(&scenario.mission, config.planner.cell_m)?;
    let actions = ActionSet::standard(config.planner.cell_m, scenario.mission.stage_s);
    let mut out = Vec::new();
    for &mode in &config.experiment.modes {
        for kind in config.uav_ue_kinds() {
            for &antenna in &config.experiment.antennas {
                let model = kind.model(&config.mplm);
                let setup = RadioSetup {
                    models: LinkModels { uav_ue: model, ..base.models },
                    antenna,
                    mode,
                    relay_rule: base.relay_rule,
                };
                let map = build_reward_map(scenario, &grid.lattice, &setup)?;
                let mut runs = Vec::new();
                for &criterion in &config.experiment.criteria {
                    let run = plan_and_measure(scenario, map.rewards(criterion), &grid, &actions, criterion, &setup)?;
                    runs.push((criterion, run));
                }
                out.push(Showcase { tag: combo_tag(mode, &model, antenna), map, runs });
            }
        }
    }
    Ok(out)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Heat-map CSVs (one per combination and criterion) for realization 0.
pub fn heatmap_artifacts(config: &RunConfig) -> Result<Vec<Artifact>> {
    let scenario = showcase_scenario(config)?;
    let grid = StateGrid::for_mission(&scenario.mission, config.planner.cell_m)?;
    let base = config.base_setup();
    let mut out = Vec::new();
    for &mode in &config.experiment.modes {
        for kind in config.uav_ue_kinds() {
            for &antenna in &config.experiment.antennas {
                let model = kind.model(&config.mplm);
                let setup = RadioSetup {
                    models: LinkModels { uav_ue: model, ..base.models },
                    antenna,
                    mode,
                    relay_rule: base.relay_rule,
                };
                let map = build_reward_map(&scenario, &grid.lattice, &setup)?;
                let tag = combo_tag(mode, &model, antenna);
                for &c in &config.experiment.criteria {
                    out.push(Artifact {
                        name: format!("heatmap_{tag}_{}.csv", c.name()),
                        bytes: csv_bytes(|b| map.write_csv(c, b))?,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Everything `run` writes except the manifest, in manifest order.
pub fn build_artifacts(config: &RunConfig) -> Result<(SweepResult, Vec<Artifact>)> {
    let sweep = monte_carlo_sweep(&config.sweep_input())?;
    let scenario = showcase_scenario(config)?;
    let shows = showcases(config, &scenario)?;
    let stage_s = scenario.mission.stage_s;
    let cell_m = config.planner.cell_m;

    let mut files = vec![
        Artifact { name: "sweep.csv".into(), bytes: csv_bytes(|b| sweep.write_csv(b))? },
        Artifact { name: "sweep.json".into(), bytes: json_bytes(&sweep)? },
        Artifact { name: "scenario.json".into(), bytes: json_bytes(&scenario)? },
    ];
    let mut listing = Vec::new();
    for s in &shows {
        for (c, run) in &s.runs {
            let stem = format!("{}_{}", s.tag, c.name());
            files.push(Artifact {
                name: format!("trajectory_{stem}.csv"),
                bytes: csv_bytes(|b| run.trajectory.write_csv(stage_s, cell_m, b))?,
            });
            files.push(Artifact {
                name: format!("smoothed_{stem}.csv"),
                bytes: csv_bytes(|b| run.smoothed.write_csv(b))?,
            });
            files.push(Artifact {
                name: format!("heatmap_{stem}.csv"),
                bytes: csv_bytes(|b| s.map.write_csv(*c, b))?,
            });
            listing.push(ShowcaseJson {
                tag: &s.tag,
                criterion: *c,
                trajectory: &run.trajectory,
                smoothed: &run.smoothed,
                discrete_metrics: &run.discrete,
                smoothed_metrics: &run.smooth,
            });
        }
    }
    files.push(Artifact { name: "trajectories.json".into(), bytes: json_bytes(&listing)? });
    Ok((sweep, files))
}

pub fn manifest_bytes(config: &RunConfig, config_toml: &str, files: &[Artifact]) -> Result<Vec<u8>> {
    let entries = files
        .iter()
        .map(|a| FileEntry {
            name: a.name.clone(),
            bytes: a.bytes.len() as u64,
            sha256: hex(&Sha256::digest(&a.bytes)),
        })
        .collect();
    json_bytes(&Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        master_seed: config.experiment.master_seed,
        realizations: config.experiment.realizations,
        config,
        config_toml,
        files: entries,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write every artifact into `dir`. If any write fails, the files written so
/// far are removed and the error is returned.
pub fn write_all(dir: &Path, files: &[Artifact]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    for a in files {
        let path = dir.join(&a.name);
        if let Err(e) = fs::write(&path, &a.bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(written)
}

/// The whole `run` subcommand after configuration loading: compute in memory,
/// then write all files (manifest last).
pub fn run(config: &RunConfig, config_toml: &str, out_dir: &Path) -> Result<SweepResult> {
    let (sweep, mut files) = build_artifacts(config)?;
    let manifest = manifest_bytes(config, config_toml, &files)?;
    files.push(Artifact { name: MANIFEST.into(), bytes: manifest });
    write_all(out_dir, &files)?;
    Ok(sweep)
}
