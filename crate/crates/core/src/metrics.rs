//! Time-averaged capacities, outage, and Monte Carlo sweeps over network
//! realizations.
//!
//! Aggregation is two-level: a realization is summarized by its mean per-UE
//! capacity and its outage fraction, and a sweep point reports the mean and
//! standard error of those numbers across realizations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::AntennaMode;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::pathloss::PathLossModel;
use crate::planner::{solve_dp, ActionSet, StateGrid, Trajectory};
use crate::radio::{associate, build_reward_map, Criterion, Mode, RadioSetup};
use crate::rng::realization_seed;
use crate::scenario::{generate_scenario, Mission, PhysicalConfig, Scenario};
use crate::smoothing::{smooth, SmoothedTrajectory};

/// Per-stage UE rates and stage rewards along a flown path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEvaluation {
    /// `rates[i][k]`: rate of UE k during stage i (bps/Hz).
    pub rates: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
}

/// Associate at each position (one per stage) and collect rates. Positions
/// need not be lattice points.
pub fn evaluate_positions(
    scenario: &Scenario,
    positions: &[Point2],
    criterion: Criterion,
    setup: &RadioSetup,
) -> Result<StageEvaluation> {
    let rates: Vec<Vec<f64>> = positions
        .par_iter()
        .map(|&p| associate(scenario, p, setup).map(|s| s.rate))
        .collect::<Result<_>>()?;
    let rewards = rates.iter().map(|r| criterion.reward(r)).collect();
    Ok(StageEvaluation { rates, rewards })
}

/// The discrete path occupies `positions[i]` during stage i.
pub fn evaluate_trajectory(
    traj: &Trajectory,
    scenario: &Scenario,
    criterion: Criterion,
    setup: &RadioSetup,
) -> Result<StageEvaluation> {
    let n = traj.stages();
    evaluate_positions(scenario, &traj.positions[..n], criterion, setup)
}

/// Same as [`evaluate_trajectory`] but at the off-lattice curve samples.
pub fn evaluate_smoothed(
    smoothed: &SmoothedTrajectory,
    scenario: &Scenario,
    criterion: Criterion,
    setup: &RadioSetup,
) -> Result<StageEvaluation> {
    let n = smoothed.samples.len() - 1;
    evaluate_positions(scenario, &smoothed.samples[..n], criterion, setup)
}

/// Per-UE `Σ_i R_k(i) δ / T`.
pub fn time_averaged_capacity(stage_rates: &[Vec<f64>], stage_s: f64, duration_s: f64) -> Result<Vec<f64>> {
    let first = stage_rates.first().ok_or(Error::Empty("stage rates"))?;
    if !(duration_s > 0.0) {
        return Err(Error::InvalidParameter(format!("duration must be positive, got {duration_s}")));
    }
    let k = first.len();
    if stage_rates.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter("stages disagree on the number of UEs".into()));
    }
    let mut acc = vec![0.0; k];
    for stage in stage_rates {
        for (a, r) in acc.iter_mut().zip(stage) {
            *a += r * stage_s;
        }
    }
    Ok(acc.into_iter().map(|a| a / duration_s).collect())
}

/// Fraction of UEs strictly below `threshold`.
pub fn outage_probability(capacities: &[f64], threshold: f64) -> Result<f64> {
    if capacities.is_empty() {
        return Err(Error::Empty("UE capacities"));
    }
    let below = capacities.iter().filter(|&&c| c < threshold).count();
    Ok(below as f64 / capacities.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub per_ue_capacity: Vec<f64>,
    /// `None` when the realization has no UE.
    pub mean_capacity: Option<f64>,
    pub outage: Option<f64>,
    pub seed: u64,
}

impl RunMetrics {
    pub fn from_evaluation(eval: &StageEvaluation, mission: &Mission, threshold: f64, seed: u64) -> Result<Self> {
        let caps = time_averaged_capacity(&eval.rates, mission.stage_s, mission.duration_s)?;
        let (mean_capacity, outage) = if caps.is_empty() {
            (None, None)
        } else {
            (Some(caps.iter().sum::<f64>() / caps.len() as f64), Some(outage_probability(&caps, threshold)?))
        };
        Ok(Self { per_ue_capacity: caps, mean_capacity, outage, seed })
    }
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Zero when fewer than two samples are available.
    pub stderr: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary { mean: f64::NAN, stderr: 0.0, n };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let stderr = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Summary { mean, stderr, n }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Discrete,
    Smoothed,
}

impl PathKind {
    pub fn name(&self) -> &'static str {
        match self {
            PathKind::Discrete => "discrete",
            PathKind::Smoothed => "smoothed",
        }
    }
}

/// Axes of a sweep; the full Cartesian product is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub durations_s: Vec<f64>,
    pub mbs_densities: Vec<f64>,
    pub criteria: Vec<Criterion>,
    pub modes: Vec<Mode>,
    pub uav_ue_models: Vec<PathLossModel>,
    pub antennas: Vec<AntennaMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepInput {
    pub physical: PhysicalConfig,
    pub mission: Mission,
    /// Supplies the MBS→UE and backhaul models and the relay rule; the swept
    /// fields are overwritten per point.
    pub base_setup: RadioSetup,
    pub cell_m: f64,
    pub axes: SweepAxes,
    pub realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationSample {
    pub index: usize,
    pub seed: u64,
    pub mean_capacity: Option<f64>,
    pub outage: Option<f64>,
    /// DP objective of the planned path.
    pub dp_value: f64,
    pub hover_stages: usize,
    /// Path starts and ends at the mission endpoints.
    pub endpoints_ok: bool,
    /// Fastest stage of the flown path (m/s).
    pub max_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub duration_s: f64,
    pub mbs_density: f64,
    pub criterion: Criterion,
    pub mode: Mode,
    pub uav_ue_model: String,
    pub antenna: AntennaMode,
    pub path: PathKind,
    pub capacity: Summary,
    pub outage: Summary,
    pub samples: Vec<RealizationSample>,
}

impl SweepPoint {
    pub fn capacities(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.mean_capacity).collect()
    }

    pub fn outages(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.outage).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub master_seed: u64,
    pub realizations: usize,
    pub points: Vec<SweepPoint>,
}

/// Selector for [`SweepResult::find`]; `None` fields match anything.
#[derive(Debug, Clone, Default)]
pub struct PointQuery<'a> {
    pub duration_s: Option<f64>,
    pub mbs_density: Option<f64>,
    pub criterion: Option<Criterion>,
    pub mode: Option<Mode>,
    pub uav_ue_model: Option<&'a str>,
    pub antenna: Option<AntennaMode>,
    pub path: Option<PathKind>,
}

impl SweepResult {
    /// The unique point matching `q`, if exactly one does.
    pub fn find(&self, q: &PointQuery) -> Option<&SweepPoint> {
        let mut hits = self.points.iter().filter(|p| {
            q.duration_s.is_none_or(|v| p.duration_s == v)
                && q.mbs_density.is_none_or(|v| p.mbs_density == v)
                && q.criterion.is_none_or(|v| p.criterion == v)
                && q.mode.is_none_or(|v| p.mode == v)
                && q.uav_ue_model.is_none_or(|v| p.uav_ue_model == v)
                && q.antenna.is_none_or(|v| p.antenna == v)
                && q.path.is_none_or(|v| p.path == v)
        });
        let first = hits.next()?;
        hits.next().is_none().then_some(first)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            duration_s: f64,
            mbs_density: f64,
            criterion: &'a str,
            mode: &'a str,
            uav_ue_model: &'a str,
            antenna: &'a str,
            path: &'a str,
            mean_capacity: f64,
            stderr_capacity: f64,
            mean_outage: f64,
            stderr_outage: f64,
            n: usize,
        }
        let mut out = csv::Writer::from_writer(w);
        for p in &self.points {
            out.serialize(Row {
                duration_s: p.duration_s,
                mbs_density: p.mbs_density,
                criterion: p.criterion.name(),
                mode: p.mode.name(),
                uav_ue_model: &p.uav_ue_model,
                antenna: p.antenna.name(),
                path: p.path.name(),
                mean_capacity: p.capacity.mean,
                stderr_capacity: p.capacity.stderr,
                mean_outage: p.outage.mean,
                stderr_outage: p.outage.stderr,
                n: p.capacity.n,
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Everything planned and measured for one criterion on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRun {
    pub trajectory: Trajectory,
    pub smoothed: SmoothedTrajectory,
    pub discrete: RunMetrics,
    pub smooth: RunMetrics,
}

/// Plan with one reward map, smooth, and evaluate both paths.
pub fn plan_and_measure(
    scenario: &Scenario,
    rewards: &[f64],
    grid: &StateGrid,
    actions: &ActionSet,
    criterion: Criterion,
    setup: &RadioSetup,
) -> Result<PlannedRun> {
    let c = &scenario.config;
    let m = &scenario.mission;
    let trajectory = solve_dp(rewards, grid, actions)?;
    let smoothed = smooth(&trajectory, m.stage_s, c.v_max)?;
    let d_eval = evaluate_trajectory(&trajectory, scenario, criterion, setup)?;
    let s_eval = evaluate_smoothed(&smoothed, scenario, criterion, setup)?;
    Ok(PlannedRun {
        discrete: RunMetrics::from_evaluation(&d_eval, m, c.outage_threshold, scenario.seed)?,
        smooth: RunMetrics::from_evaluation(&s_eval, m, c.outage_threshold, scenario.seed)?,
        trajectory,
        smoothed,
    })
}

/// Cartesian product of the non-density axes, in output order.
fn combos(axes: &SweepAxes) -> Vec<(Mode, PathLossModel, AntennaMode)> {
    let mut out = Vec::new();
    for &mode in &axes.modes {
        for &model in &axes.uav_ue_models {
            for &antenna in &axes.antennas {
                out.push((mode, model, antenna));
            }
        }
    }
    out
}

struct Key {
    duration_s: f64,
    mbs_density: f64,
    criterion: Criterion,
    mode: Mode,
    model: PathLossModel,
    antenna: AntennaMode,
}

fn for_each_key(axes: &SweepAxes, mut f: impl FnMut(Key)) {
    for &mbs_density in &axes.mbs_densities {
        for &(mode, model, antenna) in &combos(axes) {
            for &duration_s in &axes.durations_s {
                for &criterion in &axes.criteria {
                    f(Key { duration_s, mbs_density, criterion, mode, model, antenna });
                }
            }
        }
    }
}

/// One realization at one density: samples for every other axis combination,
/// ordered as [`for_each_key`] (restricted to that density) with discrete
/// before smoothed.
fn run_realization(input: &SweepInput, density: f64, index: usize) -> Result<Vec<RealizationSample>> {
    let seed = realization_seed(input.master_seed, index as u64);
    let wrap = |e: Error| Error::Realization { index, seed, source: Box::new(e) };
    let axes = &input.axes;
    let physical = PhysicalConfig { lambda_mbs: density, ..input.physical.clone() };
    let longest = axes.durations_s.iter().copied().fold(input.mission.duration_s, f64::max);
    let mission = Mission { duration_s: longest, ..input.mission.clone() };
    let base = generate_scenario(&physical, &mission, seed).map_err(wrap)?;
    let actions = ActionSet::standard(input.cell_m, input.mission.stage_s);

    let mut out = Vec::new();
    for (mode, model, antenna) in combos(axes) {
        let setup = RadioSetup {
            models: crate::radio::LinkModels { uav_ue: model, ..input.base_setup.models },
            antenna,
            mode,
            relay_rule: input.base_setup.relay_rule,
        };
        let grid0 = StateGrid::for_mission(&mission, input.cell_m).map_err(wrap)?;
        let map = build_reward_map(&base, &grid0.lattice, &setup).map_err(wrap)?;
        for &duration_s in &axes.durations_s {
            let m = Mission { duration_s, ..mission.clone() };
            let scenario = Scenario { mission: m.clone(), ..base.clone() };
            let grid = StateGrid::for_mission(&m, input.cell_m).map_err(wrap)?;
            for &criterion in &axes.criteria {
                let run = plan_and_measure(&scenario, map.rewards(criterion), &grid, &actions, criterion, &setup)
                    .map_err(wrap)?;
                let t = &run.trajectory;
                let endpoints_ok = t.positions.first() == Some(&m.start) && t.positions.last() == Some(&m.finish);
                let discrete_speed = t
                    .actions
                    .iter()
                    .map(|a| a.speed(input.cell_m, m.stage_s))
                    .fold(0.0, f64::max);
                let smooth_ok = run.smoothed.samples.first() == Some(&m.start)
                    && run.smoothed.samples.last() == Some(&m.finish);
                out.push(RealizationSample {
                    index,
                    seed,
                    mean_capacity: run.discrete.mean_capacity,
                    outage: run.discrete.outage,
                    dp_value: t.value,
                    hover_stages: t.hover_stages(),
                    endpoints_ok,
                    max_speed: discrete_speed,
                });
                out.push(RealizationSample {
                    index,
                    seed,
                    mean_capacity: run.smooth.mean_capacity,
                    outage: run.smooth.outage,
                    dp_value: t.value,
                    hover_stages: t.hover_stages(),
                    endpoints_ok: smooth_ok,
                    max_speed: run.smoothed.max_speed(),
                });
            }
        }
    }
    Ok(out)
}

/// Full pipeline (scenario → reward map → DP → smoothing → metrics) for every
/// axis point and realization. Realization j uses seed
/// `splitmix64(master_seed + j)` at every axis point, so points are paired.
pub fn monte_carlo_sweep(input: &SweepInput) -> Result<SweepResult> {
    if input.realizations == 0 {
        return Err(Error::InvalidParameter("at least one realization is required".into()));
    }
    let axes = &input.axes;
    if axes.durations_s.is_empty()
        || axes.mbs_densities.is_empty()
        || axes.criteria.is_empty()
        || axes.modes.is_empty()
        || axes.uav_ue_models.is_empty()
        || axes.antennas.is_empty()
    {
        return Err(Error::Empty("sweep axis"));
    }

    let jobs: Vec<(usize, usize)> = (0..axes.mbs_densities.len())
        .flat_map(|d| (0..input.realizations).map(move |j| (d, j)))
        .collect();
    let results: Vec<Vec<RealizationSample>> = jobs
        .par_iter()
        .map(|&(d, j)| run_realization(input, axes.mbs_densities[d], j))
        .collect::<Result<_>>()?;

    let per_density = combos(axes).len() * axes.durations_s.len() * axes.criteria.len();
    let mut points = Vec::new();
    let mut slot = 0usize;
    for_each_key(axes, |key| {
        let d = axes.mbs_densities.iter().position(|&v| v == key.mbs_density).unwrap_or(0);
        let local = slot % per_density;
        for (offset, path) in [(0, PathKind::Discrete), (1, PathKind::Smoothed)] {
            let samples: Vec<RealizationSample> = (0..input.realizations)
                .map(|j| results[d * input.realizations + j][2 * local + offset].clone())
                .collect();
            let caps: Vec<f64> = samples.iter().filter_map(|s| s.mean_capacity).collect();
            let outs: Vec<f64> = samples.iter().filter_map(|s| s.outage).collect();
            points.push(SweepPoint {
                duration_s: key.duration_s,
                mbs_density: key.mbs_density,
                criterion: key.criterion,
                mode: key.mode,
                uav_ue_model: key.model.name().to_string(),
                antenna: key.antenna,
                path,
                capacity: summarize(&caps),
                outage: summarize(&outs),
                samples,
            });
        }
        slot += 1;
    });
    Ok(SweepResult { master_seed: input.master_seed, realizations: input.realizations, points })
}
