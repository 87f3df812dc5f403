//! Received power, user association, SIR and per-cell reward maps.
//!
//! Transmitter ids are `0..M` for the MBSs in scenario order followed by `M`
//! for the UAV. The UAV transmits in-band at all times, so it interferes with
//! every MBS-served UE. In relay mode it is fed by a donor MBS over a backhaul
//! link and costs that MBS one extra scheduling slot.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{backhaul_combined_gain, tx_gain, AntennaMode, LinkGeometry};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3};
use crate::grid::Lattice;
use crate::pathloss::PathLossModel;
use crate::scenario::Scenario;

/// Rates are floored here before taking log10 in the PF objective.
pub const PF_RATE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Σ log10 R_k.
    Pf,
    /// Σ R_k.
    SumRate,
    /// Rate of the ⌈0.05 K⌉-th worst UE.
    P5,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Pf, Criterion::SumRate, Criterion::P5];

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Pf => "pf",
            Criterion::SumRate => "sum_rate",
            Criterion::P5 => "p5",
        }
    }

    /// Stage reward of one rate vector.
    pub fn reward(&self, rates: &[f64]) -> f64 {
        match self {
            Criterion::Pf => rates.iter().map(|r| r.max(PF_RATE_FLOOR).log10()).sum(),
            Criterion::SumRate => rates.iter().sum(),
            Criterion::P5 => fifth_percentile(rates),
        }
    }
}

/// The ⌈0.05 K⌉-th smallest value; 0 for an empty slice.
pub fn fifth_percentile(rates: &[f64]) -> f64 {
    if rates.is_empty() {
        return 0.0;
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.05 * rates.len() as f64).ceil() as usize).max(1);
    sorted[rank - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Standalone,
    Relay,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Standalone => "standalone",
            Mode::Relay => "relay",
        }
    }
}

/// How a UE decides between the relayed path and the MBS network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayRule {
    /// Relay iff the end-to-end SIR beats the UE's best direct MBS SIR.
    BestDirect,
    /// Relay iff the end-to-end SIR beats the donor backhaul SIR.
    #[default]
    BackhaulSir,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModels {
    pub mbs_ue: PathLossModel,
    pub uav_ue: PathLossModel,
    pub backhaul: Option<PathLossModel>,
}

impl Default for LinkModels {
    fn default() -> Self {
        Self {
            mbs_ue: PathLossModel::Ohplm,
            uav_ue: PathLossModel::Ohplm,
            backhaul: Some(PathLossModel::Backhaul3gpp),
        }
    }
}

/// Everything besides the scenario that shapes a link budget.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadioSetup {
    pub models: LinkModels,
    pub antenna: AntennaMode,
    pub mode: Mode,
    pub relay_rule: RelayRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transmitter {
    Mbs(usize),
    Uav,
}

fn mbs_point(s: &Scenario, m: usize) -> Point3 {
    s.mbs_positions[m].at_height(s.config.h_bs)
}

fn uav_point(s: &Scenario, uav: Point2) -> Point3 {
    uav.at_height(s.config.h_uav)
}

/// Power (mW) received at a UE on the ground point `ue` from `tx`, with the
/// UAV hovering over `uav_pos`.
pub fn received_power(
    scenario: &Scenario,
    tx: Transmitter,
    ue: Point2,
    uav_pos: Point2,
    setup: &RadioSetup,
) -> Result<f64> {
    let c = &scenario.config;
    let rx = ue.at_height(c.h_ue);
    let (from, model, p_mw) = match tx {
        Transmitter::Mbs(m) => (mbs_point(scenario, m), &setup.models.mbs_ue, c.p_mbs_mw()),
        Transmitter::Uav => (uav_point(scenario, uav_pos), &setup.models.uav_ue, c.p_uav_mw()),
    };
    let loss = model.loss_db(from, rx, c.f_c_mhz, c.alpha_los, c.alpha_nlos)?;
    let gain = tx_gain(&LinkGeometry {
        tx_position: from,
        rx_position: rx,
        tx_mode: setup.antenna,
        rx_mode: AntennaMode::Omni,
    })?;
    Ok(p_mw * 10f64.powf(-loss / 10.0) * gain)
}

/// Received powers from every transmitter (MBSs then UAV) at one ground point.
pub fn powers_at(scenario: &Scenario, ue: Point2, uav_pos: Point2, setup: &RadioSetup) -> Result<Vec<f64>> {
    let m = scenario.mbs_positions.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        out.push(received_power(scenario, Transmitter::Mbs(i), ue, uav_pos, setup)?);
    }
    out.push(received_power(scenario, Transmitter::Uav, ue, uav_pos, setup)?);
    Ok(out)
}

/// Per-UE received powers from every transmitter at one UAV position.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub transmitters: usize,
    /// Row-major `K × (M + 1)`, mW.
    pub powers: Vec<f64>,
}

impl LinkBudget {
    pub fn compute(scenario: &Scenario, uav_pos: Point2, setup: &RadioSetup) -> Result<Self> {
        let transmitters = scenario.mbs_positions.len() + 1;
        let mut powers = Vec::with_capacity(scenario.ue_positions.len() * transmitters);
        for &ue in &scenario.ue_positions {
            powers.extend(powers_at(scenario, ue, uav_pos, setup)?);
        }
        Ok(Self { transmitters, powers })
    }

    pub fn ue_count(&self) -> usize {
        self.powers.len() / self.transmitters
    }

    pub fn row(&self, ue: usize) -> &[f64] {
        &self.powers[ue * self.transmitters..(ue + 1) * self.transmitters]
    }

    pub fn uav_id(&self) -> usize {
        self.transmitters - 1
    }
}

/// Serving power over the summed power of every other transmitter.
pub fn sir_from_powers(powers: &[f64], server: usize) -> Result<f64> {
    if powers.len() < 2 {
        return Err(Error::NoInterference);
    }
    let interference: f64 = powers.iter().enumerate().filter(|&(j, _)| j != server).map(|(_, p)| p).sum();
    Ok(powers[server] / interference)
}

pub fn direct_sir(ue: usize, server: usize, budget: &LinkBudget) -> Result<f64> {
    sir_from_powers(budget.row(ue), server)
}

/// Two-hop amplify-and-forward SIR: `2 γ_b γ_a / (γ_b + γ_a)`. An unbounded
/// input returns the formula's limit, twice the other input.
pub fn relay_end_to_end_sir(gamma_backhaul: f64, gamma_access: f64) -> Result<f64> {
    if !(gamma_backhaul > 0.0) || !(gamma_access > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relay SIRs must be positive, got {gamma_backhaul} and {gamma_access}"
        )));
    }
    Ok(match (gamma_backhaul.is_infinite(), gamma_access.is_infinite()) {
        (true, true) => f64::INFINITY,
        (true, false) => 2.0 * gamma_access,
        (false, true) => 2.0 * gamma_backhaul,
        (false, false) => 2.0 * gamma_backhaul * gamma_access / (gamma_backhaul + gamma_access),
    })
}

/// Index of the largest value; the first one wins ties.
fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Backhaul SIR at the UAV from each MBS (donor candidate), the other MBSs
/// acting as interferers.
pub fn backhaul_sirs(scenario: &Scenario, uav_pos: Point2, setup: &RadioSetup) -> Result<Vec<f64>> {
    let c = &scenario.config;
    let model = setup
        .models
        .backhaul
        .ok_or_else(|| Error::Config("relay mode requires a backhaul path-loss model".into()))?;
    let uav = uav_point(scenario, uav_pos);
    let p = c.p_mbs_mw();
    let mut powers = Vec::with_capacity(scenario.mbs_positions.len());
    for m in 0..scenario.mbs_positions.len() {
        let from = mbs_point(scenario, m);
        let loss = model.loss_db(from, uav, c.f_c_mhz, c.alpha_los, c.alpha_nlos)?;
        let gain = backhaul_combined_gain(&LinkGeometry {
            tx_position: from,
            rx_position: uav,
            tx_mode: setup.antenna,
            rx_mode: setup.antenna,
        })?;
        powers.push(p * 10f64.powf(-loss / 10.0) * gain);
    }
    Ok((0..powers.len())
        .map(|m| {
            let s = powers[m];
            let interference: f64 =
                powers.iter().enumerate().filter(|&(j, _)| j != m).map(|(_, p)| p).sum();
            if interference > 0.0 {
                s / interference
            } else if s > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect())
}

/// Who serves whom at one UAV position, and what each UE gets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationSnapshot {
    /// Serving transmitter id per UE (`M` is the UAV).
    pub server: Vec<usize>,
    /// Scheduling load per transmitter.
    pub load: Vec<u32>,
    /// Effective SIR per UE (end-to-end for relayed UEs), linear.
    pub sir: Vec<f64>,
    /// Spectral efficiency per UE, bps/Hz.
    pub rate: Vec<f64>,
    pub donor: Option<usize>,
    pub backhaul_sir: Option<f64>,
}

impl AssociationSnapshot {
    pub fn uav_id(&self) -> usize {
        self.load.len() - 1
    }
}

pub fn associate(scenario: &Scenario, uav_pos: Point2, setup: &RadioSetup) -> Result<AssociationSnapshot> {
    if scenario.mbs_positions.is_empty() {
        return Err(Error::NoBaseStation);
    }
    if !scenario.mission.area_uav.contains(uav_pos) {
        return Err(Error::OutsideFlightArea { x: uav_pos.x, y: uav_pos.y });
    }
    let budget = LinkBudget::compute(scenario, uav_pos, setup)?;
    associate_with_budget(scenario, uav_pos, setup, &budget)
}

pub fn associate_with_budget(
    scenario: &Scenario,
    uav_pos: Point2,
    setup: &RadioSetup,
    budget: &LinkBudget,
) -> Result<AssociationSnapshot> {
    let k = budget.ue_count();
    let uav = budget.uav_id();
    let mut server = Vec::with_capacity(k);
    let mut sir = Vec::with_capacity(k);
    let mut load = vec![0u32; budget.transmitters];

    let (donor, backhaul_sir) = match setup.mode {
        Mode::Standalone => (None, None),
        Mode::Relay => {
            let sirs = backhaul_sirs(scenario, uav_pos, setup)?;
            let d = argmax(sirs.iter().copied()).ok_or(Error::NoBaseStation)?;
            (Some(d), Some(sirs[d]))
        }
    };

    for ue in 0..k {
        let row = budget.row(ue);
        match setup.mode {
            Mode::Standalone => {
                // SIR is increasing in received power, so the strongest wins.
                let best = argmax(row.iter().copied()).ok_or(Error::NoInterference)?;
                server.push(best);
                sir.push(sir_from_powers(row, best)?);
            }
            Mode::Relay => {
                let best_mbs = argmax(row[..uav].iter().copied()).ok_or(Error::NoBaseStation)?;
                let direct = sir_from_powers(row, best_mbs)?;
                let mbs_total: f64 = row[..uav].iter().sum();
                let access = row[uav] / mbs_total;
                let gb = backhaul_sir.unwrap_or(0.0);
                let relayed = if gb > 0.0 && access > 0.0 {
                    Some(relay_end_to_end_sir(gb, access)?)
                } else {
                    None
                };
                let threshold = match setup.relay_rule {
                    RelayRule::BestDirect => direct,
                    RelayRule::BackhaulSir => gb,
                };
                match relayed {
                    Some(e2e) if e2e > threshold => {
                        server.push(uav);
                        sir.push(e2e);
                    }
                    _ => {
                        server.push(best_mbs);
                        sir.push(direct);
                    }
                }
            }
        }
    }
    for &s in &server {
        load[s] += 1;
    }
    if let Some(d) = donor {
        load[d] += 1;
    }
    let rate = server
        .iter()
        .zip(&sir)
        .map(|(&s, &g)| (1.0 + g).log2() / load[s] as f64)
        .collect();
    Ok(AssociationSnapshot { server, load, sir, rate, donor, backhaul_sir })
}

/// Stage rewards for every criterion at every lattice point, plus the
/// best-server SIR diagnostic used for heat maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardMap {
    pub lattice: Lattice,
    pub pf: Vec<f64>,
    pub sum_rate: Vec<f64>,
    pub p5: Vec<f64>,
    /// Best direct SIR (dB) of a test UE directly below a UAV at each point.
    pub max_sir_db: Vec<f64>,
}

impl RewardMap {
    pub fn rewards(&self, criterion: Criterion) -> &[f64] {
        match criterion {
            Criterion::Pf => &self.pf,
            Criterion::SumRate => &self.sum_rate,
            Criterion::P5 => &self.p5,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, criterion: Criterion, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            x: f64,
            y: f64,
            reward: f64,
            max_sir_db: f64,
        }
        let mut out = csv::Writer::from_writer(w);
        let rewards = self.rewards(criterion);
        for (i, c) in self.lattice.cells().enumerate() {
            let p = self.lattice.position(c);
            out.serialize(Row { x: p.x, y: p.y, reward: rewards[i], max_sir_db: self.max_sir_db[i] })?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn build_reward_map(scenario: &Scenario, lattice: &Lattice, setup: &RadioSetup) -> Result<RewardMap> {
    let cells: Vec<Result<(f64, f64, f64, f64)>> = (0..lattice.len())
        .into_par_iter()
        .map(|i| {
            let pos = lattice.position(lattice.cell(i));
            let snap = associate(scenario, pos, setup)?;
            let probe = powers_at(scenario, pos, pos, setup)?;
            let best = argmax(probe.iter().copied()).ok_or(Error::NoInterference)?;
            let sir_db = 10.0 * sir_from_powers(&probe, best)?.log10();
            Ok((
                Criterion::Pf.reward(&snap.rate),
                Criterion::SumRate.reward(&snap.rate),
                Criterion::P5.reward(&snap.rate),
                sir_db,
            ))
        })
        .collect();
    let mut map = RewardMap {
        lattice: *lattice,
        pf: Vec::with_capacity(cells.len()),
        sum_rate: Vec::with_capacity(cells.len()),
        p5: Vec::with_capacity(cells.len()),
        max_sir_db: Vec::with_capacity(cells.len()),
    };
    for c in cells {
        let (a, b, p, s) = c?;
        map.pf.push(a);
        map.sum_rate.push(b);
        map.p5.push(p);
        map.max_sir_db.push(s);
    }
    Ok(map)
}
