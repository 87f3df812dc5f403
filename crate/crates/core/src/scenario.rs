//! Network realizations: Poisson-deployed base stations and users, the UAV
//! mission, and the physical constants shared by every link computation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::rng::{poisson, rng_from_seed, splitmix64, uniform_in, SimRng};

/// Radio and deployment constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConfig {
    pub p_mbs_dbm: f64,
    pub p_uav_dbm: f64,
    /// Maximum UAV ground speed (m/s).
    pub v_max: f64,
    pub h_uav: f64,
    pub h_bs: f64,
    pub h_ue: f64,
    pub f_c_mhz: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// MBS density per km².
    pub lambda_mbs: f64,
    /// UE density per km².
    pub lambda_ue: f64,
    /// A UE whose time-averaged rate is strictly below this (bps/Hz) is in outage.
    pub outage_threshold: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self {
            p_mbs_dbm: 46.0,
            p_uav_dbm: 30.0,
            v_max: 17.7,
            h_uav: 120.0,
            h_bs: 30.0,
            h_ue: 2.0,
            f_c_mhz: 1500.0,
            alpha_los: 2.09,
            alpha_nlos: 3.75,
            lambda_mbs: 4.0,
            lambda_ue: 100.0,
            outage_threshold: 0.05,
        }
    }
}

impl PhysicalConfig {
    pub fn p_mbs_mw(&self) -> f64 {
        dbm_to_mw(self.p_mbs_dbm)
    }

    pub fn p_uav_mw(&self) -> f64 {
        dbm_to_mw(self.p_uav_dbm)
    }

    /// Every violated invariant, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.p_mbs_dbm.is_finite() || !self.p_uav_dbm.is_finite() {
            out.push("transmit powers must be finite".to_string());
        }
        if !(self.v_max > 0.0) || !self.v_max.is_finite() {
            out.push(format!("v_max must be positive, got {}", self.v_max));
        }
        if !(self.h_ue > 0.0 && self.h_bs > self.h_ue && self.h_uav > self.h_bs) {
            out.push(format!(
                "heights must satisfy h_uav > h_bs > h_ue > 0, got {} / {} / {}",
                self.h_uav, self.h_bs, self.h_ue
            ));
        }
        if !(self.f_c_mhz > 0.0) || !self.f_c_mhz.is_finite() {
            out.push(format!("carrier frequency must be positive, got {} MHz", self.f_c_mhz));
        }
        if !(self.alpha_los > 0.0 && self.alpha_nlos > 0.0) {
            out.push("path-loss exponents must be positive".to_string());
        }
        if !(self.lambda_mbs > 0.0) {
            out.push(format!("lambda_mbs must be positive, got {}", self.lambda_mbs));
        }
        if !(self.lambda_ue > 0.0) {
            out.push(format!("lambda_ue must be positive, got {}", self.lambda_ue));
        }
        if !(self.outage_threshold >= 0.0) {
            out.push("outage_threshold must be non-negative".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(v) => Err(Error::InvalidParameter(v)),
            None => Ok(()),
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Where the UAV must fly and the regions nodes and UAV live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mission {
    pub start: Point2,
    pub finish: Point2,
    /// Mission time T (s).
    pub duration_s: f64,
    /// Stage length δ (s).
    pub stage_s: f64,
    pub area_ue: Rect,
    pub area_uav: Rect,
}

impl Default for Mission {
    fn default() -> Self {
        Self {
            start: Point2::new(0.0, 0.0),
            finish: Point2::new(1000.0, 1000.0),
            duration_s: 240.0,
            stage_s: 8.0,
            area_ue: Rect::new(Point2::new(0.0, 0.0), Point2::new(1000.0, 1000.0)),
            // 1.2 km square centred on the node square.
            area_uav: Rect::new(Point2::new(-100.0, -100.0), Point2::new(1100.0, 1100.0)),
        }
    }
}

impl Mission {
    /// Number of stages N = T / δ, if T is an integer multiple of δ.
    pub fn stages(&self) -> Result<usize> {
        if !(self.stage_s > 0.0) || !(self.duration_s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stage length must be positive and duration non-negative (δ = {}, T = {})",
                self.stage_s, self.duration_s
            )));
        }
        let ratio = self.duration_s / self.stage_s;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "duration {} s is not a multiple of the stage length {} s",
                self.duration_s, self.stage_s
            )));
        }
        Ok(n as usize)
    }

    pub fn t_min(&self, v_max: f64) -> f64 {
        t_min(self.start, self.finish, v_max)
    }

    pub fn violations(&self, v_max: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.area_ue.is_degenerate() {
            out.push("node area has zero size".to_string());
        }
        if self.area_uav.is_degenerate() {
            out.push("flight area has zero size".to_string());
        }
        if !self.area_uav.contains(self.start) || !self.area_uav.contains(self.finish) {
            out.push("mission start and finish must lie inside the flight area".to_string());
        }
        if let Err(e) = self.stages() {
            out.push(e.to_string());
        }
        if v_max > 0.0 {
            let tm = self.t_min(v_max);
            if self.duration_s < tm {
                out.push(
                    Error::DurationTooShort { duration_s: self.duration_s, t_min_s: tm }.to_string(),
                );
            }
        }
        out
    }
}

/// Minimum flight time between two points at full speed.
pub fn t_min(start: Point2, finish: Point2, v_max: f64) -> f64 {
    start.distance(finish) / v_max
}

/// One network realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: PhysicalConfig,
    pub mission: Mission,
    pub mbs_positions: Vec<Point2>,
    pub ue_positions: Vec<Point2>,
    pub seed: u64,
    /// Draws discarded because they produced no MBS.
    #[serde(default)]
    pub rejected_draws: u32,
}

const MAX_REJECTIONS: u32 = 10_000;

/// Draw MBS and UE positions from two independent homogeneous PPPs on the
/// node area. Draws with no MBS are discarded and redrawn from the same stream.
///
/// MBSs and UEs come from separate generator streams, so the UE drop of a
/// seed does not depend on the MBS density. Counts use CDF inversion, so for
/// one seed a denser MBS process draws a superset of a sparser one (unless a
/// rejection intervened).
pub fn generate_scenario(config: &PhysicalConfig, mission: &Mission, seed: u64) -> Result<Scenario> {
    config.validate()?;
    if mission.area_ue.is_degenerate() || mission.area_uav.is_degenerate() {
        return Err(Error::InvalidParameter("zero-area region".into()));
    }
    mission.stages()?;
    let tm = mission.t_min(config.v_max);
    if mission.duration_s < tm {
        return Err(Error::DurationTooShort { duration_s: mission.duration_s, t_min_s: tm });
    }

    let mut rng = rng_from_seed(seed);
    let mut ue_rng = rng_from_seed(ue_stream_seed(seed));
    let area = mission.area_ue;
    let mut rejected_draws = 0;
    let mbs_positions = loop {
        let pts = draw_ppp(&mut rng, config.lambda_mbs, &area);
        if !pts.is_empty() {
            break pts;
        }
        rejected_draws += 1;
        if rejected_draws >= MAX_REJECTIONS {
            return Err(Error::NoBaseStation);
        }
    };
    if rejected_draws > 0 {
        log::debug!("seed {seed}: discarded {rejected_draws} MBS draw(s) with no station");
    }
    let ue_positions = draw_ppp(&mut ue_rng, config.lambda_ue, &area);

    Ok(Scenario {
        config: config.clone(),
        mission: mission.clone(),
        mbs_positions,
        ue_positions,
        seed,
        rejected_draws,
    })
}

/// Seed of the UE stream for scenario seed `seed`.
pub fn ue_stream_seed(seed: u64) -> u64 {
    splitmix64(seed)
}

/// Homogeneous PPP on `area`: Poisson count, then iid uniform points (x then y).
pub fn draw_ppp(rng: &mut SimRng, density_per_km2: f64, area: &Rect) -> Vec<Point2> {
    let count = poisson(rng, density_per_km2 * area.area_km2());
    (0..count)
        .map(|_| {
            let x = uniform_in(rng, area.min.x, area.max.x);
            let y = uniform_in(rng, area.min.y, area.max.y);
            Point2::new(x, y)
        })
        .collect()
}

impl Scenario {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_min_examples() {
        let v = t_min(Point2::new(0.0, 0.0), Point2::new(1000.0, 1000.0), 17.7);
        assert!((v - 1000.0 * 2f64.sqrt() / 17.7).abs() < 1e-12);
        assert!((v - 79.89).abs() < 0.01);
        assert_eq!(t_min(Point2::new(3.0, 4.0), Point2::new(3.0, 4.0), 17.7), 0.0);
        assert!((t_min(Point2::new(0.0, 0.0), Point2::new(1000.0, 0.0), 12.5) - 80.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_positions() {
        let c = PhysicalConfig::default();
        let m = Mission::default();
        let a = generate_scenario(&c, &m, 42).unwrap();
        let b = generate_scenario(&c, &m, 42).unwrap();
        assert_eq!(a, b);
        let other = generate_scenario(&c, &m, 43).unwrap();
        assert_ne!(a.ue_positions, other.ue_positions);
    }

    #[test]
    fn rejects_short_mission() {
        let c = PhysicalConfig::default();
        let m = Mission { duration_s: 72.0, ..Mission::default() };
        assert!(matches!(generate_scenario(&c, &m, 1), Err(Error::DurationTooShort { .. })));
    }

    #[test]
    fn rejects_zero_area() {
        let c = PhysicalConfig::default();
        let mut m = Mission::default();
        m.area_ue.max.x = m.area_ue.min.x;
        assert!(generate_scenario(&c, &m, 1).is_err());
    }

    #[test]
    fn rejects_non_multiple_duration() {
        let m = Mission { duration_s: 241.0, ..Mission::default() };
        assert!(m.stages().is_err());
        assert_eq!(Mission::default().stages().unwrap(), 30);
    }

    #[test]
    fn sparse_mbs_draws_are_resampled() {
        // Mean 0.05 MBS per realization: most first draws are empty.
        let c = PhysicalConfig { lambda_mbs: 0.05, ..PhysicalConfig::default() };
        let s = generate_scenario(&c, &Mission::default(), 5).unwrap();
        assert!(!s.mbs_positions.is_empty());
        assert!(s.rejected_draws > 0);
    }

    #[test]
    fn json_round_trip() {
        let s = generate_scenario(&PhysicalConfig::default(), &Mission::default(), 9).unwrap();
        let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
    }
}
