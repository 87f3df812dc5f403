//! Closed-form path-loss models. Every function returns a loss in dB that is
//! independent of transmit power; powers and antenna gains are applied by the
//! radio layer.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Okumura-Hata suburban coefficients for one (f_c, h_tx, h_ue) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HataCoefficients {
    pub a_coef: f64,
    pub b_coef: f64,
    pub c_coef: f64,
    /// UE antenna-height correction a(h_ue) in dB, already folded into `a_coef`.
    pub ue_correction: f64,
}

impl HataCoefficients {
    pub fn new(f_c_mhz: f64, h_tx: f64, h_ue: f64) -> Self {
        let lf = f_c_mhz.log10();
        let ue_correction = (1.1 * lf - 0.7) * h_ue - (1.56 * lf - 0.8);
        let a_coef = 69.55 + 26.16 * lf - 13.82 * h_tx.log10() - ue_correction;
        let b_coef = 44.9 - 6.55 * h_tx.log10();
        let c_coef = -2.0 * (f_c_mhz / 28.0).log10().powi(2) - 5.4;
        Self { a_coef, b_coef, c_coef, ue_correction }
    }

    pub fn loss_db(&self, d_km: f64) -> f64 {
        self.a_coef + self.b_coef * d_km.log10() + self.c_coef
    }
}

static WARN_HATA_DISTANCE: AtomicBool = AtomicBool::new(false);
static WARN_HATA_FREQ: AtomicBool = AtomicBool::new(false);
static WARN_HATA_HEIGHT: AtomicBool = AtomicBool::new(false);

fn warn_once(flag: &AtomicBool, msg: impl FnOnce() -> String) {
    if !flag.swap(true, Ordering::Relaxed) {
        log::warn!("{}", msg());
    }
}

/// Okumura-Hata loss (dB) at distance `d_m` meters. The model is calibrated
/// for 1-10 km, 150-1500 MHz, h_tx in 30-200 m and h_ue in 1-10 m; inputs
/// outside that envelope are evaluated anyway and reported once per process.
pub fn hata_path_loss(d_m: f64, f_c_mhz: f64, h_tx: f64, h_ue: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_m));
    }
    if !(1000.0..=10_000.0).contains(&d_m) {
        warn_once(&WARN_HATA_DISTANCE, || {
            format!("Okumura-Hata evaluated at {d_m:.1} m, outside its 1-10 km range")
        });
    }
    if !(150.0..=1500.0).contains(&f_c_mhz) {
        warn_once(&WARN_HATA_FREQ, || {
            format!("Okumura-Hata evaluated at {f_c_mhz} MHz, outside 150-1500 MHz")
        });
    }
    if !(30.0..=200.0).contains(&h_tx) || !(1.0..=10.0).contains(&h_ue) {
        warn_once(&WARN_HATA_HEIGHT, || {
            format!("Okumura-Hata antenna heights {h_tx} m / {h_ue} m outside the calibrated range")
        });
    }
    Ok(HataCoefficients::new(f_c_mhz, h_tx, h_ue).loss_db(d_m / 1000.0))
}

/// Free-space loss with `d` in meters and `f_c` in MHz.
pub fn fspl(d_m: f64, f_c_mhz: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_m));
    }
    Ok(20.0 * d_m.log10() + 20.0 * f_c_mhz.log10() - 27.55)
}

pub const BACKHAUL_MIN_ALTITUDE: f64 = 22.5;
pub const BACKHAUL_MAX_ALTITUDE: f64 = 300.0;

/// Aerial-UE urban-macro line-of-sight loss for the MBS→UAV feeder link:
/// `28 + 22 log10(d3d) + 20 log10(f_c / 1 GHz)`.
pub fn backhaul_path_loss(d3d_m: f64, f_c_mhz: f64, h_uav: f64) -> Result<f64> {
    if !(d3d_m > 0.0) {
        return Err(Error::NonPositiveDistance(d3d_m));
    }
    if !(BACKHAUL_MIN_ALTITUDE..=BACKHAUL_MAX_ALTITUDE).contains(&h_uav) {
        return Err(Error::AltitudeOutOfRange(h_uav));
    }
    Ok(28.0 + 22.0 * d3d_m.log10() + 20.0 * (f_c_mhz / 1000.0).log10())
}

/// Grid-of-buildings statistics for the line-of-sight probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BuildingModel {
    /// Fraction of land covered by buildings.
    pub a_hat: f64,
    /// Buildings per km².
    pub b_hat: f64,
    /// Rayleigh scale of building heights (m).
    pub c_hat: f64,
}

impl Default for BuildingModel {
    fn default() -> Self {
        Self { a_hat: 0.1, b_hat: 100.0, c_hat: 10.0 }
    }
}

impl BuildingModel {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.a_hat > 0.0 && self.a_hat < 1.0) {
            out.push(format!("a_hat must lie in (0, 1), got {}", self.a_hat));
        }
        if !(self.b_hat > 0.0) {
            out.push(format!("b_hat must be positive, got {}", self.b_hat));
        }
        if !(self.c_hat > 0.0) {
            out.push(format!("c_hat must be positive, got {}", self.c_hat));
        }
        out
    }

    /// Index of the last building crossed: ⌊z·√(â·b̂)/1000 − 1⌋.
    pub fn crossings(&self, z_m: f64) -> i64 {
        (z_m * (self.a_hat * self.b_hat).sqrt() / 1000.0 - 1.0).floor() as i64
    }
}

/// Exponent form used in the line-of-sight probability product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosVariant {
    /// Linear height difference over 2ĉ², with each factor clamped to [0, 1].
    AsWritten,
    /// Squared ray height at building n with the (m+1) spacing divisor.
    #[default]
    Corrected,
}

/// Probability that the UAV→UE ray at horizontal range `z_m` clears every
/// building it crosses.
pub fn los_probability(z_m: f64, h_uav: f64, h_ue: f64, bm: &BuildingModel, variant: LosVariant) -> f64 {
    let m = bm.crossings(z_m.max(0.0));
    if m < 0 {
        return 1.0;
    }
    let two_c2 = 2.0 * bm.c_hat * bm.c_hat;
    let mut p = 1.0;
    for n in 0..=m {
        let nf = n as f64 + 0.5;
        let factor = match variant {
            LosVariant::AsWritten => 1.0 - (-(h_uav - nf * (h_uav - h_ue)) / two_c2).exp(),
            LosVariant::Corrected => {
                let h = h_uav - nf * (h_uav - h_ue) / (m as f64 + 1.0);
                1.0 - (-(h * h) / two_c2).exp()
            }
        };
        p *= factor.clamp(0.0, 1.0);
        if p == 0.0 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Loss added at the 1 m reference distance of the mixture exponent law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceLoss {
    /// Bare exponent law, 0 dB at 1 m.
    None,
    /// Free-space loss over 1 m at the carrier, `20 log10(f_MHz) − 27.55`.
    #[default]
    #[serde(rename = "free_space_1m")]
    FreeSpace1m,
}

impl ReferenceLoss {
    pub fn loss_db(&self, f_c_mhz: f64) -> f64 {
        match self {
            ReferenceLoss::None => 0.0,
            ReferenceLoss::FreeSpace1m => 20.0 * f_c_mhz.log10() - 27.55,
        }
    }
}

/// Mixture LoS/NLoS parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixtureParams {
    pub buildings: BuildingModel,
    pub los_variant: LosVariant,
    pub reference: ReferenceLoss,
}

/// Mixture loss `−10 log10(d^−α_L τ_L(z) + d^−α_N τ_N(z))` with `d` the 3D
/// distance in meters (1 m reference) and `z` the horizontal range.
#[allow(clippy::too_many_arguments)]
pub fn mixture_path_loss(
    d_m: f64,
    z_m: f64,
    h_uav: f64,
    h_ue: f64,
    alpha_los: f64,
    alpha_nlos: f64,
    bm: &BuildingModel,
    variant: LosVariant,
) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_m));
    }
    let tau_l = los_probability(z_m, h_uav, h_ue, bm, variant);
    let tau_n = 1.0 - tau_l;
    // Work in the log domain around the LoS term so large d never underflows.
    let ld = d_m.log10();
    let los = -alpha_los * ld;
    let nlos = -alpha_nlos * ld;
    let peak = los.max(nlos);
    let sum = tau_l * 10f64.powf(los - peak) + tau_n * 10f64.powf(nlos - peak);
    Ok(-10.0 * (peak + sum.log10()))
}

/// Model applied to one link class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathLossModel {
    Ohplm,
    Mplm(MixtureParams),
    Fspl,
    Backhaul3gpp,
}

impl PathLossModel {
    pub fn name(&self) -> &'static str {
        match self {
            PathLossModel::Ohplm => "ohplm",
            PathLossModel::Mplm(_) => "mplm",
            PathLossModel::Fspl => "fspl",
            PathLossModel::Backhaul3gpp => "backhaul3gpp",
        }
    }

    /// Loss between a transmitter and a receiver. Hata takes the transmitter
    /// height as its base-station height and the receiver height as h_ue.
    pub fn loss_db(&self, tx: Point3, rx: Point3, f_c_mhz: f64, alpha_los: f64, alpha_nlos: f64) -> Result<f64> {
        let d = tx.distance(rx);
        match self {
            PathLossModel::Ohplm => hata_path_loss(d, f_c_mhz, tx.z, rx.z),
            PathLossModel::Fspl => fspl(d, f_c_mhz),
            PathLossModel::Mplm(p) => {
                let (high, low) = if tx.z >= rx.z { (tx.z, rx.z) } else { (rx.z, tx.z) };
                let z = tx.horizontal_distance(rx);
                Ok(p.reference.loss_db(f_c_mhz)
                    + mixture_path_loss(d, z, high, low, alpha_los, alpha_nlos, &p.buildings, p.los_variant)?)
            }
            PathLossModel::Backhaul3gpp => backhaul_path_loss(d, f_c_mhz, tx.z.max(rx.z)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Values below were computed with an independent Python evaluation of the
    // closed forms (math.log10 in double precision).
    const HATA_A_30: f64 = 130.79003319087525;
    const HATA_B_30: f64 = 35.224855781586214;
    const HATA_C: f64 = -11.378420211783379;
    const HATA_1KM_30: f64 = 119.41161297909187;
    const HATA_1KM_120: f64 = 111.09114389893944;

    #[test]
    fn hata_coefficients_match_hand_evaluation() {
        let h = HataCoefficients::new(1500.0, 30.0, 2.0);
        assert!((h.a_coef - HATA_A_30).abs() < 1e-9);
        assert!((h.b_coef - HATA_B_30).abs() < 1e-9);
        assert!((h.c_coef - HATA_C).abs() < 1e-9);
        assert!((hata_path_loss(1000.0, 1500.0, 30.0, 2.0).unwrap() - HATA_1KM_30).abs() < 1e-6);
    }

    #[test]
    fn hata_doubling_adds_b_log2() {
        let b = HataCoefficients::new(1500.0, 30.0, 2.0).b_coef;
        let l1 = hata_path_loss(400.0, 1500.0, 30.0, 2.0).unwrap();
        let l2 = hata_path_loss(800.0, 1500.0, 30.0, 2.0).unwrap();
        assert!((l2 - l1 - b * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn hata_taller_transmitter_loses_less() {
        let high = hata_path_loss(1000.0, 1500.0, 120.0, 2.0).unwrap();
        let low = hata_path_loss(1000.0, 1500.0, 30.0, 2.0).unwrap();
        assert!(high < low);
        assert!((high - HATA_1KM_120).abs() < 1e-6);
    }

    #[test]
    fn zero_distance_rejected() {
        assert!(hata_path_loss(0.0, 1500.0, 30.0, 2.0).is_err());
        assert!(fspl(0.0, 1500.0).is_err());
        assert!(backhaul_path_loss(0.0, 1500.0, 120.0).is_err());
        let bm = BuildingModel::default();
        assert!(mixture_path_loss(0.0, 0.0, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::Corrected).is_err());
    }

    #[test]
    fn fspl_examples() {
        assert!((fspl(1000.0, 1500.0).unwrap() - 95.97182518111363).abs() < 1e-9);
        assert!((fspl(1.0, 1.0).unwrap() + 27.55).abs() < 1e-12);
        let step = fspl(2000.0, 900.0).unwrap() - fspl(1000.0, 900.0).unwrap();
        assert!((step - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!((step - 6.02).abs() < 0.001);
    }

    #[test]
    fn backhaul_examples() {
        assert!((backhaul_path_loss(1000.0, 1500.0, 120.0).unwrap() - 97.52182518111363).abs() < 1e-9);
        let step = backhaul_path_loss(600.0, 1500.0, 120.0).unwrap()
            - backhaul_path_loss(300.0, 1500.0, 120.0).unwrap();
        assert!((step - 6.622659904607587).abs() < 1e-9);
        assert!(matches!(
            backhaul_path_loss(100.0, 1500.0, 10.0),
            Err(Error::AltitudeOutOfRange(_))
        ));
    }

    #[test]
    fn los_overhead_is_certain() {
        let bm = BuildingModel::default();
        for v in [LosVariant::AsWritten, LosVariant::Corrected] {
            assert_eq!(los_probability(0.0, 120.0, 2.0, &bm, v), 1.0);
        }
    }

    #[test]
    fn crossings_floor_expression() {
        let bm = BuildingModel::default();
        assert_eq!(bm.crossings(1000.0), 2);
        assert_eq!(bm.crossings(0.0), -1);
        assert_eq!(bm.crossings(316.0), -1);
        assert_eq!(bm.crossings(317.0), 0);
    }

    #[test]
    fn los_non_increasing_sweep() {
        let bm = BuildingModel::default();
        for v in [LosVariant::AsWritten, LosVariant::Corrected] {
            let mut prev = 1.0;
            for i in 0..=1500 {
                let p = los_probability(i as f64, 120.0, 2.0, &bm, v);
                assert!((0.0..=1.0).contains(&p));
                assert!(p <= prev + 1e-15, "{v:?} z={i}: {p} > {prev}");
                prev = p;
            }
        }
    }

    #[test]
    fn mixture_pure_los_reduction() {
        let bm = BuildingModel::default();
        let d0 = 118.0;
        let l = mixture_path_loss(d0, 0.0, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::Corrected).unwrap();
        assert!((l - 10.0 * 2.09 * d0.log10()).abs() < 1e-9);
        let a = mixture_path_loss(d0, 0.0, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::AsWritten).unwrap();
        assert_eq!(a, l);
    }

    #[test]
    fn mixture_matches_frozen_values() {
        // Independent double-precision evaluation of the closed forms.
        let bm = BuildingModel::default();
        let (d, z) = (500.0, 489.0);
        let c = mixture_path_loss(d, z, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::Corrected).unwrap();
        assert!((c - 56.408473126740574).abs() < 1e-9);
        let w = mixture_path_loss(d, z, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::AsWritten).unwrap();
        assert!((w - 62.21055041695369).abs() < 1e-9);
        let p = los_probability(1000.0, 120.0, 2.0, &bm, LosVariant::Corrected);
        assert!((p - 0.9043655476461222).abs() < 1e-12);
        assert_eq!(los_probability(1000.0, 120.0, 2.0, &bm, LosVariant::AsWritten), 0.0);
    }

    #[test]
    fn mixture_bounded_by_pure_laws() {
        let bm = BuildingModel::default();
        for &(d, z) in &[(130.0, 50.0), (500.0, 489.0), (1200.0, 1194.0)] {
            let l = mixture_path_loss(d, z, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::Corrected).unwrap();
            let lo = 10.0 * 2.09 * f64::log10(d);
            let hi = 10.0 * 3.75 * f64::log10(d);
            assert!(lo - 1e-9 <= l && l <= hi + 1e-9);
        }
    }

    #[test]
    fn mplm_reference_offset() {
        let tx = Point3::new(0.0, 0.0, 120.0);
        let rx = Point3::new(0.0, 0.0, 2.0);
        let bare = MixtureParams { reference: ReferenceLoss::None, ..Default::default() };
        let l0 = PathLossModel::Mplm(bare).loss_db(tx, rx, 1500.0, 2.09, 3.75).unwrap();
        assert!((l0 - 20.9 * 118f64.log10()).abs() < 1e-9);
        let l1 = PathLossModel::Mplm(MixtureParams::default()).loss_db(tx, rx, 1500.0, 2.09, 3.75).unwrap();
        assert!((l1 - l0 - 35.97182518111363).abs() < 1e-9);
    }
}
