//! Crossed-dipole radiation and polarization gains.
//!
//! A crossed-dipole terminal carries one short dipole along z and one along y,
//! driven in phase quadrature. Toward a unit direction r̂ the far field is
//! `E(r̂) = ẑ⊥ + j ŷ⊥` (components of each arm transverse to r̂). Its
//! directivity is `0.75 (1 + r_x²)`, peaking at 1.5 along ±x where the wave is
//! purely circular, and falling to 0.75 straight down where only the y arm
//! radiates and the wave is linear.
//!
//! Access links (MBS→UE, UAV→UE) use the transmitter-side gain: directivity
//! times the fraction of radiated power carried by the dominant circular
//! component, which reduces to `0.375 (1 + |r_x|)²`. The MBS→UAV link uses
//! both radiation patterns and the polarization loss factor between the
//! incident wave and the receive antenna.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

pub type Vec3 = [f64; 3];
pub type Jones = [Complex64; 3];

/// Peak directivity of the crossed-dipole pair.
pub const CROSSED_DIPOLE_MAX_GAIN: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntennaMode {
    #[default]
    Omni,
    CrossedDipole,
}

impl AntennaMode {
    pub fn name(&self) -> &'static str {
        match self {
            AntennaMode::Omni => "omni",
            AntennaMode::CrossedDipole => "crossed_dipole",
        }
    }

    pub fn max_gain(&self) -> f64 {
        match self {
            AntennaMode::Omni => 1.0,
            AntennaMode::CrossedDipole => CROSSED_DIPOLE_MAX_GAIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub tx_position: Point3,
    pub rx_position: Point3,
    pub tx_mode: AntennaMode,
    pub rx_mode: AntennaMode,
}

impl LinkGeometry {
    /// Unit vector from transmitter to receiver.
    pub fn direction(&self) -> Result<Vec3> {
        let d = [
            self.rx_position.x - self.tx_position.x,
            self.rx_position.y - self.tx_position.y,
            self.rx_position.z - self.tx_position.z,
        ];
        normalize(d).ok_or(Error::DegenerateGeometry)
    }
}

fn normalize(v: Vec3) -> Option<Vec3> {
    let n = dot(v, v).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    Some([v[0] / n, v[1] / n, v[2] / n])
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn transverse(axis: Vec3, r: Vec3) -> Vec3 {
    let p = dot(axis, r);
    [axis[0] - p * r[0], axis[1] - p * r[1], axis[2] - p * r[2]]
}

/// Far-field vector of the quadrature-fed z/y dipole pair toward `r` (unit).
pub fn crossed_dipole_field(r: Vec3) -> Jones {
    let z = transverse([0.0, 0.0, 1.0], r);
    let y = transverse([0.0, 1.0, 0.0], r);
    [
        Complex64::new(z[0], y[0]),
        Complex64::new(z[1], y[1]),
        Complex64::new(z[2], y[2]),
    ]
}

/// Directivity (linear) of the crossed-dipole pair toward `r` (unit).
pub fn crossed_dipole_directivity(r: Vec3) -> f64 {
    0.75 * (1.0 + r[0] * r[0])
}

/// An orthonormal transverse basis (u, v) with u × v = k.
fn transverse_basis(k: Vec3) -> (Vec3, Vec3) {
    let seed = if k[0].abs() <= k[1].abs() && k[0].abs() <= k[2].abs() {
        [1.0, 0.0, 0.0]
    } else if k[1].abs() <= k[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let u = normalize(transverse(seed, k)).expect("seed axis is not parallel to k");
    let v = cross(k, u);
    (u, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handedness {
    /// Field rotates from u toward v about the propagation direction.
    Right,
    Left,
}

/// Unit circular polarization vector for a wave travelling along `k` (unit).
pub fn circular_polarization(k: Vec3, hand: Handedness) -> Jones {
    let (u, v) = transverse_basis(k);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = match hand {
        Handedness::Right => -1.0,
        Handedness::Left => 1.0,
    };
    [
        Complex64::new(s * u[0], sign * s * v[0]),
        Complex64::new(s * u[1], sign * s * v[1]),
        Complex64::new(s * u[2], sign * s * v[2]),
    ]
}

fn norm_sqr(e: &Jones) -> f64 {
    e.iter().map(|c| c.norm_sqr()).sum()
}

/// Fraction of the power of `field` (travelling along `k`) carried by its
/// dominant circular component. 1 for circular, 0.5 for linear polarization.
pub fn circular_purity(field: &Jones, k: Vec3) -> f64 {
    let total = norm_sqr(field);
    if total == 0.0 {
        return 0.0;
    }
    let (u, v) = transverse_basis(k);
    let eu: Complex64 = (0..3).map(|i| field[i] * u[i]).sum();
    let ev: Complex64 = (0..3).map(|i| field[i] * v[i]).sum();
    let j = Complex64::i();
    let right = (eu + j * ev).norm_sqr();
    let left = (eu - j * ev).norm_sqr();
    right.max(left) / (right + left)
}

/// Polarization loss factor `|ρ̂_w · ρ̂_a|²` between an incident wave and a
/// receive antenna, where `antenna` is the field that antenna would radiate
/// back toward the source. Both vectors are normalized here.
pub fn polarization_loss_factor(wave: &Jones, antenna: &Jones) -> f64 {
    let (nw, na) = (norm_sqr(wave), norm_sqr(antenna));
    if nw == 0.0 || na == 0.0 {
        return 0.0;
    }
    let p: Complex64 = (0..3).map(|i| wave[i] * antenna[i]).sum();
    (p.norm_sqr() / (nw * na)).clamp(0.0, 1.0)
}

/// Transmitter-side power gain of an access link (receiver treated as ideal).
pub fn tx_gain(geom: &LinkGeometry) -> Result<f64> {
    let r = geom.direction()?;
    Ok(match geom.tx_mode {
        AntennaMode::Omni => 1.0,
        AntennaMode::CrossedDipole => {
            let purity = circular_purity(&crossed_dipole_field(r), r);
            crossed_dipole_directivity(r) * purity
        }
    })
}

/// Combined radiation and polarization gain of the MBS→UAV feeder link.
pub fn backhaul_combined_gain(geom: &LinkGeometry) -> Result<f64> {
    let r = geom.direction()?;
    let back = [-r[0], -r[1], -r[2]];
    let g_tx = match geom.tx_mode {
        AntennaMode::Omni => 1.0,
        AntennaMode::CrossedDipole => crossed_dipole_directivity(r),
    };
    let g_rx = match geom.rx_mode {
        AntennaMode::Omni => 1.0,
        AntennaMode::CrossedDipole => crossed_dipole_directivity(back),
    };
    // An omnidirectional end accepts any polarization.
    let plf = match (geom.tx_mode, geom.rx_mode) {
        (AntennaMode::CrossedDipole, AntennaMode::CrossedDipole) => {
            polarization_loss_factor(&crossed_dipole_field(r), &crossed_dipole_field(back))
        }
        _ => 1.0,
    };
    Ok(g_tx * g_rx * plf)
}
