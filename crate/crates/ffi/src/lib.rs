//! C ABI over the `uavtraj` planner.
//!
//! Handles are opaque and owned by the caller once returned; release each
//! with its `_free` function. Every fallible call returns a [`UavtrajStatus`]
//! and, on failure, stores a message retrievable with
//! [`uavtraj_last_error`] on the same thread. Panics never cross the
//! boundary; they surface as `UAVTRAJ_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use uavtraj::config::{preset, RunConfig};
use uavtraj::pathloss::{self, BuildingModel, LosVariant};
use uavtraj::planner::{solve_dp, ActionSet, StateGrid, Trajectory};
use uavtraj::radio::{self, build_reward_map, Criterion, LinkModels, RadioSetup};
use uavtraj::scenario::{generate_scenario, Scenario};
use uavtraj::smoothing::{smooth, SmoothedTrajectory};
use uavtraj::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavtrajStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Unreachable = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavtrajCriterion {
    Pf = 0,
    SumRate = 1,
    P5 = 2,
}

impl From<UavtrajCriterion> for Criterion {
    fn from(c: UavtrajCriterion) -> Self {
        match c {
            UavtrajCriterion::Pf => Criterion::Pf,
            UavtrajCriterion::SumRate => Criterion::SumRate,
            UavtrajCriterion::P5 => Criterion::P5,
        }
    }
}

/// A validated run configuration.
pub struct UavtrajConfig {
    inner: RunConfig,
}

/// One network realization.
pub struct UavtrajScenario {
    inner: Scenario,
}

/// A planned path and its Bezier-smoothed counterpart.
pub struct UavtrajTrajectory {
    path: Trajectory,
    smoothed: SmoothedTrajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(UavtrajStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Unreachable { .. } => UavtrajStatus::Unreachable,
            Error::Config(_) | Error::DurationTooShort { .. } => UavtrajStatus::InvalidConfig,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => UavtrajStatus::Internal,
            _ => UavtrajStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UavtrajStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UavtrajStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UavtrajStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(UavtrajStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(UavtrajStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Copy `points` as interleaved x, y into `buf` of `capacity` doubles.
/// `written` receives the number of points (also on `BufferTooSmall`).
unsafe fn copy_points(
    points: &[uavtraj::geometry::Point2],
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> Result<(), Failure> {
    let n = out_ref(written, "written")?;
    *n = points.len();
    if capacity < 2 * points.len() {
        return Err(Failure(
            UavtrajStatus::BufferTooSmall,
            format!("need {} doubles, got {capacity}", 2 * points.len()),
        ));
    }
    if points.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    let out = std::slice::from_raw_parts_mut(buf, 2 * points.len());
    for (i, p) in points.iter().enumerate() {
        out[2 * i] = p.x;
        out[2 * i + 1] = p.y;
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uavtraj_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uavtraj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn finish_config(inner: RunConfig, out: &mut *mut UavtrajConfig) -> Result<(), Failure> {
    inner
        .validate()
        .map_err(|e| Failure(UavtrajStatus::InvalidConfig, e.to_string()))?;
    *out = Box::into_raw(Box::new(UavtrajConfig { inner }));
    Ok(())
}

/// Parse and validate a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_config_from_toml(toml: *const c_char, out: *mut *mut UavtrajConfig) -> UavtrajStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let text = c_str(toml, "toml")?;
        let cfg = RunConfig::from_toml(text).map_err(|e| Failure(UavtrajStatus::InvalidConfig, e.to_string()))?;
        finish_config(cfg, out)
    })
}

/// Load a bundled preset (`fig2` ... `fig7`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_config_from_preset(name: *const c_char, out: *mut *mut UavtrajConfig) -> UavtrajStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let name = c_str(name, "name")?;
        let text = preset(name)
            .ok_or_else(|| Failure(UavtrajStatus::InvalidArgument, format!("unknown preset {name}")))?;
        let cfg = RunConfig::from_toml(text).map_err(|e| Failure(UavtrajStatus::InvalidConfig, e.to_string()))?;
        finish_config(cfg, out)
    })
}

/// Master seed of the configuration.
///
/// # Safety
/// `cfg` must come from this library; `seed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_config_master_seed(cfg: *const UavtrajConfig, seed: *mut u64) -> UavtrajStatus {
    guard(|| {
        *out_ref(seed, "seed")? = deref(cfg, "cfg")?.inner.experiment.master_seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_config_free(cfg: *mut UavtrajConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Draw the network realization for `seed` with the configuration's
/// physical constants and mission.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_scenario_generate(
    cfg: *const UavtrajConfig,
    seed: u64,
    out: *mut *mut UavtrajScenario,
) -> UavtrajStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = &deref(cfg, "cfg")?.inner;
        let inner = generate_scenario(&cfg.physical, &cfg.mission, seed)?;
        *out = Box::into_raw(Box::new(UavtrajScenario { inner }));
        Ok(())
    })
}

/// Number of MBSs and UEs.
///
/// # Safety
/// `scenario` must come from this library; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_scenario_counts(
    scenario: *const UavtrajScenario,
    mbs: *mut usize,
    ues: *mut usize,
) -> UavtrajStatus {
    guard(|| {
        let s = &deref(scenario, "scenario")?.inner;
        *out_ref(mbs, "mbs")? = s.mbs_positions.len();
        *out_ref(ues, "ues")? = s.ue_positions.len();
        Ok(())
    })
}

/// MBS positions as interleaved x, y (m).
///
/// # Safety
/// `buf` must hold `capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_scenario_mbs_positions(
    scenario: *const UavtrajScenario,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> UavtrajStatus {
    guard(|| copy_points(&deref(scenario, "scenario")?.inner.mbs_positions, buf, capacity, written))
}

/// UE positions as interleaved x, y (m).
///
/// # Safety
/// `buf` must hold `capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_scenario_ue_positions(
    scenario: *const UavtrajScenario,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> UavtrajStatus {
    guard(|| copy_points(&deref(scenario, "scenario")?.inner.ue_positions, buf, capacity, written))
}

/// # Safety
/// `scenario` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_scenario_free(scenario: *mut UavtrajScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Plan the optimal path for `criterion` and smooth it. The radio setup is
/// the configuration's first mode, UAV→UE model and antenna.
///
/// # Safety
/// Handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_plan(
    cfg: *const UavtrajConfig,
    scenario: *const UavtrajScenario,
    criterion: UavtrajCriterion,
    out: *mut *mut UavtrajTrajectory,
) -> UavtrajStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = &deref(cfg, "cfg")?.inner;
        let s = &deref(scenario, "scenario")?.inner;
        let base = cfg.base_setup();
        let setup = RadioSetup {
            models: LinkModels { uav_ue: cfg.uav_ue_kinds()[0].model(&cfg.mplm), ..base.models },
            antenna: cfg.experiment.antennas[0],
            mode: cfg.experiment.modes[0],
            relay_rule: base.relay_rule,
        };
        let cell = cfg.planner.cell_m;
        let grid = StateGrid::for_mission(&s.mission, cell)?;
        let map = build_reward_map(s, &grid.lattice, &setup)?;
        let path = solve_dp(map.rewards(criterion.into()), &grid, &ActionSet::standard(cell, s.mission.stage_s))?;
        let smoothed = smooth(&path, s.mission.stage_s, s.config.v_max)?;
        *out = Box::into_raw(Box::new(UavtrajTrajectory { path, smoothed }));
        Ok(())
    })
}

/// Number of waypoints (stages + 1).
///
/// # Safety
/// `traj` must come from this library; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_trajectory_len(traj: *const UavtrajTrajectory, len: *mut usize) -> UavtrajStatus {
    guard(|| {
        *out_ref(len, "len")? = deref(traj, "traj")?.path.positions.len();
        Ok(())
    })
}

/// DP objective value and number of hover stages.
///
/// # Safety
/// `traj` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_trajectory_summary(
    traj: *const UavtrajTrajectory,
    value: *mut f64,
    hover_stages: *mut usize,
) -> UavtrajStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.path;
        *out_ref(value, "value")? = t.value;
        *out_ref(hover_stages, "hover_stages")? = t.hover_stages();
        Ok(())
    })
}

/// Lattice waypoints as interleaved x, y (m).
///
/// # Safety
/// `buf` must hold `capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_trajectory_waypoints(
    traj: *const UavtrajTrajectory,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> UavtrajStatus {
    guard(|| copy_points(&deref(traj, "traj")?.path.positions, buf, capacity, written))
}

/// Smoothed curve samples at the stage boundaries as interleaved x, y (m).
///
/// # Safety
/// `buf` must hold `capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_trajectory_smoothed(
    traj: *const UavtrajTrajectory,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> UavtrajStatus {
    guard(|| copy_points(&deref(traj, "traj")?.smoothed.samples, buf, capacity, written))
}

/// # Safety
/// `traj` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_trajectory_free(traj: *mut UavtrajTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

fn write_f64(out: *mut f64, v: Result<f64, Error>) -> Result<(), Failure> {
    let v = v?;
    *unsafe { out_ref(out, "out") }? = v;
    Ok(())
}

/// Okumura-Hata loss (dB) at `d_m` meters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_hata_path_loss(
    d_m: f64,
    f_c_mhz: f64,
    h_tx: f64,
    h_ue: f64,
    out: *mut f64,
) -> UavtrajStatus {
    guard(|| write_f64(out, pathloss::hata_path_loss(d_m, f_c_mhz, h_tx, h_ue)))
}

/// Free-space loss (dB).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_fspl(d_m: f64, f_c_mhz: f64, out: *mut f64) -> UavtrajStatus {
    guard(|| write_f64(out, pathloss::fspl(d_m, f_c_mhz)))
}

/// MBS→UAV backhaul loss (dB) over the 3D distance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_backhaul_path_loss(d3d_m: f64, f_c_mhz: f64, h_uav: f64, out: *mut f64) -> UavtrajStatus {
    guard(|| write_f64(out, pathloss::backhaul_path_loss(d3d_m, f_c_mhz, h_uav)))
}

/// Line-of-sight probability; `corrected` non-zero selects the corrected
/// exponent form.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_los_probability(
    z_m: f64,
    h_uav: f64,
    h_ue: f64,
    a_hat: f64,
    b_hat: f64,
    c_hat: f64,
    corrected: c_int,
    out: *mut f64,
) -> UavtrajStatus {
    guard(|| {
        let bm = BuildingModel { a_hat, b_hat, c_hat };
        let bad = bm.violations();
        if !bad.is_empty() {
            return Err(Failure(UavtrajStatus::InvalidArgument, bad.join("; ")));
        }
        let v = if corrected != 0 { LosVariant::Corrected } else { LosVariant::AsWritten };
        write_f64(out, Ok(pathloss::los_probability(z_m, h_uav, h_ue, &bm, v)))
    })
}

/// Two-hop amplify-and-forward SIR (linear).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uavtraj_relay_end_to_end_sir(gamma_backhaul: f64, gamma_access: f64, out: *mut f64) -> UavtrajStatus {
    guard(|| write_f64(out, radio::relay_end_to_end_sir(gamma_backhaul, gamma_access)))
}
