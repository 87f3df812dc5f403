/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef UAVTRAJ_H
#define UAVTRAJ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UavtrajCriterion {
  UAVTRAJ_CRITERION_PF = 0,
  UAVTRAJ_CRITERION_SUM_RATE = 1,
  UAVTRAJ_CRITERION_P5 = 2,
} UavtrajCriterion;

typedef enum UavtrajStatus {
  UAVTRAJ_STATUS_OK = 0,
  UAVTRAJ_STATUS_NULL_POINTER = 1,
  UAVTRAJ_STATUS_INVALID_ARGUMENT = 2,
  UAVTRAJ_STATUS_INVALID_CONFIG = 3,
  UAVTRAJ_STATUS_UNREACHABLE = 4,
  UAVTRAJ_STATUS_BUFFER_TOO_SMALL = 5,
  UAVTRAJ_STATUS_INTERNAL = 6,
} UavtrajStatus;

// A validated run configuration.
typedef struct UavtrajConfig UavtrajConfig;

// One network realization.
typedef struct UavtrajScenario UavtrajScenario;

// A planned path and its Bezier-smoothed counterpart.
typedef struct UavtrajTrajectory UavtrajTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *uavtraj_last_error(void);

// Library version as a static NUL-terminated string.
const char *uavtraj_version(void);

// Parse and validate a TOML configuration.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum UavtrajStatus uavtraj_config_from_toml(const char *toml, struct UavtrajConfig **out);

// Load a bundled preset (`fig2` ... `fig7`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum UavtrajStatus uavtraj_config_from_preset(const char *name, struct UavtrajConfig **out);

// Master seed of the configuration.
//
// # Safety
// `cfg` must come from this library; `seed` must be writable.
enum UavtrajStatus uavtraj_config_master_seed(const struct UavtrajConfig *cfg, uint64_t *seed);

// # Safety
// `cfg` must be null or a handle from this library not yet freed.
void uavtraj_config_free(struct UavtrajConfig *cfg);

// Draw the network realization for `seed` with the configuration's
// physical constants and mission.
//
// # Safety
// `cfg` must come from this library; `out` must be writable.
enum UavtrajStatus uavtraj_scenario_generate(const struct UavtrajConfig *cfg,
                                             uint64_t seed,
                                             struct UavtrajScenario **out);

// Number of MBSs and UEs.
//
// # Safety
// `scenario` must come from this library; both outputs must be writable.
enum UavtrajStatus uavtraj_scenario_counts(const struct UavtrajScenario *scenario,
                                           size_t *mbs,
                                           size_t *ues);

// MBS positions as interleaved x, y (m).
//
// # Safety
// `buf` must hold `capacity` doubles; `written` must be writable.
enum UavtrajStatus uavtraj_scenario_mbs_positions(const struct UavtrajScenario *scenario,
                                                  double *buf,
                                                  size_t capacity,
                                                  size_t *written);

// UE positions as interleaved x, y (m).
//
// # Safety
// `buf` must hold `capacity` doubles; `written` must be writable.
enum UavtrajStatus uavtraj_scenario_ue_positions(const struct UavtrajScenario *scenario,
                                                 double *buf,
                                                 size_t capacity,
                                                 size_t *written);

// # Safety
// `scenario` must be null or a handle from this library not yet freed.
void uavtraj_scenario_free(struct UavtrajScenario *scenario);

// Plan the optimal path for `criterion` and smooth it. The radio setup is
// the configuration's first mode, UAV→UE model and antenna.
//
// # Safety
// Handles must come from this library; `out` must be writable.
enum UavtrajStatus uavtraj_plan(const struct UavtrajConfig *cfg,
                                const struct UavtrajScenario *scenario,
                                enum UavtrajCriterion criterion,
                                struct UavtrajTrajectory **out);

// Number of waypoints (stages + 1).
//
// # Safety
// `traj` must come from this library; `len` must be writable.
enum UavtrajStatus uavtraj_trajectory_len(const struct UavtrajTrajectory *traj, size_t *len);

// DP objective value and number of hover stages.
//
// # Safety
// `traj` must come from this library; outputs must be writable.
enum UavtrajStatus uavtraj_trajectory_summary(const struct UavtrajTrajectory *traj,
                                              double *value,
                                              size_t *hover_stages);

// Lattice waypoints as interleaved x, y (m).
//
// # Safety
// `buf` must hold `capacity` doubles; `written` must be writable.
enum UavtrajStatus uavtraj_trajectory_waypoints(const struct UavtrajTrajectory *traj,
                                                double *buf,
                                                size_t capacity,
                                                size_t *written);

// Smoothed curve samples at the stage boundaries as interleaved x, y (m).
//
// # Safety
// `buf` must hold `capacity` doubles; `written` must be writable.
enum UavtrajStatus uavtraj_trajectory_smoothed(const struct UavtrajTrajectory *traj,
                                               double *buf,
                                               size_t capacity,
                                               size_t *written);

// # Safety
// `traj` must be null or a handle from this library not yet freed.
void uavtraj_trajectory_free(struct UavtrajTrajectory *traj);

// Okumura-Hata loss (dB) at `d_m` meters.
//
// # Safety
// `out` must be writable.
enum UavtrajStatus uavtraj_hata_path_loss(double d_m,
                                          double f_c_mhz,
                                          double h_tx,
                                          double h_ue,
                                          double *out);

// Free-space loss (dB).
//
// # Safety
// `out` must be writable.
enum UavtrajStatus uavtraj_fspl(double d_m, double f_c_mhz, double *out);

// MBS→UAV backhaul loss (dB) over the 3D distance.
//
// # Safety
// `out` must be writable.
enum UavtrajStatus uavtraj_backhaul_path_loss(double d3d_m,
                                              double f_c_mhz,
                                              double h_uav,
                                              double *out);

// Line-of-sight probability; `corrected` non-zero selects the corrected
// exponent form.
//
// # Safety
// `out` must be writable.
enum UavtrajStatus uavtraj_los_probability(double z_m,
                                           double h_uav,
                                           double h_ue,
                                           double a_hat,
                                           double b_hat,
                                           double c_hat,
                                           int corrected,
                                           double *out);

// Two-hop amplify-and-forward SIR (linear).
//
// # Safety
// `out` must be writable.
enum UavtrajStatus uavtraj_relay_end_to_end_sir(double gamma_backhaul,
                                                double gamma_access,
                                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVTRAJ_H */
