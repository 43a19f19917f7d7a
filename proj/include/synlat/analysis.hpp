#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synlat/fit.hpp"
#include "synlat/lattice.hpp"
#include "synlat/propagate.hpp"

namespace synlat {

// ---------------------------------------------------------------------------
// Closed-form predictions for an interacting pair in a tilted lattice

/// Gap of the three-site pair model (sites -1, 0, 1), MHz. Throws SpecError
/// on a negative radicand.
double gap_exact(double detuning_mhz, double v_mhz, double rabi_mhz);
/// sqrt((Delta - V)^2 + Omega^2)
double gap_approx(double detuning_mhz, double v_mhz, double rabi_mhz);
/// (Delta - Omega, Delta + Omega)
std::pair<double, double> breakdown_bounds(double detuning_mhz, double rabi_mhz);
bool inside_breakdown(double detuning_mhz, double v_mhz, double rabi_mhz);

struct GapPrediction {
  double exact_mhz = 0.0;
  double approx_mhz = 0.0;
  double v_lo_mhz = 0.0;
  double v_hi_mhz = 0.0;
};
GapPrediction predict_gap(double detuning_mhz, double v_mhz, double rabi_mhz);

/// Second-order rate of |0,0> <-> |1,1> under bichromatic driving,
/// 2|V| Omega^2 / (Delta^2 - V^2). Throws SpecError at the pole |V| = Delta.
double pair_hopping_rate(double v_mhz, double rabi_mhz, double detuning_mhz);

// ---------------------------------------------------------------------------
// Flux calibration

struct FluxCalibration {
  /// Control phase added to the wraparound link at each sweep point.
  std::vector<double> settings_rad;
  /// Far-site population at the probe time for each setting.
  std::vector<double> response;
  int probe_site = 0;
  double probe_time_us = 0.0;
  FitResult fit;
  /// Control setting that maximizes the response (zero total flux), [0, 2 pi).
  double peak_setting_rad = 0.0;
  /// Flux already present on the ring before the control phase, -peak mod
  /// 2 pi, reported in (-pi, pi].
  double inferred_bias_rad = 0.0;
  double uncertainty_rad = 0.0;
  double peak_height = 0.0;
};

/// Sweeps a control phase on the wraparound link of a flat ring over
/// [0, 2 pi), records the population of the site opposite 0 at t_probe
/// (default 2 / rabi), and fits a Gaussian to locate the peak. Throws Error
/// when the response is flat.
FluxCalibration calibrate_flux(const LatticeSpec& ring, double rabi_mhz, std::optional<double> t_probe_us = std::nullopt,
                               std::size_t points = 32);

/// Signed difference a - b folded into (-pi, pi].
double phase_difference(double a_rad, double b_rad);

// ---------------------------------------------------------------------------
// Simulation + fit pipelines

struct BlochRun {
  double detuning_mhz = 0.0;
  double rabi_mhz = 0.0;
  StateTrajectory trajectory;
  std::vector<double> lambda;
  FitResult fit;
};
/// Single particle from |0> on the chain -half..half with tilt Delta.
BlochRun bloch_oscillation_run(double detuning_mhz, double rabi_mhz, double t_window_us = 5.0,
                               std::size_t points = 401, int half_width = 4);

struct InteractingRun {
  double v_mhz = 0.0;
  StateTrajectory trajectory;
  std::vector<double> p0_avg;
  FitResult fit;
};
struct ScanOptions {
  int half_width = 4;
  double t_window_us = 5.0;
  std::size_t points = 401;
  std::size_t workers = 0;
  /// gamma / omega above which a point is classed as inside breakdown.
  double breakdown_ratio = 0.05;
  /// Empty means the default table.
  std::string c3_table_path;
};
/// Pair from |0,0> in the tilted chain, averaged P_0 fitted with the damped sine.
InteractingRun interacting_bloch_run(double detuning_mhz, double rabi_mhz, double v_mhz, const ScanOptions& opts = {});

struct ScanRow {
  double v_mhz = 0.0;
  double omega_mhz = 0.0;
  double omega_err = 0.0;
  double gamma_per_us = 0.0;
  double gamma_err = 0.0;
  bool converged = false;
  bool inside_breakdown = false;
  std::string error;
};
/// Runs interacting_bloch_run over the V grid in parallel. Per-point failures
/// are recorded in `error`, not thrown.
std::vector<ScanRow> frequency_vs_interaction_scan(double detuning_mhz, double rabi_mhz,
                                                   std::span<const double> v_grid, const ScanOptions& opts = {});

struct PairHopRun {
  double v_mhz = 0.0;
  double omega_eff_mhz = 0.0;
  StateTrajectory trajectory;
  std::vector<double> p00;
  std::vector<double> p0_avg;
  FitResult fit;
};
/// Two-site (0, 1) bichromatic pair from |0,0>, sampled once per drive period
/// up to t_window, P_00 fitted with the damped sine. With V = 0 no fit is made.
PairHopRun pair_hopping_run(double v_mhz, double rabi_mhz, double detuning_mhz, double t_window_us = 20.0,
                            double tol = 1e-8);

struct DecayRun {
  double v_mhz = 0.0;
  StateTrajectory trajectory;
  std::vector<double> p00;
  /// a + b exp(-beta t^2) over [0, short_window].
  FitResult gaussian;
  /// a + b cos(omega t) over [0, first local minimum of P_00].
  FitResult cosine;
  double cosine_window_us = 0.0;
};
/// Chain -half..half under bichromatic driving from |0,0>, sampled once per
/// drive period up to the horizon.
DecayRun gaussian_decay_run(double v_mhz, double rabi_mhz, double detuning_mhz, double short_window_us = 10.0,
                            double horizon_us = 60.0, double tol = 1e-5, int half_width = 4);

/// Stroboscopic grid k / detuning, k = 0.. while <= t_end.
std::vector<double> stroboscopic_grid(double detuning_mhz, double t_end_us);

/// Index of the first sample that is lower than both neighbours, or the
/// global minimum when there is none.
std::size_t first_local_minimum(std::span<const double> values);

}  // namespace synlat
