#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synlat/propagate.hpp"

namespace synlat {

/// Named time series sharing one time grid.
struct ObservableTable {
  std::vector<double> times_us;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add(std::string name, std::vector<double> values);
  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// P_j(t) = |<j|psi(t)>|^2; rows are times, columns follow basis.sites.
Eigen::MatrixXd site_populations(const StateTrajectory& traj);
/// lambda(t) = sum_j |j| P_j(t)
std::vector<double> wavepacket_width(const StateTrajectory& traj);

enum class Atom { A, B };
/// Marginal site populations of one atom of a pair trajectory.
Eigen::MatrixXd pair_marginal(const StateTrajectory& traj, Atom atom);
/// (P_A,j + P_B,j) / 2
Eigen::MatrixXd pair_site_populations(const StateTrajectory& traj);
/// |<i,j|psi(t)>|^2; the default is P_00.
std::vector<double> pair_state_population(const StateTrajectory& traj, int site_a = 0, int site_b = 0);

/// C_ij = |<i,j|psi>|^2 at one grid point. Rows index atom A's site, columns
/// atom B's, both in basis order.
struct CorrelationSnapshot {
  double requested_us = 0.0;
  double time_us = 0.0;
  std::size_t index = 0;
  /// False when the requested time was not on the grid and the nearest grid
  /// point was used instead. No interpolation is attempted.
  bool on_grid = true;
  Eigen::MatrixXd c;
};
CorrelationSnapshot pair_correlation(const StateTrajectory& traj, double t_us);
std::vector<CorrelationSnapshot> pair_correlations(const StateTrajectory& traj, std::span<const double> times_us);

/// sum_i C_{i,i}
double diagonal_weight(const Eigen::MatrixXd& c);
/// sum_i C_{i,-i} over labels whose mirror is in the basis.
double anti_diagonal_weight(const Eigen::MatrixXd& c, const std::vector<int>& sites);

/// t_r = 1/Delta (us for Delta in MHz); empty for Delta = 0, where the phase
/// never winds and nothing refocuses.
std::optional<double> refocusing_time(double detuning_mhz);

struct Peak {
  std::size_t index = 0;
  double time_us = 0.0;
  double value = 0.0;
};
/// Revival of a population that starts high: the largest value after the
/// series first falls below `drop_below`, restricted to t <= t_max. Empty if
/// the series never drops.
std::optional<Peak> find_refocusing_peak(std::span<const double> times_us, std::span<const double> values,
                                         double drop_below = 0.5, double t_max_us = 1e300);
/// Largest value (first occurrence) in the window [t_min, t_max].
Peak find_max(std::span<const double> times_us, std::span<const double> values, double t_min_us = -1e300,
              double t_max_us = 1e300);

/// <psi|H|psi> (real part; the imaginary part vanishes for Hermitian H).
double energy_expectation(const CMatrix& h, const CVector& psi);

/// Column `k` of a row-per-time matrix as a vector.
std::vector<double> column_of(const Eigen::MatrixXd& m, Eigen::Index k);

}  // namespace synlat
