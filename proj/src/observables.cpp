#include "synlat/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "synlat/error.hpp"
#include "synlat/kernels.hpp"

namespace synlat {
namespace {

using Index = Eigen::Index;

void require(const StateTrajectory& traj, BasisKind kind) {
  if (traj.basis.kind != kind) {
    throw SpecError(kind == BasisKind::Single ? "observable needs a single-particle trajectory"
                                              : "observable needs a pair trajectory");
  }
}

}  // namespace

void ObservableTable::add(std::string name, std::vector<double> values) {
  if (values.size() != times_us.size()) throw SpecError("series '" + name + "' does not match the time grid");
  if (has(name)) throw SpecError("duplicate series '" + name + "'");
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

const std::vector<double>& ObservableTable::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw SpecError("no series named '" + name + "'");
  return columns[static_cast<std::size_t>(it - names.begin())];
}

bool ObservableTable::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::MatrixXd site_populations(const StateTrajectory& traj) {
  require(traj, BasisKind::Single);
  return traj.probabilities();
}

std::vector<double> wavepacket_width(const StateTrajectory& traj) {
  const Eigen::MatrixXd p = site_populations(traj);
  Eigen::VectorXd weight(p.cols());
  for (Index j = 0; j < p.cols(); ++j) weight[j] = std::abs(traj.basis.sites[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd lambda = p * weight;
  return {lambda.data(), lambda.data() + lambda.size()};
}

Eigen::MatrixXd pair_marginal(const StateTrajectory& traj, Atom atom) {
  require(traj, BasisKind::Pair);
  const Eigen::MatrixXd p = traj.probabilities();
  const auto n = static_cast<Index>(traj.basis.num_sites());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p.rows(), n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      out.col(atom == Atom::A ? a : b) += p.col(a * n + b);
    }
  }
  return out;
}

Eigen::MatrixXd pair_site_populations(const StateTrajectory& traj) {
  return 0.5 * (pair_marginal(traj, Atom::A) + pair_marginal(traj, Atom::B));
}

std::vector<double> pair_state_population(const StateTrajectory& traj, int site_a, int site_b) {
  require(traj, BasisKind::Pair);
  const auto k = static_cast<Index>(traj.basis.pair_index(site_a, site_b));
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& psi : traj.states) out.push_back(std::norm(psi[k]));
  return out;
}

CorrelationSnapshot pair_correlation(const StateTrajectory& traj, double t_us) {
  require(traj, BasisKind::Pair);
  if (traj.times_us.empty()) throw SpecError("empty trajectory");
  std::size_t best = 0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (std::abs(traj.times_us[k] - t_us) < std::abs(traj.times_us[best] - t_us)) best = k;
  }
  CorrelationSnapshot snap;
  snap.requested_us = t_us;
  snap.time_us = traj.times_us[best];
  snap.index = best;
  snap.on_grid = std::abs(snap.time_us - t_us) <= 1e-12 * std::max(1.0, std::abs(t_us));
  const auto n = static_cast<Index>(traj.basis.num_sites());
  std::vector<double> p(static_cast<std::size_t>(n * n));
  kernels::abs2({traj.states[best].data(), p.size()}, p);
  snap.c.resize(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) snap.c(a, b) = p[static_cast<std::size_t>(a * n + b)];
  return snap;
}

std::vector<CorrelationSnapshot> pair_correlations(const StateTrajectory& traj, std::span<const double> times_us) {
  std::vector<CorrelationSnapshot> out;
  for (double t : times_us) out.push_back(pair_correlation(traj, t));
  return out;
}

double diagonal_weight(const Eigen::MatrixXd& c) { return c.diagonal().sum(); }

double anti_diagonal_weight(const Eigen::MatrixXd& c, const std::vector<int>& sites) {
  if (c.rows() != static_cast<Index>(sites.size()) || c.cols() != c.rows()) {
    throw SpecError("correlation matrix does not match the site list");
  }
  double s = 0.0;
  for (std::size_t a = 0; a < sites.size(); ++a) {
    auto it = std::find(sites.begin(), sites.end(), -sites[a]);
    if (it != sites.end()) s += c(static_cast<Index>(a), static_cast<Index>(it - sites.begin()));
  }
  return s;
}

std::optional<double> refocusing_time(double detuning_mhz) {
  if (!std::isfinite(detuning_mhz)) throw SpecError("non-finite detuning");
  if (detuning_mhz == 0.0) return std::nullopt;
  return 1.0 / std::abs(detuning_mhz);
}

Peak find_max(std::span<const double> times_us, std::span<const double> values, double t_min_us, double t_max_us) {
  if (times_us.size() != values.size()) throw SpecError("series and time grid differ in length");
  Peak best;
  bool found = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (times_us[k] < t_min_us || times_us[k] > t_max_us) continue;
    if (!found || values[k] > best.value) {
      best = {k, times_us[k], values[k]};
      found = true;
    }
  }
  if (!found) throw SpecError("no samples inside the search window");
  return best;
}

std::optional<Peak> find_refocusing_peak(std::span<const double> times_us, std::span<const double> values,
                                         double drop_below, double t_max_us) {
  if (times_us.size() != values.size()) throw SpecError("series and time grid differ in length");
  std::size_t k = 0;
  while (k < values.size() && values[k] >= drop_below) ++k;
  if (k == values.size() || times_us[k] > t_max_us) return std::nullopt;
  Peak p = find_max(times_us.subspan(k), values.subspan(k), -1e300, t_max_us);
  p.index += k;
  return p;
}

double energy_expectation(const CMatrix& h, const CVector& psi) {
  return psi.dot(h * psi).real();
}

std::vector<double> column_of(const Eigen::MatrixXd& m, Eigen::Index k) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, k);
  return out;
}

}  // namespace synlat
