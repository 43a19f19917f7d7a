#include "synlat/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "synlat/error.hpp"
#include "synlat/observables.hpp"
#include "synlat/parallel.hpp"

namespace synlat {
namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw SpecError("non-finite parameter");
  }
}

InteractionSpec interaction(double v_mhz, const std::string& table_path) {
  if (table_path.empty()) return InteractionSpec::with_default_table(v_mhz);
  InteractionSpec inter;
  inter.v_mhz = v_mhz;
  inter.c3_table_path = table_path;
  inter.c3_table = C3Table::load_csv(table_path);
  return inter;
}

CurveModel gaussian_peak_model() {
  return {"gaussian_peak",
          {"a", "b", "x0", "sigma"},
          {"", "", "rad", "rad"},
          [](double x, const Eigen::VectorXd& p, Eigen::Ref<Eigen::RowVectorXd> g) {
            const double u = (x - p[2]) / p[3];
            const double e = std::exp(-0.5 * u * u);
            g[0] = 1.0;
            g[1] = e;
            g[2] = p[1] * e * u / p[3];
            g[3] = p[1] * e * u * u / p[3];
            return p[0] + p[1] * e;
          }};
}

double wrap_2pi(double x) {
  double y = std::fmod(x, 2.0 * kPi);
  if (y < 0.0) y += 2.0 * kPi;
  return y >= 2.0 * kPi ? 0.0 : y;
}

std::vector<double> head(const std::vector<double>& v, std::size_t n) { return {v.begin(), v.begin() + n}; }

}  // namespace

double gap_exact(double d, double v, double om) {
  require_finite({d, v, om});
  const double a = 6 * d * d + 4 * d * v - 2 * v * v + om * om;
  const double inner = a * a + 8 * om * om * (3 * d * d - 10 * d * v + 3 * v * v + om * om);
  const double scale = std::max({d * d, v * v, om * om, 1e-300});
  if (inner < -1e-12 * scale * scale) throw SpecError("gap_exact: negative inner radicand");
  const double outer = 10 * d * d - 4 * d * v + 2 * v * v + 5 * om * om - std::sqrt(std::max(inner, 0.0));
  if (outer < -1e-12 * scale) throw SpecError("gap_exact: negative outer radicand");
  return 0.5 * std::sqrt(std::max(outer, 0.0));
}

double gap_approx(double d, double v, double om) {
  require_finite({d, v, om});
  return std::hypot(d - v, om);
}

std::pair<double, double> breakdown_bounds(double d, double om) {
  require_finite({d, om});
  return {d - om, d + om};
}

bool inside_breakdown(double d, double v, double om) {
  const auto [lo, hi] = breakdown_bounds(d, om);
  return v > lo && v < hi;
}

GapPrediction predict_gap(double d, double v, double om) {
  const auto [lo, hi] = breakdown_bounds(d, om);
  return {gap_exact(d, v, om), gap_approx(d, v, om), lo, hi};
}

double pair_hopping_rate(double v, double om, double d) {
  require_finite({v, om, d});
  const double denom = d * d - v * v;
  if (std::abs(denom) <= 1e-12 * std::max(d * d, 1e-300)) {
    throw SpecError("pair_hopping_rate: pole at |V| = Delta");
  }
  return 2.0 * std::abs(v) * om * om / denom;
}

double phase_difference(double a, double b) {
  double d = std::remainder(a - b, 2.0 * kPi);
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

FluxCalibration calibrate_flux(const LatticeSpec& ring, double rabi_mhz, std::optional<double> t_probe_us,
                               std::size_t points) {
  ring.validate();
  if (ring.boundary != Boundary::Periodic || ring.drive.type != DriveType::Static) {
    throw SpecError("calibrate_flux needs a static ring with a wraparound link");
  }
  if (std::any_of(ring.site_detunings_mhz.begin(), ring.site_detunings_mhz.end(), [](double x) { return x != 0.0; })) {
    throw SpecError("calibrate_flux needs a flat ring");
  }
  if (!(rabi_mhz > 0.0)) throw SpecError("calibrate_flux needs a positive rabi rate");
  if (points < 8) throw SpecError("calibrate_flux needs at least 8 sweep points");

  FluxCalibration cal;
  cal.probe_time_us = t_probe_us.value_or(2.0 / rabi_mhz);
  const Basis basis{BasisKind::Single, ring.sites};
  const std::size_t n = ring.sites.size();
  const std::size_t origin = basis.site_index(0);
  cal.probe_site = ring.sites[(origin + n / 2) % n];
  const auto probe = static_cast<Eigen::Index>(basis.site_index(cal.probe_site));
  const QuantumState psi0 = QuantumState::site(basis, 0);
  const std::array<double, 2> grid{0.0, cal.probe_time_us};

  for (std::size_t k = 0; k < points; ++k) {
    const double setting = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(points);
    LatticeSpec probe_ring = ring;
    Link* wrap = probe_ring.wrap_link();
    // the control phase adds to the flux in the orientation of flux()
    wrap->phase_rad += wrap->from == ring.sites.back() ? setting : -setting;
    const auto traj = evolve_static(build_single_hamiltonian(probe_ring), psi0, grid);
    cal.settings_rad.push_back(setting);
    cal.response.push_back(std::norm(traj.states.back()[probe]));
  }

  const auto kmax = static_cast<std::size_t>(std::max_element(cal.response.begin(), cal.response.end()) -
                                             cal.response.begin());
  const double hi = cal.response[kmax];
  const double lo = *std::min_element(cal.response.begin(), cal.response.end());
  if (hi - lo < 1e-6) throw Error("calibrate_flux: flat response, no peak to locate");

  // unwrap the sweep into a window centred on the best sample
  const double centre = cal.settings_rad[kmax];
  std::vector<double> x;
  for (double s : cal.settings_rad) x.push_back(centre + phase_difference(s, centre));
  std::vector<std::size_t> order(x.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> xs, ys;
  for (std::size_t k : order) {
    xs.push_back(x[k]);
    ys.push_back(cal.response[k]);
  }
  cal.fit = least_squares(gaussian_peak_model(), xs, ys, Eigen::VectorXd{{lo, hi - lo, centre, 0.5}});
  const double x0 = cal.fit.value("x0");
  if (!cal.fit.converged || std::abs(x0 - centre) > kPi) throw Error("calibrate_flux: peak fit failed: " + cal.fit.message);
  cal.peak_setting_rad = wrap_2pi(x0);
  cal.inferred_bias_rad = phase_difference(-cal.peak_setting_rad, 0.0);
  cal.uncertainty_rad = cal.fit.error("x0");
  cal.peak_height = cal.fit.value("a") + cal.fit.value("b");
  return cal;
}

// ---------------------------------------------------------------------------

BlochRun bloch_oscillation_run(double d, double om, double t_window, std::size_t points, int half_width) {
  BlochRun run;
  run.detuning_mhz = d;
  run.rabi_mhz = om;
  const LatticeSpec spec = LatticeSpec::chain(-half_width, half_width, om, d);
  const HamiltonianMatrix h = build_single_hamiltonian(spec);
  const auto grid = uniform_grid(t_window, points);
  run.trajectory = evolve_static(h, QuantumState::site(h.basis(), 0), grid);
  run.lambda = wavepacket_width(run.trajectory);
  run.fit = fit_bloch_oscillation(grid, run.lambda);
  return run;
}

InteractingRun interacting_bloch_run(double d, double om, double v, const ScanOptions& opts) {
  InteractingRun run;
  run.v_mhz = v;
  const LatticeSpec spec = LatticeSpec::chain(-opts.half_width, opts.half_width, om, d);
  const HamiltonianMatrix h = build_pair_hamiltonian(spec, interaction(v, opts.c3_table_path));
  const auto grid = uniform_grid(opts.t_window_us, opts.points);
  run.trajectory = evolve_static(h, QuantumState::pair(h.basis(), 0, 0), grid);
  run.p0_avg = column_of(pair_site_populations(run.trajectory),
                         static_cast<Eigen::Index>(h.basis().site_index(0)));
  run.fit = fit_damped_sine(grid, run.p0_avg);
  return run;
}

std::vector<ScanRow> frequency_vs_interaction_scan(double d, double om, std::span<const double> v_grid,
                                                   const ScanOptions& opts) {
  std::vector<ScanRow> rows(v_grid.size());
  parallel_for(v_grid.size(), opts.workers, [&](std::size_t i) {
    ScanRow& row = rows[i];
    row.v_mhz = v_grid[i];
    try {
      const InteractingRun run = interacting_bloch_run(d, om, v_grid[i], opts);
      row.omega_mhz = run.fit.value("omega");
      row.omega_err = run.fit.error("omega");
      row.gamma_per_us = run.fit.value("gamma");
      row.gamma_err = run.fit.error("gamma");
      row.converged = run.fit.converged;
      row.inside_breakdown = row.gamma_per_us > opts.breakdown_ratio * row.omega_mhz;
      if (!run.fit.converged) row.error = run.fit.message;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::vector<double> stroboscopic_grid(double d, double t_end) {
  if (!(std::abs(d) > 0.0)) throw SpecError("stroboscopic grid needs a nonzero detuning");
  std::vector<double> t;
  const double period = 1.0 / std::abs(d);
  const auto count = static_cast<std::size_t>(std::floor(t_end / period + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) t.push_back(static_cast<double>(k) * period);
  return t;
}

std::size_t first_local_minimum(std::span<const double> v) {
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    if (v[k] < v[k - 1] && v[k] <= v[k + 1]) return k;
  }
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

PairHopRun pair_hopping_run(double v, double om, double d, double t_window, double tol) {
  PairHopRun run;
  run.v_mhz = v;
  run.omega_eff_mhz = pair_hopping_rate(v, om, d);
  const LatticeSpec spec = LatticeSpec::bichromatic_chain(0, 1, om, d);
  const HamiltonianMatrix h = build_pair_hamiltonian(spec, InteractionSpec::with_default_table(v));
  const auto grid = stroboscopic_grid(d, t_window);
  TimedepOptions opts;
  opts.tol = tol;
  run.trajectory = evolve_timedep(h, QuantumState::pair(h.basis(), 0, 0), grid, opts);
  run.p00 = pair_state_population(run.trajectory, 0, 0);
  run.p0_avg = column_of(pair_site_populations(run.trajectory), 0);
  if (v != 0.0) run.fit = fit_damped_sine(grid, run.p00);
  return run;
}

DecayRun gaussian_decay_run(double v, double om, double d, double short_window, double horizon, double tol,
                            int half_width) {
  DecayRun run;
  run.v_mhz = v;
  const LatticeSpec spec = LatticeSpec::bichromatic_chain(-half_width, half_width, om, d);
  const HamiltonianMatrix h = build_pair_hamiltonian(spec, InteractionSpec::with_default_table(v));
  const auto grid = stroboscopic_grid(d, horizon);
  TimedepOptions opts;
  opts.tol = tol;
  run.trajectory = evolve_timedep(h, QuantumState::pair(h.basis(), 0, 0), grid, opts);
  run.p00 = pair_state_population(run.trajectory, 0, 0);

  std::size_t n_short = 0;
  while (n_short < grid.size() && grid[n_short] <= short_window + 1e-12) ++n_short;
  run.gaussian = fit_gaussian_decay(head(grid, n_short), head(run.p00, n_short));

  const std::size_t kmin = first_local_minimum(run.p00);
  run.cosine_window_us = grid[kmin];
  const std::size_t n_long = std::max<std::size_t>(kmin + 1, 4);
  run.cosine = fit_cosine(head(grid, n_long), head(run.p00, n_long));
  return run;
}

}  // namespace synlat
