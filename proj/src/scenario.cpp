#include "synlat/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>

#include "synlat/csv.hpp"
#include "synlat/error.hpp"
#include "synlat/kernels.hpp"
#include "synlat/parallel.hpp"

namespace synlat {
namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string label(double x) { return csv::format(x); }

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  // round to the grid so 0.1 * 3 prints as 0.3
  for (int k = 0; k <= n; ++k) out.push_back(std::round((lo + k * step) * 1e9) / 1e9);
  return out;
}

Json chain(int lo, int hi, double rabi, double tilt) {
  return {{"sites", {{"min", lo}, {"max", hi}}}, {"rabi_mhz", rabi}, {"tilt_mhz", tilt}};
}

Json merged(Json base, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) base[it.key()] = it.value();
  return base;
}

Json bichromatic_pair(int lo, int hi, double rabi, double detuning, double v) {
  return {{"sites", {{"min", lo}, {"max", hi}}},
          {"rabi_mhz", rabi},
          {"drive", {{"type", "bichromatic"}, {"detuning_mhz", detuning}}},
          {"interaction", {{"v_mhz", v}}},
          {"initial_state", {0, 0}}};
}

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> cat;

  {
    CatalogEntry e{"fig1-qw", "Quantum walk from |0> on a flat 9-site chain", {}};
    e.variants.emplace_back("default", merged(chain(-4, 4, 0.45, 0.0), {{"time", {{"t_end_us", 5.0}, {"points", 401}}},
                                                                       {"observables", {"populations", "lambda"}}}));
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"fig1-bo", "Bloch oscillations of a single atom for a sweep of tilts", {}};
    for (double d : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      e.variants.emplace_back("delta-" + label(d),
                              merged(chain(-4, 4, 0.45, d), {{"time", {{"t_end_us", 5.0}, {"points", 401}}},
                                                             {"observables", {"populations", "lambda"}},
                                                             {"fits", {{{"model", "bloch"}, {"series", "lambda"}}}}}));
    }
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"fig2-escher", "Escher staircase ring of 8 sites, with open-chain comparisons", {}};
    for (double d : {0.0, 0.15, 0.30, 0.45}) {
      Json ring{{"sites", {{"min", -3}, {"max", 4}}},
                {"boundary", "periodic"},
                {"rabi_mhz", 0.9},
                {"time", {{"t_end_us", 4.0}, {"points", 401}}},
                {"observables", {"populations"}}};
      if (d != 0.0) ring["drive"] = {{"type", "escher"}, {"detuning_mhz", d}};
      e.variants.emplace_back("pbc-delta-" + label(d), ring);
      // cutting the 4 -> -3 link leaves a plain tilted chain
      e.variants.emplace_back("obc-delta-" + label(d),
                              merged(chain(-3, 4, 0.9, d), {{"time", {{"t_end_us", 4.0}, {"points", 401}}},
                                                            {"observables", {"populations"}}}));
    }
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"fig3-interacting", "Interacting pair in a tilted 9-site chain at three interaction strengths", {}};
    for (double v : {0.344, 0.752, 1.4}) {
      e.variants.emplace_back(
          "v-" + label(v),
          merged(chain(-4, 4, 0.45, 0.8),
                 {{"interaction", {{"v_mhz", v}}},
                  {"initial_state", {0, 0}},
                  {"time", {{"t_end_us", 5.0}, {"points", 401}}},
                  {"observables", {"pair_populations", "pair_state", "correlations"}},
                  {"correlation_times_us", {2.0}},
                  {"fits", {{{"model", "damped_sine"}, {"series", "Pavg_0"}}}}}));
    }
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"fig3c-scan", "Fitted frequency and damping against interaction strength", {}};
    e.variants.emplace_back("default", Json{{"kind", "scan"},
                                            {"scan",
                                             {{"detuning_mhz", 0.8},
                                              {"rabi_mhz", 0.45},
                                              {"v_grid_mhz", range(0.0, 2.0, 0.1)}}}});
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"fig4-pairhop", "Correlated pair hopping under bichromatic driving", {}};
    for (double v : {0.0, 1.56}) {
      Json doc = merged(bichromatic_pair(0, 1, 1.92, 7.2, v),
                        {{"time", {{"t_end_us", 20.0}, {"stroboscopic", true}}},
                         {"solver", {{"tol", 1e-8}}},
                         {"observables", {"pair_populations", "pair_state"}}});
      if (v != 0.0) doc["fits"] = {{{"model", "damped_sine"}, {"series", "P_0_0"}}};
      e.variants.emplace_back("two-level-v-" + label(v), doc);
    }
    for (double v : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      e.variants.emplace_back(
          "chain9-v-" + label(v),
          merged(bichromatic_pair(-4, 4, 0.9, 5.0, v),
                 {{"time", {{"t_end_us", 10.0}, {"stroboscopic", true}}},
                  {"solver", {{"tol", 1e-5}}},
                  {"observables", {"pair_populations", "pair_state"}},
                  {"fits", {{{"model", "gaussian_decay"}, {"series", "P_0_0"}, {"t_max_us", 10.0}}}}}));
    }
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"figS1-gap", "Exact and approximate pair gaps with the breakdown window", {}};
    e.variants.emplace_back("default", Json{{"kind", "gap-table"},
                                            {"gap_table",
                                             {{"detuning_mhz", 0.8},
                                              {"rabi_mhz", {0.1, 0.2, 0.45}},
                                              {"v_grid_mhz", range(0.0, 2.0, 0.05)}}}});
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"figS2-scan", "Fine interaction scan across the breakdown window", {}};
    e.variants.emplace_back("default", Json{{"kind", "scan"},
                                            {"scan",
                                             {{"detuning_mhz", 0.8},
                                              {"rabi_mhz", 0.45},
                                              {"v_grid_mhz", range(0.0, 2.0, 0.05)}}}});
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"figS3-longtime", "Long-time pair dynamics in the bichromatic 9-site chain", {}};
    for (double v : {0.2, 0.6, 1.0}) {
      e.variants.emplace_back(
          "v-" + label(v),
          merged(bichromatic_pair(-4, 4, 0.9, 5.0, v),
                 {{"time", {{"t_end_us", 60.0}, {"stroboscopic", true}}},
                  {"solver", {{"tol", 1e-5}}},
                  {"observables", {"pair_populations", "pair_state"}},
                  {"fits",
                   {{{"model", "gaussian_decay"}, {"series", "P_0_0"}, {"t_max_us", 10.0}},
                    {{"model", "cosine"}, {"series", "P_0_0"}, {"until_first_minimum", true}}}}}));
    }
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"figS4-correlations", "Two-atom correlations, static tilt against bichromatic drive", {}};
    e.variants.emplace_back("static", merged(chain(-4, 4, 0.45, 0.8),
                                             {{"interaction", {{"v_mhz", 0.8}}},
                                              {"initial_state", {0, 0}},
                                              {"time", {{"t_end_us", 2.0}, {"points", 201}}},
                                              {"observables", {"pair_populations", "correlations"}},
                                              {"correlation_times_us", {0.5, 1.0, 2.0}}}));
    e.variants.emplace_back("bichromatic", merged(bichromatic_pair(-4, 4, 0.9, 5.0, 0.8),
                                                  {{"time", {{"t_end_us", 2.0}, {"stroboscopic", true}}},
                                                   {"solver", {{"tol", 1e-6}}},
                                                   {"observables", {"pair_populations", "correlations"}},
                                                   {"correlation_times_us", {0.4, 1.0, 2.0}}}));
    cat.push_back(std::move(e));
  }
  {
    CatalogEntry e{"figS5-flux", "Flux calibration on a flat 8-site ring", {}};
    for (double bias : {0.0, 0.25}) {
      e.variants.emplace_back("bias-" + label(bias) + "pi",
                              Json{{"kind", "flux-calibration"},
                                   {"sites", {{"min", -3}, {"max", 4}}},
                                   {"boundary", "periodic"},
                                   {"rabi_mhz", 0.9},
                                   {"wrap_phase_rad", bias * std::numbers::pi},
                                   {"flux", {{"rabi_mhz", 0.9}, {"t_probe_us", 2.25}, {"points", 32}}}});
    }
    cat.push_back(std::move(e));
  }

  for (auto& e : cat) {
    for (auto& [variant, doc] : e.variants) {
      Json named{{"name", e.name + "/" + variant}, {"description", e.description}};
      doc = merged(named, doc);
    }
  }
  std::sort(cat.begin(), cat.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return cat;
}

ObservableTable collect_observables(const Scenario& s, const StateTrajectory& traj) {
  ObservableTable t;
  t.times_us = traj.times_us;
  std::vector<std::string> wanted = s.observables;
  if (wanted.empty()) {
    wanted = s.is_pair() ? std::vector<std::string>{"pair_populations", "pair_state"}
                         : std::vector<std::string>{"populations", "lambda"};
  }
  auto want = [&](const char* name) { return std::find(wanted.begin(), wanted.end(), name) != wanted.end(); };
  const auto& sites = traj.basis.sites;

  if (!s.is_pair()) {
    if (want("pair_populations") || want("pair_state") || want("correlations")) {
      throw ConfigError("observables", "pair observables need a two-atom initial state");
    }
    if (want("populations")) {
      const Eigen::MatrixXd p = site_populations(traj);
      for (std::size_t j = 0; j < sites.size(); ++j) {
        t.add("P_" + std::to_string(sites[j]), column_of(p, static_cast<Eigen::Index>(j)));
      }
    }
    if (want("lambda")) t.add("lambda", wavepacket_width(traj));
    return t;
  }

  const Eigen::MatrixXd avg = pair_site_populations(traj);
  if (want("pair_populations")) {
    for (std::size_t j = 0; j < sites.size(); ++j) {
      t.add("Pavg_" + std::to_string(sites[j]), column_of(avg, static_cast<Eigen::Index>(j)));
    }
  }
  if (want("populations")) {
    const Eigen::MatrixXd a = pair_marginal(traj, Atom::A), b = pair_marginal(traj, Atom::B);
    for (std::size_t j = 0; j < sites.size(); ++j) t.add("PA_" + std::to_string(sites[j]), column_of(a, j));
    for (std::size_t j = 0; j < sites.size(); ++j) t.add("PB_" + std::to_string(sites[j]), column_of(b, j));
  }
  if (want("lambda")) {
    std::vector<double> lam(traj.size(), 0.0);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      for (std::size_t j = 0; j < sites.size(); ++j) {
        lam[k] += std::abs(sites[j]) * avg(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      }
    }
    t.add("lambda", std::move(lam));
  }
  if (want("pair_state")) {
    const int a = s.initial_state[0], b = s.initial_state[1];
    t.add("P_" + std::to_string(a) + "_" + std::to_string(b), pair_state_population(traj, a, b));
  }
  return t;
}

Json fits_json(const std::vector<NamedFit>& fits) {
  Json a = Json::array();
  for (const auto& f : fits) {
    Json j{{"model", f.request.model}, {"series", f.request.series}};
    if (f.request.t_max_us) j["t_max_us"] = *f.request.t_max_us;
    j["until_first_minimum"] = f.request.until_first_minimum;
    j["result"] = f.result ? to_json(*f.result) : Json(nullptr);
    j["error"] = f.error;
    a.push_back(j);
  }
  return a;
}

void write_json(const fs::path& path, const Json& j) { csv::write_atomic(path, j.dump(2) + "\n"); }

/// Manifest body shared by every kind; `outputs` and `status` are added last.
Json manifest_base(const Scenario& s) {
  Json m;
  m["tool"] = "synlat";
  m["version"] = kVersion;
  m["scenario"] = scenario_to_json(s);
  if (s.interaction) {
    const auto path = s.interaction->c3_table_path.empty() ? C3Table::default_path().string()
                                                           : s.interaction->c3_table_path;
    m["interaction"] = {{"base_v_mhz", s.interaction->base_interaction_mhz()},
                        {"c3_table_path", path},
                        {"c3_table", to_json(s.interaction->c3_table)}};
  }
  m["isa"] = std::string(kernels::isa_name(kernels::active_isa()));
  return m;
}

class Bundle {
 public:
  Bundle(fs::path dir, Json manifest) : dir_(std::move(dir)), manifest_(std::move(manifest)) {
    fs::create_directories(dir_);
  }
  void text(const std::string& rel, const std::string& content) {
    csv::write_atomic(dir_ / rel, content);
    outputs_.push_back(rel);
  }
  void json(const std::string& rel, const Json& j) { text(rel, j.dump(2) + "\n"); }
  Json& manifest() { return manifest_; }
  void finish(const std::string& error = {}) {
    manifest_["outputs"] = outputs_;
    manifest_["status"] = error.empty() ? "ok" : "failed";
    if (!error.empty()) manifest_["error"] = error;
    write_json(dir_ / "manifest.json", manifest_);
  }

 private:
  fs::path dir_;
  Json manifest_;
  std::vector<std::string> outputs_;
};

std::vector<NamedFit> run_simulate(const Scenario& s, Bundle& out) {
  const SimulationOutput sim = simulate(s);
  out.text("trajectory.csv", csv::trajectory(sim.trajectory));
  out.json("trajectory.provenance.json", to_json(sim.trajectory.provenance));
  out.manifest()["provenance"] = to_json(sim.trajectory.provenance);
  out.text("observables.csv", csv::observables(sim.observables));
  if (s.spam) {
    ObservableTable bare;
    bare.times_us = sim.observables.times_us;
    for (std::size_t c = 0; c < sim.observables.names.size(); ++c) {
      const auto& name = sim.observables.names[c];
      if (name == "lambda") continue;  // not a population
      bare.add(name, forward(*s.spam, sim.observables.columns[c]));
    }
    out.text("observables_bare.csv", csv::observables(bare));
  }
  if (!sim.correlations.empty()) {
    const auto& sites = sim.trajectory.basis.sites;
    Json snaps = Json::array();
    for (std::size_t k = 0; k < sim.correlations.size(); ++k) {
      const auto& c = sim.correlations[k];
      const std::string rel = "correlations/t_" + std::to_string(k) + ".csv";
      out.text(rel, csv::correlation_matrix(c, sites));
      snaps.push_back({{"file", rel},
                       {"requested_us", c.requested_us},
                       {"time_us", c.time_us},
                       {"on_grid", c.on_grid},
                       {"diagonal_weight", diagonal_weight(c.c)},
                       {"anti_diagonal_weight", anti_diagonal_weight(c.c, sites)}});
    }
    out.text("correlations_long.csv", csv::correlation_long(sim.correlations, sites));
    out.json("correlations.json", snaps);
  }
  if (!sim.fits.empty()) out.json("fits.json", fits_json(sim.fits));
  return sim.fits;
}

void run_scan(const Scenario& s, Bundle& out) {
  ScanOptions opts = s.scan.options;
  if (s.interaction) opts.c3_table_path = s.interaction->c3_table_path;
  const auto rows = frequency_vs_interaction_scan(s.scan.detuning_mhz, s.scan.rabi_mhz, s.scan.v_grid_mhz, opts);
  out.text("scan.csv", csv::scan(rows));
  Json a = Json::array();
  for (const auto& r : rows) {
    Json j = to_json(r);
    j["gap_approx_mhz"] = gap_approx(s.scan.detuning_mhz, r.v_mhz, s.scan.rabi_mhz);
    j["gamma_h_mhz"] = r.gamma_per_us / (2.0 * std::numbers::pi);
    a.push_back(j);
  }
  const auto [lo, hi] = breakdown_bounds(s.scan.detuning_mhz, s.scan.rabi_mhz);
  out.json("scan.json", {{"breakdown_window_mhz", {lo, hi}}, {"rows", a}});
}

void run_gap_table(const Scenario& s, Bundle& out) {
  std::vector<std::vector<double>> rows;
  const double d = s.gap_table.detuning_mhz;
  for (double om : s.gap_table.rabi_mhz) {
    for (double v : s.gap_table.v_grid_mhz) {
      const GapPrediction g = predict_gap(d, v, om);
      rows.push_back({om, v, g.exact_mhz, g.approx_mhz, (g.approx_mhz - g.exact_mhz) / g.exact_mhz, g.v_lo_mhz,
                      g.v_hi_mhz, inside_breakdown(d, v, om) ? 1.0 : 0.0});
    }
  }
  out.text("gap_table.csv", csv::table({"rabi_mhz", "V_mhz", "gap_exact_mhz", "gap_approx_mhz", "relative_difference",
                                        "breakdown_lo_mhz", "breakdown_hi_mhz", "inside_breakdown"},
                                       rows));
}

void run_flux(const Scenario& s, Bundle& out) {
  const FluxCalibration cal = calibrate_flux(s.lattice, s.flux.rabi_mhz, s.flux.t_probe_us, s.flux.points);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < cal.settings_rad.size(); ++k) rows.push_back({cal.settings_rad[k], cal.response[k]});
  out.text("flux_sweep.csv", csv::table({"setting_rad", "P_probe"}, rows));
  Json j = to_json(cal);
  j["configured_flux_rad"] = s.lattice.flux();
  out.json("calibration.json", j);
}

std::vector<NamedFit> execute(const Scenario& s, const fs::path& dir) {
  Bundle out(dir, manifest_base(s));
  std::vector<NamedFit> fits;
  try {
    switch (s.kind) {
      case ScenarioKind::Simulate: fits = run_simulate(s, out); break;
      case ScenarioKind::Scan: run_scan(s, out); break;
      case ScenarioKind::GapTable: run_gap_table(s, out); break;
      case ScenarioKind::FluxCalibration: run_flux(s, out); break;
    }
  } catch (const std::exception& e) {
    out.finish(e.what());
    throw;
  }
  out.finish();
  return fits;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> cat = build_catalog();
  return cat;
}

const CatalogEntry& find_scenario(const std::string& name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return e;
  }
  std::string known;
  for (const auto& e : catalog()) known += (known.empty() ? "" : ", ") + e.name;
  throw ConfigError("scenario", "unknown scenario '" + name + "' (known: " + known + ")");
}

HamiltonianMatrix build_hamiltonian(const Scenario& s) {
  if (s.lab_frame) return build_lab_frame_hamiltonian(*s.lab_frame, s.lattice.sites.size());
  if (s.is_pair()) return build_pair_hamiltonian(s.lattice, *s.interaction);
  return build_single_hamiltonian(s.lattice);
}

QuantumState initial_state(const Scenario& s, const Basis& basis) {
  if (s.is_pair()) return QuantumState::pair(basis, s.initial_state[0], s.initial_state[1]);
  return QuantumState::site(basis, s.initial_state[0]);
}

NamedFit run_fit(const FitRequest& req, const ObservableTable& table) {
  NamedFit out{req, std::nullopt, {}};
  try {
    if (!table.has(req.series)) throw ConfigError("fits.series", "no observable named '" + req.series + "'");
    const auto& y_all = table.column(req.series);
    std::size_t n = y_all.size();
    if (req.t_max_us) {
      n = 0;
      while (n < table.times_us.size() && table.times_us[n] <= *req.t_max_us + 1e-12) ++n;
    }
    if (req.until_first_minimum) n = std::min(n, std::max<std::size_t>(first_local_minimum(y_all) + 1, 4));
    const std::span<const double> t(table.times_us.data(), n), y(y_all.data(), n);
    if (req.model == "bloch") out.result = fit_bloch_oscillation(t, y);
    else if (req.model == "damped_sine") out.result = fit_damped_sine(t, y);
    else if (req.model == "gaussian_decay") out.result = fit_gaussian_decay(t, y);
    else if (req.model == "cosine") out.result = fit_cosine(t, y);
    else throw ConfigError("fits.model", "unknown model '" + req.model + "'");
    if (!out.result->converged) out.error = "not converged: " + out.result->message;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

SimulationOutput simulate(const Scenario& s) {
  if (s.kind != ScenarioKind::Simulate) throw ConfigError("kind", "simulate needs a simulate-kind scenario");
  const HamiltonianMatrix h = build_hamiltonian(s);
  const auto grid = s.time.build(s.lattice);
  SimulationOutput out;
  out.trajectory = evolve(h, initial_state(s, h.basis()), grid, s.solver);
  out.observables = collect_observables(s, out.trajectory);
  if (s.is_pair()) {
    const bool want = s.observables.empty() ||
                      std::find(s.observables.begin(), s.observables.end(), "correlations") != s.observables.end();
    if (want && !s.correlation_times_us.empty()) {
      out.correlations = pair_correlations(out.trajectory, s.correlation_times_us);
    }
  }
  for (const auto& req : s.fits) out.fits.push_back(run_fit(req, out.observables));
  return out;
}

void run_scenario(Scenario s, const RunOptions& opts) {
  if (opts.tol) s.solver.tol = *opts.tol;
  s.scan.options.workers = opts.workers;
  execute(s, opts.out_dir);
}

std::size_t run_catalog_entry(const CatalogEntry& entry, const fs::path& out_root, std::optional<double> tol,
                              std::size_t workers, const std::vector<std::string>& overrides) {
  std::vector<std::string> errors(entry.variants.size());
  // variants are independent; a scan inside one already uses the pool
  parallel_for(entry.variants.size(), workers, [&](std::size_t k) {
    const auto& [variant, doc] = entry.variants[k];
    try {
      Json d = doc;
      for (const auto& o : overrides) apply_override(d, o);
      Scenario s = scenario_from_json(d);
      if (tol) s.solver.tol = *tol;
      s.scan.options.workers = 1;
      execute(s, out_root / entry.name / variant);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });
  std::size_t failed = 0;
  Json summary = Json::array();
  for (std::size_t k = 0; k < errors.size(); ++k) {
    summary.push_back({{"variant", entry.variants[k].first}, {"status", errors[k].empty() ? "ok" : "failed"},
                       {"error", errors[k]}});
    if (!errors[k].empty()) ++failed;
  }
  write_json(out_root / entry.name / "summary.json", {{"scenario", entry.name}, {"variants", summary}});
  return failed;
}

std::vector<SweepPoint> sweep(const Json& base, const std::string& parameter_path, std::span<const double> grid,
                              const fs::path& out_dir, std::size_t workers) {
  std::vector<SweepPoint> points(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t k) {
    SweepPoint& p = points[k];
    p.value = grid[k];
    try {
      Json doc = base;
      apply_override(doc, parameter_path + "=" + csv::format(grid[k]));
      Scenario s = scenario_from_json(doc);
      s.scan.options.workers = 1;
      p.fits = execute(s, out_dir / ("point_" + std::to_string(k)));
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });

  // one column group per fit request, parameter names taken from the first success
  std::vector<std::string> header{parameter_path, "ok"};
  std::vector<std::pair<std::size_t, std::string>> columns;
  const std::size_t n_fits = std::accumulate(points.begin(), points.end(), std::size_t{0},
                                             [](std::size_t m, const SweepPoint& p) { return std::max(m, p.fits.size()); });
  for (std::size_t f = 0; f < n_fits; ++f) {
    for (const auto& p : points) {
      if (f < p.fits.size() && p.fits[f].result) {
        const auto& r = *p.fits[f].result;
        for (const auto& par : r.parameters) {
          const std::string stem = "fit" + std::to_string(f) + "_" + r.model + "_" + par.name;
          columns.emplace_back(f, par.name);
          header.push_back(stem);
          header.push_back(stem + "_err");
        }
        break;
      }
    }
  }
  std::vector<std::vector<double>> rows;
  Json j = Json::array();
  for (const auto& p : points) {
    bool ok = p.error.empty();
    for (const auto& f : p.fits) ok = ok && f.error.empty();
    std::vector<double> row{p.value, ok ? 1.0 : 0.0};
    for (const auto& [f, name] : columns) {
      const bool has = f < p.fits.size() && p.fits[f].result;
      row.push_back(has ? p.fits[f].result->value(name) : std::nan(""));
      row.push_back(has ? p.fits[f].result->error(name) : std::nan(""));
    }
    rows.push_back(std::move(row));
    j.push_back({{"value", p.value}, {"error", p.error}, {"fits", fits_json(p.fits)}});
  }
  csv::write_atomic(out_dir / "sweep.csv", csv::table(header, rows));
  write_json(out_dir / "sweep.json", {{"parameter", parameter_path}, {"base", base}, {"points", j}});
  return points;
}

fs::path default_output_root() {
  if (const char* env = std::getenv("SYNLAT_OUT"); env && *env) return env;
  return "out";
}

}  // namespace synlat
