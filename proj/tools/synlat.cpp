// Command-line front end: named scenarios, ad-hoc simulations, fits and scans.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "synlat/csv.hpp"
#include "synlat/error.hpp"
#include "synlat/scenario.hpp"

namespace fs = std::filesystem;
using namespace synlat;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<double> tol;
  std::size_t workers = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config) cmd->add_option("--config", c.config, "Scenario config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory (default: $SYNLAT_OUT or ./out)");
  cmd->add_option("--tol", c.tol, "Population tolerance of the time-dependent solver")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", c.workers, "Worker threads for sweeps (0 = hardware)");
  cmd->add_option("--set", c.overrides, "Config override key=value, e.g. interaction.v_mhz=0.8")->take_all();
}

Json read_config(const Common& c) {
  Json doc;
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError("", "invalid JSON in " + c.config + ": " + e.what());
    }
  } else {
    doc = Json::object();
  }
  for (const auto& o : c.overrides) apply_override(doc, o);
  return doc;
}

fs::path out_dir(const Common& c, const std::string& leaf) {
  if (!c.out.empty()) return c.out;
  std::string safe = leaf;
  for (char& ch : safe) {
    if (ch == '/' || ch == ' ') ch = '_';
  }
  return default_output_root() / safe;
}

/// Minimal reader for the numeric tables this tool writes.
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      cols.resize(header.size());
      continue;
    }
    if (cells.size() != header.size()) throw Error(path + ":" + std::to_string(lineno) + ": wrong number of columns");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      try {
        cols[k].push_back(std::stod(cells[k]));
      } catch (const std::exception&) {
        throw Error(path + ":" + std::to_string(lineno) + ": not a number: " + cells[k]);
      }
    }
  }
  if (header.empty()) throw Error(path + ": empty table");
  return {header, cols};
}

std::vector<double> parse_grid(const std::string& text) {
  // "a,b,c" or "start:stop:step"
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || !(step > 0) || hi < lo) {
      throw ConfigError("--values", "expected start:stop:step with a positive step");
    }
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(std::round((lo + k * step) * 1e9) / 1e9);
    return out;
  }
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("--values", "not a number: " + cell);
    }
  }
  if (out.empty()) throw ConfigError("--values", "empty grid");
  return out;
}

int print_error(const char* kind, const std::exception& e) {
  std::fprintf(stderr, "synlat: %s: %s\n", kind, e.what());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic lattice dynamics: simulations, fits and parameter scans"};
  app.require_subcommand(1);

  Common sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario config and write its output bundle");
  add_common(simulate, sim_opts);
  simulate->get_option("--config")->required();

  struct {
    std::string input, series, model, out;
    std::optional<double> t_max;
    bool until_min = false;
  } fit_opts;
  auto* fit = app.add_subcommand("fit", "Fit a model to one column of a CSV table (first column is time)");
  fit->add_option("input", fit_opts.input, "CSV table, e.g. observables.csv")->required()->check(CLI::ExistingFile);
  fit->add_option("--series", fit_opts.series, "Column to fit")->required();
  fit->add_option("--model", fit_opts.model, "bloch | damped_sine | gaussian_decay | cosine")
      ->required()
      ->check(CLI::IsMember({"bloch", "damped_sine", "gaussian_decay", "cosine"}));
  fit->add_option("--t-max", fit_opts.t_max, "Fit only samples with t <= t_max (us)");
  fit->add_flag("--until-first-minimum", fit_opts.until_min, "Fit only up to the first local minimum");
  fit->add_option("--out", fit_opts.out, "Write the report here instead of stdout");

  Common scan_opts;
  std::string scan_param, scan_values;
  auto* scan = app.add_subcommand(
      "scan", "Interaction scan (config kind 'scan'), or with --param a sweep of any config key");
  add_common(scan, scan_opts);
  scan->add_option("--param", scan_param, "Config key to sweep, e.g. interaction.v_mhz");
  scan->add_option("--values", scan_values, "Grid for --param: a,b,c or start:stop:step");

  Common scen_opts;
  std::string scen_name, scen_variant;
  bool scen_list = false;
  auto* scenario = app.add_subcommand("scenario", "Run a built-in scenario (all variants unless --variant)");
  add_common(scenario, scen_opts, false);
  scenario->add_option("name", scen_name, "Scenario name, see --list");
  scenario->add_option("--variant", scen_variant, "Run only this variant");
  scenario->add_flag("--list", scen_list, "List built-in scenarios and their variants");

  Common flux_opts;
  struct {
    int lo = -3, hi = 4;
    double rabi = 0.9, bias_pi = 0.0;
    std::optional<double> t_probe;
    std::size_t points = 32;
  } ring;
  auto* flux = app.add_subcommand("calibrate-flux", "Locate the zero-flux point of a ring by a phase sweep");
  add_common(flux, flux_opts);
  flux->add_option("--min-site", ring.lo, "Smallest ring label");
  flux->add_option("--max-site", ring.hi, "Largest ring label");
  flux->add_option("--rabi", ring.rabi, "Rabi rate on every link (MHz)");
  flux->add_option("--bias", ring.bias_pi, "Phase already on the wraparound link, in units of pi");
  flux->add_option("--t-probe", ring.t_probe, "Probe time (us), default 2 / rabi");
  flux->add_option("--points", ring.points, "Sweep points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      Scenario s = scenario_from_json(read_config(sim_opts));
      const fs::path dir = out_dir(sim_opts, s.name);
      run_scenario(s, {dir, sim_opts.tol, sim_opts.workers});
      std::printf("%s\n", dir.string().c_str());
      return 0;
    }

    if (fit->parsed()) {
      const auto [header, cols] = read_csv(fit_opts.input);
      ObservableTable table;
      table.times_us = cols.at(0);
      for (std::size_t k = 1; k < header.size(); ++k) table.add(header[k], cols[k]);
      FitRequest req{fit_opts.model, fit_opts.series, fit_opts.t_max, fit_opts.until_min};
      const NamedFit r = run_fit(req, table);
      Json j{{"input", fit_opts.input}, {"model", req.model}, {"series", req.series}};
      j["result"] = r.result ? to_json(*r.result) : Json(nullptr);
      j["error"] = r.error;
      if (fit_opts.out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        csv::write_atomic(fit_opts.out, j.dump(2) + "\n");
      }
      if (!r.result) return print_error("fit failed", Error(r.error));
      return r.error.empty() ? 0 : 1;
    }

    if (scan->parsed()) {
      const Json doc = read_config(scan_opts);
      if (!scan_param.empty()) {
        if (scan_values.empty()) throw ConfigError("--values", "required with --param");
        Json base = doc;
        if (scan_opts.tol) base["solver"]["tol"] = *scan_opts.tol;
        const std::string name = base.value("name", std::string("sweep"));
        const fs::path dir = out_dir(scan_opts, name + "-sweep");
        const auto points = sweep(base, scan_param, parse_grid(scan_values), dir, scan_opts.workers);
        std::size_t failed = 0;
        for (const auto& p : points) {
          if (!p.error.empty()) {
            ++failed;
            std::fprintf(stderr, "synlat: point %s=%g failed: %s\n", scan_param.c_str(), p.value, p.error.c_str());
          }
        }
        std::printf("%s\n", dir.string().c_str());
        return failed == 0 ? 0 : 1;
      }
      Json d = doc;
      d["kind"] = "scan";
      Scenario s = scenario_from_json(d);
      const fs::path dir = out_dir(scan_opts, s.name);
      run_scenario(s, {dir, scan_opts.tol, scan_opts.workers});
      std::printf("%s\n", dir.string().c_str());
      return 0;
    }

    if (scenario->parsed()) {
      if (scen_list) {
        for (const auto& e : catalog()) {
          std::printf("%-20s %s\n", e.name.c_str(), e.description.c_str());
          for (const auto& v : e.variants) std::printf("    %s\n", v.first.c_str());
        }
        return 0;
      }
      if (scen_name.empty()) throw ConfigError("scenario", "missing scenario name (see --list)");
      CatalogEntry entry = find_scenario(scen_name);
      if (!scen_variant.empty()) {
        std::erase_if(entry.variants, [&](const auto& v) { return v.first != scen_variant; });
        if (entry.variants.empty()) throw ConfigError("--variant", "no variant '" + scen_variant + "' in " + scen_name);
      }
      const fs::path root = scen_opts.out.empty() ? default_output_root() : fs::path(scen_opts.out);
      const std::size_t failed = run_catalog_entry(entry, root, scen_opts.tol, scen_opts.workers, scen_opts.overrides);
      std::printf("%s\n", (root / entry.name).string().c_str());
      if (failed) std::fprintf(stderr, "synlat: %zu variant(s) failed, see summary.json\n", failed);
      return failed == 0 ? 0 : 1;
    }

    if (flux->parsed()) {
      Json doc;
      if (!flux_opts.config.empty()) {
        doc = read_config(flux_opts);
      } else {
        doc = {{"name", "calibrate-flux"},
               {"sites", {{"min", ring.lo}, {"max", ring.hi}}},
               {"boundary", "periodic"},
               {"rabi_mhz", ring.rabi},
               {"wrap_phase_rad", ring.bias_pi * std::numbers::pi},
               {"flux", {{"rabi_mhz", ring.rabi}, {"points", ring.points}}}};
        if (ring.t_probe) doc["flux"]["t_probe_us"] = *ring.t_probe;
        for (const auto& o : flux_opts.overrides) apply_override(doc, o);
      }
      doc["kind"] = "flux-calibration";
      Scenario s = scenario_from_json(doc);
      const fs::path dir = out_dir(flux_opts, s.name);
      run_scenario(s, {dir, flux_opts.tol, flux_opts.workers});
      std::printf("%s\n", dir.string().c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "synlat: invalid config: %s\n", e.what());
    return 2;
  } catch (const ConvergenceError& e) {
    return print_error("solver did not converge (partial outputs kept)", e);
  } catch (const std::exception& e) {
    return print_error("error", e);
  }
  return 0;
}
