#include "synlat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "synlat/error.hpp"

namespace synlat {
namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

/// Typed access to one JSON object with key paths in every error.
class Obj {
 public:
  Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& at(const char* key) const {
    if (!has(key)) throw ConfigError(join(path_, key), "missing required key");
    return j_.at(key);
  }
  std::string path(const char* key) const { return join(path_, key); }

  double number(const char* key) const { return as_number(at(key), path(key)); }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  int integer(const char* key) const { return as_int(at(key), path(key)); }
  std::size_t count(const char* key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const int v = integer(key);
    if (v < 0) throw ConfigError(path(key), "must be non-negative");
    return static_cast<std::size_t>(v);
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError(path(key), "expected true or false");
    return at(key).get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) throw ConfigError(path(key), "expected a string");
    return at(key).get<std::string>();
  }
  std::vector<double> numbers(const char* key) const {
    const Json& a = array(key);
    std::vector<double> out;
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(as_number(a[k], index(path(key), k)));
    return out;
  }
  std::vector<int> integers(const char* key) const {
    const Json& a = array(key);
    std::vector<int> out;
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(as_int(a[k], index(path(key), k)));
    return out;
  }
  const Json& array(const char* key) const {
    const Json& a = at(key);
    if (!a.is_array()) throw ConfigError(path(key), "expected an array");
    return a;
  }

  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
    return x;
  }
  static int as_int(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<int>();
  }

 private:
  const Json& j_;
  std::string path_;
};

const char* to_string(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }
const char* to_string(DriveType d) {
  switch (d) {
    case DriveType::Static: return "static";
    case DriveType::Bichromatic: return "bichromatic";
    case DriveType::Escher: return "escher";
  }
  return "static";
}
const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Simulate: return "simulate";
    case ScenarioKind::Scan: return "scan";
    case ScenarioKind::GapTable: return "gap-table";
    case ScenarioKind::FluxCalibration: return "flux-calibration";
  }
  return "simulate";
}

const std::set<std::string> kModels{"bloch", "damped_sine", "gaussian_decay", "cosine"};
const std::set<std::string> kObservables{"populations", "lambda", "pair_populations", "pair_state", "correlations"};

void parse_lattice(const Obj& o, Scenario& s) {
  LatticeSpec& lat = s.lattice;
  if (o.has("sites") && o.at("sites").is_object()) {
    Obj r(o.at("sites"), o.path("sites"));
    r.allow({"min", "max"});
    const int lo = r.integer("min"), hi = r.integer("max");
    if (hi < lo) throw ConfigError(o.path("sites"), "max is below min");
    for (int j = lo; j <= hi; ++j) lat.sites.push_back(j);
  } else {
    lat.sites = o.integers("sites");
  }
  if (lat.sites.empty()) throw ConfigError(o.path("sites"), "no sites");

  lat.boundary = Boundary::Open;
  const std::string boundary = o.string("boundary", "open");
  if (boundary == "periodic") {
    lat.boundary = Boundary::Periodic;
  } else if (boundary != "open") {
    throw ConfigError(o.path("boundary"), "expected open or periodic");
  }

  if (o.has("drive")) {
    Obj d(o.at("drive"), o.path("drive"));
    d.allow({"type", "detuning_mhz"});
    const std::string type = d.string("type", "static");
    if (type == "static") lat.drive.type = DriveType::Static;
    else if (type == "bichromatic") lat.drive.type = DriveType::Bichromatic;
    else if (type == "escher") lat.drive.type = DriveType::Escher;
    else throw ConfigError(d.path("type"), "expected static, bichromatic or escher");
    lat.drive.detuning_mhz = d.number("detuning_mhz", 0.0);
  }

  if (o.has("links")) {
    if (o.has("rabi_mhz")) throw ConfigError(o.path("rabi_mhz"), "give either links or rabi_mhz, not both");
    const Json& links = o.array("links");
    for (std::size_t k = 0; k < links.size(); ++k) {
      Obj l(links[k], index(o.path("links"), k));
      l.allow({"from", "to", "rabi_mhz", "phase_rad"});
      const double rabi = l.number("rabi_mhz");
      if (rabi < 0.0) throw ConfigError(l.path("rabi_mhz"), "must be non-negative");
      lat.links.push_back({l.integer("from"), l.integer("to"), rabi, l.number("phase_rad", 0.0)});
    }
  } else if (o.has("rabi_mhz")) {
    const double rabi = o.number("rabi_mhz");
    if (rabi < 0.0) throw ConfigError(o.path("rabi_mhz"), "must be non-negative");
    for (std::size_t k = 0; k + 1 < lat.sites.size(); ++k) lat.links.push_back({lat.sites[k], lat.sites[k + 1], rabi, 0.0});
    if (lat.boundary == Boundary::Periodic) {
      lat.links.push_back({lat.sites.back(), lat.sites.front(), rabi, o.number("wrap_phase_rad", 0.0)});
    }
  } else if (!o.has("lab_frame")) {
    throw ConfigError(o.path("links"), "missing required key (or give rabi_mhz)");
  }

  if (o.has("detunings")) {
    if (o.has("tilt_mhz")) throw ConfigError(o.path("tilt_mhz"), "give either detunings or tilt_mhz, not both");
    lat.site_detunings_mhz = o.numbers("detunings");
  } else if (o.has("tilt_mhz")) {
    const double tilt = o.number("tilt_mhz");
    for (int j : lat.sites) lat.site_detunings_mhz.push_back(j * tilt);
  }
  lat.normalize_phases();
  if (!o.has("lab_frame")) {
    try {
      lat.validate();
    } catch (const SpecError& e) {
      throw ConfigError("lattice", e.what());
    }
  }
}

void parse_interaction(const Obj& o, Scenario& s) {
  Obj i(o.at("interaction"), o.path("interaction"));
  i.allow({"v_mhz", "separation_um", "c3_table_path"});
  InteractionSpec inter;
  if (i.has("v_mhz")) inter.v_mhz = i.number("v_mhz");
  if (i.has("separation_um")) {
    inter.separation_um = i.number("separation_um");
    if (!(*inter.separation_um > 0.0)) throw ConfigError(i.path("separation_um"), "must be positive");
  }
  if (!inter.v_mhz && !inter.separation_um) throw ConfigError(i.path("v_mhz"), "give v_mhz or separation_um");
  inter.c3_table_path = i.string("c3_table_path", "");
  try {
    inter.c3_table = inter.c3_table_path.empty() ? C3Table::load_default() : C3Table::load_csv(inter.c3_table_path);
  } catch (const SpecError& e) {
    throw ConfigError(i.path("c3_table_path"), e.what());
  }
  s.interaction = std::move(inter);
}

void parse_lab_frame(const Obj& o, Scenario& s) {
  Obj l(o.at("lab_frame"), o.path("lab_frame"));
  l.allow({"bare_energies_mhz", "rabi_mhz", "detuning_mhz"});
  LabFrameSpec lab;
  lab.bare_energies_mhz = l.numbers("bare_energies_mhz");
  lab.rabi_mhz = l.number("rabi_mhz");
  lab.detuning_mhz = l.number("detuning_mhz", 0.0);
  lab.first_site = s.lattice.sites.front();
  if (lab.bare_energies_mhz.size() != s.lattice.sites.size()) {
    throw ConfigError(l.path("bare_energies_mhz"), "needs one energy per site");
  }
  s.lab_frame = std::move(lab);
}

}  // namespace

std::vector<double> TimeGrid::build(const LatticeSpec& lattice) const {
  if (!explicit_us.empty()) return explicit_us;
  if (stroboscopic) return stroboscopic_grid(lattice.drive.detuning_mhz, t_end_us);
  return uniform_grid(t_end_us, points);
}

Scenario scenario_from_json(const Json& doc) {
  Obj o(doc, "");
  o.allow({"name", "description", "kind", "sites", "links", "rabi_mhz", "wrap_phase_rad", "detunings", "tilt_mhz",
           "boundary", "drive", "interaction", "lab_frame", "initial_state", "time", "solver", "observables",
           "correlation_times_us", "fits", "spam", "scan", "gap_table", "flux"});
  Scenario s;
  s.name = o.string("name", "custom");
  s.description = o.string("description", "");
  const std::string kind = o.string("kind", "simulate");
  if (kind == "simulate") s.kind = ScenarioKind::Simulate;
  else if (kind == "scan") s.kind = ScenarioKind::Scan;
  else if (kind == "gap-table") s.kind = ScenarioKind::GapTable;
  else if (kind == "flux-calibration") s.kind = ScenarioKind::FluxCalibration;
  else throw ConfigError("kind", "expected simulate, scan, gap-table or flux-calibration");

  if (o.has("sites")) parse_lattice(o, s);
  if (s.kind == ScenarioKind::Simulate && !o.has("sites")) throw ConfigError("sites", "missing required key");
  if (o.has("interaction")) parse_interaction(o, s);
  if (o.has("lab_frame")) parse_lab_frame(o, s);

  if (o.has("initial_state")) s.initial_state = o.integers("initial_state");
  if (s.initial_state.empty() || s.initial_state.size() > 2) {
    throw ConfigError("initial_state", "expected one site label or a pair of labels");
  }
  if (s.is_pair() && !s.interaction) throw ConfigError("interaction", "pair simulations need an interaction block");
  if (s.is_pair() && s.lab_frame) throw ConfigError("lab_frame", "lab-frame generators are single particle");
  for (std::size_t k = 0; k < s.initial_state.size(); ++k) {
    if (s.kind == ScenarioKind::Simulate &&
        std::find(s.lattice.sites.begin(), s.lattice.sites.end(), s.initial_state[k]) == s.lattice.sites.end()) {
      throw ConfigError(index("initial_state", k), "not a site of the lattice");
    }
  }

  if (o.has("time")) {
    Obj t(o.at("time"), "time");
    t.allow({"t_end_us", "points", "stroboscopic", "explicit_us"});
    s.time.t_end_us = t.number("t_end_us", s.time.t_end_us);
    s.time.points = t.count("points", s.time.points);
    s.time.stroboscopic = t.boolean("stroboscopic", false);
    if (t.has("explicit_us")) s.time.explicit_us = t.numbers("explicit_us");
    if (!(s.time.t_end_us > 0.0)) throw ConfigError("time.t_end_us", "must be positive");
    if (s.time.points < 2) throw ConfigError("time.points", "need at least two points");
    if (s.time.stroboscopic && s.lattice.drive.detuning_mhz == 0.0) {
      throw ConfigError("time.stroboscopic", "needs a drive with nonzero detuning");
    }
  }
  if (o.has("solver")) {
    Obj v(o.at("solver"), "solver");
    v.allow({"tol", "max_steps", "initial_step_us", "use_period", "use_blocks"});
    s.solver.tol = v.number("tol", s.solver.tol);
    if (!(s.solver.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
    s.solver.max_steps = v.count("max_steps", s.solver.max_steps);
    if (v.has("initial_step_us")) s.solver.initial_step_us = v.number("initial_step_us");
    s.solver.use_period = v.boolean("use_period", true);
    s.solver.use_blocks = v.boolean("use_blocks", true);
  }
  if (o.has("observables")) {
    const Json& a = o.array("observables");
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!a[k].is_string() || !kObservables.count(a[k].get<std::string>())) {
        throw ConfigError(index("observables", k),
                          "expected one of populations, lambda, pair_populations, pair_state, correlations");
      }
      s.observables.push_back(a[k].get<std::string>());
    }
  }
  if (o.has("correlation_times_us")) s.correlation_times_us = o.numbers("correlation_times_us");
  if (o.has("fits")) {
    const Json& a = o.array("fits");
    for (std::size_t k = 0; k < a.size(); ++k) {
      Obj f(a[k], index("fits", k));
      f.allow({"model", "series", "t_max_us", "until_first_minimum"});
      FitRequest req;
      req.model = f.string("model", "");
      if (!kModels.count(req.model)) {
        throw ConfigError(f.path("model"), "expected bloch, damped_sine, gaussian_decay or cosine");
      }
      req.series = f.string("series", "");
      if (req.series.empty()) throw ConfigError(f.path("series"), "missing required key");
      if (f.has("t_max_us")) req.t_max_us = f.number("t_max_us");
      req.until_first_minimum = f.boolean("until_first_minimum", false);
      s.fits.push_back(std::move(req));
    }
  }
  if (o.has("spam")) {
    Obj p(o.at("spam"), "spam");
    p.allow({"upper", "lower"});
    SpamModel m{p.number("upper"), p.number("lower")};
    try {
      m.validate();
    } catch (const SpecError& e) {
      throw ConfigError("spam", e.what());
    }
    s.spam = m;
  }
  if (o.has("scan")) {
    Obj c(o.at("scan"), "scan");
    c.allow({"detuning_mhz", "rabi_mhz", "v_grid_mhz", "t_window_us", "points", "half_width", "breakdown_ratio"});
    s.scan.detuning_mhz = c.number("detuning_mhz", s.scan.detuning_mhz);
    s.scan.rabi_mhz = c.number("rabi_mhz", s.scan.rabi_mhz);
    s.scan.v_grid_mhz = c.numbers("v_grid_mhz");
    s.scan.options.t_window_us = c.number("t_window_us", s.scan.options.t_window_us);
    s.scan.options.points = c.count("points", s.scan.options.points);
    s.scan.options.half_width = c.has("half_width") ? c.integer("half_width") : s.scan.options.half_width;
    s.scan.options.breakdown_ratio = c.number("breakdown_ratio", s.scan.options.breakdown_ratio);
  } else if (s.kind == ScenarioKind::Scan) {
    throw ConfigError("scan", "missing required key");
  }
  if (o.has("gap_table")) {
    Obj g(o.at("gap_table"), "gap_table");
    g.allow({"detuning_mhz", "rabi_mhz", "v_grid_mhz"});
    s.gap_table.detuning_mhz = g.number("detuning_mhz", s.gap_table.detuning_mhz);
    s.gap_table.rabi_mhz = g.numbers("rabi_mhz");
    s.gap_table.v_grid_mhz = g.numbers("v_grid_mhz");
  } else if (s.kind == ScenarioKind::GapTable) {
    throw ConfigError("gap_table", "missing required key");
  }
  if (o.has("flux")) {
    Obj f(o.at("flux"), "flux");
    f.allow({"rabi_mhz", "t_probe_us", "points"});
    s.flux.rabi_mhz = f.number("rabi_mhz", s.flux.rabi_mhz);
    if (f.has("t_probe_us")) s.flux.t_probe_us = f.number("t_probe_us");
    s.flux.points = f.count("points", s.flux.points);
  }
  if (s.kind == ScenarioKind::FluxCalibration && s.lattice.boundary != Boundary::Periodic) {
    throw ConfigError("boundary", "flux calibration needs a periodic ring");
  }
  return s;
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["kind"] = to_string(s.kind);
  if (!s.lattice.sites.empty()) {
    j["sites"] = s.lattice.sites;
    Json links = Json::array();
    for (const auto& l : s.lattice.links) {
      links.push_back({{"from", l.from}, {"to", l.to}, {"rabi_mhz", l.rabi_mhz}, {"phase_rad", l.phase_rad}});
    }
    j["links"] = links;
    j["detunings"] = s.lattice.site_detunings_mhz;
    j["boundary"] = to_string(s.lattice.boundary);
    j["drive"] = {{"type", to_string(s.lattice.drive.type)}, {"detuning_mhz", s.lattice.drive.detuning_mhz}};
  }
  if (s.interaction) {
    Json i;
    if (s.interaction->v_mhz) i["v_mhz"] = *s.interaction->v_mhz;
    if (s.interaction->separation_um) i["separation_um"] = *s.interaction->separation_um;
    i["c3_table_path"] = s.interaction->c3_table_path;
    j["interaction"] = i;
  }
  if (s.lab_frame) {
    j["lab_frame"] = {{"bare_energies_mhz", s.lab_frame->bare_energies_mhz},
                      {"rabi_mhz", s.lab_frame->rabi_mhz},
                      {"detuning_mhz", s.lab_frame->detuning_mhz}};
  }
  j["initial_state"] = s.initial_state;
  Json t{{"t_end_us", s.time.t_end_us}, {"points", s.time.points}, {"stroboscopic", s.time.stroboscopic}};
  if (!s.time.explicit_us.empty()) t["explicit_us"] = s.time.explicit_us;
  j["time"] = t;
  Json solver{{"tol", s.solver.tol}, {"max_steps", s.solver.max_steps}};
  if (s.solver.initial_step_us) solver["initial_step_us"] = *s.solver.initial_step_us;
  solver["use_period"] = s.solver.use_period;
  solver["use_blocks"] = s.solver.use_blocks;
  j["solver"] = solver;
  j["observables"] = s.observables;
  j["correlation_times_us"] = s.correlation_times_us;
  Json fits = Json::array();
  for (const auto& f : s.fits) {
    Json fj{{"model", f.model}, {"series", f.series}};
    if (f.t_max_us) fj["t_max_us"] = *f.t_max_us;
    fj["until_first_minimum"] = f.until_first_minimum;
    fits.push_back(fj);
  }
  j["fits"] = fits;
  if (s.spam) j["spam"] = {{"upper", s.spam->upper}, {"lower", s.spam->lower}};
  if (s.kind == ScenarioKind::Scan) {
    j["scan"] = {{"detuning_mhz", s.scan.detuning_mhz},       {"rabi_mhz", s.scan.rabi_mhz},
                 {"v_grid_mhz", s.scan.v_grid_mhz},           {"t_window_us", s.scan.options.t_window_us},
                 {"points", s.scan.options.points},           {"half_width", s.scan.options.half_width},
                 {"breakdown_ratio", s.scan.options.breakdown_ratio}};
  }
  if (s.kind == ScenarioKind::GapTable) {
    j["gap_table"] = {{"detuning_mhz", s.gap_table.detuning_mhz},
                      {"rabi_mhz", s.gap_table.rabi_mhz},
                      {"v_grid_mhz", s.gap_table.v_grid_mhz}};
  }
  if (s.kind == ScenarioKind::FluxCalibration) {
    Json f{{"rabi_mhz", s.flux.rabi_mhz}, {"points", s.flux.points}};
    if (s.flux.t_probe_us) f["t_probe_us"] = *s.flux.t_probe_us;
    j["flux"] = f;
  }
  return j;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", "invalid JSON in " + path.string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::string pointer;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) pointer += "/" + token;
    token.clear();
  };
  for (char c : key) {
    if (c == '.' || c == '[') {
      flush();
    } else if (c == ']') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  try {
    doc[Json::json_pointer(pointer)] = value;
  } catch (const Json::exception& e) {
    throw ConfigError(key, std::string("cannot apply override: ") + e.what());
  }
}

Json to_json(const FitResult& r) {
  auto params = [](const std::vector<FitParameter>& ps) {
    Json o = Json::object();
    for (const auto& p : ps) {
      // JSON has no infinity; a null error means the covariance was singular
      Json err = std::isfinite(p.std_error) ? Json(p.std_error) : Json(nullptr);
      o[p.name] = {{"value", p.value}, {"std_error", err}, {"unit", p.unit}};
    }
    return o;
  };
  return {{"model", r.model},
          {"parameters", params(r.parameters)},
          {"derived", params(r.derived)},
          {"residual_norm", r.residual_norm},
          {"points", r.points},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"gradient_measure", r.gradient_measure},
          {"message", r.message}};
}

Json to_json(const Provenance& p) {
  return {{"solver", p.solver},
          {"tol", p.tol},
          {"initial_step_us", p.initial_step_us},
          {"final_step_us", p.final_step_us},
          {"error_estimate", p.error_estimate},
          {"refinements", p.refinements},
          {"exponentials", p.exponentials},
          {"periodic_fast_path", p.periodic_fast_path},
          {"block_sizes", p.block_sizes},
          {"isa", p.isa}};
}

Json to_json(const ScanRow& r) {
  return {{"V_mhz", r.v_mhz},
          {"omega_mhz", r.omega_mhz},
          {"omega_err", std::isfinite(r.omega_err) ? Json(r.omega_err) : Json(nullptr)},
          {"gamma_per_us", r.gamma_per_us},
          {"gamma_err", std::isfinite(r.gamma_err) ? Json(r.gamma_err) : Json(nullptr)},
          {"converged", r.converged},
          {"inside_breakdown", r.inside_breakdown},
          {"error", r.error}};
}

Json to_json(const FluxCalibration& c) {
  return {{"probe_site", c.probe_site},
          {"probe_time_us", c.probe_time_us},
          {"settings_rad", c.settings_rad},
          {"response", c.response},
          {"peak_setting_rad", c.peak_setting_rad},
          {"inferred_bias_rad", c.inferred_bias_rad},
          {"uncertainty_rad", std::isfinite(c.uncertainty_rad) ? Json(c.uncertainty_rad) : Json(nullptr)},
          {"peak_height", c.peak_height},
          {"fit", to_json(c.fit)}};
}

Json to_json(const C3Table& t) {
  Json a = Json::array();
  for (const auto& [key, c3] : t.entries()) a.push_back({{"i", key.first}, {"j", key.second}, {"c3_mhz_um3", c3}});
  return a;
}

}  // namespace synlat
