#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synlat/analysis.hpp"
#include "synlat/lattice.hpp"
#include "synlat/propagate.hpp"
#include "synlat/spam.hpp"

namespace synlat {

using Json = nlohmann::ordered_json;

enum class ScenarioKind { Simulate, Scan, GapTable, FluxCalibration };

/// Output time grid: explicit list, uniform [0, t_end], or one sample per
/// drive period (bichromatic drives).
struct TimeGrid {
  double t_end_us = 4.0;
  std::size_t points = 401;
  bool stroboscopic = false;
  std::vector<double> explicit_us;

  std::vector<double> build(const LatticeSpec& lattice) const;
  bool operator==(const TimeGrid&) const = default;
};

struct FitRequest {
  /// bloch | damped_sine | gaussian_decay | cosine
  std::string model;
  /// Name of an observable series, e.g. "lambda", "Pavg_0", "P_0_0".
  std::string series;
  /// Fit only samples with t <= t_max.
  std::optional<double> t_max_us;
  /// Fit only up to the first local minimum of the series.
  bool until_first_minimum = false;
  bool operator==(const FitRequest&) const = default;
};

/// Parameters for the non-simulation scenario kinds.
struct ScanRequest {
  double detuning_mhz = 0.8;
  double rabi_mhz = 0.45;
  std::vector<double> v_grid_mhz;
  ScanOptions options;
};
struct GapTableRequest {
  double detuning_mhz = 0.8;
  std::vector<double> rabi_mhz;
  std::vector<double> v_grid_mhz;
};
struct FluxRequest {
  double rabi_mhz = 0.9;
  std::optional<double> t_probe_us;
  std::size_t points = 32;
};

struct Scenario {
  std::string name;
  std::string description;
  ScenarioKind kind = ScenarioKind::Simulate;

  LatticeSpec lattice;
  std::optional<InteractionSpec> interaction;
  std::optional<LabFrameSpec> lab_frame;
  /// One label (single particle) or two (pair).
  std::vector<int> initial_state{0};
  TimeGrid time;
  TimedepOptions solver;
  std::vector<std::string> observables;
  std::vector<double> correlation_times_us;
  std::vector<FitRequest> fits;
  std::optional<SpamModel> spam;

  ScanRequest scan;
  GapTableRequest gap_table;
  FluxRequest flux;

  bool is_pair() const { return initial_state.size() == 2; }
};

/// Parses a scenario document. Throws ConfigError naming the offending key.
Scenario scenario_from_json(const Json& doc);
/// Canonical form: every field explicit, links expanded. Parsing the result
/// gives back an identical scenario.
Json scenario_to_json(const Scenario& s);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Applies "a.b[2].c=value" to a document; the value is parsed as JSON when it
/// can be, otherwise taken as a string.
void apply_override(Json& doc, const std::string& assignment);

Json to_json(const FitResult& r);
Json to_json(const Provenance& p);
Json to_json(const ScanRow& r);
Json to_json(const FluxCalibration& c);
Json to_json(const C3Table& t);

}  // namespace synlat
