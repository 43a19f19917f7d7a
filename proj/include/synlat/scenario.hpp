#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synlat/config.hpp"
#include "synlat/observables.hpp"

namespace synlat {

/// A named set of scenario documents, one per variant.
struct CatalogEntry {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, Json>> variants;
};

/// Built-in scenarios, sorted by name.
const std::vector<CatalogEntry>& catalog();
/// Throws ConfigError listing the known names when `name` is not in the catalog.
const CatalogEntry& find_scenario(const std::string& name);

struct NamedFit {
  FitRequest request;
  std::optional<FitResult> result;
  /// Set when the fit could not be attempted or threw.
  std::string error;
};

/// Everything a simulate-kind scenario produces, before anything is written.
struct SimulationOutput {
  StateTrajectory trajectory;
  ObservableTable observables;
  std::vector<CorrelationSnapshot> correlations;
  std::vector<NamedFit> fits;
};

HamiltonianMatrix build_hamiltonian(const Scenario& s);
QuantumState initial_state(const Scenario& s, const Basis& basis);
SimulationOutput simulate(const Scenario& s);
/// Applies one fit request to a table. Never throws; failures land in `error`.
NamedFit run_fit(const FitRequest& req, const ObservableTable& table);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<double> tol;
  std::size_t workers = 0;
};

/// Runs any scenario kind and writes its bundle into `opts.out_dir`:
/// manifest.json always, plus the tables and fit reports of that kind. On
/// solver failure the manifest records the error, files already written are
/// kept, and the exception is rethrown.
void run_scenario(Scenario s, const RunOptions& opts);

/// Runs every variant of a catalog entry into out_root/<name>/<variant>.
/// Returns the number of failed variants.
std::size_t run_catalog_entry(const CatalogEntry& entry, const std::filesystem::path& out_root,
                              std::optional<double> tol, std::size_t workers,
                              const std::vector<std::string>& overrides);

struct SweepPoint {
  double value = 0.0;
  std::vector<NamedFit> fits;
  std::string error;
};

/// Reruns `base` with `parameter_path` set to each grid value, in parallel.
/// Point k writes its bundle to out_dir/point_<k>; the merged table goes to
/// out_dir/sweep.csv and sweep.json. Per-point failures are recorded.
std::vector<SweepPoint> sweep(const Json& base, const std::string& parameter_path, std::span<const double> grid,
                              const std::filesystem::path& out_dir, std::size_t workers = 0);

/// $SYNLAT_OUT, or ./out when unset.
std::filesystem::path default_output_root();

}  // namespace synlat
