#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "synlat/analysis.hpp"
#include "synlat/observables.hpp"
#include "synlat/propagate.hpp"

namespace synlat::csv {

/// Fixed "%.12g" rendering so identical inputs give byte-identical files.
std::string format(double x);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// t_us followed by one probability column per basis state.
std::string trajectory(const StateTrajectory& traj);
/// t_us followed by every named series.
std::string observables(const ObservableTable& table);
/// One matrix per snapshot: header row of B labels, first column A labels.
std::string correlation_matrix(const CorrelationSnapshot& snap, const std::vector<int>& sites);
/// t_us, i, j, value for every snapshot.
std::string correlation_long(const std::vector<CorrelationSnapshot>& snaps, const std::vector<int>& sites);
/// V_mhz, omega_mhz, omega_err, gamma_per_us, gamma_err, converged
std::string scan(const std::vector<ScanRow>& rows);

}  // namespace synlat::csv
