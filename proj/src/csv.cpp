#include "synlat/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "synlat/error.hpp"

namespace synlat::csv {

std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
  os << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw Error("csv row width does not match header");
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format(row[k]);
    os << '\n';
  }
  return os.str();
}

std::string trajectory(const StateTrajectory& traj) {
  std::vector<std::string> header{"t_us"};
  for (std::size_t k = 0; k < traj.basis.dim(); ++k) header.push_back(traj.basis.state_label(k));
  const Eigen::MatrixXd p = traj.probabilities();
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    std::vector<double> row{traj.times_us[static_cast<std::size_t>(r)]};
    for (Eigen::Index c = 0; c < p.cols(); ++c) row.push_back(p(r, c));
    rows.push_back(std::move(row));
  }
  return table(header, rows);
}

std::string observables(const ObservableTable& t) {
  std::vector<std::string> header{"t_us"};
  header.insert(header.end(), t.names.begin(), t.names.end());
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < t.times_us.size(); ++r) {
    std::vector<double> row{t.times_us[r]};
    for (const auto& col : t.columns) row.push_back(col[r]);
    rows.push_back(std::move(row));
  }
  return table(header, rows);
}

std::string correlation_matrix(const CorrelationSnapshot& snap, const std::vector<int>& sites) {
  std::ostringstream os;
  os << "i\\j";
  for (int s : sites) os << ',' << s;
  os << '\n';
  for (std::size_t a = 0; a < sites.size(); ++a) {
    os << sites[a];
    for (std::size_t b = 0; b < sites.size(); ++b) {
      os << ',' << format(snap.c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    }
    os << '\n';
  }
  return os.str();
}

std::string correlation_long(const std::vector<CorrelationSnapshot>& snaps, const std::vector<int>& sites) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : snaps) {
    for (std::size_t a = 0; a < sites.size(); ++a)
      for (std::size_t b = 0; b < sites.size(); ++b)
        rows.push_back({s.time_us, static_cast<double>(sites[a]), static_cast<double>(sites[b]),
                        s.c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))});
  }
  return table({"t_us", "i", "j", "value"}, rows);
}

std::string scan(const std::vector<ScanRow>& rows) {
  std::ostringstream os;
  os << "V_mhz,omega_mhz,omega_err,gamma_per_us,gamma_err,converged\n";
  for (const auto& r : rows) {
    os << format(r.v_mhz) << ',' << format(r.omega_mhz) << ',' << format(r.omega_err) << ','
       << format(r.gamma_per_us) << ',' << format(r.gamma_err) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace synlat::csv
