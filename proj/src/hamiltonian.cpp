#include "synlat/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "synlat/error.hpp"

namespace synlat {

std::size_t Basis::site_index(int label) const {
  auto it = std::find(sites.begin(), sites.end(), label);
  if (it == sites.end()) throw SpecError("site " + std::to_string(label) + " is not in the basis");
  return static_cast<std::size_t>(it - sites.begin());
}

std::size_t Basis::pair_index(int site_a, int site_b) const {
  if (kind != BasisKind::Pair) throw SpecError("pair_index on a single-particle basis");
  return site_index(site_a) * sites.size() + site_index(site_b);
}

std::string Basis::state_label(std::size_t k) const {
  if (kind == BasisKind::Single) return "P_" + std::to_string(sites.at(k));
  const std::size_t n = sites.size();
  return "P_" + std::to_string(sites.at(k / n)) + "_" + std::to_string(sites.at(k % n));
}

cplx Modulation::operator()(double t_us) const {
  cplx f{};
  for (const auto& tone : tones_) {
    f += tone.amplitude * std::polar(1.0, -kTwoPi * tone.frequency_mhz * t_us);
  }
  return f;
}

bool Modulation::is_constant() const {
  return std::all_of(tones_.begin(), tones_.end(), [](const Tone& t) { return t.frequency_mhz == 0.0; });
}

double Modulation::max_frequency_mhz() const {
  double m = 0.0;
  for (const auto& t : tones_) m = std::max(m, std::abs(t.frequency_mhz));
  return m;
}

double Modulation::max_amplitude() const {
  double s = 0.0;
  for (const auto& t : tones_) s += std::abs(t.amplitude);
  return s;
}

double hermiticity_defect(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  return (h - h.adjoint()).cwiseAbs().maxCoeff() / scale;
}

HamiltonianMatrix::HamiltonianMatrix(Basis basis, CMatrix static_part, std::vector<TimeDepTerm> terms,
                                     std::optional<double> period_us)
    : basis_(std::move(basis)), static_part_(std::move(static_part)), terms_(std::move(terms)), period_(period_us) {
  const auto n = static_cast<Eigen::Index>(basis_.dim());
  if (static_part_.rows() != n || static_part_.cols() != n) {
    throw SpecError("static part is " + std::to_string(static_part_.rows()) + "x" +
                    std::to_string(static_part_.cols()) + ", basis has dimension " + std::to_string(n));
  }
  if (!static_part_.allFinite()) throw SpecError("static part has non-finite entries");
  if (hermiticity_defect(static_part_) > 1e-12) throw SpecError("static part is not Hermitian");
  for (const auto& term : terms_) {
    if (term.matrix.rows() != n || term.matrix.cols() != n) throw SpecError("time-dependent term has wrong shape");
    if (!term.matrix.allFinite()) throw SpecError("time-dependent term has non-finite entries");
  }
  if (period_ && !(*period_ > 0.0 && std::isfinite(*period_))) throw SpecError("period must be positive");
}

CMatrix HamiltonianMatrix::at(double t_us) const {
  CMatrix h = static_part_;
  for (const auto& term : terms_) {
    const cplx f = term.modulation(t_us);
    h.noalias() += f * term.matrix;
    h.noalias() += std::conj(f) * term.matrix.adjoint();
  }
  return h;
}

double HamiltonianMatrix::norm_bound() const {
  // Row-sum norms bound the spectral norm of each Hermitian piece.
  auto rowsum = [](const CMatrix& m) { return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; };
  auto colsum = [](const CMatrix& m) { return m.size() ? m.cwiseAbs().colwise().sum().maxCoeff() : 0.0; };
  double bound = rowsum(static_part_);
  for (const auto& term : terms_) {
    bound += term.modulation.max_amplitude() * (rowsum(term.matrix) + colsum(term.matrix));
  }
  return bound;
}

double HamiltonianMatrix::max_modulation_frequency() const {
  double m = 0.0;
  for (const auto& term : terms_) m = std::max(m, term.modulation.max_frequency_mhz());
  return m;
}

}  // namespace synlat
