#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace synlat {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Energies are frequencies E/h in MHz and times are in microseconds, so every
/// phase is 2*pi*nu*t.
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class BasisKind { Single, Pair };

/// Ordered site labels plus the particle count. Pair states |a>_A |b>_B are
/// stored at index a_idx * N + b_idx (distinguishable atoms, no symmetrization).
struct Basis {
  BasisKind kind = BasisKind::Single;
  std::vector<int> sites;

  std::size_t num_sites() const { return sites.size(); }
  std::size_t dim() const { return kind == BasisKind::Single ? sites.size() : sites.size() * sites.size(); }
  std::size_t site_index(int label) const;
  std::size_t pair_index(int site_a, int site_b) const;
  /// Column label for CSV output: "P_3" or "P_-1_2".
  std::string state_label(std::size_t k) const;

  bool operator==(const Basis&) const = default;
};

/// One complex exponential amplitude * exp(-i 2 pi nu t).
struct Tone {
  cplx amplitude;
  double frequency_mhz = 0.0;
};

/// Scalar modulation f(t) = sum of tones.
class Modulation {
 public:
  Modulation() = default;
  explicit Modulation(std::vector<Tone> tones) : tones_(std::move(tones)) {}

  static Modulation constant(cplx value) { return Modulation({Tone{value, 0.0}}); }
  /// exp(-i 2 pi nu t)
  static Modulation exponential(double frequency_mhz) { return Modulation({Tone{1.0, frequency_mhz}}); }
  /// cos(2 pi nu t)
  static Modulation cosine(double frequency_mhz) {
    return Modulation({Tone{0.5, frequency_mhz}, Tone{0.5, -frequency_mhz}});
  }

  cplx operator()(double t_us) const;
  const std::vector<Tone>& tones() const { return tones_; }
  bool is_constant() const;
  double max_frequency_mhz() const;
  double max_amplitude() const;

 private:
  std::vector<Tone> tones_;
};

/// Contributes f(t) * matrix + conj(f(t)) * matrix^H to H(t).
struct TimeDepTerm {
  CMatrix matrix;
  Modulation modulation;
};

/// Dense generator H(t) = static_part + sum_k [f_k(t) M_k + h.c.] over a
/// single- or two-particle basis. Immutable after construction.
class HamiltonianMatrix {
 public:
  HamiltonianMatrix(Basis basis, CMatrix static_part, std::vector<TimeDepTerm> terms = {},
                    std::optional<double> period_us = std::nullopt);

  const Basis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.dim(); }
  const CMatrix& static_part() const { return static_part_; }
  const std::vector<TimeDepTerm>& terms() const { return terms_; }
  bool is_time_dependent() const { return !terms_.empty(); }
  /// Set when H(t + T) = H(t) for every t.
  std::optional<double> period_us() const { return period_; }

  CMatrix at(double t_us) const;
  /// Upper bound on the spectral norm of H(t) over all t (MHz).
  double norm_bound() const;
  /// Largest modulation frequency present (MHz); 0 for static generators.
  double max_modulation_frequency() const;

 private:
  Basis basis_;
  CMatrix static_part_;
  std::vector<TimeDepTerm> terms_;
  std::optional<double> period_;
};

/// max |H - H^H| / max(1, max |H|)
double hermiticity_defect(const CMatrix& h);

}  // namespace synlat
