#pragma once

#include <span>
#include <vector>

namespace synlat {

/// Affine contrast model P_bare = P_l + (P_u - P_l) P between a measurement
/// floor P_l and ceiling P_u.
struct SpamModel {
  double upper = 0.93;
  double lower = 0.32;

  /// Defaults for single-atom and pair-averaged site populations.
  static SpamModel single() { return {0.93, 0.32}; }
  /// Defaults for joint pair-state populations such as P_00.
  static SpamModel pair_state() { return {0.86, 0.32}; }

  /// Throws SpecError unless 0 <= lower < upper <= 1.
  void validate() const;
};

struct Renormalized {
  double value = 0.0;
  /// True when the result lies outside [0, 1]; it is returned unclamped.
  bool out_of_range = false;
};

double forward(const SpamModel& model, double p_ideal);
Renormalized renormalize(const SpamModel& model, double p_bare);

std::vector<double> forward(const SpamModel& model, std::span<const double> p_ideal);
/// Column-wise renormalization; `flags[k]` marks values outside [0, 1].
std::vector<double> renormalize(const SpamModel& model, std::span<const double> p_bare,
                                std::vector<bool>* flags = nullptr);

}  // namespace synlat
