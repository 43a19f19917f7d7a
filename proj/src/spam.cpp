#include "synlat/spam.hpp"

#include <cmath>

#include "synlat/error.hpp"

namespace synlat {

void SpamModel::validate() const {
  if (!std::isfinite(upper) || !std::isfinite(lower)) throw SpecError("SPAM levels must be finite");
  if (upper == lower) throw SpecError("SPAM ceiling equals floor; renormalization is undefined");
  if (!(lower >= 0.0 && lower < upper && upper <= 1.0)) throw SpecError("SPAM levels must satisfy 0 <= P_l < P_u <= 1");
}

double forward(const SpamModel& model, double p_ideal) {
  model.validate();
  if (!std::isfinite(p_ideal)) throw SpecError("non-finite population");
  return model.lower + (model.upper - model.lower) * p_ideal;
}

Renormalized renormalize(const SpamModel& model, double p_bare) {
  model.validate();
  if (!std::isfinite(p_bare)) throw SpecError("non-finite population");
  const double v = (p_bare - model.lower) / (model.upper - model.lower);
  return {v, v < 0.0 || v > 1.0};
}

std::vector<double> forward(const SpamModel& model, std::span<const double> p_ideal) {
  std::vector<double> out;
  out.reserve(p_ideal.size());
  for (double p : p_ideal) out.push_back(forward(model, p));
  return out;
}

std::vector<double> renormalize(const SpamModel& model, std::span<const double> p_bare, std::vector<bool>* flags) {
  std::vector<double> out;
  out.reserve(p_bare.size());
  if (flags) flags->clear();
  for (double p : p_bare) {
    const Renormalized r = renormalize(model, p);
    out.push_back(r.value);
    if (flags) flags->push_back(r.out_of_range);
  }
  return out;
}

}  // namespace synlat
