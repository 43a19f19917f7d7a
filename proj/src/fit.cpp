#include "synlat/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>

#include "synlat/error.hpp"

namespace synlat {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_series(std::span<const double> t, std::span<const double> y, std::size_t min_points) {
  if (t.size() != y.size()) throw SpecError("fit: time and value series differ in length");
  if (t.size() < min_points) throw SpecError("fit: too few points");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t[k]) || !std::isfinite(y[k])) throw SpecError("fit: non-finite sample");
  }
}

void evaluate(const CurveModel& model, std::span<const double> t, std::span<const double> y, const VectorXd& p,
              VectorXd& r, MatrixXd& jac) {
  const auto n = static_cast<Eigen::Index>(t.size());
  r.resize(n);
  jac.resize(n, p.size());
  Eigen::RowVectorXd g(p.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    r[k] = model.eval(t[static_cast<std::size_t>(k)], p, g) - y[static_cast<std::size_t>(k)];
    jac.row(k) = g;
  }
}

double scaled_gradient(const MatrixXd& jac, const VectorXd& r) {
  const double rn = r.norm();
  if (rn == 0.0) return 0.0;
  const VectorXd g = jac.transpose() * r;
  double m = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double cn = jac.col(j).norm();
    if (cn > 0.0) m = std::max(m, std::abs(g[j]) / (cn * rn));
  }
  return m;
}

double max_abs(std::span<const double> y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

FitResult best_of(const CurveModel& model, std::span<const double> t, std::span<const double> y,
                  const std::vector<VectorXd>& seeds, const FitOptions& opts) {
  FitResult best;
  bool have = false;
  for (const auto& seed : seeds) {
    if (!seed.allFinite()) continue;
    FitResult r = least_squares(model, t, y, seed, opts);
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.residual_norm < best.residual_norm);
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) throw SpecError("fit: no usable starting point");
  return best;
}

/// Reports the frequency as a positive value inside the Nyquist band. On a
/// uniform grid every alias reproduces the samples exactly, so folding changes
/// neither the residual nor the covariance. `per_cycle` is 1 for a frequency in
/// cycles and 2 pi for an angular one.
void settle_frequency(FitResult& r, const std::string& name, std::span<const double> t, double per_cycle) {
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  bool uniform = dt > 0.0;
  for (std::size_t k = 1; uniform && k < t.size(); ++k) uniform = std::abs(t[k] - t[k - 1] - dt) <= 1e-9 * dt;
  for (auto& p : r.parameters) {
    if (p.name != name) continue;
    p.value = std::abs(p.value);
    if (!uniform) continue;
    const double rate = per_cycle / dt;
    if (p.value <= 0.5 * rate) continue;
    const double f = std::fmod(p.value, rate);
    p.value = f > 0.5 * rate ? rate - f : f;
  }
}

std::size_t argmin(std::span<const double> y) {
  return static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
}
std::size_t argmax(std::span<const double> y) {
  return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

}  // namespace

const FitParameter& FitResult::parameter(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  for (const auto& p : derived)
    if (p.name == name) return p;
  throw SpecError("fit result has no parameter '" + name + "'");
}

FitResult least_squares(const CurveModel& model, std::span<const double> t, std::span<const double> y,
                        const VectorXd& p0, const FitOptions& opts) {
  const std::size_t np = model.parameter_names.size();
  check_series(t, y, np);
  if (static_cast<std::size_t>(p0.size()) != np) throw SpecError("fit: seed has wrong size");

  VectorXd p = p0;
  VectorXd r;
  MatrixXd jac;
  evaluate(model, t, y, p, r, jac);
  double rss = r.squaredNorm();
  // Residuals this small are indistinguishable from roundoff in y, either in
  // absolute terms or relative to the spread of the data.
  double mean = 0.0, spread = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  for (double v : y) spread += (v - mean) * (v - mean);
  const double floor_rss =
      std::max(std::pow(1e-14 * std::max(1.0, max_abs(y)), 2) * static_cast<double>(t.size()), 1e-20 * spread);

  FitResult out;
  out.model = model.name;
  out.points = t.size();
  double lambda = 1e-3;
  double measure = scaled_gradient(jac, r);
  bool stagnated = false;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    measure = scaled_gradient(jac, r);
    if (measure <= opts.gradient_tol || rss <= floor_rss || !std::isfinite(rss)) break;
    const MatrixXd a = jac.transpose() * jac;
    const VectorXd g = jac.transpose() * r;
    VectorXd d = a.diagonal().cwiseMax(1e-12 * std::max(1.0, a.diagonal().maxCoeff()));
    bool accepted = false;
    while (lambda < 1e16) {
      MatrixXd damped = a;
      damped.diagonal() += lambda * d;
      const VectorXd step = damped.ldlt().solve(-g);
      const VectorXd trial = p + step;
      VectorXd r_trial;
      MatrixXd j_trial;
      evaluate(model, t, y, trial, r_trial, j_trial);
      const double rss_trial = r_trial.squaredNorm();
      if (std::isfinite(rss_trial) && rss_trial < rss) {
        const double drop = rss - rss_trial;
        p = trial;
        r = std::move(r_trial);
        jac = std::move(j_trial);
        stagnated = drop <= opts.rss_tol * rss;
        rss = rss_trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || stagnated) {
      stagnated = true;
      measure = scaled_gradient(jac, r);
      ++it;
      break;
    }
  }
  measure = scaled_gradient(jac, r);
  out.iterations = it;
  out.gradient_measure = measure;
  out.residual_norm = std::sqrt(rss);
  if (!std::isfinite(rss)) {
    out.converged = false;
    out.message = "residual became non-finite";
  } else if (measure <= opts.gradient_tol || rss <= floor_rss) {
    out.converged = true;
    out.message = rss <= floor_rss ? "exact fit" : "gradient test satisfied";
  } else if (stagnated && measure <= std::sqrt(opts.gradient_tol)) {
    // no further decrease possible at double precision; accept a near-zero gradient
    out.converged = true;
    out.message = "stationary within rounding";
  } else {
    out.converged = false;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s after %zu iterations (scaled gradient %.3e)",
                  stagnated ? "stalled" : "iteration limit reached", it, measure);
    out.message = buf;
  }

  const auto n = static_cast<double>(t.size());
  const double dof = n - static_cast<double>(np);
  std::vector<double> errors(np, kInf);
  Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  if (dof > 0 && sv.size() == static_cast<Eigen::Index>(np) && sv.minCoeff() > 1e-12 * sv.maxCoeff()) {
    const double sigma2 = rss / dof;
    const MatrixXd v = svd.matrixV();
    for (std::size_t j = 0; j < np; ++j) {
      double var = 0.0;
      for (Eigen::Index k = 0; k < sv.size(); ++k) var += std::pow(v(static_cast<Eigen::Index>(j), k) / sv[k], 2);
      errors[j] = std::sqrt(sigma2 * var);
    }
  }
  for (std::size_t j = 0; j < np; ++j) {
    out.parameters.push_back({model.parameter_names[j], p[static_cast<Eigen::Index>(j)], errors[j], model.units[j]});
  }
  return out;
}

std::vector<double> dominant_frequencies(std::span<const double> t, std::span<const double> y, std::size_t count,
                                         std::size_t padding) {
  check_series(t, y, 4);
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw SpecError("fit: time grid must increase");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());

  const double df = 1.0 / (static_cast<double>(padding) * span);
  const double nyquist = 0.5 * static_cast<double>(t.size() - 1) / span;
  const auto bins = static_cast<std::size_t>(nyquist / df);
  std::vector<double> power(bins + 1, 0.0);
  for (std::size_t k = 1; k <= bins; ++k) {
    const double f = static_cast<double>(k) * df;
    std::complex<double> s{};
    for (std::size_t i = 0; i < t.size(); ++i) s += (y[i] - mean) * std::polar(1.0, -2.0 * kPi * f * t[i]);
    power[k] = std::norm(s);
  }
  std::vector<std::size_t> peaks;
  for (std::size_t k = 1; k <= bins; ++k) {
    const double left = k > 1 ? power[k - 1] : 0.0;
    const double right = k < bins ? power[k + 1] : 0.0;
    if (power[k] > 0.0 && power[k] >= left && power[k] >= right) peaks.push_back(k);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return power[a] > power[b]; });
  std::vector<double> out;
  for (std::size_t k = 0; k < peaks.size() && out.size() < count; ++k) out.push_back(static_cast<double>(peaks[k]) * df);
  return out;
}

// ---------------------------------------------------------------------------
// Models

CurveModel bloch_model() {
  return {"bloch", {"A", "omega"}, {"", "MHz"}, [](double t, const VectorXd& p, Eigen::Ref<Eigen::RowVectorXd> g) {
            const double ph = 2.0 * kPi * p[1] * t;
            g[0] = 1.0 - std::cos(ph);
            g[1] = p[0] * std::sin(ph) * 2.0 * kPi * t;
            return p[0] * (1.0 - std::cos(ph));
          }};
}

CurveModel damped_sine_model() {
  return {"damped_sine",
          {"A", "gamma", "omega", "c"},
          {"", "1/us", "MHz", ""},
          [](double t, const VectorXd& p, Eigen::Ref<Eigen::RowVectorXd> g) {
            const double env = std::exp(-p[1] * t);
            const double ph = kPi * p[2] * t;
            const double c2 = std::cos(ph) * std::cos(ph);
            g[0] = env * c2;
            g[1] = -t * p[0] * env * c2;
            g[2] = -p[0] * env * std::sin(2.0 * ph) * kPi * t;
            g[3] = 1.0;
            return p[0] * env * c2 + p[3];
          }};
}

CurveModel gaussian_decay_model() {
  return {"gaussian_decay",
          {"a", "b", "beta"},
          {"", "", "1/us^2"},
          [](double t, const VectorXd& p, Eigen::Ref<Eigen::RowVectorXd> g) {
            const double e = std::exp(-p[2] * t * t);
            g[0] = 1.0;
            g[1] = e;
            g[2] = -p[1] * t * t * e;
            return p[0] + p[1] * e;
          }};
}

CurveModel cosine_model() {
  return {"cosine", {"a", "b", "omega"}, {"", "", "rad/us"},
          [](double t, const VectorXd& p, Eigen::Ref<Eigen::RowVectorXd> g) {
            const double ph = p[2] * t;
            g[0] = 1.0;
            g[1] = std::cos(ph);
            g[2] = -p[1] * std::sin(ph) * t;
            return p[0] + p[1] * std::cos(ph);
          }};
}

// ---------------------------------------------------------------------------
// Seeded fits

FitResult fit_bloch_oscillation(std::span<const double> t, std::span<const double> lambda, const FitOptions& opts) {
  check_series(t, lambda, 4);
  const double lo = *std::min_element(lambda.begin(), lambda.end());
  const double hi = *std::max_element(lambda.begin(), lambda.end());
  std::vector<VectorXd> seeds;
  for (double f : dominant_frequencies(t, lambda, opts.frequency_starts)) seeds.push_back(VectorXd{{0.5 * (hi - lo), f}});
  // first maximum of A[1 - cos] sits at half a period
  if (const double tm = t[argmax(lambda)] - t.front(); tm > 0) seeds.push_back(VectorXd{{0.5 * (hi - lo), 0.5 / tm}});
  FitResult r = best_of(bloch_model(), t, lambda, seeds, opts);
  settle_frequency(r, "omega", t, 1.0);
  return r;
}

FitResult fit_damped_sine(std::span<const double> t, std::span<const double> p, const FitOptions& opts) {
  check_series(t, p, 5);
  const double lo = *std::min_element(p.begin(), p.end());
  const double hi = *std::max_element(p.begin(), p.end());
  const double span = t.back() - t.front();
  std::vector<double> freqs = dominant_frequencies(t, p, opts.frequency_starts);
  if (const double tm = t[argmin(p)] - t.front(); tm > 0) freqs.push_back(0.5 / tm);
  std::vector<VectorXd> seeds;
  for (double f : freqs) {
    for (double g : {0.0, 1.0 / span}) seeds.push_back(VectorXd{{hi - lo, g, f, lo}});
  }
  FitResult r = best_of(damped_sine_model(), t, p, seeds, opts);
  settle_frequency(r, "omega", t, 1.0);
  const auto& gamma = r.parameter("gamma");
  r.derived.push_back({"gamma_h_mhz", gamma.value / (2.0 * kPi), gamma.std_error / (2.0 * kPi), "h*MHz"});
  return r;
}

FitResult fit_gaussian_decay(std::span<const double> t, std::span<const double> p, const FitOptions& opts) {
  check_series(t, p, 4);
  const double a0 = *std::min_element(p.begin(), p.end());
  const double b0 = p.front() - a0;
  // half-decay time of the seed curve
  double beta0 = 1.0 / std::pow(std::max(t.back() - t.front(), 1e-12), 2);
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] <= a0 + 0.5 * b0 && t[k] > 0.0) {
      beta0 = std::log(2.0) / (t[k] * t[k]);
      break;
    }
  }
  std::vector<VectorXd> seeds;
  for (double s : {1.0, 0.1, 10.0}) seeds.push_back(VectorXd{{a0, b0, beta0 * s}});
  return best_of(gaussian_decay_model(), t, p, seeds, opts);
}

FitResult fit_cosine(std::span<const double> t, std::span<const double> p, const FitOptions& opts) {
  check_series(t, p, 4);
  double mean = 0.0;
  for (double v : p) mean += v;
  mean /= static_cast<double>(p.size());
  const double lo = *std::min_element(p.begin(), p.end());
  const double hi = *std::max_element(p.begin(), p.end());
  const double sign = p.front() >= mean ? 1.0 : -1.0;
  std::vector<VectorXd> seeds;
  for (double f : dominant_frequencies(t, p, opts.frequency_starts)) {
    seeds.push_back(VectorXd{{mean, sign * 0.5 * (hi - lo), 2.0 * kPi * f}});
  }
  // a window that ends near the first extremum holds only half a period
  const std::size_t k = sign > 0 ? argmin(p) : argmax(p);
  if (const double te = t[k] - t.front(); te > 0) {
    seeds.push_back(VectorXd{{0.5 * (p.front() + p[k]), 0.5 * (p.front() - p[k]), kPi / te}});
  }
  FitResult r = best_of(cosine_model(), t, p, seeds, opts);
  settle_frequency(r, "omega", t, 2.0 * kPi);
  return r;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  check_series(x, y, 2);
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw SpecError("fit_line: x values are all equal");
  LinearFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sse += std::pow(y[k] - out.intercept - out.slope * x[k], 2);
  out.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  out.slope_error = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : kInf;
  return out;
}

}  // namespace synlat
