#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace synlat {

struct FitParameter {
  std::string name;
  double value = 0.0;
  /// sqrt of the diagonal of sigma^2 (J^T J)^-1; +inf when J^T J is singular.
  double std_error = 0.0;
  std::string unit;
};

struct FitResult {
  std::string model;
  std::vector<FitParameter> parameters;
  /// Quantities derived from the fitted parameters (e.g. gamma in h*MHz).
  std::vector<FitParameter> derived;
  double residual_norm = 0.0;
  std::size_t points = 0;
  bool converged = false;
  std::size_t iterations = 0;
  /// max_j |J_j . r| / (|J_j| |r|), the scaled gradient used as stopping test.
  double gradient_measure = 0.0;
  std::string message;

  const FitParameter& parameter(const std::string& name) const;
  double value(const std::string& name) const { return parameter(name).value; }
  double error(const std::string& name) const { return parameter(name).std_error; }
};

struct FitOptions {
  double gradient_tol = 1e-10;
  /// Relative change of the residual sum of squares that ends the iteration.
  double rss_tol = 1e-15;
  std::size_t max_iterations = 500;
  /// Number of spectral peaks tried as frequency seeds.
  std::size_t frequency_starts = 3;
};

/// y(t; p) and its gradient with respect to p.
struct CurveModel {
  std::string name;
  std::vector<std::string> parameter_names;
  std::vector<std::string> units;
  std::function<double(double t, const Eigen::VectorXd& p, Eigen::Ref<Eigen::RowVectorXd> grad)> eval;
};

/// Damped Gauss-Newton (Levenberg-Marquardt with Marquardt scaling) from p0.
FitResult least_squares(const CurveModel& model, std::span<const double> t, std::span<const double> y,
                        const Eigen::VectorXd& p0, const FitOptions& opts = {});

/// Frequencies (cycles per unit t) of the strongest peaks of the mean-removed
/// periodogram, strongest first. Zero frequency is excluded; nonuniform grids
/// are handled by direct summation.
std::vector<double> dominant_frequencies(std::span<const double> t, std::span<const double> y, std::size_t count,
                                         std::size_t padding = 8);

CurveModel bloch_model();
CurveModel damped_sine_model();
CurveModel gaussian_decay_model();
CurveModel cosine_model();

/// lambda(t) = A [1 - cos(2 pi omega t)]; omega in MHz.
FitResult fit_bloch_oscillation(std::span<const double> t, std::span<const double> lambda, const FitOptions& opts = {});
/// P(t) = A exp(-gamma t) cos^2(pi omega t) + c; gamma in 1/us, omega in MHz.
/// Also reports gamma / (2 pi) as the derived "gamma_h_mhz".
FitResult fit_damped_sine(std::span<const double> t, std::span<const double> p, const FitOptions& opts = {});
/// P(t) = a + b exp(-beta t^2); beta in 1/us^2.
FitResult fit_gaussian_decay(std::span<const double> t, std::span<const double> p, const FitOptions& opts = {});
/// P(t) = a + b cos(omega t); omega is angular (rad/us).
FitResult fit_cosine(std::span<const double> t, std::span<const double> p, const FitOptions& opts = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
  double r_squared = 0.0;
};
/// Ordinary least-squares line.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace synlat
