#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synlat/hamiltonian.hpp"

namespace synlat {

/// Normalized amplitude vector tagged with the basis it lives in.
struct QuantumState {
  Basis basis;
  CVector amplitudes;

  static QuantumState basis_state(const Basis& basis, std::size_t index);
  /// |label> on a single-particle basis.
  static QuantumState site(const Basis& basis, int label);
  /// |a>_A |b>_B on a pair basis.
  static QuantumState pair(const Basis& basis, int site_a, int site_b);

  double norm() const { return amplitudes.norm(); }
  /// Throws SpecError unless | ||psi|| - 1 | <= 1e-10.
  void check_normalized() const;
};

/// How a trajectory was produced. Serialized next to every exported table.
struct Provenance {
  std::string solver;
  double tol = 0.0;
  double initial_step_us = 0.0;
  double final_step_us = 0.0;
  /// Max population change between the last two refinements.
  double error_estimate = 0.0;
  std::size_t refinements = 0;
  /// Step exponentials evaluated in the accepted pass.
  std::size_t exponentials = 0;
  bool periodic_fast_path = false;
  std::vector<std::size_t> block_sizes;
  std::string isa;
};

/// States sampled on an output grid. `states[k]` is the state at `times_us[k]`.
struct StateTrajectory {
  Basis basis;
  std::vector<double> times_us;
  std::vector<CVector> states;
  Provenance provenance;

  std::size_t size() const { return times_us.size(); }
  QuantumState state(std::size_t k) const { return {basis, states.at(k)}; }
  /// |<k|psi(t)>|^2, one row per time and one column per basis state.
  Eigen::MatrixXd probabilities() const;
};

struct TimedepOptions {
  /// Target max-abs population difference between successive step halvings.
  double tol = 1e-8;
  /// First step to try; chosen from the period, modulation frequencies and
  /// norm of H when absent.
  std::optional<double> initial_step_us;
  /// Cap on step exponentials per refinement pass.
  std::size_t max_steps = 2'000'000;
  /// Reuse one-period propagators when H(t) is periodic.
  bool use_period = true;
  /// Split the generator into invariant blocks (exchange symmetry, disconnected
  /// components) before exponentiating.
  bool use_blocks = true;
};

/// psi(t) = sum_n exp(-i 2 pi E_n (t - t_0)) <n|psi0> |n>, with psi0 the state
/// at t_0 = times.front(). Times may be in any order, including t < t_0.
StateTrajectory evolve_static(const HamiltonianMatrix& h, const QuantumState& psi0, std::span<const double> times_us);

/// Midpoint-exponential propagation with step halving until successive passes
/// agree to `opts.tol` in every population at every output time. psi0 is the
/// state at times.front(); the grid must be strictly monotone, and a
/// decreasing grid evolves backward in time. Throws ConvergenceError when the
/// step budget runs out first.
StateTrajectory evolve_timedep(const HamiltonianMatrix& h, const QuantumState& psi0, std::span<const double> times_us,
                               const TimedepOptions& opts = {});

/// One pass of the midpoint stepper at a fixed step (no refinement).
StateTrajectory evolve_fixed_step(const HamiltonianMatrix& h, const QuantumState& psi0,
                                  std::span<const double> times_us, double step_us, const TimedepOptions& opts = {});

/// evolve_static or evolve_timedep depending on the generator.
StateTrajectory evolve(const HamiltonianMatrix& h, const QuantumState& psi0, std::span<const double> times_us,
                       const TimedepOptions& opts = {});

struct ConvergenceLevel {
  double step_us = 0.0;
  /// Max population difference against the next finer level (NaN on the last).
  double difference = 0.0;
  /// log2(difference_k / difference_{k+1}) where both are resolvable.
  std::optional<double> observed_order;
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;
  /// Order measured between the two finest resolvable levels.
  std::optional<double> observed_order;
  /// Every level agreed to roundoff: the generator is effectively static.
  bool static_limit = false;
};

/// Runs the fixed-step stepper on the ladder h, h/2, ..., h/2^(levels-1) up to
/// t_final and reports the differences between neighbours and the observed
/// order of convergence.
ConvergenceReport convergence_probe(const HamiltonianMatrix& h, const QuantumState& psi0, double t_final_us,
                                    std::size_t levels = 6, std::optional<double> initial_step_us = std::nullopt);

/// Time grid t_0, t_0 + dt, ..., containing `count` points.
std::vector<double> uniform_grid(double t_end_us, std::size_t count, double t_start_us = 0.0);

}  // namespace synlat
