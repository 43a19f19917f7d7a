#include "synlat/propagate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "synlat/error.hpp"
#include "synlat/kernels.hpp"

namespace synlat {
namespace {

using Index = Eigen::Index;

std::span<const cplx> view(const CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<cplx> view(CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const cplx> view(const CMatrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

std::string isa_tag() { return std::string(kernels::isa_name(kernels::active_isa())); }

void check_inputs(const HamiltonianMatrix& h, const QuantumState& psi0, std::span<const double> times) {
  if (!(psi0.basis == h.basis())) throw SpecError("initial state basis does not match the Hamiltonian");
  if (static_cast<std::size_t>(psi0.amplitudes.size()) != h.dim()) throw SpecError("initial state has wrong size");
  psi0.check_normalized();
  if (times.empty()) throw SpecError("empty time grid");
  for (double t : times) {
    if (!std::isfinite(t)) throw SpecError("non-finite time in grid");
  }
}

void check_monotone(std::span<const double> times) {
  if (times.size() < 2) return;
  const bool up = times[1] > times[0];
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (up ? !(times[k] > times[k - 1]) : !(times[k] < times[k - 1])) {
      throw SpecError("time grid must be strictly monotone");
    }
  }
}

/// Eigendecomposition H = V diag(E) V^H and its use as exp(-i 2 pi H dt).
struct Eig {
  CMatrix v;
  Eigen::VectorXd e;

  explicit Eig(const CMatrix& h) {
    // Real symmetric generators (no phases, real modulation) take the
    // cheaper real solver.
    if (h.imag().isZero(0.0)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
      if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver failed");
      v = solver.eigenvectors().cast<cplx>();
      e = solver.eigenvalues();
      return;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver failed");
    v = solver.eigenvectors();
    e = solver.eigenvalues();
  }

  CVector phases(double dt) const {
    CVector p(e.size());
    for (Index k = 0; k < e.size(); ++k) p[k] = std::polar(1.0, -kTwoPi * e[k] * dt);
    return p;
  }

  /// psi <- exp(-i 2 pi H dt) psi, through the kernels.
  void apply(double dt, CVector& psi, CVector& scratch) const {
    const auto n = static_cast<std::size_t>(e.size());
    scratch.resize(e.size());
    kernels::matvec_adjoint(view(v), n, n, view(psi), view(scratch));
    const CVector p = phases(dt);
    kernels::hadamard(view(scratch), view(p), view(scratch));
    kernels::matvec(view(v), n, n, view(scratch), view(psi));
  }

  CMatrix unitary(double dt) const { return v * phases(dt).asDiagonal() * v.adjoint(); }
};

/// Orthogonal change of basis that exposes the invariant subspaces of a
/// generator, followed by the list of blocks in the new basis.
///
/// Pair generators built from two identical single-particle copies commute
/// with the swap of A and B, so the symmetric and antisymmetric combinations
/// never mix. Each column of Q has at most two nonzero (real) entries.
class Reduction {
 public:
  Reduction(const HamiltonianMatrix& h, bool enable) {
    const auto dim = static_cast<Index>(h.dim());
    if (enable && h.basis().kind == BasisKind::Pair && swap_symmetric(h)) {
      const auto n = static_cast<Index>(h.basis().num_sites());
      const double r = std::sqrt(0.5);
      for (Index a = 0; a < n; ++a) {
        for (Index b = a; b < n; ++b) {
          if (a == b) {
            columns_.push_back({1, {{{a * n + a, 1.0}, {0, 0.0}}}});
          } else {
            columns_.push_back({2, {{{a * n + b, r}, {b * n + a, r}}}});
          }
        }
      }
      for (Index a = 0; a < n; ++a) {
        for (Index b = a + 1; b < n; ++b) columns_.push_back({2, {{{a * n + b, r}, {b * n + a, -r}}}});
      }
    } else {
      for (Index k = 0; k < dim; ++k) columns_.push_back({1, {{{k, 1.0}, {0, 0.0}}}});
    }

    static_ = project(h.static_part());
    for (const auto& term : h.terms()) {
      CMatrix m = project(term.matrix);
      CMatrix madj = m.adjoint();
      terms_.push_back({std::move(m), std::move(madj)});
    }
    find_blocks(enable);
  }

  const std::vector<std::vector<Index>>& blocks() const { return blocks_; }
  Index dim() const { return static_cast<Index>(columns_.size()); }

  CVector to_adapted(const CVector& psi) const {
    CVector phi(dim());
    for (Index c = 0; c < dim(); ++c) {
      const auto& col = columns_[c];
      cplx s{};
      for (int k = 0; k < col.count; ++k) s += col.entries[k].second * psi[col.entries[k].first];
      phi[c] = s;
    }
    return phi;
  }

  CVector from_adapted(const CVector& phi) const {
    CVector psi = CVector::Zero(dim());
    for (Index c = 0; c < dim(); ++c) {
      const auto& col = columns_[c];
      for (int k = 0; k < col.count; ++k) psi[col.entries[k].first] += col.entries[k].second * phi[c];
    }
    return psi;
  }

  /// Block `b` of the adapted generator at time t.
  CMatrix block_at(std::size_t b, const HamiltonianMatrix& h, double t) const {
    const auto& idx = blocks_[b];
    const auto n = static_cast<Index>(idx.size());
    CMatrix out(n, n);
    std::vector<cplx> f;
    for (const auto& term : h.terms()) f.push_back(term.modulation(t));
    for (Index c = 0; c < n; ++c) {
      for (Index r = 0; r < n; ++r) {
        cplx v = static_(idx[r], idx[c]);
        for (std::size_t k = 0; k < terms_.size(); ++k) {
          v += f[k] * terms_[k].first(idx[r], idx[c]) + std::conj(f[k]) * terms_[k].second(idx[r], idx[c]);
        }
        out(r, c) = v;
      }
    }
    return out;
  }

 private:
  struct Column {
    int count;
    std::array<std::pair<Index, double>, 2> entries;
  };

  static bool swap_symmetric(const HamiltonianMatrix& h) {
    const auto n = static_cast<Index>(h.basis().num_sites());
    auto symmetric = [n](const CMatrix& m) {
      const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
      for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
          for (Index c = 0; c < n; ++c)
            for (Index d = 0; d < n; ++d) {
              if (std::abs(m(a * n + b, c * n + d) - m(b * n + a, d * n + c)) > 1e-14 * scale) return false;
            }
      return true;
    };
    if (!symmetric(h.static_part())) return false;
    return std::all_of(h.terms().begin(), h.terms().end(), [&](const TimeDepTerm& t) { return symmetric(t.matrix); });
  }

  CMatrix project(const CMatrix& m) const {
    CMatrix out(dim(), dim());
    for (Index c = 0; c < dim(); ++c) {
      for (Index r = 0; r < dim(); ++r) {
        cplx s{};
        const auto& cr = columns_[r];
        const auto& cc = columns_[c];
        for (int i = 0; i < cr.count; ++i)
          for (int j = 0; j < cc.count; ++j)
            s += cr.entries[i].second * cc.entries[j].second * m(cr.entries[i].first, cc.entries[j].first);
        out(r, c) = s;
      }
    }
    return out;
  }

  void find_blocks(bool enable) {
    const Index n = dim();
    if (!enable) {
      blocks_.emplace_back(n);
      std::iota(blocks_.back().begin(), blocks_.back().end(), Index{0});
      return;
    }
    // Connected components of the sparsity graph of every generator piece.
    std::vector<Index> parent(n);
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto join = [&](const CMatrix& m) {
      for (Index c = 0; c < n; ++c)
        for (Index r = 0; r < n; ++r)
          if (m(r, c) != cplx{}) parent[find(r)] = find(c);
    };
    join(static_);
    for (const auto& t : terms_) join(t.first);
    std::map<Index, std::vector<Index>> groups;
    for (Index k = 0; k < n; ++k) groups[find(k)].push_back(k);
    for (auto& [root, members] : groups) blocks_.push_back(std::move(members));
    std::stable_sort(blocks_.begin(), blocks_.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }

  std::vector<Column> columns_;
  CMatrix static_;
  std::vector<std::pair<CMatrix, CMatrix>> terms_;
  std::vector<std::vector<Index>> blocks_;
};

CVector gather(const CVector& phi, const std::vector<Index>& idx) {
  CVector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = phi[idx[k]];
  return out;
}

void scatter(const CVector& part, const std::vector<Index>& idx, CVector& phi) {
  for (std::size_t k = 0; k < idx.size(); ++k) phi[idx[k]] = part[static_cast<Index>(k)];
}

/// Position of an output time on the step lattice t_0 + n h (+ remainder).
struct GridPoint {
  std::size_t steps;
  double remainder;  // |remainder| < |h|, same sign as h
};

GridPoint locate(double offset, double h) {
  const double x = offset / h;
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
    return {static_cast<std::size_t>(std::max(0.0, nearest)), 0.0};
  }
  const double n = std::floor(x);
  return {static_cast<std::size_t>(n), offset - n * h};
}

struct Pass {
  std::vector<CVector> states;
  std::size_t exponentials = 0;
  bool periodic = false;
};

class Stepper {
 public:
  Stepper(const HamiltonianMatrix& h, const TimedepOptions& opts) : h_(h), opts_(opts), red_(h, opts.use_blocks) {}

  std::vector<std::size_t> block_sizes() const {
    std::vector<std::size_t> s;
    for (const auto& b : red_.blocks()) s.push_back(b.size());
    return s;
  }

  /// `step` carries the direction of the grid.
  Pass run(const QuantumState& psi0, std::span<const double> times, double step) const {
    const double t0 = times.front();
    std::vector<GridPoint> points;
    std::size_t partials = 0;
    for (double t : times) {
      points.push_back(locate(t - t0, step));
      partials += points.back().remainder != 0.0 ? 1 : 0;
    }
    const auto period = h_.period_us();
    if (opts_.use_period && period) {
      const double m_real = *period / std::abs(step);
      const double m = std::round(m_real);
      if (m >= 1.0 && std::abs(m_real - m) <= 1e-9 * m) {
        const auto mm = static_cast<std::size_t>(m);
        if (mm + partials > opts_.max_steps) throw_budget(step, mm + partials);
        return run_periodic(psi0, times, points, step, mm);
      }
    }
    const std::size_t total = points.back().steps + partials;
    if (total > opts_.max_steps) throw_budget(step, total);
    return run_march(psi0, times, points, step);
  }

 private:
  void throw_budget(double step, std::size_t need) const {
    char buf[200];
    std::snprintf(buf, sizeof buf, "step %.3e us needs %zu step exponentials, budget is %zu", std::abs(step), need,
                  opts_.max_steps);
    throw ConvergenceError(buf);
  }

  void apply_step(double t_start, double dt, CVector& phi, CVector& scratch, std::size_t& count) const {
    const double mid = t_start + 0.5 * dt;
    for (std::size_t b = 0; b < red_.blocks().size(); ++b) {
      const auto& idx = red_.blocks()[b];
      CVector part = gather(phi, idx);
      Eig(red_.block_at(b, h_, mid)).apply(dt, part, scratch);
      scatter(part, idx, phi);
    }
    ++count;
  }

  Pass run_march(const QuantumState& psi0, std::span<const double> times, const std::vector<GridPoint>& points,
                 double step) const {
    Pass pass;
    const double t0 = times.front();
    CVector phi = red_.to_adapted(psi0.amplitudes);
    CVector scratch;
    std::size_t at = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      while (at < points[i].steps) {
        apply_step(t0 + static_cast<double>(at) * step, step, phi, scratch, pass.exponentials);
        ++at;
      }
      if (points[i].remainder != 0.0) {
        CVector tmp = phi;
        apply_step(t0 + static_cast<double>(at) * step, points[i].remainder, tmp, scratch, pass.exponentials);
        pass.states.push_back(red_.from_adapted(tmp));
      } else {
        pass.states.push_back(red_.from_adapted(phi));
      }
    }
    return pass;
  }

  /// H(t) repeats every m steps, so the m step unitaries and the one-period
  /// propagator are built once and whole periods are skipped with U_T.
  Pass run_periodic(const QuantumState& psi0, std::span<const double> times, const std::vector<GridPoint>& points,
                    double step, std::size_t m) const {
    Pass pass;
    pass.periodic = true;
    const double t0 = times.front();
    std::set<std::size_t> offsets;
    for (const auto& p : points) offsets.insert(p.steps % m);

    const std::size_t nblocks = red_.blocks().size();
    // prefix[b][r] = U_{r-1} ... U_0 restricted to block b, for the offsets r
    // the output grid touches; period[b] = full product.
    std::vector<std::map<std::size_t, CMatrix>> prefix(nblocks);
    std::vector<CMatrix> period(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
      const auto n = static_cast<Index>(red_.blocks()[b].size());
      CMatrix p = CMatrix::Identity(n, n);
      for (std::size_t k = 0; k < m; ++k) {
        if (offsets.count(k)) prefix[b].emplace(k, p);
        const double mid = t0 + (static_cast<double>(k) + 0.5) * step;
        p = Eig(red_.block_at(b, h_, mid)).unitary(step) * p;
      }
      period[b] = std::move(p);
    }
    pass.exponentials = m;

    CVector phi = red_.to_adapted(psi0.amplitudes);  // state after q periods
    std::size_t q = 0;
    CVector scratch;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const std::size_t qi = points[i].steps / m;
      const std::size_t r = points[i].steps % m;
      for (; q < qi; ++q) {
        for (std::size_t b = 0; b < nblocks; ++b) {
          const auto& idx = red_.blocks()[b];
          const CVector part = gather(phi, idx);
          CVector out(part.size());
          const auto n = static_cast<std::size_t>(part.size());
          kernels::matvec(view(period[b]), n, n, view(part), view(out));
          scatter(out, idx, phi);
        }
      }
      CVector out = phi;
      for (std::size_t b = 0; b < nblocks; ++b) {
        const auto& idx = red_.blocks()[b];
        const CVector part = gather(phi, idx);
        CVector y(part.size());
        const auto n = static_cast<std::size_t>(part.size());
        kernels::matvec(view(prefix[b].at(r)), n, n, view(part), view(y));
        scatter(y, idx, out);
      }
      if (points[i].remainder != 0.0) {
        apply_step(t0 + static_cast<double>(points[i].steps) * step, points[i].remainder, out, scratch,
                   pass.exponentials);
      }
      pass.states.push_back(red_.from_adapted(out));
    }
    return pass;
  }

  const HamiltonianMatrix& h_;
  TimedepOptions opts_;
  Reduction red_;
};

double auto_step(const HamiltonianMatrix& h) {
  double limit = std::numeric_limits<double>::infinity();
  if (const double f = h.max_modulation_frequency(); f > 0.0) limit = std::min(limit, 1.0 / (16.0 * f));
  if (const double nb = h.norm_bound(); nb > 0.0) limit = std::min(limit, 1.0 / (16.0 * nb));
  if (!std::isfinite(limit)) limit = 1.0;
  if (const auto period = h.period_us()) {
    // a power-of-two number of steps per period, at least 16
    std::size_t m = 16;
    while (*period / static_cast<double>(m) > limit) m *= 2;
    return *period / static_cast<double>(m);
  }
  return limit;
}

double max_population_difference(const std::vector<CVector>& a, const std::vector<CVector>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, (a[k].cwiseAbs2() - b[k].cwiseAbs2()).cwiseAbs().maxCoeff());
  }
  return d;
}

StateTrajectory make_trajectory(const HamiltonianMatrix& h, std::span<const double> times, std::vector<CVector> states,
                                Provenance prov) {
  StateTrajectory traj;
  traj.basis = h.basis();
  traj.times_us.assign(times.begin(), times.end());
  traj.states = std::move(states);
  traj.provenance = std::move(prov);
  return traj;
}

}  // namespace

// ---------------------------------------------------------------------------

QuantumState QuantumState::basis_state(const Basis& basis, std::size_t index) {
  if (index >= basis.dim()) throw SpecError("basis index out of range");
  QuantumState s{basis, CVector::Zero(static_cast<Index>(basis.dim()))};
  s.amplitudes[static_cast<Index>(index)] = 1.0;
  return s;
}

QuantumState QuantumState::site(const Basis& basis, int label) {
  if (basis.kind != BasisKind::Single) throw SpecError("QuantumState::site needs a single-particle basis");
  return basis_state(basis, basis.site_index(label));
}

QuantumState QuantumState::pair(const Basis& basis, int site_a, int site_b) {
  return basis_state(basis, basis.pair_index(site_a, site_b));
}

void QuantumState::check_normalized() const {
  if (!amplitudes.allFinite() || std::abs(norm() - 1.0) > 1e-10) throw SpecError("state is not normalized");
}

Eigen::MatrixXd StateTrajectory::probabilities() const {
  const auto dim = static_cast<Index>(basis.dim());
  Eigen::MatrixXd p(static_cast<Index>(states.size()), dim);
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (std::size_t k = 0; k < states.size(); ++k) {
    kernels::abs2(view(states[k]), row);
    for (Index j = 0; j < dim; ++j) p(static_cast<Index>(k), j) = row[static_cast<std::size_t>(j)];
  }
  return p;
}

std::vector<double> uniform_grid(double t_end_us, std::size_t count, double t_start_us) {
  if (count < 2) return {t_start_us};
  std::vector<double> t(count);
  const double dt = (t_end_us - t_start_us) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) t[k] = t_start_us + dt * static_cast<double>(k);
  t.back() = t_end_us;
  return t;
}

StateTrajectory evolve_static(const HamiltonianMatrix& h, const QuantumState& psi0, std::span<const double> times) {
  check_inputs(h, psi0, times);
  if (h.is_time_dependent()) throw SpecError("evolve_static called with a time-dependent generator");
  if (hermiticity_defect(h.static_part()) > 1e-12) throw SpecError("Hamiltonian is not Hermitian");

  const Eig eig(h.static_part());
  const auto n = static_cast<std::size_t>(h.dim());
  CVector c(static_cast<Index>(n));
  kernels::matvec_adjoint(view(eig.v), n, n, view(psi0.amplitudes), view(c));

  std::vector<CVector> states;
  states.reserve(times.size());
  CVector tmp(static_cast<Index>(n));
  for (double t : times) {
    const CVector p = eig.phases(t - times.front());
    kernels::hadamard(view(c), view(p), view(tmp));
    CVector psi(static_cast<Index>(n));
    kernels::matvec(view(eig.v), n, n, view(tmp), view(psi));
    states.push_back(std::move(psi));
  }
  Provenance prov;
  prov.solver = "eigendecomposition";
  prov.block_sizes = {n};
  prov.isa = isa_tag();
  return make_trajectory(h, times, std::move(states), std::move(prov));
}

StateTrajectory evolve_fixed_step(const HamiltonianMatrix& h, const QuantumState& psi0,
                                  std::span<const double> times, double step_us, const TimedepOptions& opts) {
  check_inputs(h, psi0, times);
  check_monotone(times);
  if (!(step_us > 0.0) || !std::isfinite(step_us)) throw SpecError("step must be positive");
  const double dir = times.size() > 1 && times[1] < times[0] ? -1.0 : 1.0;
  const Stepper stepper(h, opts);
  Pass pass = stepper.run(psi0, times, dir * step_us);
  Provenance prov;
  prov.solver = "midpoint-exponential";
  prov.initial_step_us = prov.final_step_us = step_us;
  prov.exponentials = pass.exponentials;
  prov.periodic_fast_path = pass.periodic;
  prov.block_sizes = stepper.block_sizes();
  prov.isa = isa_tag();
  return make_trajectory(h, times, std::move(pass.states), std::move(prov));
}

StateTrajectory evolve_timedep(const HamiltonianMatrix& h, const QuantumState& psi0, std::span<const double> times,
                               const TimedepOptions& opts) {
  check_inputs(h, psi0, times);
  check_monotone(times);
  if (!(opts.tol > 0.0)) throw SpecError("tolerance must be positive");
  double step = opts.initial_step_us.value_or(auto_step(h));
  if (!(step > 0.0) || !std::isfinite(step)) throw SpecError("initial step must be positive");
  const double dir = times.size() > 1 && times[1] < times[0] ? -1.0 : 1.0;

  const Stepper stepper(h, opts);
  Provenance prov;
  prov.solver = "midpoint-exponential";
  prov.tol = opts.tol;
  prov.initial_step_us = step;
  prov.block_sizes = stepper.block_sizes();
  prov.isa = isa_tag();

  Pass coarse = stepper.run(psi0, times, dir * step);
  double diff = std::numeric_limits<double>::infinity();
  for (;;) {
    const double finer = 0.5 * step;
    Pass fine;
    try {
      fine = stepper.run(psi0, times, dir * finer);
    } catch (const ConvergenceError& e) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "; last refinement changed populations by %.3e (tol %.3e) at step %.3e us", diff,
                    opts.tol, step);
      throw ConvergenceError(std::string(e.what()) + buf);
    }
    diff = max_population_difference(coarse.states, fine.states);
    ++prov.refinements;
    step = finer;
    coarse = std::move(fine);
    if (diff < opts.tol) break;
  }
  prov.final_step_us = step;
  prov.error_estimate = diff;
  prov.exponentials = coarse.exponentials;
  prov.periodic_fast_path = coarse.periodic;
  return make_trajectory(h, times, std::move(coarse.states), std::move(prov));
}

StateTrajectory evolve(const HamiltonianMatrix& h, const QuantumState& psi0, std::span<const double> times,
                       const TimedepOptions& opts) {
  return h.is_time_dependent() ? evolve_timedep(h, psi0, times, opts) : evolve_static(h, psi0, times);
}

ConvergenceReport convergence_probe(const HamiltonianMatrix& h, const QuantumState& psi0, double t_final_us,
                                    std::size_t levels, std::optional<double> initial_step_us) {
  if (levels < 3) throw SpecError("convergence probe needs at least three levels");
  if (!(t_final_us > 0.0)) throw SpecError("probe time must be positive");
  const double h0 = initial_step_us.value_or(auto_step(h));
  const std::array<double, 2> grid{0.0, t_final_us};
  std::vector<std::vector<CVector>> runs;
  ConvergenceReport report;
  for (std::size_t k = 0; k < levels; ++k) {
    const double step = h0 / static_cast<double>(std::size_t{1} << k);
    runs.push_back(evolve_fixed_step(h, psi0, grid, step).states);
    report.levels.push_back({step, std::numeric_limits<double>::quiet_NaN(), std::nullopt});
  }
  constexpr double kFloor = 1e-13;
  bool all_tiny = true;
  for (std::size_t k = 0; k + 1 < levels; ++k) {
    report.levels[k].difference = max_population_difference(runs[k], runs[k + 1]);
    all_tiny = all_tiny && report.levels[k].difference < kFloor;
  }
  report.static_limit = all_tiny;
  for (std::size_t k = 0; k + 2 < levels; ++k) {
    const double a = report.levels[k].difference;
    const double b = report.levels[k + 1].difference;
    if (a > kFloor && b > kFloor) {
      report.levels[k].observed_order = std::log2(a / b);
      report.observed_order = report.levels[k].observed_order;
    }
  }
  return report;
}

}  // namespace synlat
