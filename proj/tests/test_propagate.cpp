#include <doctest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "synlat/error.hpp"
#include "synlat/lattice.hpp"
#include "synlat/observables.hpp"
#include "synlat/propagate.hpp"

using namespace synlat;

namespace {

double unitarity_defect(const StateTrajectory& traj) {
  double worst = 0;
  for (const auto& s : traj.states) worst = std::max(worst, std::abs(1.0 - s.squaredNorm()));
  return worst;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<double> reversed(std::vector<double> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_SUITE("propagate") {
  TEST_CASE("flat chain matches the Bessel walk") {
    const double rabi = 0.45;
    const LatticeSpec spec = LatticeSpec::chain(-30, 30, rabi);
    const auto h = build_single_hamiltonian(spec);
    const auto grid = uniform_grid(5.0, 51);
    const auto traj = evolve_static(h, QuantumState::site(h.basis(), 0), grid);
    const auto p = traj.probabilities();
    double worst = 0;
    for (std::size_t k = 0; k < grid.size(); ++k)
      for (int j = -10; j <= 10; ++j)
        worst = std::max(worst, std::abs(p(static_cast<Eigen::Index>(k), j + 30) - oracle::free_walk_population(j, rabi, grid[k])));
    CHECK(worst < 1e-10);
  }

  TEST_CASE("tilted chain matches the Wannier-Stark Bessel solution") {
    const double rabi = 0.45, delta = 0.5;
    const auto h = build_single_hamiltonian(LatticeSpec::chain(-20, 20, rabi, delta));
    const auto grid = uniform_grid(6.0, 61);
    const auto p = evolve_static(h, QuantumState::site(h.basis(), 0), grid).probabilities();
    double worst = 0;
    for (std::size_t k = 0; k < grid.size(); ++k)
      for (int j = -5; j <= 5; ++j)
        worst = std::max(worst, std::abs(p(static_cast<Eigen::Index>(k), j + 20) -
                                         oracle::tilted_walk_population(j, rabi, delta, grid[k])));
    CHECK(worst < 1e-10);
  }

  TEST_CASE("bichromatic drive agrees with an RK4 integration of a hand-built generator") {
    const double rabi = 0.9, delta = 5.0;
    const auto h = build_single_hamiltonian(LatticeSpec::bichromatic_chain(-1, 1, rabi, delta));
    auto h_ref = [&](double t) {
      oracle::CMatrix m = oracle::CMatrix::Zero(3, 3);
      const double c = rabi * std::cos(oracle::kTwoPi * delta * t);
      m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = c;
      return m;
    };
    const std::vector<double> grid{0.0, 0.37, 1.0, 2.0};
    // a second-order stepper reaches its roundoff floor near 1e-9, so ask for 1e-8
    TimedepOptions opts;
    opts.tol = 1e-8;
    const auto traj = evolve_timedep(h, QuantumState::site(h.basis(), 0), grid, opts);
    oracle::CVector psi = oracle::CVector::Zero(3);
    psi(1) = 1.0;
    double t0 = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      psi = oracle::rk4(h_ref, psi, t0, grid[k], static_cast<std::size_t>((grid[k] - t0) * 20000));
      t0 = grid[k];
      CHECK((traj.states[k].cwiseAbs2() - psi.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-7);
    }
  }

  TEST_CASE("interacting bichromatic pair and escher ring agree with RK4") {
    const auto pair = build_pair_hamiltonian(LatticeSpec::bichromatic_chain(0, 1, 1.92, 7.2),
                                             InteractionSpec::with_default_table(1.56));
    const auto ring = build_single_hamiltonian(LatticeSpec::ring(-3, 4, 0.9, {DriveType::Escher, 0.3}, 0.4));
    for (const auto* h : {&pair, &ring}) {
      const QuantumState psi0 = h->basis().kind == BasisKind::Pair ? QuantumState::pair(h->basis(), 0, 0)
                                                                   : QuantumState::site(h->basis(), 0);
      const std::vector<double> grid{0.0, 0.5, 1.5};
      TimedepOptions opts;
      opts.tol = 1e-8;
      const auto traj = evolve_timedep(*h, psi0, grid, opts);
      const auto ref = oracle::rk4([&](double t) { return h->at(t); }, psi0.amplitudes, 0.0, 1.5, 60000);
      CHECK((traj.states.back().cwiseAbs2() - ref.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-7);
    }
  }

  TEST_CASE("unitarity") {
    const auto stat = build_pair_hamiltonian(LatticeSpec::chain(-4, 4, 0.45, 0.8), InteractionSpec::with_default_table(0.8));
    const auto traj = evolve_static(stat, QuantumState::pair(stat.basis(), 0, 0), uniform_grid(10.0, 201));
    CHECK(unitarity_defect(traj) < 1e-10);

    const auto dyn = build_pair_hamiltonian(LatticeSpec::bichromatic_chain(-2, 2, 0.9, 5.0), InteractionSpec::with_default_table(0.6));
    TimedepOptions opts;
    opts.tol = 1e-8;
    const auto t2 = evolve_timedep(dyn, QuantumState::pair(dyn.basis(), 0, 0), uniform_grid(3.0, 31), opts);
    CHECK(unitarity_defect(t2) < 10 * opts.tol);
  }

  TEST_CASE("evolving back to the start recovers the initial state") {
    const auto stat = build_single_hamiltonian(LatticeSpec::ring(-3, 4, 0.9, {}, 0.3));
    const auto psi0 = QuantumState::site(stat.basis(), 0);
    const auto grid = uniform_grid(4.0, 9);
    const auto fwd = evolve_static(stat, psi0, grid);
    const auto back = evolve_static(stat, fwd.state(fwd.size() - 1), reversed(grid));
    CHECK(std::norm(back.states.back().dot(psi0.amplitudes)) > 1 - 1e-12);

    const auto dyn = build_single_hamiltonian(LatticeSpec::ring(-3, 4, 0.9, {DriveType::Escher, 0.45}));
    TimedepOptions opts;
    opts.tol = 1e-9;
    const auto f2 = evolve_timedep(dyn, psi0, grid, opts);
    // long products of step unitaries drift off the unit sphere at roundoff level
    QuantumState end = f2.state(f2.size() - 1);
    end.amplitudes.normalize();
    const auto b2 = evolve_timedep(dyn, end, reversed(grid), opts);
    CHECK(std::norm(b2.states.back().dot(psi0.amplitudes)) > 1 - 1e-8);
  }

  TEST_CASE("static evolution conserves energy") {
    const auto h = build_pair_hamiltonian(LatticeSpec::chain(-4, 4, 0.45, 0.8), InteractionSpec::with_default_table(1.1));
    const auto traj = evolve_static(h, QuantumState::pair(h.basis(), 0, 0), uniform_grid(8.0, 81));
    const double e0 = energy_expectation(h.static_part(), traj.states.front());
    for (const auto& s : traj.states) CHECK(std::abs(energy_expectation(h.static_part(), s) - e0) < 1e-10);
  }

  TEST_CASE("static output times may come in any order") {
    const auto h = build_single_hamiltonian(LatticeSpec::chain(-4, 4, 0.45, 0.3));
    const auto psi0 = QuantumState::site(h.basis(), 0);
    const auto ordered = evolve_static(h, psi0, std::vector<double>{0.0, 1.0, 2.5});
    const auto shuffled = evolve_static(h, psi0, std::vector<double>{0.0, 2.5, 1.0});
    CHECK((ordered.states[2] - shuffled.states[1]).norm() < 1e-13);
    CHECK((ordered.states[1] - shuffled.states[2]).norm() < 1e-13);
  }

  TEST_CASE("periodic fast path and block reduction do not change the answer") {
    const auto h = build_pair_hamiltonian(LatticeSpec::bichromatic_chain(-2, 2, 0.9, 5.0), InteractionSpec::with_default_table(0.6));
    const auto psi0 = QuantumState::pair(h.basis(), 0, 0);
    const auto grid = uniform_grid(2.0, 23);  // deliberately off the drive period
    TimedepOptions fast;
    fast.tol = 1e-7;
    TimedepOptions plain = fast;
    plain.use_period = false;
    plain.use_blocks = false;
    const auto a = evolve_timedep(h, psi0, grid, fast);
    const auto b = evolve_timedep(h, psi0, grid, plain);
    CHECK(a.provenance.periodic_fast_path);
    CHECK(a.provenance.block_sizes.size() > 1);
    CHECK_FALSE(b.provenance.periodic_fast_path);
    CHECK(max_abs(a.probabilities() - b.probabilities()) < 1e-6);
  }

  TEST_CASE("time-dependent solver rejects bad grids and exhausted budgets") {
    const auto h = build_single_hamiltonian(LatticeSpec::bichromatic_chain(-1, 1, 0.9, 5.0));
    const auto psi0 = QuantumState::site(h.basis(), 0);
    CHECK_THROWS_AS(evolve_timedep(h, psi0, std::vector<double>{0.0, 1.0, 0.5}), SpecError);
    TimedepOptions tight;
    tight.tol = 1e-12;
    tight.max_steps = 50;
    // off the drive period so the midpoint rule is not exact for this commuting generator
    CHECK_THROWS_AS(evolve_timedep(h, psi0, std::vector<double>{0.0, 0.37}, tight), ConvergenceError);

    QuantumState wrong = psi0;
    wrong.amplitudes *= 2.0;
    CHECK_THROWS_AS(evolve(h, wrong, std::vector<double>{0.0, 1.0}), SpecError);
    const auto other = build_single_hamiltonian(LatticeSpec::chain(-2, 2, 0.9));
    CHECK_THROWS_AS(evolve(h, QuantumState::site(other.basis(), 0), std::vector<double>{0.0, 1.0}), SpecError);
  }

  TEST_CASE("refinement meets the requested tolerance") {
    const auto h = build_single_hamiltonian(LatticeSpec::bichromatic_chain(-4, 4, 0.9, 5.0));
    const auto psi0 = QuantumState::site(h.basis(), 0);
    const auto grid = uniform_grid(3.0, 16);
    TimedepOptions coarse;
    coarse.tol = 1e-5;
    TimedepOptions fine;
    fine.tol = 1e-11;
    const auto a = evolve_timedep(h, psi0, grid, coarse);
    const auto b = evolve_timedep(h, psi0, grid, fine);
    CHECK(a.provenance.error_estimate < coarse.tol);
    CHECK(a.provenance.refinements >= 1);
    // the estimate is a difference of successive passes; allow a small factor
    CHECK(max_abs(a.probabilities() - b.probabilities()) < 10 * coarse.tol);
  }

  TEST_CASE("midpoint stepper converges at second order") {
    // the interaction keeps H(t) from commuting with itself at other times;
    // a single particle under a global drive would be integrated super-convergently
    const auto h = build_pair_hamiltonian(LatticeSpec::bichromatic_chain(-2, 2, 0.9, 5.0),
                                          InteractionSpec::with_default_table(0.6));
    const auto report = convergence_probe(h, QuantumState::pair(h.basis(), 0, 0), 2.0, 6, 0.013);
    REQUIRE(report.observed_order);
    CHECK(*report.observed_order == doctest::Approx(2.0).epsilon(0.15));
    CHECK_FALSE(report.static_limit);

    const auto stat = build_single_hamiltonian(LatticeSpec::chain(-2, 2, 0.9, 0.3));
    CHECK(convergence_probe(stat, QuantumState::site(stat.basis(), 0), 2.0, 4).static_limit);
  }

  TEST_CASE("dispatching evolve picks the solver from the generator") {
    const auto stat = build_single_hamiltonian(LatticeSpec::chain(-2, 2, 0.9, 0.3));
    const auto dyn = build_single_hamiltonian(LatticeSpec::bichromatic_chain(-2, 2, 0.9, 5.0));
    const std::vector<double> grid{0.0, 1.0};
    CHECK(evolve(stat, QuantumState::site(stat.basis(), 0), grid).provenance.solver == "eigendecomposition");
    CHECK(evolve(dyn, QuantumState::site(dyn.basis(), 0), grid).provenance.solver == "midpoint-exponential");
  }

  TEST_CASE("uniform grid") {
    const auto g = uniform_grid(2.0, 5, 1.0);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 2.0);
    CHECK(uniform_grid(2.0, 1).size() == 1);
  }
}
