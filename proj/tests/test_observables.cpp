#include <doctest.h>

#include <cmath>
#include <numbers>

#include "synlat/error.hpp"
#include "synlat/lattice.hpp"
#include "synlat/observables.hpp"
#include "synlat/propagate.hpp"

using namespace synlat;

namespace {

StateTrajectory pair_run(double v, double t_end = 3.0) {
  const auto h = build_pair_hamiltonian(LatticeSpec::chain(-4, 4, 0.45, 0.8), InteractionSpec::with_default_table(v));
  return evolve_static(h, QuantumState::pair(h.basis(), 0, 0), uniform_grid(t_end, 31));
}

}  // namespace

TEST_SUITE("observables") {
  TEST_CASE("site populations sum to one and the width stays on the lattice") {
    const auto h = build_single_hamiltonian(LatticeSpec::chain(-4, 4, 0.45));
    const auto traj = evolve_static(h, QuantumState::site(h.basis(), 0), uniform_grid(5.0, 51));
    const auto p = site_populations(traj);
    const auto lambda = wavepacket_width(traj);
    CHECK(lambda.front() == doctest::Approx(0.0));
    for (Eigen::Index k = 0; k < p.rows(); ++k) {
      CHECK(p.row(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(lambda[static_cast<std::size_t>(k)] >= 0.0);
      CHECK(lambda[static_cast<std::size_t>(k)] <= 4.0);
    }
    // reflection symmetry of the flat chain
    CHECK(std::abs(p(20, 0) - p(20, 8)) < 1e-12);
  }

  TEST_CASE("pair correlation marginals reproduce the single-atom populations") {
    const auto traj = pair_run(0.8);
    const auto a = pair_marginal(traj, Atom::A);
    const auto b = pair_marginal(traj, Atom::B);
    const auto avg = pair_site_populations(traj);
    for (std::size_t k = 0; k < traj.size(); k += 5) {
      const auto snap = pair_correlation(traj, traj.times_us[k]);
      CHECK(snap.on_grid);
      CHECK(snap.c.sum() == doctest::Approx(1.0).epsilon(1e-12));
      const auto kk = static_cast<Eigen::Index>(k);
      CHECK((snap.c.rowwise().sum().transpose() - a.row(kk)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((snap.c.colwise().sum() - b.row(kk)).cwiseAbs().maxCoeff() < 1e-12);
      // |0,0> is swap symmetric and so is H, hence C = C^T and A, B agree
      CHECK((snap.c - snap.c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((avg.row(kk) - a.row(kk)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("pair state population is the matching correlation entry") {
    const auto traj = pair_run(1.1);
    const auto p00 = pair_state_population(traj);
    const auto p_m1_1 = pair_state_population(traj, -1, 1);
    const auto snap = pair_correlation(traj, traj.times_us[10]);
    CHECK(p00[10] == doctest::Approx(snap.c(4, 4)));
    CHECK(p_m1_1[10] == doctest::Approx(snap.c(3, 5)));
    CHECK(p00.front() == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("off-grid correlation times use the nearest sample and say so") {
    const auto traj = pair_run(0.8);  // dt = 0.1
    const std::vector<double> want{1.0, 1.04, 99.0};
    const auto snaps = pair_correlations(traj, want);
    CHECK(snaps[0].on_grid);
    CHECK_FALSE(snaps[1].on_grid);
    CHECK(snaps[1].time_us == doctest::Approx(1.0));
    CHECK(snaps[2].time_us == doctest::Approx(3.0));
    CHECK(snaps[1].requested_us == 1.04);

    const auto h = build_single_hamiltonian(LatticeSpec::chain(-1, 1, 0.45));
    const auto single = evolve_static(h, QuantumState::site(h.basis(), 0), uniform_grid(1.0, 3));
    CHECK_THROWS_AS(pair_correlation(single, 0.5), SpecError);
  }

  TEST_CASE("diagonal and anti-diagonal weights") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 3);
    c(0, 0) = 0.1;
    c(1, 1) = 0.2;
    c(0, 2) = 0.3;
    c(2, 0) = 0.4;
    const std::vector<int> sites{-1, 0, 1};
    CHECK(diagonal_weight(c) == doctest::Approx(0.3));
    CHECK(anti_diagonal_weight(c, sites) == doctest::Approx(0.9));  // (-1,1), (0,0), (1,-1)
    CHECK(anti_diagonal_weight(Eigen::MatrixXd::Identity(2, 2), {0, 1}) == doctest::Approx(1.0));
  }

  TEST_CASE("refocusing time is 1/Delta and absent without a tilt") {
    CHECK_FALSE(refocusing_time(0.0).has_value());
    CHECK(*refocusing_time(0.3) == doctest::Approx(1.0 / 0.3));
    CHECK(*refocusing_time(-0.45) == doctest::Approx(1.0 / 0.45));
  }

  TEST_CASE("refocusing peak search finds the revival after the first drop") {
    std::vector<double> t, y;
    for (int k = 0; k <= 400; ++k) {
      t.push_back(k * 0.01);
      y.push_back(std::pow(std::cos(std::numbers::pi * t.back() / 2.5), 2) * std::exp(-0.1 * t.back()));
    }
    const auto peak = find_refocusing_peak(t, y);
    REQUIRE(peak);
    CHECK(peak->time_us == doctest::Approx(2.5).epsilon(0.01));
    CHECK_FALSE(find_refocusing_peak(t, std::vector<double>(t.size(), 0.9)).has_value());

    const Peak m = find_max(t, y, 1.0, 2.0);
    CHECK(m.time_us == doctest::Approx(2.0));
  }

  TEST_CASE("energy expectation of an eigenstate is its eigenvalue") {
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 0) = 1.5;
    h(1, 1) = -0.5;
    CVector psi = CVector::Zero(2);
    psi(1) = 1.0;
    CHECK(energy_expectation(h, psi) == doctest::Approx(-0.5));
  }

  TEST_CASE("observable table lookups") {
    ObservableTable t;
    t.times_us = {0.0, 1.0};
    t.add("x", {1.0, 2.0});
    CHECK(t.has("x"));
    CHECK_FALSE(t.has("y"));
    CHECK(t.column("x")[1] == 2.0);
    CHECK_THROWS(t.column("y"));
    CHECK_THROWS(t.add("z", {1.0}));
  }
}
