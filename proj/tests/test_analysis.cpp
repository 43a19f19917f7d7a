#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles/oracles.hpp"
#include "synlat/analysis.hpp"
#include "synlat/error.hpp"
#include "synlat/observables.hpp"

using namespace synlat;

namespace {

constexpr double kPi = std::numbers::pi;

/// Far-site population at t = 2/rabi of the flat 8-site ring with `flux`.
double far_site_response(double flux) {
  const LatticeSpec ring = LatticeSpec::ring(-3, 4, 0.9, {}, flux);
  const auto h = build_single_hamiltonian(ring);
  const std::vector<double> grid{0.0, 2.0 / 0.9};
  const auto traj = evolve_static(h, QuantumState::site(h.basis(), 0), grid);
  return std::norm(traj.states.back()[static_cast<Eigen::Index>(h.basis().site_index(4))]);
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("gap formulas: limits and the worked example") {
    CHECK(gap_approx(0.8, 0.3, 0.0) == doctest::Approx(0.5));
    CHECK(gap_approx(0.8, 0.8, 0.45) == doctest::Approx(0.45));
    CHECK(gap_exact(0.8, 0.4, 0.16) == doctest::Approx(oracle::three_site_gap(0.8, 0.4, 0.16)).epsilon(1e-9));
    CHECK(gap_exact(0.8, 0.3, 0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(gap_exact(NAN, 0.3, 0.1), SpecError);
  }

  TEST_CASE("exact gap equals the eigensolver gap across a 20 x 20 grid") {
    const double delta = 0.8;
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      for (int k = 0; k < 20; ++k) {
        const double v = 2.0 * delta * i / 19.0;
        const double om = 0.02 + (delta - 0.02) * k / 19.0;
        worst = std::max(worst, std::abs(gap_exact(delta, v, om) - oracle::three_site_gap(delta, v, om)));
      }
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("breakdown window") {
    const auto [lo, hi] = breakdown_bounds(0.8, 0.45);
    CHECK(lo == doctest::Approx(0.35));
    CHECK(hi == doctest::Approx(1.25));
    CHECK(hi - lo == doctest::Approx(0.9));
    const auto [a, b] = breakdown_bounds(0.8, 0.0);
    CHECK(a == b);
    CHECK(inside_breakdown(0.8, 0.8, 0.45));
    CHECK_FALSE(inside_breakdown(0.8, 1.3, 0.45));
    const auto g = predict_gap(0.8, 0.5, 0.2);
    CHECK(g.v_lo_mhz == doctest::Approx(0.6));
    CHECK(g.approx_mhz == doctest::Approx(std::hypot(0.3, 0.2)));
  }

  TEST_CASE("pair hopping rate and its pole") {
    CHECK(pair_hopping_rate(1.0, 1.92, 7.2) == doctest::Approx(2 * 1.0 * 1.92 * 1.92 / (7.2 * 7.2 - 1.0)));
    CHECK(pair_hopping_rate(-1.0, 1.92, 7.2) == pair_hopping_rate(1.0, 1.92, 7.2));
    CHECK(pair_hopping_rate(0.0, 1.92, 7.2) == 0.0);
    CHECK_THROWS_AS(pair_hopping_rate(7.2, 1.92, 7.2), SpecError);
  }

  TEST_CASE("phase difference folds into (-pi, pi]") {
    CHECK(phase_difference(0.1, 2 * kPi - 0.1) == doctest::Approx(0.2));
    CHECK(phase_difference(kPi, 0.0) == doctest::Approx(kPi));
    CHECK(phase_difference(-kPi, 0.0) == doctest::Approx(kPi));
    CHECK(phase_difference(3.0, 1.0) == doctest::Approx(2.0));
  }

  TEST_CASE("flux calibration recovers an injected bias") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    for (int k = 0; k < 3; ++k) {
      const double bias = phase(rng);
      const auto cal = calibrate_flux(LatticeSpec::ring(-3, 4, 0.9, {}, bias), 0.9);
      CHECK(std::abs(phase_difference(cal.inferred_bias_rad, bias)) < 0.02 * kPi);
      CHECK(cal.probe_site == 4);
      CHECK(cal.settings_rad.size() == 32);
      CHECK(cal.peak_height > 0.5);
    }
    CHECK_THROWS_AS(calibrate_flux(LatticeSpec::chain(-3, 4, 0.9), 0.9), SpecError);
    CHECK_THROWS_AS(calibrate_flux(LatticeSpec::ring(-3, 4, 0.9, {DriveType::Escher, 0.3}), 0.9), SpecError);
  }

  TEST_CASE("refocusing falls off monotonically across the main lobe") {
    double previous = far_site_response(0.0);
    for (int k = 1; k <= 16; ++k) {
      const double now = far_site_response(k * (kPi / 2) / 16);
      CHECK(now < previous);
      previous = now;
    }
  }

  // The response has a weak secondary lobe near 3 pi / 4, so strict
  // monotonicity over the whole half-turn does not hold at this probe time.
  TEST_CASE("refocusing falls off monotonically from zero to pi" * doctest::may_fail()) {
    double previous = far_site_response(0.0);
    bool monotone = true;
    for (int k = 1; k <= 16; ++k) {
      const double now = far_site_response(k * kPi / 16);
      monotone = monotone && now <= previous;
      previous = now;
    }
    CHECK(monotone);
  }

  TEST_CASE("bloch pipeline recovers the tilt") {
    const auto run = bloch_oscillation_run(0.8, 0.45);
    CHECK(run.fit.value("omega") == doctest::Approx(0.8).epsilon(0.02));
    CHECK(run.lambda.size() == 401);
  }

  TEST_CASE("scan records per-point failures instead of throwing") {
    ScanOptions opts;
    opts.c3_table_path = "/nonexistent/table.csv";
    const std::vector<double> v{0.2, 1.6};
    const auto rows = frequency_vs_interaction_scan(0.8, 0.45, v, opts);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].error.empty());
    CHECK_FALSE(rows[0].converged);

    const auto good = frequency_vs_interaction_scan(0.8, 0.45, v, {});
    CHECK(good[1].error.empty());
    CHECK(good[1].omega_mhz == doctest::Approx(gap_approx(0.8, 1.6, 0.45)).epsilon(0.1));
  }

  TEST_CASE("stroboscopic grid and first local minimum") {
    const auto g = stroboscopic_grid(5.0, 1.0);
    REQUIRE(g.size() == 6);
    CHECK(g[5] == doctest::Approx(1.0));
    CHECK_THROWS_AS(stroboscopic_grid(0.0, 1.0), SpecError);
    const std::vector<double> y{1.0, 0.8, 0.5, 0.6, 0.2, 0.9};
    CHECK(first_local_minimum(y) == 2);
    const std::vector<double> down{3.0, 2.0, 1.0};
    CHECK(first_local_minimum(down) == 2);
  }

  // Second-order pair hopping should hold where both V and Omega are small
  // next to Delta. Agreement degrades towards the pole at V = Delta; that
  // region is measured by the acceptance run, not asserted here.
  TEST_CASE("fitted pair hopping rate matches the perturbative rate in its regime") {
    const double delta = 7.2, rabi = 1.92;  // rabi = 0.27 delta
    for (double v : {0.5, 1.0, 1.5, 2.0}) {
      const auto run = pair_hopping_run(v, rabi, delta);
      REQUIRE(run.fit.converged);
      const double rel = std::abs(run.fit.value("omega") - run.omega_eff_mhz) / run.omega_eff_mhz;
      INFO("V = ", v, " relative deviation ", rel);
      CHECK(rel < 0.10);
    }
  }
}
