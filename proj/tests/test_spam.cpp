#include <doctest.h>

#include <algorithm>
#include <random>

#include "synlat/error.hpp"
#include "synlat/spam.hpp"

using namespace synlat;

TEST_SUITE("spam") {
  TEST_CASE("endpoints and midpoint") {
    const SpamModel m = SpamModel::single();
    CHECK(renormalize(m, 0.32).value == 0.0);
    CHECK(renormalize(m, 0.93).value == 1.0);
    CHECK(renormalize(m, 0.625).value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(forward(m, 0.0) == 0.32);
    CHECK(forward(m, 1.0) == doctest::Approx(0.93).epsilon(1e-15));
    CHECK(SpamModel::pair_state().upper == 0.86);
  }

  TEST_CASE("forward and renormalize are inverse to 1e-12") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    for (const SpamModel& m : {SpamModel::single(), SpamModel::pair_state(), SpamModel{0.97, 0.05}}) {
      for (int k = 0; k < 100; ++k) {
        const double x = u(rng);
        CHECK(std::abs(forward(m, renormalize(m, x).value) - x) < 1e-12);
        CHECK(std::abs(renormalize(m, forward(m, x)).value - x) < 1e-12);
      }
    }
  }

  TEST_CASE("out-of-range values are flagged, not clamped") {
    const SpamModel m = SpamModel::single();
    const auto low = renormalize(m, 0.2);
    CHECK(low.out_of_range);
    CHECK(low.value < 0.0);
    CHECK_FALSE(renormalize(m, 0.5).out_of_range);

    const std::vector<double> bare{0.2, 0.5, 0.95};
    std::vector<bool> flags;
    const auto ideal = renormalize(m, bare, &flags);
    REQUIRE(flags.size() == 3);
    CHECK(flags[0]);
    CHECK_FALSE(flags[1]);
    CHECK(flags[2]);
    CHECK(ideal[2] > 1.0);
  }

  TEST_CASE("renormalization preserves ordering and argmax") {
    const SpamModel m = SpamModel::single();
    const std::vector<double> bare{0.41, 0.77, 0.35, 0.52, 0.66};
    const auto ideal = renormalize(m, bare);
    CHECK(std::max_element(ideal.begin(), ideal.end()) - ideal.begin() ==
          std::max_element(bare.begin(), bare.end()) - bare.begin());
    for (std::size_t i = 0; i < bare.size(); ++i)
      for (std::size_t j = 0; j < bare.size(); ++j) CHECK((bare[i] < bare[j]) == (ideal[i] < ideal[j]));
  }

  TEST_CASE("invalid models are rejected") {
    CHECK_THROWS_AS((SpamModel{0.5, 0.5}.validate()), SpecError);
    CHECK_THROWS_AS(renormalize(SpamModel{0.5, 0.5}, 0.5), SpecError);
    CHECK_THROWS_AS((SpamModel{1.2, 0.3}.validate()), SpecError);
    CHECK_THROWS_AS((SpamModel{0.9, -0.1}.validate()), SpecError);
    CHECK_THROWS_AS(forward(SpamModel::single(), NAN), SpecError);
  }
}
