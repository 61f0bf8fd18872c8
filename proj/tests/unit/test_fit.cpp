#include <cmath>

#include "doctest.h"

#include "atomarray/errors.hpp"
#include "atomarray/fit.hpp"

using namespace atomarray;

TEST_CASE("exact line") {
    const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.r2 == doctest::Approx(1));
    CHECK_THROWS_AS(fit_line({1}, {1}), FitError);
    CHECK_THROWS_AS(fit_line({1, 1, 1}, {1, 2, 3}), FitError);
    CHECK_THROWS_AS(fit_line({1, 2}, {1, 2, 3}), FitError);
}

TEST_CASE("power law recovers the exponent") {
    std::vector<double> x, y;
    for (double a = 0.05; a < 0.16; a *= 1.2) {
        x.push_back(a);
        y.push_back(-3.7 * std::pow(a, -6.0));
    }
    const ScalingFit f = fit_power_law(x, y);
    CHECK(f.slope == doctest::Approx(-6).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(3.7)).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1));
    CHECK_FALSE(f.decay_length.has_value());
    CHECK(f.x == x);
}

TEST_CASE("exponential decay length") {
    std::vector<double> x, y;
    for (int m = 1; m <= 6; ++m) {
        x.push_back(0.2 * m);
        y.push_back(50 * std::exp(-0.2 * m / 0.35));
    }
    const ScalingFit f = fit_exponential(x, y);
    REQUIRE(f.decay_length.has_value());
    CHECK(*f.decay_length == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1));
    // Noise lowers R^2 but the fit is still reported.
    y[2] *= 3;
    const ScalingFit g = fit_exponential(x, y);
    CHECK(g.r2 < 0.99);
    CHECK(g.r2 > 0);
}

TEST_CASE("fit preconditions") {
    CHECK_THROWS_AS(fit_power_law({0.1, 0.2, 0.3}, {1, 2, 3}), FitError);
    CHECK_THROWS_AS(fit_power_law({0.1}, {1}), FitError);
    CHECK_THROWS_AS(fit_power_law({0.1, 0.2, 0.3, 0.4}, {1, 0, 3, 4}), FitError);
    CHECK_THROWS_AS(fit_power_law({-0.1, 0.2, 0.3, 0.4}, {1, 2, 3, 4}), FitError);
    CHECK_THROWS_AS(fit_exponential({1, 2, 3, 4}, {1, 2, NAN, 4}), FitError);
    CHECK_NOTHROW(fit_exponential({-1, 2, 3, 4}, {1, 2, 3, 4}));
}
