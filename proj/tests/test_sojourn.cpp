#include "smdp/sojourn.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using smdp::SojournDist;

namespace {

// Simpson quadrature of the Weibull density; independent route to the CDF.
double weibull_cdf_by_integration(double shape, double scale, double s) {
    const int n = 20000;
    const double h = s / n;
    auto density = [&](double x) {
        if (x <= 0) return 0.0;
        const double z = x / scale;
        return (shape / scale) * std::pow(z, shape - 1) * std::exp(-std::pow(z, shape));
    };
    double acc = density(0) + density(s);
    for (int k = 1; k < n; ++k) acc += density(k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("exponential cdf and quantile") {
    auto d = SojournDist::exponential(1.0);
    CHECK(d.cdf(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.cdf(0.0) == 0.0);
    CHECK(d.quantile(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("uniform cdf and quantile") {
    auto d = SojournDist::uniform(0.0, 2.0);
    CHECK(d.quantile(0.25) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.cdf(0.5) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(d.cdf(3.0) == 1.0);
}

TEST_CASE("weibull cdf matches closed form and density integration") {
    auto d = SojournDist::weibull(1.0, 2.0);
    CHECK(d.cdf(2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    for (double shape : {0.8, 1.5, 3.0}) {
        auto w = SojournDist::weibull(shape, 1.7);
        for (double s : {0.4, 1.1, 2.5})
            CHECK(w.cdf(s) == doctest::Approx(weibull_cdf_by_integration(shape, 1.7, s)).epsilon(1e-7));
    }
}

TEST_CASE("deterministic is a unit step") {
    auto d = SojournDist::deterministic(1.0);
    CHECK(d.cdf(0.999) == 0.0);
    CHECK(d.cdf(1.0) == 1.0);
    CHECK(d.quantile(0.01) == 1.0);
    CHECK(d.quantile(0.99) == 1.0);
    CHECK_FALSE(d.continuous());
}

TEST_CASE("mixture combines component cdfs") {
    auto d = SojournDist::mixture({{0.5, SojournDist::exponential(1.0)},
                                   {0.5, SojournDist::uniform(1.0, 3.0)}});
    const double s = 2.0;
    const double expected = 0.5 * (1 - std::exp(-2.0)) + 0.5 * 0.5;
    CHECK(d.cdf(s) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(d.continuous());
    // quantile is the generalized inverse even when a component has an atom
    auto with_atom = SojournDist::mixture({{0.5, SojournDist::deterministic(1.0)},
                                           {0.5, SojournDist::uniform(2.0, 3.0)}});
    CHECK_FALSE(with_atom.continuous());
    CHECK(with_atom.quantile(0.3) == doctest::Approx(1.0).epsilon(1e-9));
    for (double p : {0.01, 0.3, 0.5, 0.7, 0.99})
        CHECK(with_atom.cdf(with_atom.quantile(p)) >= p - 1e-12);
}

TEST_CASE("quantile/cdf round trip on random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(1e-4, 1.0 - 1e-4);
    const SojournDist dists[] = {
        SojournDist::exponential(0.7),
        SojournDist::uniform(0.2, 1.9),
        SojournDist::weibull(1.4, 2.2),
        SojournDist::mixture({{0.3, SojournDist::exponential(2.0)},
                              {0.7, SojournDist::weibull(2.0, 1.0)}}),
    };
    for (const auto& d : dists) {
        for (int k = 0; k < 1000; ++k) {
            const double p = unif(rng);
            const double s = d.quantile(p);
            CHECK(d.cdf(s) >= p - 1e-10);
            // continuous kinds: the round trip is the identity
            const double s2 = d.quantile(d.cdf(s));
            CHECK(s2 == doctest::Approx(s).epsilon(1e-8));
        }
    }
}

TEST_CASE("cdf is nondecreasing with zero mass at the origin") {
    const SojournDist dists[] = {
        SojournDist::exponential(1.3),
        SojournDist::uniform(0.0, 0.8),
        SojournDist::weibull(0.9, 1.1),
        SojournDist::deterministic(0.4),
        SojournDist::mixture({{0.6, SojournDist::deterministic(0.5)},
                              {0.4, SojournDist::exponential(1.0)}}),
    };
    for (const auto& d : dists) {
        CHECK(d.cdf(0.0) == 0.0);
        double prev = 0;
        for (double s = 0.05; s < 6.0; s += 0.05) {
            const double c = d.cdf(s);
            CHECK(c >= prev);
            prev = c;
        }
        CHECK(prev > 0.95); // mass arrives eventually
    }
}

TEST_CASE("domain and construction errors") {
    auto d = SojournDist::exponential(1.0);
    CHECK_THROWS_AS(d.quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(d.quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(d.cdf(-0.1), std::domain_error);
    CHECK_THROWS_AS(SojournDist::exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(SojournDist::uniform(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SojournDist::uniform(-0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SojournDist::weibull(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(SojournDist::deterministic(0.0), std::invalid_argument);
    CHECK_THROWS_AS(SojournDist::mixture({{0.5, SojournDist::exponential(1.0)},
                                          {0.4, SojournDist::exponential(2.0)}}),
                    std::invalid_argument);
}
