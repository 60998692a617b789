#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crot/component.hpp"
#include "oracles.hpp"

using namespace crot;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("construction validates parameters") {
    CHECK_THROWS_AS(make_gaussian_1d(0.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_gaussian_1d(0.0, 0.0), std::invalid_argument);
    // Below the variance floor is an error, not a silent clamp.
    CHECK_THROWS_AS(make_gaussian_1d(0.0, 1e-7), std::invalid_argument);  // sigma^2 = 1e-14
    CHECK_THROWS_AS(make_gaussian_diag(vec2(0, 0), vec2(1.0, 1e-13)), std::invalid_argument);
    CHECK_THROWS_AS(make_gamma(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_gamma(2.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_rayleigh(0.0), std::invalid_argument);

    // Mean/variance dimension mismatch.
    Eigen::VectorXd mean(3);
    mean.setZero();
    CHECK_THROWS_AS(make_gaussian_diag(mean, vec2(1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(make_gaussian_diag(Eigen::VectorXd(), Eigen::VectorXd()),
                    std::invalid_argument);

    CHECK_NOTHROW(make_gaussian_diag(vec2(0.5, -0.5), vec2(1.0, 2.0)));
}

TEST_CASE("log densities match hand formulas") {
    const Component g = make_gaussian_1d(1.0, 2.0);
    for (double x : {-1.0, 0.0, 2.5}) {
        const double z = (x - 1.0) / 2.0;
        const double expected = -0.5 * z * z - std::log(2.0) - 0.5 * std::log(2.0 * M_PI);
        CHECK(log_pdf1(g, x) == doctest::Approx(expected).epsilon(1e-14));
    }

    const Component gd = make_gaussian_diag(vec2(1.0, -2.0), vec2(0.5, 3.0));
    const Eigen::VectorXd x = vec2(0.3, 0.7);
    const double expected = -0.5 * ((0.3 - 1.0) * (0.3 - 1.0) / 0.5 + (0.7 + 2.0) * (0.7 + 2.0) / 3.0) -
                            0.5 * std::log(0.5 * 3.0) - std::log(2.0 * M_PI);
    CHECK(log_pdf(gd, x) == doctest::Approx(expected).epsilon(1e-13));

    const Component gam = make_gamma(2.5, 1.5);
    const double lg =
        1.5 * std::log(0.8) - 0.8 / 1.5 - 2.5 * std::log(1.5) - std::lgamma(2.5);
    CHECK(log_pdf1(gam, 0.8) == doctest::Approx(lg).epsilon(1e-13));

    const Component ray = make_rayleigh(1.5);
    const double lr = std::log(2.0) - 2.0 * std::log(1.5) - 4.0 / (2.0 * 2.25);
    CHECK(log_pdf1(ray, 2.0) == doctest::Approx(lr).epsilon(1e-13));
}

TEST_CASE("positive-support families vanish at and below zero") {
    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK(log_pdf1(make_gamma(2.0, 1.0), 0.0) == ninf);
    CHECK(log_pdf1(make_gamma(2.0, 1.0), -1.0) == ninf);
    CHECK(log_pdf1(make_rayleigh(1.0), 0.0) == ninf);
    CHECK(log_pdf1(make_rayleigh(1.0), -0.5) == ninf);
}

TEST_CASE("every 1d density integrates to one") {
    const Component variants[] = {make_gaussian_1d(0.7, 1.3), make_gamma(2.2, 0.9),
                                  make_rayleigh(1.7),
                                  make_gaussian_diag(Eigen::VectorXd::Constant(1, -0.4),
                                                     Eigen::VectorXd::Constant(1, 2.1))};
    for (const Component& c : variants) {
        auto [lo, hi] = bulk_interval1(c, 14.0);
        if (family_of(c) == Family::gamma || family_of(c) == Family::rayleigh)
            lo = std::max(lo, 1e-13);
        const double mass = oracle::simpson(
            [&](double x) { return std::exp(log_pdf1(c, x)); }, lo, hi, 1e-12);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("cdf and quantile are inverse") {
    const Component variants[] = {make_gaussian_1d(-0.3, 0.8), make_gamma(3.0, 1.2),
                                  make_rayleigh(0.9)};
    for (const Component& c : variants) {
        for (double u : {0.05, 0.3, 0.5, 0.77, 0.99}) {
            const double x = quantile1(c, u);
            CHECK(cdf1(c, x) == doctest::Approx(u).epsilon(1e-9));
        }
        // Monotone cdf.
        CHECK(cdf1(c, quantile1(c, 0.2)) < cdf1(c, quantile1(c, 0.8)));
    }
    // Standard normal checkpoints.
    const Component n01 = make_gaussian_1d(0.0, 1.0);
    CHECK(cdf1(n01, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(quantile1(n01, 0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
}

TEST_CASE("moments match quadrature") {
    const Component gam = make_gamma(2.5, 1.5);
    CHECK(mean1(gam) == doctest::Approx(3.75).epsilon(1e-12));
    CHECK(var1(gam) == doctest::Approx(5.625).epsilon(1e-12));

    const Component ray = make_rayleigh(2.0);
    CHECK(mean1(ray) == doctest::Approx(2.0 * std::sqrt(M_PI / 2.0)).epsilon(1e-12));
    CHECK(var1(ray) == doctest::Approx((2.0 - M_PI / 2.0) * 4.0).epsilon(1e-12));

    // A gamma tail is subexponential, so the first-moment window needs to be
    // wider than the gaussian habit of a dozen deviations.
    for (const Component& c : {gam, ray, make_gaussian_1d(0.4, 1.1)}) {
        auto [lo, hi] = bulk_interval1(c, 22.0);
        if (family_of(c) != Family::gaussian_1d) lo = std::max(lo, 1e-13);
        const double m1 = oracle::simpson(
            [&](double x) { return x * std::exp(log_pdf1(c, x)); }, lo, hi, 1e-12);
        CHECK(m1 == doctest::Approx(mean1(c)).epsilon(1e-8));
    }
}

TEST_CASE("sampling is seeded and matches moments") {
    const Component n01 = make_gaussian_1d(0.0, 1.0);
    Rng rng(7);
    double sum = 0.0, sumsq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = sample1(n01, rng);
        sum += x;
        sumsq += x * x;
    }
    CHECK(std::fabs(sum / n) < 0.02);
    CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));

    // Same seed, same stream.
    Rng a(123), b(123);
    for (int i = 0; i < 50; ++i) CHECK(sample1(n01, a) == sample1(n01, b));

    // Positive-support samplers stay on the support and match their means.
    for (const Component& c : {make_gamma(2.5, 1.5), make_rayleigh(1.3)}) {
        Rng r2(11);
        double s = 0.0;
        double lo_seen = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 50000; ++i) {
            const double x = sample1(c, r2);
            lo_seen = std::min(lo_seen, x);
            s += x;
        }
        CHECK(lo_seen > 0.0);
        CHECK(s / 50000 == doctest::Approx(mean1(c)).epsilon(0.03));
    }
}

TEST_CASE("bulk intervals cover the mass") {
    // Twelve deviations leave ~1e-7 in a gamma tail, far less in a gaussian.
    const Component gam = make_gamma(2.0, 1.0);
    auto [lo, hi] = bulk_interval1(gam);
    CHECK(lo >= 0.0);
    CHECK(cdf1(gam, hi) > 1.0 - 1e-6);

    auto [glo, ghi] = bulk_interval1(make_gaussian_1d(5.0, 2.0));
    CHECK(glo == doctest::Approx(5.0 - 24.0));
    CHECK(ghi == doctest::Approx(5.0 + 24.0));
}

TEST_CASE("gaussian view helpers") {
    const GaussianDiag g = as_gaussian_diag(make_gaussian_1d(2.0, 3.0));
    REQUIRE(g.mean.size() == 1);
    CHECK(g.mean[0] == 2.0);
    CHECK(g.var[0] == 9.0);

    const Component gd = make_gaussian_diag(vec2(1.0, 2.0), vec2(3.0, 4.0));
    const GaussianDiag g2 = as_gaussian_diag(gd);
    CHECK(g2.var[1] == 4.0);

    CHECK_THROWS_AS(as_gaussian_diag(make_gamma(2.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(as_gaussian_diag(make_rayleigh(1.0)), std::invalid_argument);

    // Differential entropy of the standard normal: 0.5 log(2 pi e).
    const GaussianDiag unit = as_gaussian_diag(make_gaussian_1d(0.0, 1.0));
    CHECK(gaussian_entropy(unit) ==
          doctest::Approx(0.5 * std::log(2.0 * M_PI * std::exp(1.0))).epsilon(1e-14));
    // Entropy adds over dimensions.
    const GaussianDiag two = as_gaussian_diag(make_gaussian_diag(vec2(0, 0), vec2(1.0, 1.0)));
    CHECK(gaussian_entropy(two) == doctest::Approx(2.0 * gaussian_entropy(unit)).epsilon(1e-14));
}

TEST_CASE("family bookkeeping") {
    CHECK(family_of(make_gamma(1.0, 1.0)) == Family::gamma);
    CHECK(family_name(Family::rayleigh) == "rayleigh");
    CHECK(family_from_name("gaussian_diag") == Family::gaussian_diag);
    CHECK_THROWS_AS(family_from_name("cauchy"), std::invalid_argument);
    CHECK(dim(make_gaussian_diag(vec2(0, 0), vec2(1, 1))) == 2);
    CHECK(dim(make_gamma(1.0, 1.0)) == 1);
    CHECK(is_gaussian(make_gaussian_1d(0.0, 1.0)));
    CHECK_FALSE(is_gaussian(make_rayleigh(1.0)));
}
