#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "crot/expfam.hpp"
#include "crot/mixture.hpp"
#include "oracles.hpp"

using namespace crot;

namespace {

Eigen::VectorXd vecd(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("single-component mixtures reduce to the component") {
    const Mixture m = Mixture::single(make_gaussian_1d(0.0, 1.0));
    CHECK(m.log_pdf1(0.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
    CHECK(m.size() == 1);
    CHECK(m.weight(0) == 1.0);
}

TEST_CASE("equal mixture of identical components equals the component") {
    const Component c = make_gaussian_1d(0.7, 1.4);
    const Mixture m = Mixture::uniform({c, c, c});
    for (double x : {-2.0, 0.0, 1.3}) {
        CHECK(m.log_pdf1(x) == doctest::Approx(log_pdf1(c, x)).epsilon(1e-13));
    }
}

TEST_CASE("mixture density is the weighted sum of component densities") {
    const Mixture m = Mixture::uniform({make_gaussian_1d(0.0, 1.0), make_gaussian_1d(4.0, 1.0)});
    const double direct = 0.5 * std::exp(log_pdf1(m.component(0), 2.0)) +
                          0.5 * std::exp(log_pdf1(m.component(1), 2.0));
    CHECK(std::exp(m.log_pdf1(2.0)) == doctest::Approx(direct).epsilon(1e-13));
    CHECK(std::exp(m.log_pdf1(2.0)) == doctest::Approx(oracle::mixture_pdf1(m, 2.0)).epsilon(1e-13));
}

TEST_CASE("degenerate weights pick out one component") {
    const Mixture m(vecd({1.0, 0.0}),
                    {make_gaussian_1d(0.0, 1.0), make_gaussian_1d(50.0, 1.0)});
    for (double x : {-1.0, 0.0, 2.0})
        CHECK(m.log_pdf1(x) == doctest::Approx(log_pdf1(m.component(0), x)).epsilon(1e-13));
    Rng rng(3);
    for (int i = 0; i < 200; ++i) CHECK(std::fabs(m.sample(rng)[0]) < 10.0);
}

TEST_CASE("weight validation tolerates rounding but rejects junk") {
    // Off by 1e-7: renormalized.
    const Mixture ok(vecd({0.5, 0.5000001}),
                     {make_gaussian_1d(0.0, 1.0), make_gaussian_1d(1.0, 1.0)});
    CHECK(ok.weights().sum() == doctest::Approx(1.0).epsilon(1e-15));

    // Off by 0.1: rejected.
    CHECK_THROWS_AS(Mixture(vecd({0.5, 0.6}),
                            {make_gaussian_1d(0.0, 1.0), make_gaussian_1d(1.0, 1.0)}),
                    std::invalid_argument);
    // Negative weight rejected.
    CHECK_THROWS_AS(Mixture(vecd({1.2, -0.2}),
                            {make_gaussian_1d(0.0, 1.0), make_gaussian_1d(1.0, 1.0)}),
                    std::invalid_argument);
    // Length mismatch and empty lists rejected.
    CHECK_THROWS_AS(Mixture(vecd({1.0}), {}), std::invalid_argument);
    CHECK_THROWS_AS(Mixture(vecd({0.5, 0.5}), {make_gaussian_1d(0.0, 1.0)}),
                    std::invalid_argument);
}

TEST_CASE("mixtures must be homogeneous in family and dimension") {
    CHECK_THROWS_AS(Mixture::uniform({make_gaussian_1d(0.0, 1.0), make_gamma(2.0, 1.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Mixture::uniform({make_gaussian_diag(vecd({0.0}), vecd({1.0})),
                                      make_gaussian_diag(vecd({0.0, 0.0}), vecd({1.0, 1.0}))}),
                    std::invalid_argument);
}

TEST_CASE("sampling is seeded and reproduces the mixture moments") {
    const Mixture n01 = Mixture::single(make_gaussian_1d(0.0, 1.0));
    Rng rng(19);
    const Eigen::MatrixXd draws = n01.sample(100000, rng);
    CHECK(std::fabs(draws.col(0).mean()) < 0.02);

    Rng a(5), b(5);
    const Mixture two = Mixture::uniform({make_gaussian_1d(-1.0, 1.0), make_gaussian_1d(1.0, 1.0)});
    const Eigen::MatrixXd da = two.sample(64, a);
    const Eigen::MatrixXd db = two.sample(64, b);
    CHECK((da - db).cwiseAbs().maxCoeff() == 0.0);

    // Exact moments of the two-bump mixture: mean 0, variance 2.
    auto [mean, cov] = mixture_moments(two);
    CHECK(mean[0] == doctest::Approx(0.0));
    CHECK(cov(0, 0) == doctest::Approx(2.0));

    Rng big(99);
    const Eigen::MatrixXd lots = two.sample(1000000, big);
    CHECK(std::fabs(lots.col(0).mean()) < 0.01);
    const double var =
        (lots.col(0).array() - lots.col(0).mean()).square().sum() / (lots.rows() - 1.0);
    CHECK(var == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("mixture moments combine component means and spreads") {
    const Mixture single = Mixture::single(make_gaussian_diag(vecd({1.0, -2.0}), vecd({0.5, 3.0})));
    auto [mu, cov] = mixture_moments(single);
    CHECK(mu[0] == doctest::Approx(1.0));
    CHECK(mu[1] == doctest::Approx(-2.0));
    CHECK(cov(0, 0) == doctest::Approx(0.5));
    CHECK(cov(1, 1) == doctest::Approx(3.0));
    CHECK(cov(0, 1) == doctest::Approx(0.0));

    // Hand computation for an uneven 1d pair:
    // mean = 0.3*0 + 0.7*2 = 1.4, var = E[v] + Var[means].
    const Mixture uneven(vecd({0.3, 0.7}),
                         {make_gaussian_1d(0.0, 1.0), make_gaussian_1d(2.0, 0.5)});
    auto [mu2, cov2] = mixture_moments(uneven);
    CHECK(mu2[0] == doctest::Approx(1.4).epsilon(1e-14));
    const double expected_var = 0.3 * 1.0 + 0.7 * 0.25 + 0.3 * 1.4 * 1.4 + 0.7 * 0.6 * 0.6;
    CHECK(cov2(0, 0) == doctest::Approx(expected_var).epsilon(1e-14));
}

TEST_CASE("mixture cdf and quantile are consistent") {
    const Mixture m = Mixture::uniform({make_gaussian_1d(-1.0, 0.7), make_gaussian_1d(2.0, 1.2)});
    for (double u : {0.1, 0.5, 0.9}) {
        CHECK(m.cdf1(m.quantile1(u)) == doctest::Approx(u).epsilon(1e-9));
    }
    CHECK(m.cdf1(-100.0) == doctest::Approx(0.0));
    CHECK(m.cdf1(100.0) == doctest::Approx(1.0));

    // Mixture density integrates to one.
    auto [lo, hi] = m.bulk_interval1(14.0);
    const double mass =
        oracle::simpson([&](double x) { return oracle::mixture_pdf1(m, x); }, lo, hi, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kde components sit on the data with the shared bandwidth") {
    Eigen::MatrixXd one(1, 2);
    one << 0.5, -0.25;
    const Kde k1 = kde_build(one, 1e-3);
    CHECK(k1.count == 1);
    CHECK(k1.mixture.size() == 1);
    CHECK(k1.mixture.weight(0) == 1.0);
    const GaussianDiag g = as_gaussian_diag(k1.mixture.component(0));
    CHECK(g.mean[0] == 0.5);
    CHECK(g.mean[1] == -0.25);
    CHECK(g.var[0] == 1e-3);
    CHECK(g.var[1] == 1e-3);

    Eigen::MatrixXd three(3, 1);
    three << 0.0, 1.0, 4.0;
    const Kde k3 = kde_build(three, 1e-2);
    CHECK(k3.mixture.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(k3.mixture.weight(i) == doctest::Approx(1.0 / 3.0));

    // Density peaks at the data relative to a point 10 bandwidth-sigmas out.
    const double at_data = k3.mixture.log_pdf1(1.0);
    const double away = k3.mixture.log_pdf1(1.0 + 10.0 * std::sqrt(1e-2));
    CHECK(at_data >= away);

    CHECK_THROWS_AS(kde_build(three, 0.0), std::invalid_argument);
}

TEST_CASE("kde log density equals the direct log-sum over kernels") {
    Rng rng(42);
    Eigen::MatrixXd pts(60, 2);
    for (int i = 0; i < pts.size(); ++i) pts.data()[i] = rng.normal();
    const double eps = 0.05;
    const Kde kde = kde_build(pts, eps);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd x(2);
        x << rng.normal(), rng.normal();
        double direct = 0.0;
        for (int i = 0; i < pts.rows(); ++i) {
            const double sq = (x - pts.row(i).transpose()).squaredNorm();
            direct += std::exp(-0.5 * sq / eps) / (2.0 * M_PI * eps);
        }
        direct /= static_cast<double>(pts.rows());
        CHECK(kde.mixture.log_pdf(x) == doctest::Approx(std::log(direct)).epsilon(1e-12));
    }
}

TEST_CASE("natural parameters of the standard normal") {
    const ExpFamilyView v = exp_family_view(make_gaussian_1d(0.0, 1.0));
    REQUIRE(v.theta.size() == 2);
    CHECK(v.theta[0] == doctest::Approx(0.0));
    CHECK(v.theta[1] == doctest::Approx(-0.5));
    // F(0, -1/2) = 0.5 log(2 pi).
    CHECK(v.log_normalizer == doctest::Approx(0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("natural-parameter round trip is the identity") {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd mean(3), var(3);
        for (int d = 0; d < 3; ++d) {
            mean[d] = 4.0 * (rng.uniform() - 0.5);
            var[d] = 0.2 + 2.0 * rng.uniform();
        }
        const Component c = make_gaussian_diag(mean, var);
        const ExpFamilyView v = exp_family_view(c);
        const Component back = exp_family_component(v.theta);
        const GaussianDiag g = as_gaussian_diag(back);
        CHECK((g.mean - mean).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((g.var - var).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("exponential-family density matches the source density on a grid") {
    // log p(x) = <theta, (x, x^2)> - F(theta) for the (x, x^2) convention.
    const Component c = make_gaussian_1d(1.3, 0.8);
    const ExpFamilyView v = exp_family_view(c);
    for (int i = 0; i < 100; ++i) {
        const double x = -4.0 + 8.0 * i / 99.0;
        const double lp = v.theta[0] * x + v.theta[1] * x * x - v.log_normalizer;
        CHECK(std::fabs(lp - log_pdf1(c, x)) < 1e-10);
    }
}

TEST_CASE("log normalizer is convex and guards its domain") {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd ta(2), tb(2);
        ta << 2.0 * (rng.uniform() - 0.5), -0.2 - 2.0 * rng.uniform();
        tb << 2.0 * (rng.uniform() - 0.5), -0.2 - 2.0 * rng.uniform();
        const double mid = exp_family_log_normalizer(0.5 * (ta + tb));
        const double chord =
            0.5 * exp_family_log_normalizer(ta) + 0.5 * exp_family_log_normalizer(tb);
        CHECK(mid <= chord + 1e-12);
    }

    Eigen::VectorXd bad(2);
    bad << 0.0, 0.5;  // second natural parameter must be negative
    CHECK_FALSE(in_natural_domain(bad));
    CHECK_THROWS_AS(exp_family_log_normalizer(bad), std::invalid_argument);
    CHECK_THROWS_AS(exp_family_view(make_gamma(2.0, 1.0)), std::invalid_argument);
}
