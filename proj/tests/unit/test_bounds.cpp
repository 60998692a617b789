#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crot/bounds.hpp"
#include "crot/estimators.hpp"
#include "oracles.hpp"

using namespace crot;

namespace {

Eigen::VectorXd vecd(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

const double kInf = std::numeric_limits<double>::infinity();

// Replicated empirical transport estimate with a standard error, for the
// statistical comparisons below.
oracle::MeanSe empirical_reps(const Mixture& a, const Mixture& b, int n, double p_order,
                              std::uint64_t seed, int reps = 5) {
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        vals.push_back(empirical_w2_ub(a, b, n, p_order, rng));
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (vals.size() - 1.0) / vals.size())};
}

}  // namespace

TEST_CASE("assignment solver matches permutation brute force") {
    Eigen::MatrixXd one(1, 1);
    one << 3.25;
    const AssignmentResult r1 = min_cost_assignment(one);
    CHECK(r1.value == doctest::Approx(3.25));
    REQUIRE(r1.permutation.size() == 1);
    CHECK(r1.permutation[0] == 0);

    Rng rng(808);
    for (int rep = 0; rep < 50; ++rep) {
        const int k = 2 + static_cast<int>(rng.index(5));
        Eigen::MatrixXd cost(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) cost(i, j) = 5.0 * rng.uniform();
        const AssignmentResult r = min_cost_assignment(cost);
        std::vector<int> best;
        const double brute = oracle::brute_force_matching(cost, &best);
        CHECK(r.value == doctest::Approx(brute).epsilon(1e-10));
        // The returned permutation realizes the value.
        double realized = 0.0;
        for (int i = 0; i < k; ++i) realized += cost(i, r.permutation[static_cast<std::size_t>(i)]);
        CHECK(realized == doctest::Approx(r.value).epsilon(1e-12));
    }
}

TEST_CASE("product-coupling bound") {
    const Mixture single = Mixture::single(make_gaussian_1d(0.4, 1.1));
    CHECK(scub(single, single, GroundSpec::parse("kl")) == doctest::Approx(0.0));

    // Uniform two-by-two: the average of the four cost entries.
    const Mixture a = Mixture::uniform({make_gaussian_1d(0.0, 1.0), make_gaussian_1d(1.0, 1.5)});
    const Mixture b = Mixture::uniform({make_gaussian_1d(-0.5, 0.8), make_gaussian_1d(2.0, 1.0)});
    const GroundSpec kl = GroundSpec::parse("kl");
    const CostMatrix cm = cost_matrix(a, b, kl);
    CHECK(scub(a, b, kl) == doctest::Approx(cm.values.mean()).epsilon(1e-12));

    // Dominates the coupled optimum; is dominated by the worst entry.
    Rng rng(2);
    for (int rep = 0; rep < 25; ++rep) {
        const Mixture p = oracle::random_gmm_1d(rng, 2);
        const Mixture q = oracle::random_gmm_1d(rng, 3);
        const double s = scub(p, q, kl);
        CHECK(s >= crot_kl_bound(p, q, SolverKind::exact) - 1e-9);
        CHECK(s <= max_bound(cost_matrix(p, q, kl)) + 1e-12);
    }
}

TEST_CASE("worst-entry bound") {
    CostMatrix constant;
    constant.values = Eigen::MatrixXd::Constant(3, 4, 0.7);
    CHECK(max_bound(constant) == doctest::Approx(0.7));

    // One-by-one: every bound collapses to the single distance.
    const Mixture p = Mixture::single(make_gaussian_1d(0.0, 1.0));
    const Mixture q = Mixture::single(make_gaussian_1d(1.0, 1.0));
    const GroundSpec kl = GroundSpec::parse("kl");
    CHECK(max_bound(cost_matrix(p, q, kl)) ==
          doctest::Approx(crot_kl_bound(p, q, SolverKind::exact)).epsilon(1e-12));
}

TEST_CASE("log-sum pairing bound") {
    const Mixture m = Mixture::uniform({make_gaussian_1d(0.0, 1.0), make_gaussian_1d(3.0, 0.7)});
    CHECK(logsum_bound(m, m, {0, 1}) == doctest::Approx(0.0));

    // Hand evaluation on an uneven pair.
    const Mixture a(vecd({0.4, 0.6}), {make_gaussian_1d(0.0, 1.0), make_gaussian_1d(2.0, 1.0)});
    const Mixture b(vecd({0.7, 0.3}), {make_gaussian_1d(0.5, 1.0), make_gaussian_1d(1.0, 2.0)});
    const std::vector<int> sigma{1, 0};
    const double expected =
        0.4 * std::log(0.4 / 0.3) + 0.4 * kl_gaussian(a.component(0), b.component(1)) +
        0.6 * std::log(0.6 / 0.7) + 0.6 * kl_gaussian(a.component(1), b.component(0));
    CHECK(logsum_bound(a, b, sigma) == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(logsum_bound(a, b, std::vector<int>{0}), std::invalid_argument);
}

TEST_CASE("optimal pairing bound matches permutation brute force") {
    Rng rng(3131);
    for (int rep = 0; rep < 20; ++rep) {
        const Mixture a = oracle::random_gmm_1d(rng, 3);
        const Mixture b = oracle::random_gmm_1d(rng, 3);
        // Brute force over all six pairings of the log-sum bound.
        Eigen::MatrixXd cost(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                cost(i, j) = a.weight(i) * std::log(a.weight(i) / b.weight(j)) +
                             a.weight(i) * kl_gaussian(a.component(i), b.component(j));
        const double brute = oracle::brute_force_matching(cost);
        const AssignmentResult best = hungarian_bound(a, b);
        CHECK(best.value == doctest::Approx(brute).epsilon(1e-10));
        CHECK(best.value == doctest::Approx(logsum_bound(a, b, best.permutation)).epsilon(1e-10));

        // Every pairing dominates the optimum.
        std::vector<int> sigma{0, 1, 2};
        do {
            CHECK(logsum_bound(a, b, sigma) >= best.value - 1e-12);
        } while (std::next_permutation(sigma.begin(), sigma.end()));
    }

    // Self pairing: zero through the identity, which wins the tie.
    const Mixture m = Mixture::uniform({make_gaussian_1d(0.0, 1.0), make_gaussian_1d(1.0, 1.0),
                                        make_gaussian_1d(2.0, 1.0)});
    const AssignmentResult self = hungarian_bound(m, m);
    CHECK(self.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(self.permutation[static_cast<std::size_t>(i)] == i);

    // Single component.
    const Mixture s1 = Mixture::single(make_gaussian_1d(0.0, 1.0));
    const Mixture s2 = Mixture::single(make_gaussian_1d(2.0, 1.0));
    CHECK(hungarian_bound(s1, s2).value == doctest::Approx(logsum_bound(s1, s2, {0})));
}

TEST_CASE("coupled relative-entropy bound") {
    const Mixture m = Mixture::uniform({make_gaussian_1d(0.0, 1.0), make_gaussian_1d(2.0, 1.0)});
    CHECK(crot_kl_bound(m, m, SolverKind::exact) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

    Rng rng(515);
    McConfig mc;
    mc.samples = 20000;
    for (int rep = 0; rep < 20; ++rep) {
        const Mixture p = oracle::random_gmm_1d(rng, 2);
        const Mixture q = oracle::random_gmm_1d(rng, 3);
        const double exact = crot_kl_bound(p, q, SolverKind::exact);
        SinkhornConfig cfg;
        cfg.lambda_level = 10.0;
        const double soft = crot_kl_bound(p, q, SolverKind::sinkhorn, cfg);
        CHECK(exact <= soft + 1e-9);

        mc.seed = derive_seed(900, static_cast<std::uint64_t>(rep));
        const McEstimate ref = mc_kl(p, q, mc);
        CHECK(exact >= ref.estimate - 3.0 * ref.standard_error);
    }
}

TEST_CASE("chi-square bound on relative entropy") {
    const Mixture p = Mixture::uniform({make_gaussian_1d(0.0, 1.0), make_gaussian_1d(1.5, 0.9)});
    CHECK(chi2_kl_bound(p, p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));

    // Unit gaussians one apart: exp(1) - 1.
    const Mixture n01 = Mixture::single(make_gaussian_1d(0.0, 1.0));
    const Mixture n11 = Mixture::single(make_gaussian_1d(1.0, 1.0));
    CHECK(chi2_kl_bound(n01, n11) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-7));

    // Wide numerator over narrow denominator diverges.
    const Mixture wide = Mixture::single(make_gaussian_1d(0.0, 2.0));
    CHECK(chi2_kl_bound(wide, n01) == kInf);

    // Quadrature cross-check and estimator domination on random pairs kept in
    // the convergent variance regime.
    Rng rng(626);
    McConfig mc;
    mc.samples = 20000;
    for (int rep = 0; rep < 15; ++rep) {
        Eigen::VectorXd w(2);
        w << 0.5, 0.5;
        const Mixture a =
            Mixture(w, {make_gaussian_1d(rng.uniform() - 0.5, 0.55 + 0.25 * rng.uniform()),
                        make_gaussian_1d(rng.uniform(), 0.55 + 0.25 * rng.uniform())});
        const Mixture b =
            Mixture(w, {make_gaussian_1d(rng.uniform() - 0.5, 1.0 + 0.3 * rng.uniform()),
                        make_gaussian_1d(rng.uniform(), 1.0 + 0.3 * rng.uniform())});
        const double bound = chi2_kl_bound(a, b);
        REQUIRE(std::isfinite(bound));
        CHECK(bound == doctest::Approx(oracle::chi2_quad(a, b)).epsilon(1e-6));

        mc.seed = derive_seed(901, static_cast<std::uint64_t>(rep));
        const McEstimate kl = mc_kl(a, b, mc);
        CHECK(bound >= kl.estimate - 3.0 * kl.standard_error);
    }
}

TEST_CASE("exponential-family relaxation of the chi-square bound") {
    const Mixture single = Mixture::single(make_gaussian_1d(0.3, 1.2));
    const ExpfamBound self = expfam_kl_bound(single, single);
    CHECK(self.domain_ok);
    CHECK(self.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

    // For single gaussians in the valid regime the relaxation is tight.
    const Mixture p = Mixture::single(make_gaussian_1d(0.0, 0.6));
    const Mixture q = Mixture::single(make_gaussian_1d(0.8, 1.0));
    const ExpfamBound tight = expfam_kl_bound(p, q);
    REQUIRE(tight.domain_ok);
    CHECK(std::fabs(tight.value - chi2_kl_bound(p, q)) <= 1e-6);

    // Natural-domain violation: numerator too wide for the denominator.
    const Mixture wide = Mixture::single(make_gaussian_1d(0.0, 2.0));
    const Mixture narrow = Mixture::single(make_gaussian_1d(0.0, 1.0));
    const ExpfamBound off = expfam_kl_bound(wide, narrow);
    CHECK_FALSE(off.domain_ok);
    CHECK(off.value == kInf);

    // Random mixture pairs: finite values dominate both the direct estimator
    // and (within tolerance) the quadrature chi-square.
    Rng rng(727);
    McConfig mc;
    mc.samples = 20000;
    for (int rep = 0; rep < 15; ++rep) {
        Eigen::VectorXd w(2);
        w << 0.5, 0.5;
        const Mixture a =
            Mixture(w, {make_gaussian_1d(rng.uniform() - 0.5, 0.55 + 0.2 * rng.uniform()),
                        make_gaussian_1d(rng.uniform(), 0.55 + 0.2 * rng.uniform())});
        const Mixture b =
            Mixture(w, {make_gaussian_1d(rng.uniform() - 0.5, 1.0 + 0.3 * rng.uniform()),
                        make_gaussian_1d(rng.uniform(), 1.0 + 0.3 * rng.uniform())});
        const ExpfamBound bound = expfam_kl_bound(a, b);
        REQUIRE(bound.domain_ok);
        const double chi2 = chi2_kl_bound(a, b);
        CHECK(bound.value >= chi2 - 1e-6);

        mc.seed = derive_seed(902, static_cast<std::uint64_t>(rep));
        const McEstimate kl = mc_kl(a, b, mc);
        CHECK(bound.value >= kl.estimate - 3.0 * kl.standard_error);
    }

    CHECK_THROWS_AS(expfam_kl_bound(Mixture::single(make_gamma(2.0, 1.0)),
                                    Mixture::single(make_gamma(2.0, 1.0))),
                    std::invalid_argument);
}

TEST_CASE("derivative bound for f-divergences") {
    const auto neg_log = [](double u) { return -std::log(u); };
    const auto neg_log_d = [](double u) { return -1.0 / u; };

    const Mixture p = Mixture::uniform({make_gaussian_1d(0.0, 0.7), make_gaussian_1d(0.8, 0.6)});
    CHECK(fdiv_derivative_bound(p, p, neg_log, neg_log_d) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-8));

    // The relative-entropy generator reproduces the chi-square bound.
    const Mixture q = Mixture::uniform({make_gaussian_1d(0.3, 1.1), make_gaussian_1d(-0.4, 1.2)});
    CHECK(fdiv_derivative_bound(p, q, neg_log, neg_log_d) ==
          doctest::Approx(chi2_kl_bound(p, q)).epsilon(1e-8));

    // The squared-difference generator dominates its own divergence,
    // estimated by Monte Carlo.
    const auto sq = [](double u) { return (u - 1.0) * (u - 1.0); };
    const auto sq_d = [](double u) { return 2.0 * (u - 1.0); };
    const double bound = fdiv_derivative_bound(p, q, sq, sq_d);
    Rng rng(5225);
    std::vector<double> terms;
    for (int i = 0; i < 40000; ++i) {
        const double x = p.sample(rng)[0];
        const double r = std::exp(q.log_pdf1(x) - p.log_pdf1(x)) - 1.0;
        terms.push_back(r * r);
    }
    const oracle::MeanSe est = oracle::mean_se(terms);
    CHECK(bound >= est.mean - 3.0 * est.se);
}

TEST_CASE("moment-matched transport lower bound") {
    const Mixture m = Mixture::uniform({make_gaussian_diag(vecd({0.0, 0.0}), vecd({1.0, 0.5})),
                                        make_gaussian_diag(vecd({2.0, 1.0}), vecd({0.7, 1.2}))});
    CHECK(gelbrich_lb(m, m) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

    // Single components: exactly the closed-form transport distance.
    const Component ca = make_gaussian_diag(vecd({0.0, 1.0}), vecd({1.0, 4.0}));
    const Component cb = make_gaussian_diag(vecd({3.0, -1.0}), vecd({2.0, 1.0}));
    CHECK(gelbrich_lb(Mixture::single(ca), Mixture::single(cb)) ==
          doctest::Approx(w2_gaussian(ca, cb)).epsilon(1e-10));

    // Against the empirical estimate on random pairs.  The moment bound sits
    // below the sampled value, and the coupled root quantity above the moment
    // bound, for any pair at all.
    GroundSpec w2sq = GroundSpec::parse("w2sq");
    Rng rng(838);
    for (int rep = 0; rep < 8; ++rep) {
        const Mixture a = oracle::random_gmm_diag(rng, 2, 3);
        const Mixture b = oracle::random_gmm_diag(rng, 2, 3);
        const oracle::MeanSe emp = empirical_reps(a, b, 400, 2.0, derive_seed(50, rep));
        CHECK(gelbrich_lb(a, b) <= emp.mean + 3.0 * emp.se);
        const double crot_w2 = std::sqrt(crot_distance(a, b, w2sq, SolverKind::exact).value);
        CHECK(crot_w2 >= gelbrich_lb(a, b) - 1e-9);
    }

    // The full sandwich, sampled value included, needs the pair to share its
    // decomposition structure: on jittered copies the optimal transport stays
    // within matched components, so the coupled quantity tracks the true
    // distance that the samples estimate.
    for (int rep = 0; rep < 8; ++rep) {
        const Mixture a = oracle::random_gmm_diag(rng, 2, 3);
        std::vector<Component> moved;
        for (int j = 0; j < a.size(); ++j) {
            GaussianDiag g = as_gaussian_diag(a.component(j));
            for (int t = 0; t < 3; ++t) {
                g.mean[t] += 0.2 * (2.0 * rng.uniform() - 1.0);
                g.var[t] *= std::exp(0.1 * (2.0 * rng.uniform() - 1.0));
            }
            moved.push_back(make_gaussian_diag(g.mean, g.var));
        }
        const Mixture b(a.weights(), std::move(moved));
        const oracle::MeanSe emp = empirical_reps(a, b, 400, 2.0, derive_seed(51, rep));
        const double crot_w2 = std::sqrt(crot_distance(a, b, w2sq, SolverKind::exact).value);
        CHECK(crot_w2 <= emp.mean + 3.0 * emp.se);
        CHECK(crot_w2 >= gelbrich_lb(a, b) - 1e-9);
    }
}

TEST_CASE("empirical transport estimate") {
    const Mixture m = Mixture::uniform({make_gaussian_diag(vecd({0.0, 0.0}), vecd({1.0, 1.0})),
                                        make_gaussian_diag(vecd({3.0, 0.0}), vecd({0.5, 0.5}))});
    Rng small(4), large(4);
    const double at50 = empirical_w2_ub(m, m, 50, 2.0, small);
    const double at1000 = empirical_w2_ub(m, m, 1000, 2.0, large);
    CHECK(at50 > 0.0);
    CHECK(at1000 < at50);  // self distance of finite samples shrinks

    // Near-point-mass mixtures three apart.
    const Mixture d0 = Mixture::single(make_gaussian_1d(0.0, 1e-5));
    const Mixture d3 = Mixture::single(make_gaussian_1d(3.0, 1e-5));
    Rng rng(5);
    CHECK(empirical_w2_ub(d0, d3, 64, 2.0, rng) == doctest::Approx(3.0).epsilon(1e-3));

    Rng bad(6);
    CHECK_THROWS_AS(empirical_w2_ub(m, m, 1, 2.0, bad), std::invalid_argument);
    CHECK_THROWS_AS(empirical_w2_ub(m, m, 16, 0.5, bad), std::invalid_argument);
}

TEST_CASE("skew divergence cap constant") {
    CHECK(js_alpha_cap(0.5) == doctest::Approx(std::sqrt(std::log(2.0))).epsilon(1e-12));
    CHECK(js_alpha_cap(0.5) == doctest::Approx(0.8325546111576977).epsilon(1e-12));
    CHECK(js_alpha_cap(0.1) == doctest::Approx(js_alpha_cap(0.9)).epsilon(1e-12));
    CHECK_THROWS_AS(js_alpha_cap(0.0), std::invalid_argument);
    CHECK_THROWS_AS(js_alpha_cap(1.0), std::invalid_argument);

    // The squared cap dominates the divergence itself.
    Rng rng(949);
    const GroundSpec cfg = GroundSpec::parse("js:0.5");
    for (int rep = 0; rep < 20; ++rep) {
        const Mixture a = oracle::random_gmm_1d(rng, 2);
        const Mixture b = oracle::random_gmm_1d(rng, 2);
        const double alpha = 0.1 + 0.8 * rng.uniform();
        const double cap = js_alpha_cap(alpha);
        CHECK(js_alpha(a, b, alpha, cfg) <= cap * cap + 1e-12);
    }
}

TEST_CASE("chain of dominance for the relative-entropy bounds") {
    Rng rng(31415);
    McConfig mc;
    mc.samples = 20000;
    for (int rep = 0; rep < 15; ++rep) {
        const Mixture p = oracle::random_gmm_1d(rng, 1 + static_cast<int>(rng.index(3)));
        const Mixture q = oracle::random_gmm_1d(rng, 1 + static_cast<int>(rng.index(3)));
        mc.seed = derive_seed(555, static_cast<std::uint64_t>(rep));
        const McEstimate ref = mc_kl(p, q, mc);
        const double exact = crot_kl_bound(p, q, SolverKind::exact);
        SinkhornConfig cfg;
        cfg.lambda_level = 10.0;
        const double soft = crot_kl_bound(p, q, SolverKind::sinkhorn, cfg);
        const GroundSpec kl = GroundSpec::parse("kl");
        const double product = scub(p, q, kl);
        const double worst = max_bound(cost_matrix(p, q, kl));

        CHECK(ref.estimate - 3.0 * ref.standard_error <= exact);
        CHECK(exact <= soft + 1e-9);
        CHECK(soft <= product + 1e-9);
        CHECK(product <= worst + 1e-9);
    }
}

TEST_CASE("bound report gathers the relevant records") {
    const auto find = [](const BoundReport& r, const std::string& name) -> const BoundRecord* {
        for (const BoundRecord& rec : r.records)
            if (rec.name == name) return &rec;
        return nullptr;
    };

    Rng rng(161616);
    const Mixture p = oracle::random_gmm_1d(rng, 2);
    const Mixture q = oracle::random_gmm_1d(rng, 2);

    GroundSpec kl = GroundSpec::parse("kl");
    kl.mc_samples = 20000;
    const BoundReport klr = bound_report(p, q, kl);
    CHECK(klr.target == "kl");
    for (const char* name :
         {"crot_exact", "crot_sinkhorn_l1", "crot_sinkhorn_l10", "scub", "max", "hungarian",
          "chi2", "expfam"})
        CHECK(find(klr, name) != nullptr);
    const double slack = 3.0 * klr.mc_standard_error;
    CHECK(find(klr, "crot_exact")->value >= klr.mc_estimate - slack);
    CHECK(find(klr, "crot_exact")->value <= find(klr, "crot_sinkhorn_l10")->value + 1e-9);
    CHECK(find(klr, "crot_sinkhorn_l10")->value <= find(klr, "crot_sinkhorn_l1")->value + 1e-9);
    CHECK(find(klr, "scub")->value <= find(klr, "max")->value + 1e-9);
    for (const BoundRecord& rec : klr.records) {
        CHECK(rec.seconds >= 0.0);
        if (rec.name != "chi2" && rec.name != "expfam") CHECK(std::isfinite(rec.value));
    }

    // Transport target: a lower record and the root-of-squared upper record.
    const Mixture a = oracle::random_gmm_diag(rng, 2, 2);
    const Mixture b = oracle::random_gmm_diag(rng, 2, 2);
    const BoundReport w2r = bound_report(a, b, GroundSpec::parse("w2"));
    REQUIRE(find(w2r, "gelbrich") != nullptr);
    CHECK(find(w2r, "gelbrich")->side == BoundSide::lower);
    REQUIRE(find(w2r, "crot_exact") != nullptr);
    CHECK(find(w2r, "crot_exact")->side == BoundSide::upper);
    REQUIRE(find(w2r, "crot_w2sq_root") != nullptr);
    CHECK(find(w2r, "gelbrich")->value <= find(w2r, "crot_exact")->value + 1e-9);

    // Skew-divergence target: the cap record dominates the measurement.
    const BoundReport jsr = bound_report(p, q, GroundSpec::parse("js:0.5"));
    REQUIRE(find(jsr, "cap") != nullptr);
    CHECK(jsr.mc_estimate <= find(jsr, "cap")->value + 1e-12);
    REQUIRE(find(jsr, "scub_root") != nullptr);

    // Quantile target: the coupled bound dominates the exact distance.
    const BoundReport w1r = bound_report(p, q, GroundSpec::parse("w1d:2"));
    REQUIRE(find(w1r, "crot_wp_root") != nullptr);
    CHECK(w1r.mc_estimate <= find(w1r, "crot_wp_root")->value + 1e-9);
}
