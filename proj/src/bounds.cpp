#include "crot/bounds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crot/estimators.hpp"
#include "crot/expfam.hpp"
#include "crot/numerics.hpp"

namespace crot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBigCost = 1e100;  // stand-in for infeasible assignment cells

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw NumericalError("psd_sqrt: eigendecomposition failed");
    Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

double kl_weight_term(double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return kInf;
    return a * std::log(a / b);
}

// Integrate f over an adaptively extended window; returns +inf when the tail
// keeps contributing after repeated doubling (numerical divergence) or any
// evaluation leaves the floating range.
double extended_quadrature(const Mixture& p, const Mixture& q,
                           const std::function<double(double)>& raw, double quad_tol) {
    bool blew_up = false;
    const auto f = [&](double x) {
        const double t = raw(x);
        if (!std::isfinite(t)) {
            blew_up = true;
            return 0.0;
        }
        return t;
    };
    auto [lo, hi] = integration_window(p, q);
    double total = integrate(f, lo, hi, quad_tol, 1e-12).value;
    if (blew_up || !std::isfinite(total)) return kInf;
    double span = hi - lo;
    for (int round = 0; round < 8; ++round) {
        const double add = integrate(f, lo - span, lo, quad_tol, 1e-12).value +
                           integrate(f, hi, hi + span, quad_tol, 1e-12).value;
        if (blew_up || !std::isfinite(add)) return kInf;
        total += add;
        lo -= span;
        hi += span;
        span *= 2.0;
        if (std::fabs(add) <= 1e-10 * std::max(1.0, std::fabs(total))) return total;
    }
    return kInf;  // tails still growing after eight doublings
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

AssignmentResult min_cost_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    if (n < 1 || cost.cols() != n)
        throw std::invalid_argument("min_cost_assignment: square non-empty matrix required");
    if (!cost.allFinite())
        throw std::invalid_argument("min_cost_assignment: cost must be finite");
    // Shortest augmenting paths with potentials; column n is the virtual start,
    // row n the virtual "unmatched" row.
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<size_t>(n) + 1, n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> dist(static_cast<size_t>(n) + 1, kInf);
        std::vector<int> from(static_cast<size_t>(n) + 1, n);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        int j0 = n;
        match[static_cast<size_t>(n)] = i;
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = match[static_cast<size_t>(j0)];
            double delta = kInf;
            int j1 = n;
            for (int j = 0; j < n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur =
                    cost(i0, j) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < dist[static_cast<size_t>(j)]) {
                    dist[static_cast<size_t>(j)] = cur;
                    from[static_cast<size_t>(j)] = j0;
                }
                if (dist[static_cast<size_t>(j)] < delta) {
                    delta = dist[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    dist[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != n);
        while (j0 != n) {
            const int j1 = from[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        }
    }
    AssignmentResult result;
    result.permutation.assign(static_cast<size_t>(n), -1);
    for (int j = 0; j < n; ++j) result.permutation[static_cast<size_t>(match[static_cast<size_t>(j)])] = j;
    for (int i = 0; i < n; ++i) result.value += cost(i, result.permutation[static_cast<size_t>(i)]);
    return result;
}

double scub(const Mixture& m1, const Mixture& m2, const GroundSpec& spec) {
    switch (spec.kind) {
        case DistanceKind::kl:
        case DistanceKind::tv:
        case DistanceKind::renyi:
        case DistanceKind::js_alpha_sqrt: break;
        default:
            throw std::invalid_argument("scub: ground kind is not separately convex");
    }
    const CostMatrix cm = cost_matrix(m1, m2, spec);
    return m1.weights().transpose() * cm.values * m2.weights();
}

double max_bound(const CostMatrix& m) {
    if (!m.values.allFinite()) throw std::invalid_argument("max_bound: cost must be finite");
    return m.values.maxCoeff();
}

double logsum_bound(const Mixture& m1, const Mixture& m2, const std::vector<int>& permutation) {
    const int k = m1.size();
    if (m2.size() != k || static_cast<int>(permutation.size()) != k)
        throw std::invalid_argument("logsum_bound: equal component counts required");
    std::vector<char> seen(static_cast<size_t>(k), 0);
    for (int j : permutation) {
        if (j < 0 || j >= k || seen[static_cast<size_t>(j)])
            throw std::invalid_argument("logsum_bound: invalid permutation");
        seen[static_cast<size_t>(j)] = 1;
    }
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        const int j = permutation[static_cast<size_t>(i)];
        acc += kl_weight_term(m1.weight(i), m2.weight(j));
        if (m1.weight(i) > 0.0)
            acc += m1.weight(i) * kl_gaussian(m1.component(i), m2.component(j));
    }
    return acc;
}

AssignmentResult hungarian_bound(const Mixture& m1, const Mixture& m2) {
    const int k = m1.size();
    if (m2.size() != k)
        throw std::invalid_argument("hungarian_bound: equal component counts required");
    Eigen::MatrixXd cost(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double c = kl_weight_term(m1.weight(i), m2.weight(j));
            if (std::isfinite(c) && m1.weight(i) > 0.0)
                c += m1.weight(i) * kl_gaussian(m1.component(i), m2.component(j));
            cost(i, j) = std::isfinite(c) ? c : kBigCost;
        }
    AssignmentResult best = min_cost_assignment(cost);
    // Lexicographic refinement among ties: greedily fix the smallest feasible
    // column per row, accepting a candidate iff an optimal completion exists.
    if (k <= 64 && best.value < kBigCost / 2) {
        const double tol = 1e-12 * std::max(1.0, std::fabs(best.value));
        std::vector<int> chosen;
        std::vector<int> free_cols(static_cast<size_t>(k));
        for (int j = 0; j < k; ++j) free_cols[static_cast<size_t>(j)] = j;
        double fixed_cost = 0.0;
        for (int i = 0; i < k; ++i) {
            for (size_t c = 0; c < free_cols.size(); ++c) {
                const int j = free_cols[c];
                double completion = 0.0;
                if (i + 1 < k) {
                    Eigen::MatrixXd sub(k - i - 1, k - i - 1);
                    int sc = 0;
                    for (size_t c2 = 0; c2 < free_cols.size(); ++c2) {
                        if (c2 == c) continue;
                        for (int r = i + 1; r < k; ++r)
                            sub(r - i - 1, sc) = cost(r, free_cols[c2]);
                        ++sc;
                    }
                    completion = min_cost_assignment(sub).value;
                }
                if (fixed_cost + cost(i, j) + completion <= best.value + tol) {
                    fixed_cost += cost(i, j);
                    chosen.push_back(j);
                    free_cols.erase(free_cols.begin() + static_cast<std::ptrdiff_t>(c));
                    break;
                }
            }
        }
        if (static_cast<int>(chosen.size()) == k) best.permutation = chosen;
    }
    best.value = logsum_bound(m1, m2, best.permutation);
    return best;
}

double crot_kl_bound(const Mixture& m1, const Mixture& m2, SolverKind solver,
                     const SinkhornConfig& cfg) {
    GroundSpec spec;
    spec.kind = DistanceKind::kl;
    return crot_distance(m1, m2, spec, solver, cfg).value;
}

double chi2_kl_bound(const Mixture& p, const Mixture& q, double quad_tol) {
    if (p.dim() != 1 || q.dim() != 1)
        throw std::invalid_argument(
            "chi2_kl_bound: 1D mixtures only (use expfam_kl_bound for higher dimension)");
    const auto integrand = [&](double x) {
        const double lp = p.log_pdf1(x);
        if (lp == -kInf) return 0.0;
        return std::exp(2.0 * lp - q.log_pdf1(x));
    };
    const double integral = extended_quadrature(p, q, integrand, quad_tol);
    if (!std::isfinite(integral)) return kInf;
    return std::max(0.0, integral - 1.0);
}

ExpfamBound expfam_kl_bound(const Mixture& m, const Mixture& mprime) {
    const int k = m.size();
    const int kp = mprime.size();
    std::vector<ExpFamilyView> a, b;
    a.reserve(static_cast<size_t>(k));
    b.reserve(static_cast<size_t>(kp));
    for (int i = 0; i < k; ++i) a.push_back(exp_family_view(m.component(i)));
    for (int l = 0; l < kp; ++l) b.push_back(exp_family_view(mprime.component(l)));
    if (a.front().theta.size() != b.front().theta.size())
        throw std::invalid_argument("expfam_kl_bound: dimension mismatch");

    Eigen::VectorXd thbar = Eigen::VectorXd::Zero(b.front().theta.size());
    double fsum = 0.0;
    for (int l = 0; l < kp; ++l) {
        thbar += mprime.weight(l) * b[static_cast<size_t>(l)].theta;
        fsum += mprime.weight(l) * b[static_cast<size_t>(l)].log_normalizer;
    }
    double total = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double w = m.weight(i) * m.weight(j);
            if (w == 0.0) continue;
            const Eigen::VectorXd th =
                a[static_cast<size_t>(i)].theta + a[static_cast<size_t>(j)].theta - thbar;
            if (!in_natural_domain(th)) return {kInf, false};
            const double expo = exp_family_log_normalizer(th) -
                                a[static_cast<size_t>(i)].log_normalizer -
                                a[static_cast<size_t>(j)].log_normalizer + fsum;
            total += w * std::exp(expo);
        }
    return {std::max(0.0, total - 1.0), true};
}

double fdiv_derivative_bound(const Mixture& p, const Mixture& q,
                             const std::function<double(double)>& f,
                             const std::function<double(double)>& fprime, double quad_tol) {
    (void)f;  // the bound uses only the derivative
    if (p.dim() != 1 || q.dim() != 1)
        throw std::invalid_argument("fdiv_derivative_bound: 1D mixtures only");
    const auto integrand = [&](double x) {
        const double lp = p.log_pdf1(x);
        const double lq = q.log_pdf1(x);
        if (lp == -kInf && lq == -kInf) return 0.0;
        const double ratio = std::exp(lq - lp);  // may be 0 or +inf at support edges
        const double deriv = fprime(ratio);
        if (std::isnan(deriv))
            throw NumericalError("fdiv_derivative_bound: generator undefined at ratio " +
                                 std::to_string(ratio));
        return (std::exp(lq) - std::exp(lp)) * deriv;
    };
    return extended_quadrature(p, q, integrand, quad_tol);
}

double gelbrich_lb(const Mixture& m1, const Mixture& m2) {
    const auto [mu1, s1] = mixture_moments(m1);
    const auto [mu2, s2] = mixture_moments(m2);
    const Eigen::MatrixXd r1 = psd_sqrt(s1);
    Eigen::MatrixXd inner = r1 * s2 * r1;
    inner = 0.5 * (inner + inner.transpose()).eval();
    const double w2sq =
        (mu1 - mu2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * psd_sqrt(inner).trace();
    return std::sqrt(std::max(0.0, w2sq));
}

double empirical_w2_ub(const Mixture& m1, const Mixture& m2, int n, double p_order, Rng& rng) {
    if (n < 2) throw std::invalid_argument("empirical_w2_ub: n must be >= 2");
    if (!(p_order >= 1.0)) throw std::invalid_argument("empirical_w2_ub: order must be >= 1");
    const Eigen::MatrixXd x = m1.sample(n, rng);
    const Eigen::MatrixXd y = m2.sample(n, rng);
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost(i, j) = std::pow((x.row(i) - y.row(j)).norm(), p_order);
    // Uniform marginals with equal counts: the exact OT optimum is attained at
    // a permutation (Birkhoff), so the assignment solver is the exact solver.
    const AssignmentResult match = min_cost_assignment(cost);
    return std::pow(match.value / n, 1.0 / p_order);
}

double js_alpha_cap(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("js_alpha_cap: alpha must lie in (0,1)");
    return std::sqrt(-0.5 * std::log1p(-alpha) - 0.5 * std::log(alpha));
}

BoundReport bound_report(const Mixture& m1, const Mixture& m2, const GroundSpec& spec) {
    spec.check();
    BoundReport report;
    report.target = spec.name();
    const auto add = [&](const std::string& name, BoundSide side,
                         const std::function<double()>& fn) {
        Stopwatch watch;
        const double value = fn();
        report.records.push_back({name, value, side, watch.seconds()});
    };
    McConfig mc{spec.mc_samples, spec.seed, 10};
    SinkhornConfig level1{0.0, 1.0, 1000, 1e-10};
    SinkhornConfig level10{0.0, 10.0, 1000, 1e-10};

    switch (spec.kind) {
        case DistanceKind::kl:
        case DistanceKind::tv:
        case DistanceKind::renyi: {
            const McEstimate ref = spec.kind == DistanceKind::kl ? mc_kl(m1, m2, mc)
                                   : spec.kind == DistanceKind::tv
                                       ? tv_mc(m1, m2, mc)
                                       : mc_renyi(m1, m2, spec.alpha, mc);
            report.mc_estimate = ref.estimate;
            report.mc_standard_error = ref.standard_error;
            add("crot_exact", BoundSide::upper,
                [&] { return crot_distance(m1, m2, spec, SolverKind::exact).value; });
            add("crot_sinkhorn_l1", BoundSide::upper,
                [&] { return crot_distance(m1, m2, spec, SolverKind::sinkhorn, level1).value; });
            add("crot_sinkhorn_l10", BoundSide::upper,
                [&] { return crot_distance(m1, m2, spec, SolverKind::sinkhorn, level10).value; });
            add("scub", BoundSide::upper, [&] { return scub(m1, m2, spec); });
            add("max", BoundSide::upper,
                [&] { return max_bound(cost_matrix(m1, m2, spec)); });
            if (spec.kind == DistanceKind::kl) {
                if (m1.size() == m2.size())
                    add("hungarian", BoundSide::upper,
                        [&] { return hungarian_bound(m1, m2).value; });
                if (m1.dim() == 1)
                    add("chi2", BoundSide::upper, [&] { return chi2_kl_bound(m1, m2); });
                if (is_gaussian(m1.component(0)) && is_gaussian(m2.component(0)))
                    add("expfam", BoundSide::upper,
                        [&] { return expfam_kl_bound(m1, m2).value; });
            }
            break;
        }
        case DistanceKind::w2:
        case DistanceKind::w2_squared: {
            const bool squared = spec.kind == DistanceKind::w2_squared;
            // Reference: empirical W_p over three replicates.
            std::vector<double> reps;
            for (int r = 0; r < 3; ++r) {
                Rng rng(derive_seed(spec.seed, 101, static_cast<std::uint64_t>(r)));
                double v = empirical_w2_ub(m1, m2, 500, 2.0, rng);
                reps.push_back(squared ? v * v : v);
            }
            double mean = (reps[0] + reps[1] + reps[2]) / 3.0;
            double ss = 0.0;
            for (double v : reps) ss += (v - mean) * (v - mean);
            report.mc_estimate = mean;
            report.mc_standard_error = std::sqrt(ss / 2.0 / 3.0);
            add("crot_exact", BoundSide::upper,
                [&] { return crot_distance(m1, m2, spec, SolverKind::exact).value; });
            if (!squared) {
                GroundSpec sq = spec;
                sq.kind = DistanceKind::w2_squared;
                add("crot_w2sq_root", BoundSide::upper, [&] {
                    return std::sqrt(crot_distance(m1, m2, sq, SolverKind::exact).value);
                });
            }
            add(squared ? "gelbrich_sq" : "gelbrich", BoundSide::lower, [&] {
                const double g = gelbrich_lb(m1, m2);
                return squared ? g * g : g;
            });
            break;
        }
        case DistanceKind::js_alpha_sqrt: {
            report.mc_estimate = std::sqrt(js_alpha(m1, m2, spec.alpha, spec));
            report.mc_standard_error = 0.0;
            add("cap", BoundSide::upper, [&] { return js_alpha_cap(spec.alpha); });
            add("scub_root", BoundSide::upper, [&] {
                const CostMatrix cm = cost_matrix(m1, m2, spec);
                const Eigen::MatrixXd js = cm.values.array().square();
                return std::sqrt(
                    static_cast<double>(m1.weights().transpose() * js * m2.weights()));
            });
            break;
        }
        case DistanceKind::wasserstein_1d: {
            report.mc_estimate = wasserstein_1d_quantile(m1, m2, spec.p_order);
            report.mc_standard_error = 0.0;
            add("crot_wp_root", BoundSide::upper, [&] {
                const CostMatrix cm = cost_matrix(m1, m2, spec);
                const Eigen::MatrixXd powered =
                    cm.values.array().pow(spec.p_order);
                const TransportPlan plan =
                    solve_exact(m1.weights(), m2.weights(), powered);
                return std::pow(plan.value, 1.0 / spec.p_order);
            });
            break;
        }
    }
    return report;
}

}  // namespace crot
