#include "crot/ground.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "crot/numerics.hpp"
#include "crot/rng.hpp"

namespace crot {

namespace {

double parse_real(const std::string& text, const std::string& what) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("ground spec: bad " + what + " '" + text + "'");
    }
    if (pos != text.size())
        throw std::invalid_argument("ground spec: bad " + what + " '" + text + "'");
    return v;
}

std::string format_real(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

// Squared diagonal-Gaussian W2.
double w2sq_gaussian(const Component& p, const Component& q) {
    const GaussianDiag a = as_gaussian_diag(p);
    const GaussianDiag b = as_gaussian_diag(q);
    if (a.mean.size() != b.mean.size())
        throw std::invalid_argument("w2_gaussian: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index d = 0; d < a.mean.size(); ++d) {
        const double dm = a.mean[d] - b.mean[d];
        const double ds = std::sqrt(a.var[d]) - std::sqrt(b.var[d]);
        acc += dm * dm + ds * ds;
    }
    return acc;
}

}  // namespace

GroundSpec GroundSpec::parse(const std::string& text) {
    GroundSpec spec;
    const size_t colon = text.find(':');
    const std::string base = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (base == "kl") {
        spec.kind = DistanceKind::kl;
    } else if (base == "tv") {
        spec.kind = DistanceKind::tv;
    } else if (base == "w2") {
        spec.kind = DistanceKind::w2;
    } else if (base == "w2sq") {
        spec.kind = DistanceKind::w2_squared;
    } else if (base == "renyi") {
        spec.kind = DistanceKind::renyi;
        spec.alpha = parse_real(arg, "renyi order");
    } else if (base == "js") {
        spec.kind = DistanceKind::js_alpha_sqrt;
        spec.alpha = parse_real(arg, "js order");
    } else if (base == "w1d") {
        spec.kind = DistanceKind::wasserstein_1d;
        spec.p_order = parse_real(arg, "wasserstein order");
    } else {
        throw std::invalid_argument("unknown ground distance '" + text + "'");
    }
    if ((colon != std::string::npos) !=
        (spec.kind == DistanceKind::renyi || spec.kind == DistanceKind::js_alpha_sqrt ||
         spec.kind == DistanceKind::wasserstein_1d))
        throw std::invalid_argument("unknown ground distance '" + text + "'");
    spec.check();
    return spec;
}

std::string GroundSpec::name() const {
    switch (kind) {
        case DistanceKind::kl: return "kl";
        case DistanceKind::tv: return "tv";
        case DistanceKind::w2: return "w2";
        case DistanceKind::w2_squared: return "w2sq";
        case DistanceKind::renyi: return "renyi:" + format_real(alpha);
        case DistanceKind::js_alpha_sqrt: return "js:" + format_real(alpha);
        case DistanceKind::wasserstein_1d: return "w1d:" + format_real(p_order);
    }
    throw std::logic_error("unreachable");
}

void GroundSpec::check() const {
    if (kind == DistanceKind::renyi || kind == DistanceKind::js_alpha_sqrt)
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("ground spec: order must lie in (0,1)");
    if (kind == DistanceKind::wasserstein_1d && !(p_order >= 1.0))
        throw std::invalid_argument("ground spec: wasserstein order must be >= 1");
    if (mc_samples < 2) throw std::invalid_argument("ground spec: mc_samples must be >= 2");
    if (!(quad_tol > 0.0)) throw std::invalid_argument("ground spec: quad_tol must be positive");
}

bool GroundSpec::is_symmetric() const {
    switch (kind) {
        case DistanceKind::kl:
        case DistanceKind::renyi: return false;
        case DistanceKind::js_alpha_sqrt: return alpha == 0.5;
        default: return true;
    }
}

double kl_gaussian(const Component& p, const Component& q) {
    const GaussianDiag a = as_gaussian_diag(p);
    const GaussianDiag b = as_gaussian_diag(q);
    if (a.mean.size() != b.mean.size())
        throw std::invalid_argument("kl_gaussian: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index d = 0; d < a.mean.size(); ++d) {
        const double dm = a.mean[d] - b.mean[d];
        acc += 0.5 * (a.var[d] / b.var[d] + dm * dm / b.var[d] - 1.0 +
                      std::log(b.var[d] / a.var[d]));
    }
    return std::max(0.0, acc);
}

double w2_gaussian(const Component& p, const Component& q) {
    return std::sqrt(w2sq_gaussian(p, q));
}

double tv_gaussian_1d(const Component& p, const Component& q) {
    const GaussianDiag a = as_gaussian_diag(p);
    const GaussianDiag b = as_gaussian_diag(q);
    if (a.mean.size() != 1 || b.mean.size() != 1)
        throw std::invalid_argument("tv_gaussian_1d: one-dimensional Gaussians only");
    const double m1 = a.mean[0], v1 = a.var[0];
    const double m2 = b.mean[0], v2 = b.var[0];
    if (m1 == m2 && v1 == v2) return 0.0;
    if (v1 == v2)
        return std::clamp(std::erf(std::fabs(m1 - m2) / (2.0 * std::sqrt(2.0 * v1))), 0.0, 1.0);
    // Crossing points of the two densities: roots of a x^2 + b x + c = 0.
    const double qa = 1.0 / v1 - 1.0 / v2;
    const double qb = 2.0 * (m2 / v2 - m1 / v1);
    const double qc = m1 * m1 / v1 - m2 * m2 / v2 + std::log(v1 / v2);
    const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
    const double root = std::sqrt(disc);
    const double shifted = qb >= 0.0 ? -(qb + root) / 2.0 : -(qb - root) / 2.0;
    double r1 = shifted / qa;
    double r2 = shifted == 0.0 ? r1 : qc / shifted;
    if (r1 > r2) std::swap(r1, r2);
    const auto gap = [&](double x) {
        return 0.5 * (std::erf((x - m1) / std::sqrt(2.0 * v1)) -
                      std::erf((x - m2) / std::sqrt(2.0 * v2)));
    };
    const double g1 = gap(r1);
    const double g2 = gap(r2);
    return std::clamp(0.5 * (std::fabs(g1) + std::fabs(g2 - g1) + std::fabs(g2)), 0.0, 1.0);
}

double renyi_gaussian(const Component& p, const Component& q, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("renyi_gaussian: alpha must lie in (0,1)");
    const GaussianDiag a = as_gaussian_diag(p);
    const GaussianDiag b = as_gaussian_diag(q);
    if (a.mean.size() != b.mean.size())
        throw std::invalid_argument("renyi_gaussian: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index d = 0; d < a.mean.size(); ++d) {
        const double vs = (1.0 - alpha) * a.var[d] + alpha * b.var[d];
        const double dm = a.mean[d] - b.mean[d];
        acc += alpha * dm * dm / (2.0 * vs) +
               (std::log(vs) - (1.0 - alpha) * std::log(a.var[d]) -
                alpha * std::log(b.var[d])) /
                   (2.0 * (1.0 - alpha));
    }
    return std::max(0.0, acc);
}

std::pair<double, double> integration_window(const Mixture& p, const Mixture& q,
                                             double tail_mass) {
    auto [plo, phi] = p.bulk_interval1();
    auto [qlo, qhi] = q.bulk_interval1();
    double lo = std::min(plo, qlo);
    double hi = std::max(phi, qhi);
    double span = std::max(hi - lo, 1.0);
    for (int i = 0; i < 60 && p.cdf1(lo) + q.cdf1(lo) > tail_mass; ++i) {
        lo -= span;
        span *= 2.0;
    }
    span = std::max(hi - lo, 1.0);
    for (int i = 0; i < 60 && (1.0 - p.cdf1(hi)) + (1.0 - q.cdf1(hi)) > tail_mass; ++i) {
        hi += span;
        span *= 2.0;
    }
    return {lo, hi};
}

double tv_numeric_1d(const Component& p, const Component& q, double quad_tol) {
    if (dim(p) != 1 || dim(q) != 1)
        throw std::invalid_argument("tv_numeric_1d: one-dimensional components only");
    const Mixture mp = Mixture::single(p);
    const Mixture mq = Mixture::single(q);
    auto [lo, hi] = integration_window(mp, mq);
    const auto f = [&](double x) {
        return 0.5 * std::fabs(std::exp(log_pdf1(p, x)) - std::exp(log_pdf1(q, x)));
    };
    const QuadResult r = integrate(f, lo, hi, quad_tol, 1e-12);
    return std::clamp(r.value, 0.0, 1.0);
}

double js_alpha(const Mixture& p, const Mixture& q, double alpha, const GroundSpec& cfg) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("js_alpha: alpha must lie in (0,1)");
    if (p.dim() != q.dim()) throw std::invalid_argument("js_alpha: dimension mismatch");
    const double la = std::log(alpha);
    const double l1a = std::log1p(-alpha);
    if (p.dim() == 1) {
        auto [lo, hi] = integration_window(p, q);
        const auto f = [&](double x) {
            const double lp = p.log_pdf1(x);
            const double lq = q.log_pdf1(x);
            const double lmix = log_add(l1a + lp, la + lq);
            double acc = 0.0;
            if (lp > -std::numeric_limits<double>::infinity())
                acc += 0.5 * std::exp(lp) * (lp - lmix);
            if (lq > -std::numeric_limits<double>::infinity())
                acc += 0.5 * std::exp(lq) * (lq - lmix);
            return acc;
        };
        const QuadResult r = integrate(f, lo, hi, cfg.quad_tol, 1e-12);
        return std::max(0.0, r.value);
    }
    // Multivariate: seeded Monte Carlo with one stream per side.
    Rng rng(cfg.seed);
    double acc = 0.0;
    for (int i = 0; i < cfg.mc_samples; ++i) {
        const Eigen::VectorXd x = p.sample(rng);
        const double lp = p.log_pdf(x);
        acc += 0.5 * (lp - log_add(l1a + lp, la + q.log_pdf(x)));
        const Eigen::VectorXd y = q.sample(rng);
        const double lq = q.log_pdf(y);
        acc += 0.5 * (lq - log_add(l1a + p.log_pdf(y), la + lq));
    }
    return std::max(0.0, acc / cfg.mc_samples);
}

double wasserstein_1d_quantile(const Mixture& p, const Mixture& q, double p_order) {
    if (p.dim() != 1 || q.dim() != 1)
        throw std::invalid_argument("wasserstein_1d_quantile: one-dimensional inputs only");
    if (!(p_order >= 1.0))
        throw std::invalid_argument("wasserstein_1d_quantile: order must be >= 1");
    static thread_local std::vector<double> nodes, weights;
    if (nodes.empty()) gauss_legendre(256, nodes, weights);
    double acc = 0.0;
    for (size_t k = 0; k < nodes.size(); ++k) {
        const double u = 0.5 * (nodes[k] + 1.0);
        const double gap = std::fabs(p.quantile1(u) - q.quantile1(u));
        acc += 0.5 * weights[k] * std::pow(gap, p_order);
    }
    return std::pow(acc, 1.0 / p_order);
}

double ground_distance(const Component& p, const Component& q, const GroundSpec& spec) {
    switch (spec.kind) {
        case DistanceKind::kl: return kl_gaussian(p, q);
        case DistanceKind::w2: return w2_gaussian(p, q);
        case DistanceKind::w2_squared: return w2sq_gaussian(p, q);
        case DistanceKind::tv:
            if (dim(p) == 1 && dim(q) == 1)
                return is_gaussian(p) && is_gaussian(q) ? tv_gaussian_1d(p, q)
                                                        : tv_numeric_1d(p, q, spec.quad_tol);
            {
                McConfig mc{spec.mc_samples, spec.seed, 10};
                return tv_mc(Mixture::single(p), Mixture::single(q), mc).estimate;
            }
        case DistanceKind::renyi: return renyi_gaussian(p, q, spec.alpha);
        case DistanceKind::js_alpha_sqrt:
            return std::sqrt(js_alpha(Mixture::single(p), Mixture::single(q), spec.alpha, spec));
        case DistanceKind::wasserstein_1d:
            return wasserstein_1d_quantile(Mixture::single(p), Mixture::single(q), spec.p_order);
    }
    throw std::logic_error("unreachable");
}

CostMatrix cost_matrix(const Mixture& m1, const Mixture& m2, const GroundSpec& spec) {
    spec.check();
    CostMatrix cm;
    cm.spec = spec;
    cm.values.resize(m1.size(), m2.size());
    for (int i = 0; i < m1.size(); ++i) {
        for (int j = 0; j < m2.size(); ++j) {
            GroundSpec entry = spec;
            entry.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j));
            cm.values(i, j) = ground_distance(m1.component(i), m2.component(j), entry);
        }
    }
    return cm;
}

}  // namespace crot
