#include "crot/component.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crot/numerics.hpp"

namespace crot {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

Family family_of(const Component& c) {
    if (std::holds_alternative<GaussianDiag>(c)) return Family::gaussian_diag;
    if (std::holds_alternative<Gaussian1d>(c)) return Family::gaussian_1d;
    if (std::holds_alternative<GammaDist>(c)) return Family::gamma;
    return Family::rayleigh;
}

const std::string& family_name(Family f) {
    static const std::string names[] = {"gaussian_diag", "gaussian_1d", "gamma", "rayleigh"};
    return names[static_cast<int>(f)];
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::gaussian_diag, Family::gaussian_1d, Family::gamma, Family::rayleigh})
        if (family_name(f) == name) return f;
    throw std::invalid_argument("unknown component family '" + name + "'");
}

int dim(const Component& c) {
    if (const auto* g = std::get_if<GaussianDiag>(&c)) return static_cast<int>(g->mean.size());
    return 1;
}

bool is_gaussian(const Component& c) {
    return std::holds_alternative<GaussianDiag>(c) || std::holds_alternative<Gaussian1d>(c);
}

void validate(const Component& c) {
    if (const auto* g = std::get_if<GaussianDiag>(&c)) {
        if (g->mean.size() != g->var.size())
            throw std::invalid_argument("gaussian_diag: mean and var dimensions differ");
        if (g->mean.size() < 1)
            throw std::invalid_argument("gaussian_diag: dimension must be >= 1");
        for (Eigen::Index d = 0; d < g->var.size(); ++d)
            if (!(g->var[d] >= kVarianceFloor))
                throw std::invalid_argument("gaussian_diag: variance below floor at dim " +
                                            std::to_string(d));
    } else if (const auto* g1 = std::get_if<Gaussian1d>(&c)) {
        if (!(g1->sigma > 0.0) || !(g1->sigma * g1->sigma >= kVarianceFloor))
            throw std::invalid_argument(
                "gaussian_1d: sigma must be positive with sigma^2 above the variance floor");
    } else if (const auto* ga = std::get_if<GammaDist>(&c)) {
        if (!(ga->shape >= kVarianceFloor) || !(ga->scale >= kVarianceFloor))
            throw std::invalid_argument("gamma: shape and scale must be positive");
    } else {
        const auto& r = std::get<RayleighDist>(c);
        if (!(r.scale > 0.0) || !(r.scale * r.scale >= kVarianceFloor))
            throw std::invalid_argument(
                "rayleigh: scale must be positive with scale^2 above the variance floor");
    }
}

Component make_gaussian_diag(Eigen::VectorXd mean, Eigen::VectorXd var) {
    Component c = GaussianDiag{std::move(mean), std::move(var)};
    validate(c);
    return c;
}

Component make_gaussian_1d(double mu, double sigma) {
    Component c = Gaussian1d{mu, sigma};
    validate(c);
    return c;
}

Component make_gamma(double shape, double scale) {
    Component c = GammaDist{shape, scale};
    validate(c);
    return c;
}

Component make_rayleigh(double scale) {
    Component c = RayleighDist{scale};
    validate(c);
    return c;
}

double log_pdf1(const Component& c, double x) {
    switch (family_of(c)) {
        case Family::gaussian_diag: {
            const auto& g = std::get<GaussianDiag>(c);
            if (g.mean.size() != 1)
                throw std::invalid_argument("log_pdf1: component is not one-dimensional");
            const double z = x - g.mean[0];
            return -0.5 * (kLog2Pi + std::log(g.var[0]) + z * z / g.var[0]);
        }
        case Family::gaussian_1d: {
            const auto& g = std::get<Gaussian1d>(c);
            const double z = (x - g.mu) / g.sigma;
            return -0.5 * (kLog2Pi + z * z) - std::log(g.sigma);
        }
        case Family::gamma: {
            const auto& g = std::get<GammaDist>(c);
            if (x <= 0.0) return kNegInf;
            return (g.shape - 1.0) * std::log(x) - x / g.scale - g.shape * std::log(g.scale) -
                   std::lgamma(g.shape);
        }
        case Family::rayleigh: {
            const auto& r = std::get<RayleighDist>(c);
            if (x <= 0.0) return kNegInf;
            const double s2 = r.scale * r.scale;
            return std::log(x / s2) - x * x / (2.0 * s2);
        }
    }
    throw std::logic_error("unreachable");
}

double log_pdf(const Component& c, const Eigen::VectorXd& x) {
    if (const auto* g = std::get_if<GaussianDiag>(&c)) {
        if (x.size() != g->mean.size())
            throw std::invalid_argument("log_pdf: point dimension mismatch");
        double acc = 0.0;
        for (Eigen::Index d = 0; d < x.size(); ++d) {
            const double z = x[d] - g->mean[d];
            acc += -0.5 * (kLog2Pi + std::log(g->var[d]) + z * z / g->var[d]);
        }
        return acc;
    }
    if (x.size() != 1) throw std::invalid_argument("log_pdf: point dimension mismatch");
    return log_pdf1(c, x[0]);
}

double sample1(const Component& c, Rng& rng) {
    switch (family_of(c)) {
        case Family::gaussian_diag: {
            const auto& g = std::get<GaussianDiag>(c);
            if (g.mean.size() != 1)
                throw std::invalid_argument("sample1: component is not one-dimensional");
            return g.mean[0] + std::sqrt(g.var[0]) * rng.normal();
        }
        case Family::gaussian_1d: {
            const auto& g = std::get<Gaussian1d>(c);
            return g.mu + g.sigma * rng.normal();
        }
        case Family::gamma: {
            const auto& g = std::get<GammaDist>(c);
            return g.scale * rng.gamma(g.shape);
        }
        case Family::rayleigh: {
            const auto& r = std::get<RayleighDist>(c);
            return r.scale * std::sqrt(-2.0 * std::log(rng.uniform_pos()));
        }
    }
    throw std::logic_error("unreachable");
}

Eigen::VectorXd sample(const Component& c, Rng& rng) {
    if (const auto* g = std::get_if<GaussianDiag>(&c)) {
        Eigen::VectorXd x(g->mean.size());
        for (Eigen::Index d = 0; d < x.size(); ++d)
            x[d] = g->mean[d] + std::sqrt(g->var[d]) * rng.normal();
        return x;
    }
    Eigen::VectorXd x(1);
    x[0] = sample1(c, rng);
    return x;
}

double cdf1(const Component& c, double x) {
    switch (family_of(c)) {
        case Family::gaussian_diag: {
            const auto& g = std::get<GaussianDiag>(c);
            if (g.mean.size() != 1)
                throw std::invalid_argument("cdf1: component is not one-dimensional");
            return 0.5 * (1.0 + std::erf((x - g.mean[0]) / std::sqrt(2.0 * g.var[0])));
        }
        case Family::gaussian_1d: {
            const auto& g = std::get<Gaussian1d>(c);
            return 0.5 * (1.0 + std::erf((x - g.mu) / (g.sigma * std::sqrt(2.0))));
        }
        case Family::gamma: {
            const auto& g = std::get<GammaDist>(c);
            if (x <= 0.0) return 0.0;
            return boost::math::gamma_p(g.shape, x / g.scale);
        }
        case Family::rayleigh: {
            const auto& r = std::get<RayleighDist>(c);
            if (x <= 0.0) return 0.0;
            return -std::expm1(-x * x / (2.0 * r.scale * r.scale));
        }
    }
    throw std::logic_error("unreachable");
}

double mean1(const Component& c) {
    switch (family_of(c)) {
        case Family::gaussian_diag: {
            const auto& g = std::get<GaussianDiag>(c);
            if (g.mean.size() != 1)
                throw std::invalid_argument("mean1: component is not one-dimensional");
            return g.mean[0];
        }
        case Family::gaussian_1d:
            return std::get<Gaussian1d>(c).mu;
        case Family::gamma: {
            const auto& g = std::get<GammaDist>(c);
            return g.shape * g.scale;
        }
        case Family::rayleigh:
            return std::get<RayleighDist>(c).scale * std::sqrt(M_PI / 2.0);
    }
    throw std::logic_error("unreachable");
}

double var1(const Component& c) {
    switch (family_of(c)) {
        case Family::gaussian_diag: {
            const auto& g = std::get<GaussianDiag>(c);
            if (g.mean.size() != 1)
                throw std::invalid_argument("var1: component is not one-dimensional");
            return g.var[0];
        }
        case Family::gaussian_1d: {
            const double s = std::get<Gaussian1d>(c).sigma;
            return s * s;
        }
        case Family::gamma: {
            const auto& g = std::get<GammaDist>(c);
            return g.shape * g.scale * g.scale;
        }
        case Family::rayleigh: {
            const double s = std::get<RayleighDist>(c).scale;
            return (2.0 - M_PI / 2.0) * s * s;
        }
    }
    throw std::logic_error("unreachable");
}

std::pair<double, double> bulk_interval1(const Component& c, double tail_sigmas) {
    const double m = mean1(c);
    const double s = std::sqrt(var1(c));
    double lo = m - tail_sigmas * s;
    double hi = m + tail_sigmas * s;
    const Family f = family_of(c);
    if (f == Family::gamma || f == Family::rayleigh) lo = std::max(lo, 0.0);
    return {lo, hi};
}

double quantile1(const Component& c, double u, double tol) {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile1: u must lie in (0,1)");
    auto [lo, hi] = bulk_interval1(c, 12.0);
    if (lo == hi) hi = lo + 1.0;
    return bisect_increasing([&](double x) { return cdf1(c, x); }, u, lo, hi, tol);
}

GaussianDiag as_gaussian_diag(const Component& c) {
    if (const auto* g = std::get_if<GaussianDiag>(&c)) return *g;
    if (const auto* g1 = std::get_if<Gaussian1d>(&c)) {
        GaussianDiag g;
        g.mean = Eigen::VectorXd::Constant(1, g1->mu);
        g.var = Eigen::VectorXd::Constant(1, g1->sigma * g1->sigma);
        return g;
    }
    throw std::invalid_argument("component is not Gaussian");
}

double gaussian_entropy(const GaussianDiag& g) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < g.var.size(); ++d)
        acc += 0.5 * (1.0 + kLog2Pi + std::log(g.var[d]));
    return acc;
}

}  // namespace crot
