#include "crot/mixture.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "crot/numerics.hpp"

namespace crot {

Mixture::Mixture(Eigen::VectorXd weights, std::vector<Component> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("mixture must have >= 1 components");
    if (weights_.size() != static_cast<Eigen::Index>(components_.size()))
        throw std::invalid_argument("mixture weight/component count mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0))
            throw std::invalid_argument("mixture weights must be non-negative");
        total += weights_[i];
    }
    if (std::fabs(total - 1.0) > 1e-6)
        throw std::invalid_argument("mixture weights must sum to 1 (within 1e-6)");
    weights_ /= total;
    const Family f = family_of(components_.front());
    const int d = crot::dim(components_.front());
    for (const Component& c : components_) {
        validate(c);
        if (family_of(c) != f)
            throw std::invalid_argument("mixture components must share one family");
        if (crot::dim(c) != d)
            throw std::invalid_argument("mixture components must share one dimension");
    }
}

Mixture Mixture::single(Component c) {
    return Mixture(Eigen::VectorXd::Ones(1), {std::move(c)});
}

Mixture Mixture::uniform(std::vector<Component> components) {
    const auto k = static_cast<Eigen::Index>(components.size());
    if (k == 0) throw std::invalid_argument("mixture must have >= 1 components");
    return Mixture(Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k)),
                   std::move(components));
}

int Mixture::dim() const { return crot::dim(components_.front()); }

Family Mixture::family() const { return family_of(components_.front()); }

double Mixture::log_pdf(const Eigen::VectorXd& x) const {
    std::vector<double> terms(components_.size());
    for (size_t i = 0; i < components_.size(); ++i) {
        const double lw = std::log(weights_[static_cast<Eigen::Index>(i)]);
        terms[i] = lw == -std::numeric_limits<double>::infinity()
                       ? lw
                       : lw + crot::log_pdf(components_[i], x);
    }
    return log_sum_exp(terms);
}

double Mixture::log_pdf1(double x) const {
    std::vector<double> terms(components_.size());
    for (size_t i = 0; i < components_.size(); ++i) {
        const double lw = std::log(weights_[static_cast<Eigen::Index>(i)]);
        terms[i] = lw == -std::numeric_limits<double>::infinity()
                       ? lw
                       : lw + crot::log_pdf1(components_[i], x);
    }
    return log_sum_exp(terms);
}

Eigen::VectorXd Mixture::sample(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    size_t idx = components_.size() - 1;
    for (size_t i = 0; i < components_.size(); ++i) {
        acc += weights_[static_cast<Eigen::Index>(i)];
        if (u < acc) {
            idx = i;
            break;
        }
    }
    return crot::sample(components_[idx], rng);
}

Eigen::MatrixXd Mixture::sample(int count, Rng& rng) const {
    if (count < 1) throw std::invalid_argument("sample count must be >= 1");
    Eigen::MatrixXd out(count, dim());
    for (int i = 0; i < count; ++i) out.row(i) = sample(rng).transpose();
    return out;
}

double Mixture::cdf1(double x) const {
    if (dim() != 1) throw std::invalid_argument("cdf1: mixture is not one-dimensional");
    double acc = 0.0;
    for (size_t i = 0; i < components_.size(); ++i)
        acc += weights_[static_cast<Eigen::Index>(i)] * crot::cdf1(components_[i], x);
    return acc;
}

std::pair<double, double> Mixture::bulk_interval1(double tail_sigmas) const {
    if (dim() != 1) throw std::invalid_argument("bulk_interval1: mixture is not one-dimensional");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Component& c : components_) {
        auto [a, b] = crot::bulk_interval1(c, tail_sigmas);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    return {lo, hi};
}

double Mixture::quantile1(double u, double tol) const {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile1: u must lie in (0,1)");
    auto [lo, hi] = bulk_interval1(12.0);
    if (lo == hi) hi = lo + 1.0;
    return bisect_increasing([this](double x) { return cdf1(x); }, u, lo, hi, tol);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> mixture_moments(const Mixture& m) {
    if (!is_gaussian(m.component(0)))
        throw std::invalid_argument("mixture_moments: Gaussian mixtures only");
    const int d = m.dim();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < m.size(); ++i) {
        const GaussianDiag g = as_gaussian_diag(m.component(i));
        const double w = m.weight(i);
        mean += w * g.mean;
        second += w * (Eigen::MatrixXd(g.var.asDiagonal()) + g.mean * g.mean.transpose());
    }
    Eigen::MatrixXd cov = second - mean * mean.transpose();
    cov = 0.5 * (cov + cov.transpose());  // enforce exact symmetry
    return {mean, cov};
}

Kde kde_build(const Eigen::MatrixXd& points, double bandwidth) {
    const auto n = points.rows();
    if (n < 1) throw std::invalid_argument("kde_build: empty point set");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("kde_build: bandwidth must be positive");
    std::vector<Component> comps;
    comps.reserve(static_cast<size_t>(n));
    const Eigen::VectorXd var = Eigen::VectorXd::Constant(points.cols(), bandwidth);
    for (Eigen::Index i = 0; i < n; ++i)
        comps.push_back(make_gaussian_diag(points.row(i).transpose(), var));
    Kde kde{Mixture::uniform(std::move(comps)), bandwidth, static_cast<int>(n)};
    return kde;
}

}  // namespace crot
