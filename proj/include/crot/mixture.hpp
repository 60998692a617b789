#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "crot/component.hpp"
#include "crot/rng.hpp"

namespace crot {

// Finite mixture: weights alpha plus a homogeneous list of components.
// Weights must be non-negative; a sum within 1e-6 of one is renormalized on
// construction, anything further off is rejected.
class Mixture {
  public:
    Mixture(Eigen::VectorXd weights, std::vector<Component> components);

    static Mixture single(Component c);
    static Mixture uniform(std::vector<Component> components);

    int size() const { return static_cast<int>(components_.size()); }
    int dim() const;
    Family family() const;

    const Eigen::VectorXd& weights() const { return weights_; }
    const std::vector<Component>& components() const { return components_; }
    const Component& component(int i) const { return components_.at(static_cast<size_t>(i)); }
    double weight(int i) const { return weights_[i]; }

    double log_pdf(const Eigen::VectorXd& x) const;
    double log_pdf1(double x) const;

    // Ancestral sampling: component index from the weights, then the component.
    Eigen::VectorXd sample(Rng& rng) const;
    Eigen::MatrixXd sample(int count, Rng& rng) const;  // count x dim

    // 1D mixtures only.
    double cdf1(double x) const;
    double quantile1(double u, double tol = 1e-12) const;
    std::pair<double, double> bulk_interval1(double tail_sigmas = 12.0) const;

  private:
    Eigen::VectorXd weights_;
    std::vector<Component> components_;
};

// Exact mixture mean and full covariance for Gaussian mixtures.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> mixture_moments(const Mixture& m);

// Kernel density estimator: uniform-weight Gaussian mixture with one kernel
// N(x_i, eps I) per data point.
struct Kde {
    Mixture mixture;
    double bandwidth = 0.0;  // eps, squared data units
    int count = 0;           // n
};

Kde kde_build(const Eigen::MatrixXd& points, double bandwidth);

}  // namespace crot
