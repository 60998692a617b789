#include "crot/expfam.hpp"

#include <cmath>
#include <stdexcept>

namespace crot {

bool in_natural_domain(const Eigen::VectorXd& theta) {
    if (theta.size() < 2 || theta.size() % 2 != 0) return false;
    for (Eigen::Index d = 0; d < theta.size(); d += 2)
        if (!(theta[d + 1] < 0.0)) return false;
    return true;
}

double exp_family_log_normalizer(const Eigen::VectorXd& theta) {
    if (!in_natural_domain(theta))
        throw std::invalid_argument("exp_family_log_normalizer: theta outside natural domain");
    double acc = 0.0;
    for (Eigen::Index d = 0; d < theta.size(); d += 2) {
        const double t1 = theta[d];
        const double t2 = theta[d + 1];
        acc += -t1 * t1 / (4.0 * t2) + 0.5 * std::log(M_PI / -t2);
    }
    return acc;
}

ExpFamilyView exp_family_view(const Component& c) {
    const GaussianDiag g = as_gaussian_diag(c);  // throws for non-Gaussian variants
    Eigen::VectorXd theta(2 * g.mean.size());
    for (Eigen::Index d = 0; d < g.mean.size(); ++d) {
        theta[2 * d] = g.mean[d] / g.var[d];
        theta[2 * d + 1] = -0.5 / g.var[d];
    }
    return ExpFamilyView{theta, exp_family_log_normalizer(theta)};
}

Component exp_family_component(const Eigen::VectorXd& theta) {
    if (!in_natural_domain(theta))
        throw std::invalid_argument("exp_family_component: theta outside natural domain");
    const Eigen::Index d = theta.size() / 2;
    Eigen::VectorXd mean(d);
    Eigen::VectorXd var(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        var[i] = -0.5 / theta[2 * i + 1];
        mean[i] = theta[2 * i] * var[i];
    }
    return make_gaussian_diag(std::move(mean), std::move(var));
}

}  // namespace crot
