#pragma once

#include <Eigen/Dense>

#include "crot/component.hpp"

namespace crot {

// Natural-parameter view of a Gaussian component under the per-dimension
// (x, x^2) sufficient-statistic convention. theta stores interleaved pairs
// (theta1_d, theta2_d) = (mu_d/v_d, -1/(2 v_d)); the natural domain requires
// every theta2_d < 0. The log-normalizer factorizes over dimensions:
//   F(theta) = sum_d [ -theta1_d^2/(4 theta2_d) + 0.5 log(pi / -theta2_d) ].
struct ExpFamilyView {
    Eigen::VectorXd theta;
    double log_normalizer = 0.0;
};

bool in_natural_domain(const Eigen::VectorXd& theta);

// F(theta); throws std::invalid_argument outside the natural domain.
double exp_family_log_normalizer(const Eigen::VectorXd& theta);

// Gaussian components only (gaussian_diag / gaussian_1d).
ExpFamilyView exp_family_view(const Component& c);

// Inverse map theta -> gaussian_diag component.
Component exp_family_component(const Eigen::VectorXd& theta);

}  // namespace crot
