#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

#include "crot/estimators.hpp"
#include "crot/mixture.hpp"

namespace crot {

enum class DistanceKind { kl, w2_squared, w2, tv, renyi, js_alpha_sqrt, wasserstein_1d };

// Ground-distance selection plus estimator settings, matching the CLI flag
// grammar kl|tv|w2|w2sq|renyi:<alpha>|js:<alpha>|w1d:<p>.
struct GroundSpec {
    DistanceKind kind = DistanceKind::kl;
    double alpha = 0.5;    // renyi / js order, in (0,1)
    double p_order = 1.0;  // wasserstein_1d order, >= 1
    int mc_samples = 5000;
    double quad_tol = 1e-8;
    std::uint64_t seed = 0;

    static GroundSpec parse(const std::string& text);
    std::string name() const;
    void check() const;
    bool is_symmetric() const;
};

struct CostMatrix {
    Eigen::MatrixXd values;  // k1 x k2, finite and >= 0
    GroundSpec spec;
};

// Closed forms between components.
double kl_gaussian(const Component& p, const Component& q);
double w2_gaussian(const Component& p, const Component& q);
double tv_gaussian_1d(const Component& p, const Component& q);
double renyi_gaussian(const Component& p, const Component& q, double alpha);

// Deterministic numerical estimates.
double tv_numeric_1d(const Component& p, const Component& q, double quad_tol = 1e-8);
double js_alpha(const Mixture& p, const Mixture& q, double alpha, const GroundSpec& cfg);
double wasserstein_1d_quantile(const Mixture& p, const Mixture& q, double p_order);

// Interval covering both supports up to the requested one-sided tail mass,
// starting from the union of 12-sigma bulk intervals.
std::pair<double, double> integration_window(const Mixture& p, const Mixture& q,
                                             double tail_mass = 1e-13);

double ground_distance(const Component& p, const Component& q, const GroundSpec& spec);
CostMatrix cost_matrix(const Mixture& m1, const Mixture& m2, const GroundSpec& spec);

}  // namespace crot
