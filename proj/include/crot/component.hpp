#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <variant>

#include "crot/rng.hpp"

namespace crot {

// Parameters below this are rejected at construction; silently clamping would
// hide caller bugs.
inline constexpr double kVarianceFloor = 1e-12;

struct GaussianDiag {
    Eigen::VectorXd mean;
    Eigen::VectorXd var;  // per-dimension variances
};

struct Gaussian1d {
    double mu = 0.0;
    double sigma = 1.0;  // standard deviation
};

struct GammaDist {
    double shape = 1.0;  // k
    double scale = 1.0;  // theta
};

struct RayleighDist {
    double scale = 1.0;  // sigma
};

using Component = std::variant<GaussianDiag, Gaussian1d, GammaDist, RayleighDist>;

enum class Family { gaussian_diag, gaussian_1d, gamma, rayleigh };

Family family_of(const Component& c);
const std::string& family_name(Family f);
Family family_from_name(const std::string& name);

int dim(const Component& c);
bool is_gaussian(const Component& c);

// Throws std::invalid_argument when parameters violate the positivity floor
// or dimensions disagree.
void validate(const Component& c);

// Validating constructors.
Component make_gaussian_diag(Eigen::VectorXd mean, Eigen::VectorXd var);
Component make_gaussian_1d(double mu, double sigma);
Component make_gamma(double shape, double scale);
Component make_rayleigh(double scale);

double log_pdf(const Component& c, const Eigen::VectorXd& x);
double log_pdf1(const Component& c, double x);

Eigen::VectorXd sample(const Component& c, Rng& rng);
double sample1(const Component& c, Rng& rng);

// 1D helpers; throw for multivariate components.
double cdf1(const Component& c, double x);
double quantile1(const Component& c, double u, double tol = 1e-12);
double mean1(const Component& c);
double var1(const Component& c);

// Interval carrying essentially all of the component's mass: the support
// boundary where one exists, otherwise mean +/- tail_sigmas standard
// deviations.
std::pair<double, double> bulk_interval1(const Component& c, double tail_sigmas = 12.0);

// gaussian_1d components viewed as 1-dimensional gaussian_diag; throws for
// gamma/rayleigh.
GaussianDiag as_gaussian_diag(const Component& c);

// Differential entropy of a diagonal Gaussian.
double gaussian_entropy(const GaussianDiag& g);

}  // namespace crot
