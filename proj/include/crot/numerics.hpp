#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace crot {

// A computation left the numerically trustworthy regime (non-convergence,
// NaN in an iterative scheme, ...). Distinct from std::invalid_argument,
// which is reserved for bad inputs.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double log_sum_exp(std::span<const double> values);
double log_add(double a, double b);

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    bool converged = false;
    int intervals = 0;
};

// Globally adaptive Gauss-Kronrod (G7, K15) integration of f over [a, b].
// Splits the interval with the largest error estimate until the total error
// drops below max(abs_tol, rel_tol * |value|) or max_intervals is reached.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-10, double abs_tol = 1e-12,
                     int max_intervals = 4000);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Root of monotone increasing cdf(x) = target on [lo, hi] by bisection.
double bisect_increasing(const std::function<double(double)>& cdf, double target,
                         double lo, double hi, double tol = 1e-12);

}  // namespace crot
