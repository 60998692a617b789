#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "crot/ground.hpp"
#include "crot/mixture.hpp"
#include "crot/rng.hpp"
#include "crot/transport.hpp"

namespace crot {

// Exact minimum-cost perfect matching on a square finite cost matrix
// (Jonker-Volgenant style shortest augmenting paths).
struct AssignmentResult {
    double value = 0.0;
    std::vector<int> permutation;  // row i matched to column permutation[i]
};
AssignmentResult min_cost_assignment(const Eigen::MatrixXd& cost);

// Product-coupling value sum_ij alpha_i beta_j D(p_i, q_j); valid as a
// divergence upper bound for separately convex kinds (kl, tv, renyi, js).
double scub(const Mixture& m1, const Mixture& m2, const GroundSpec& spec);

double max_bound(const CostMatrix& m);

// Log-sum-inequality bound for a fixed pairing sigma:
//   sum_i [alpha_i log(alpha_i / beta_sigma(i)) + alpha_i KL(p_i : q_sigma(i))].
double logsum_bound(const Mixture& m1, const Mixture& m2, const std::vector<int>& permutation);

// Minimum of logsum_bound over permutations via exact assignment; among
// equally optimal permutations the lexicographically smallest is returned
// (refined up to k = 64, beyond which the solver's deterministic pick stands).
AssignmentResult hungarian_bound(const Mixture& m1, const Mixture& m2);

// H_KL (exact) or S_KL (sinkhorn) as a KL upper bound.
double crot_kl_bound(const Mixture& m1, const Mixture& m2, SolverKind solver,
                     const SinkhornConfig& cfg = {});

// KL(p:q) <= chi^2(p:q) = int p^2/q - 1 by adaptive quadrature over an
// adaptively extended window; +inf when the integral diverges.
double chi2_kl_bound(const Mixture& p, const Mixture& q, double quad_tol = 1e-10);

// Closed-form exponential-family relaxation of the chi^2 bound:
//   sum_ij w_i w_j exp(F(th_i+th_j-thbar') - F(th_i) - F(th_j)
//                      + sum_l w'_l F(th'_l)) - 1.
// A natural-domain violation yields +inf with domain_ok = false.
struct ExpfamBound {
    double value = 0.0;
    bool domain_ok = true;
};
ExpfamBound expfam_kl_bound(const Mixture& m, const Mixture& mprime);

// I_f(p:q) <= int (q - p) f'(q/p); the generator is passed as (f, f') and
// only f' enters the bound.
double fdiv_derivative_bound(const Mixture& p, const Mixture& q,
                             const std::function<double(double)>& f,
                             const std::function<double(double)>& fprime,
                             double quad_tol = 1e-10);

// Moment-matched Gaussian W2 lower bound (full mixture covariance).
double gelbrich_lb(const Mixture& m1, const Mixture& m2);

// n-sample empirical W_p: exact OT between uniform empirical measures.
double empirical_w2_ub(const Mixture& m1, const Mixture& m2, int n, double p_order, Rng& rng);

// C_alpha = sqrt(-log(1-alpha)/2 - log(alpha)/2).
double js_alpha_cap(double alpha);

enum class BoundSide { lower, upper };

struct BoundRecord {
    std::string name;
    double value = 0.0;
    BoundSide side = BoundSide::upper;
    double seconds = 0.0;
};

struct BoundReport {
    std::string target;  // ground-distance name the bounds refer to
    std::vector<BoundRecord> records;
    double mc_estimate = 0.0;  // reference estimate (0 standard error if exact)
    double mc_standard_error = 0.0;
};

BoundReport bound_report(const Mixture& m1, const Mixture& m2, const GroundSpec& spec);

}  // namespace crot
