#pragma once

#include <Eigen/Dense>

#include "crot/ground.hpp"
#include "crot/mixture.hpp"

namespace crot {

enum class SolverKind { exact, sinkhorn };

struct TransportPlan {
    Eigen::MatrixXd coupling;  // k1 x k2, non-negative, marginals (alpha, beta)
    double value = 0.0;        // <W, M>
    SolverKind solver = SolverKind::exact;
    int iterations = 0;
    double marginal_residual = 0.0;
};

struct SinkhornConfig {
    // Exactly one of gamma / lambda_level must be positive; lambda_level k
    // means gamma = median(M)/k resolved against the instance cost matrix.
    double gamma = 0.0;
    double lambda_level = 0.0;
    int max_iterations = 1000;
    double stop_threshold = 1e-10;

    void check() const;
};

double median_entry(const Eigen::MatrixXd& m);
double resolve_gamma(const SinkhornConfig& cfg, const Eigen::MatrixXd& m);

// Globally optimal coupling over U(alpha, beta) by the transportation simplex
// (network simplex on the bipartite formulation). Deterministic: Dantzig
// entering rule with lowest-(i,j) tie-break, lexicographic leaving rule.
TransportPlan solve_exact(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                          const Eigen::MatrixXd& m);

// Log-domain Sinkhorn-Knopp scaling of exp(-M/gamma). Non-convergence within
// max_iterations is not an error (residual is recorded); NaN in the scaling is.
// The reported value is <W, M> without the entropy term.
TransportPlan solve_sinkhorn(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                             const Eigen::MatrixXd& m, const SinkhornConfig& cfg);

struct CrotResult {
    double value = 0.0;  // H_D (exact) or S_D (sinkhorn)
    TransportPlan plan;
    CostMatrix cost;
};

CrotResult crot_distance(const Mixture& m1, const Mixture& m2, const GroundSpec& spec,
                         SolverKind solver, const SinkhornConfig& cfg = {});

// Coupling floor inequalities max_j w_ij >= alpha_i/k2 and
// max_i w_ij >= beta_j/k1, checked within 1e-12 against the plan's own
// marginals.
bool coupling_floor_check(const TransportPlan& plan);

}  // namespace crot
