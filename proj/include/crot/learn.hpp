#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "crot/mixture.hpp"

namespace crot {

struct LearnConfig {
    int components = 10;      // m
    double lambda = 0.005;    // softmin sharpness
    double bandwidth = 1e-6;  // KDE epsilon (squared data units)
    int batch_size = 256;     // n'
    int epochs = 100;
    double step_size = 1e-2;  // Adam base step
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    double variance_floor = 1e-8;  // floor on sigma_j^2 during updates
    bool differentiate_weights = false;  // differentiate through the softmin
    int eval_samples = 2000;             // MC samples for per-epoch kl_eval

    void check() const;
};

struct EpochStats {
    int epoch = 0;
    double objective = 0.0;  // mean minibatch SCROT.KL value over the epoch
    double kl_eval = 0.0;    // kl_eval_bound vs the evaluation KDE (0 if none)
};

struct LearnState {
    Mixture gmm;
    std::vector<EpochStats> trajectory;
    int epochs_run = 0;
    bool aborted = false;  // non-finite objective; gmm is the last finite state
};

// KL(N(x_i, eps I) : q_j) for every batch center x_i and GMM component q_j.
Eigen::MatrixXd kernel_kl_matrix(const Eigen::MatrixXd& centers, double bandwidth,
                                 const Mixture& gmm);

// Row-wise coupling weights w*_ij = (1/n) softmax_j(-lambda KL_ij) where n is
// the number of rows; each row is renormalized so it sums to 1/n.
Eigen::MatrixXd softmin_weights(const Eigen::MatrixXd& kl, double lambda);
Eigen::MatrixXd softmin_weights(const std::vector<Component>& batch, const Mixture& gmm,
                                double lambda);

struct ScrotGradients {
    double value = 0.0;
    Eigen::MatrixXd d_mean;       // m x d
    Eigen::MatrixXd d_log_sigma;  // m x d, sigma = component std deviation
    Eigen::VectorXd d_weight;     // identically zero: alpha is set by the
                                  // column-mass rule, not by descent
    Eigen::VectorXd column_mass;  // sum_i w*_ij
};

// Objective sum_ij w*_ij KL_ij and analytic gradients. With
// differentiate_weights = false (default) w* is treated as constant
// (stop-gradient); otherwise the softmin is differentiated through.
ScrotGradients scrot_kl_objective(const Eigen::MatrixXd& centers, double bandwidth,
                                  const Mixture& gmm, double lambda,
                                  bool differentiate_weights = false);

// Minibatch descent on (mu_j, log sigma_j) against the data KDE; eval_kde, if
// given, is the held-out KDE used for the per-epoch kl_eval trajectory.
LearnState fit_scrot(const Eigen::MatrixXd& data, const LearnConfig& cfg,
                     const Kde* eval_kde = nullptr);

// Diagonal-covariance EM baseline; loglik, if given, receives the
// per-iteration log-likelihood trace.
Mixture fit_em(const Eigen::MatrixXd& data, int m, std::uint64_t seed,
               std::vector<double>* loglik = nullptr);

struct PcaResult {
    Eigen::MatrixXd projected;    // n x D
    Eigen::MatrixXd basis;        // d x D, columns ordered by decreasing variance
    Eigen::VectorXd mean;         // d
    Eigen::VectorXd eigenvalues;  // D, non-increasing
};

PcaResult pca_fit_transform(const Eigen::MatrixXd& data, int target_dim);

}  // namespace crot
