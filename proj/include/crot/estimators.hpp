#pragma once

#include <cstdint>

#include "crot/mixture.hpp"

namespace crot {

struct McConfig {
    int samples = 5000;  // m, per sampled side
    std::uint64_t seed = 0;
    int batches = 10;  // batch-means standard error

    void check() const;  // samples >= batches >= 2
};

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    int samples = 0;
};

// (1/m) sum_i [log p(x_i) - log q(x_i)], x_i ~ p.
McEstimate mc_kl(const Mixture& p, const Mixture& q, const McConfig& cfg);

// Importance form (1/(alpha-1)) log((1/m) sum_i (q(x_i)/p(x_i))^{1-alpha}),
// x_i ~ p, accumulated in log domain; delta-method standard error.
McEstimate mc_renyi(const Mixture& p, const Mixture& q, double alpha, const McConfig& cfg);

// Symmetric two-sample estimator of total variation: the pooled average of
// tanh(r/2) over m draws from p and m from q, with r = |log p - log q|.
McEstimate tv_mc(const Mixture& p, const Mixture& q, const McConfig& cfg);

inline McEstimate mc_tv(const Mixture& p, const Mixture& q, const McConfig& cfg) {
    return tv_mc(p, q, cfg);
}

// Entropy-decomposition lower bound on KL(kde : q):
//   -log(n) - H(N(., eps I)) - (1/m) sum_i log q(x_i),  x_i ~ kde.
McEstimate kl_eval_bound(const Kde& kde, const Mixture& q, const McConfig& cfg);

}  // namespace crot
