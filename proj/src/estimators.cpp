#include "crot/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "crot/numerics.hpp"
#include "crot/rng.hpp"

namespace crot {

namespace {

// Standard error of the overall mean from per-batch means.
double batch_standard_error(const std::vector<double>& batch_means) {
    const auto b = static_cast<double>(batch_means.size());
    double mean = 0.0;
    for (double v : batch_means) mean += v;
    mean /= b;
    double ss = 0.0;
    for (double v : batch_means) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (b - 1.0) / b);
}

}  // namespace

void McConfig::check() const {
    if (batches < 2) throw std::invalid_argument("McConfig: batches must be >= 2");
    if (samples < batches) throw std::invalid_argument("McConfig: samples must be >= batches");
}

McEstimate mc_kl(const Mixture& p, const Mixture& q, const McConfig& cfg) {
    cfg.check();
    if (p.dim() != q.dim()) throw std::invalid_argument("mc_kl: dimension mismatch");
    Rng rng(cfg.seed);
    const int per_batch = cfg.samples / cfg.batches;
    const int m = per_batch * cfg.batches;
    std::vector<double> means(static_cast<size_t>(cfg.batches), 0.0);
    double total = 0.0;
    for (int b = 0; b < cfg.batches; ++b) {
        double acc = 0.0;
        for (int i = 0; i < per_batch; ++i) {
            const Eigen::VectorXd x = p.sample(rng);
            acc += p.log_pdf(x) - q.log_pdf(x);
        }
        means[static_cast<size_t>(b)] = acc / per_batch;
        total += acc;
    }
    return {total / m, batch_standard_error(means), m};
}

McEstimate mc_renyi(const Mixture& p, const Mixture& q, double alpha, const McConfig& cfg) {
    cfg.check();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("mc_renyi: alpha must lie in (0,1)");
    if (p.dim() != q.dim()) throw std::invalid_argument("mc_renyi: dimension mismatch");
    Rng rng(cfg.seed);
    const int per_batch = cfg.samples / cfg.batches;
    const int m = per_batch * cfg.batches;
    // Terms (1-alpha)(log q - log p) accumulated per batch in log domain.
    std::vector<double> batch_logsum(static_cast<size_t>(cfg.batches));
    std::vector<double> terms(static_cast<size_t>(per_batch));
    for (int b = 0; b < cfg.batches; ++b) {
        for (int i = 0; i < per_batch; ++i) {
            const Eigen::VectorXd x = p.sample(rng);
            terms[static_cast<size_t>(i)] = (1.0 - alpha) * (q.log_pdf(x) - p.log_pdf(x));
        }
        batch_logsum[static_cast<size_t>(b)] = log_sum_exp(terms);
    }
    const double log_mean = log_sum_exp(batch_logsum) - std::log(static_cast<double>(m));
    const double estimate = log_mean / (alpha - 1.0);
    // Delta method: Var(log S) ~ Var(S)/S^2, batched on the linear scale
    // relative to the overall mean to stay in a safe floating range.
    std::vector<double> ratios(static_cast<size_t>(cfg.batches));
    for (int b = 0; b < cfg.batches; ++b)
        ratios[static_cast<size_t>(b)] =
            std::exp(batch_logsum[static_cast<size_t>(b)] -
                     std::log(static_cast<double>(per_batch)) - log_mean);
    const double se_ratio = batch_standard_error(ratios);
    return {estimate, se_ratio / std::fabs(alpha - 1.0), m};
}

McEstimate tv_mc(const Mixture& p, const Mixture& q, const McConfig& cfg) {
    cfg.check();
    if (p.dim() != q.dim()) throw std::invalid_argument("tv_mc: dimension mismatch");
    Rng rng(cfg.seed);
    const int per_batch = cfg.samples / cfg.batches;
    const int m = per_batch * cfg.batches;
    std::vector<double> means(static_cast<size_t>(cfg.batches), 0.0);
    double total = 0.0;
    for (int b = 0; b < cfg.batches; ++b) {
        double acc = 0.0;
        for (int i = 0; i < per_batch; ++i) {
            const Eigen::VectorXd x = p.sample(rng);
            acc += std::tanh(0.5 * std::fabs(p.log_pdf(x) - q.log_pdf(x)));
            const Eigen::VectorXd y = q.sample(rng);
            acc += std::tanh(0.5 * std::fabs(p.log_pdf(y) - q.log_pdf(y)));
        }
        means[static_cast<size_t>(b)] = acc / (2.0 * per_batch);
        total += acc;
    }
    return {total / (2.0 * m), batch_standard_error(means), m};
}

McEstimate kl_eval_bound(const Kde& kde, const Mixture& q, const McConfig& cfg) {
    cfg.check();
    if (!is_gaussian(q.component(0)))
        throw std::invalid_argument("kl_eval_bound: q must be a Gaussian mixture");
    if (kde.mixture.dim() != q.dim())
        throw std::invalid_argument("kl_eval_bound: dimension mismatch");
    const int d = kde.mixture.dim();
    const double h_uniform = std::log(static_cast<double>(kde.count));
    const double h_kernel =
        0.5 * d * std::log(2.0 * M_PI * M_E * kde.bandwidth);
    Rng rng(cfg.seed);
    const int per_batch = cfg.samples / cfg.batches;
    const int m = per_batch * cfg.batches;
    std::vector<double> means(static_cast<size_t>(cfg.batches), 0.0);
    double total = 0.0;
    for (int b = 0; b < cfg.batches; ++b) {
        double acc = 0.0;
        for (int i = 0; i < per_batch; ++i) {
            const Eigen::VectorXd x = kde.mixture.sample(rng);
            acc += q.log_pdf(x);
        }
        means[static_cast<size_t>(b)] = acc / per_batch;
        total += acc;
    }
    return {-h_uniform - h_kernel - total / m, batch_standard_error(means), m};
}

}  // namespace crot
