#include "crot/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "crot/estimators.hpp"
#include "crot/ground.hpp"
#include "crot/numerics.hpp"
#include "crot/rng.hpp"

namespace crot {

namespace {

// Farthest-point seeding: first center drawn from the data, each further
// center the point farthest from the chosen set. Deterministic given the seed.
std::vector<Eigen::Index> farthest_point_rows(const Eigen::MatrixXd& data, int m, Rng& rng) {
    const Eigen::Index n = data.rows();
    std::vector<Eigen::Index> picked;
    picked.reserve(static_cast<std::size_t>(m));
    picked.push_back(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
    Eigen::VectorXd min_sq =
        (data.rowwise() - data.row(picked[0])).rowwise().squaredNorm();
    while (static_cast<int>(picked.size()) < m) {
        Eigen::Index best = 0;
        min_sq.maxCoeff(&best);
        picked.push_back(best);
        min_sq = min_sq.cwiseMin(
            (data.rowwise() - data.row(best)).rowwise().squaredNorm());
    }
    return picked;
}

Eigen::VectorXd column_variances(const Eigen::MatrixXd& data, double floor) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const double denom = std::max<double>(1.0, static_cast<double>(data.rows() - 1));
    Eigen::VectorXd var =
        ((data.rowwise() - mean).array().square().colwise().sum() / denom)
            .matrix()
            .transpose();
    return var.cwiseMax(floor);
}

Mixture assemble_gmm(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& means,
                     const Eigen::MatrixXd& log_sigma) {
    std::vector<Component> comps;
    comps.reserve(static_cast<std::size_t>(means.rows()));
    for (Eigen::Index j = 0; j < means.rows(); ++j) {
        const Eigen::VectorXd var =
            (2.0 * log_sigma.row(j).transpose().array()).exp().matrix();
        comps.push_back(make_gaussian_diag(means.row(j).transpose(), var));
    }
    return Mixture(alpha, comps);
}

void check_learn_inputs(const Eigen::MatrixXd& data, int m) {
    if (data.rows() < 1 || data.cols() < 1)
        throw std::invalid_argument("learn: data must be a non-empty n x d matrix");
    if (m < 1) throw std::invalid_argument("learn: component count must be >= 1");
    if (m > data.rows())
        throw std::invalid_argument("learn: more components than data points");
    if (!data.allFinite())
        throw std::invalid_argument("learn: data contains non-finite values");
}

// Squared-distance row sums (x_i - mu)^2 / v accumulated per dimension; keeps
// Eigen broadcasting out of the hot path.
Eigen::ArrayXd scaled_sq_rows(const Eigen::MatrixXd& points, const Eigen::VectorXd& mu,
                              const Eigen::VectorXd& var) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(points.rows());
    for (Eigen::Index t = 0; t < points.cols(); ++t)
        acc += (points.col(t).array() - mu(t)).square() / var(t);
    return acc;
}

}  // namespace

void LearnConfig::check() const {
    if (components < 1) throw std::invalid_argument("LearnConfig: components must be >= 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("LearnConfig: lambda must be >= 0");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("LearnConfig: bandwidth must be > 0");
    if (batch_size < 1) throw std::invalid_argument("LearnConfig: batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("LearnConfig: epochs must be >= 0");
    if (!(step_size > 0.0)) throw std::invalid_argument("LearnConfig: step_size must be > 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw std::invalid_argument("LearnConfig: Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("LearnConfig: adam_eps must be > 0");
    if (!(variance_floor > 0.0))
        throw std::invalid_argument("LearnConfig: variance_floor must be > 0");
    if (eval_samples < 2) throw std::invalid_argument("LearnConfig: eval_samples must be >= 2");
}

Eigen::MatrixXd kernel_kl_matrix(const Eigen::MatrixXd& centers, double bandwidth,
                                 const Mixture& gmm) {
    if (gmm.family() != Family::gaussian_diag && gmm.family() != Family::gaussian_1d)
        throw std::invalid_argument("kernel_kl_matrix: model must be Gaussian");
    if (centers.cols() != gmm.dim())
        throw std::invalid_argument("kernel_kl_matrix: dimension mismatch");
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("kernel_kl_matrix: bandwidth must be > 0");
    const Eigen::Index m = gmm.size();
    Eigen::MatrixXd kl(centers.rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const GaussianDiag g = as_gaussian_diag(gmm.component(static_cast<int>(j)));
        // KL(N(x, eps I) : N(mu, v)) = 0.5 sum_d [eps/v + (x-mu)^2/v - 1 + log(v/eps)]
        const double constant =
            0.5 * (bandwidth * g.var.array().inverse() + (g.var.array() / bandwidth).log() -
                   1.0)
                      .sum();
        kl.col(j) =
            (0.5 * scaled_sq_rows(centers, g.mean, g.var) + constant).matrix();
    }
    return kl;
}

Eigen::MatrixXd softmin_weights(const Eigen::MatrixXd& kl, double lambda) {
    if (kl.rows() < 1 || kl.cols() < 1)
        throw std::invalid_argument("softmin_weights: empty divergence matrix");
    if (!(lambda >= 0.0)) throw std::invalid_argument("softmin_weights: lambda must be >= 0");
    if (!kl.allFinite())
        throw std::invalid_argument("softmin_weights: non-finite divergence entries");
    const double n = static_cast<double>(kl.rows());
    Eigen::MatrixXd w(kl.rows(), kl.cols());
    for (Eigen::Index i = 0; i < kl.rows(); ++i) {
        const Eigen::ArrayXd logits = -lambda * kl.row(i).transpose().array();
        Eigen::ArrayXd row = (logits - logits.maxCoeff()).exp();
        row /= row.sum();  // softmax; renormalized so the row mass is 1/n
        w.row(i) = (row / n).matrix().transpose();
    }
    return w;
}

Eigen::MatrixXd softmin_weights(const std::vector<Component>& batch, const Mixture& gmm,
                                double lambda) {
    if (batch.empty()) throw std::invalid_argument("softmin_weights: empty batch");
    const GroundSpec spec = GroundSpec::parse("kl");
    Eigen::MatrixXd kl(static_cast<Eigen::Index>(batch.size()),
                       static_cast<Eigen::Index>(gmm.size()));
    for (Eigen::Index i = 0; i < kl.rows(); ++i)
        for (Eigen::Index j = 0; j < kl.cols(); ++j)
            kl(i, j) = ground_distance(batch[static_cast<std::size_t>(i)],
                                       gmm.component(static_cast<int>(j)), spec);
    return softmin_weights(kl, lambda);
}

ScrotGradients scrot_kl_objective(const Eigen::MatrixXd& centers, double bandwidth,
                                  const Mixture& gmm, double lambda,
                                  bool differentiate_weights) {
    const Eigen::MatrixXd kl = kernel_kl_matrix(centers, bandwidth, gmm);
    const Eigen::MatrixXd w = softmin_weights(kl, lambda);
    const Eigen::Index m = kl.cols();
    const Eigen::Index d = centers.cols();

    ScrotGradients out;
    out.value = (w.array() * kl.array()).sum();
    out.d_mean = Eigen::MatrixXd::Zero(m, d);
    out.d_log_sigma = Eigen::MatrixXd::Zero(m, d);
    out.d_weight = Eigen::VectorXd::Zero(m);  // alpha follows the column-mass rule
    out.column_mass = w.colwise().sum().transpose();

    // Stop-gradient: d value / d KL_ij = w_ij. Differentiating through the
    // softmin multiplies in (1 - lambda (KL_ij - rowavg_i)) with rowavg the
    // softmin-weighted row average.
    Eigen::MatrixXd coeff = w;
    if (differentiate_weights) {
        const double n = static_cast<double>(kl.rows());
        const Eigen::VectorXd row_avg =
            ((w.array() * kl.array()).rowwise().sum() * n).matrix();
        coeff = (w.array() * (1.0 - lambda * (kl.colwise() - row_avg).array())).matrix();
    }

    for (Eigen::Index j = 0; j < m; ++j) {
        const GaussianDiag g = as_gaussian_diag(gmm.component(static_cast<int>(j)));
        const Eigen::MatrixXd diff = centers.rowwise() - g.mean.transpose();  // x_i - mu_j
        const Eigen::VectorXd cj = coeff.col(j);
        // dKL_ij/dmu_jd = (mu_jd - x_id)/v_jd
        out.d_mean.row(j) =
            (-(cj.transpose() * diff).array() / g.var.transpose().array()).matrix();
        // dKL_ij/dlog sigma_jd = 1 - (eps + (x_id - mu_jd)^2)/v_jd
        const Eigen::MatrixXd sq = (diff.array().square() + bandwidth).matrix();
        out.d_log_sigma.row(j) =
            (cj.sum() - (cj.transpose() * sq).array() / g.var.transpose().array()).matrix();
    }
    return out;
}

LearnState fit_scrot(const Eigen::MatrixXd& data, const LearnConfig& cfg,
                     const Kde* eval_kde) {
    cfg.check();
    check_learn_inputs(data, cfg.components);
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    const Eigen::Index m = cfg.components;
    Rng rng(cfg.seed);

    Eigen::MatrixXd means(m, d);
    const auto seed_rows = farthest_point_rows(data, cfg.components, rng);
    for (Eigen::Index j = 0; j < m; ++j)
        means.row(j) = data.row(seed_rows[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd var0 = column_variances(data, cfg.variance_floor);
    Eigen::MatrixXd log_sigma =
        (0.5 * var0.array().log()).matrix().transpose().replicate(m, 1);
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));

    Eigen::MatrixXd m_mu = Eigen::MatrixXd::Zero(m, d), v_mu = Eigen::MatrixXd::Zero(m, d);
    Eigen::MatrixXd m_ls = Eigen::MatrixXd::Zero(m, d), v_ls = Eigen::MatrixXd::Zero(m, d);
    long step = 0;
    const double log_sigma_floor = 0.5 * std::log(cfg.variance_floor);

    LearnState state{assemble_gmm(alpha, means, log_sigma), {}, 0, false};
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates with the session generator keeps trajectories
        // reproducible across platforms.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.index(i)]);

        const Eigen::MatrixXd means_before = means;
        const Eigen::MatrixXd log_sigma_before = log_sigma;
        double obj_sum = 0.0;
        int batches = 0;
        bool finite = true;

        for (Eigen::Index start = 0; start < n && finite; start += cfg.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
            Eigen::MatrixXd batch(len, d);
            for (Eigen::Index r = 0; r < len; ++r)
                batch.row(r) = data.row(order[static_cast<std::size_t>(start + r)]);

            const Mixture gmm = assemble_gmm(alpha, means, log_sigma);
            const ScrotGradients g = scrot_kl_objective(batch, cfg.bandwidth, gmm,
                                                        cfg.lambda, cfg.differentiate_weights);
            if (!std::isfinite(g.value) || !g.d_mean.allFinite() ||
                !g.d_log_sigma.allFinite()) {
                finite = false;
                break;
            }
            obj_sum += g.value;
            ++batches;

            ++step;
            const double corr1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            auto adam = [&](Eigen::MatrixXd& theta, Eigen::MatrixXd& m1, Eigen::MatrixXd& m2,
                            const Eigen::MatrixXd& grad) {
                m1 = cfg.adam_beta1 * m1 + (1.0 - cfg.adam_beta1) * grad;
                m2 = (cfg.adam_beta2 * m2.array() +
                      (1.0 - cfg.adam_beta2) * grad.array().square())
                         .matrix();
                theta = (theta.array() - cfg.step_size * (m1.array() / corr1) /
                                             ((m2.array() / corr2).sqrt() + cfg.adam_eps))
                            .matrix();
            };
            adam(means, m_mu, v_mu, g.d_mean);
            adam(log_sigma, m_ls, v_ls, g.d_log_sigma);
            log_sigma = log_sigma.cwiseMax(log_sigma_floor);
        }

        if (!finite || !means.allFinite() || !log_sigma.allFinite()) {
            // Divergence: report the last finite state and stop.
            means = means_before;
            log_sigma = log_sigma_before;
            state.gmm = assemble_gmm(alpha, means, log_sigma);
            state.aborted = true;
            break;
        }

        // Mixture weights from the full-coupling column masses.
        const Eigen::MatrixXd full_kl =
            kernel_kl_matrix(data, cfg.bandwidth, assemble_gmm(alpha, means, log_sigma));
        const Eigen::MatrixXd full_w = softmin_weights(full_kl, cfg.lambda);
        alpha = full_w.colwise().sum().transpose();
        alpha /= alpha.sum();

        state.gmm = assemble_gmm(alpha, means, log_sigma);
        state.epochs_run = epoch;

        EpochStats stats;
        stats.epoch = epoch;
        stats.objective = batches > 0 ? obj_sum / batches : 0.0;
        if (eval_kde != nullptr) {
            McConfig mc;
            mc.samples = cfg.eval_samples;
            mc.seed = derive_seed(cfg.seed, 0x6b1du, static_cast<std::uint64_t>(epoch));
            stats.kl_eval = kl_eval_bound(*eval_kde, state.gmm, mc).estimate;
        }
        state.trajectory.push_back(stats);
    }
    return state;
}

Mixture fit_em(const Eigen::MatrixXd& data, int m, std::uint64_t seed,
               std::vector<double>* loglik) {
    check_learn_inputs(data, m);
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    const double floor = 1e-8;
    Rng rng(seed);

    Eigen::MatrixXd means(m, d);
    const auto seed_rows = farthest_point_rows(data, m, rng);
    for (int j = 0; j < m; ++j)
        means.row(j) = data.row(seed_rows[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd var0 = column_variances(data, floor);
    Eigen::MatrixXd var = var0.transpose().replicate(m, 1);
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(m, 1.0 / m);

    if (loglik != nullptr) loglik->clear();
    double previous = -std::numeric_limits<double>::infinity();
    constexpr double kLog2PiLocal = 1.8378770664093454835606594728112;

    for (int iter = 0; iter < 200; ++iter) {
        // E-step in log domain.
        Eigen::MatrixXd logp(n, m);
        for (int j = 0; j < m; ++j) {
            const double norm =
                -0.5 * (static_cast<double>(d) * kLog2PiLocal +
                        var.row(j).array().log().sum());
            logp.col(j) = (-0.5 * scaled_sq_rows(data, means.row(j).transpose(),
                                                 var.row(j).transpose()) +
                           norm + std::log(alpha(j)))
                              .matrix();
        }
        Eigen::VectorXd lse(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double peak = logp.row(i).maxCoeff();
            lse(i) = peak + std::log((logp.row(i).array() - peak).exp().sum());
        }
        const double ll = lse.sum();
        if (loglik != nullptr) loglik->push_back(ll);

        const Eigen::MatrixXd resp = ((logp.colwise() - lse).array().exp()).matrix();

        // M-step with variance floor; starved clusters re-seed at the point
        // the current model likes least.
        for (int j = 0; j < m; ++j) {
            const double nj = resp.col(j).sum();
            if (nj < 1e-10 * static_cast<double>(n)) {
                Eigen::Index worst = 0;
                lse.minCoeff(&worst);
                means.row(j) = data.row(worst);
                var.row(j) = var0.transpose();
                alpha(j) = 1.0 / static_cast<double>(n);
                continue;
            }
            alpha(j) = nj / static_cast<double>(n);
            means.row(j) = (resp.col(j).transpose() * data) / nj;
            var.row(j) = ((resp.col(j).transpose() *
                           (data.rowwise() - means.row(j)).array().square().matrix()) /
                          nj)
                             .cwiseMax(floor);
        }
        alpha /= alpha.sum();

        if (iter > 0 &&
            std::abs(ll - previous) <= 1e-6 * std::max(1.0, std::abs(previous)))
            break;
        previous = ll;
    }

    std::vector<Component> comps;
    comps.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        comps.push_back(
            make_gaussian_diag(means.row(j).transpose(), var.row(j).transpose()));
    return Mixture(alpha, comps);
}

PcaResult pca_fit_transform(const Eigen::MatrixXd& data, int target_dim) {
    if (data.rows() < 2) throw std::invalid_argument("pca: need at least two rows");
    if (target_dim < 1 || target_dim > data.cols())
        throw std::invalid_argument("pca: target dimension out of range");
    PcaResult out;
    out.mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - out.mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(data.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NumericalError("pca: eigendecomposition failed");

    const Eigen::Index dcols = data.cols();
    out.basis.resize(dcols, target_dim);
    out.eigenvalues.resize(target_dim);
    for (int k = 0; k < target_dim; ++k) {
        Eigen::VectorXd v = eig.eigenvectors().col(dcols - 1 - k);
        // Deterministic orientation: largest-magnitude coordinate positive.
        Eigen::Index peak = 0;
        v.cwiseAbs().maxCoeff(&peak);
        if (v(peak) < 0.0) v = -v;
        out.basis.col(k) = v;
        out.eigenvalues(k) = eig.eigenvalues()(dcols - 1 - k);
    }
    out.projected = centered * out.basis;
    return out;
}

}  // namespace crot
