#include "crot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crot/numerics.hpp"

namespace crot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd checked_weights(const Eigen::VectorXd& w, const char* side) {
    if (w.size() < 1) throw std::invalid_argument(std::string(side) + ": empty weight vector");
    double total = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (!(w[i] >= 0.0))
            throw std::invalid_argument(std::string(side) + ": weights must be non-negative");
        total += w[i];
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(side) + ": weights must sum to 1 (within 1e-9)");
    return w / total;
}

void check_cost(const Eigen::MatrixXd& m, Eigen::Index k1, Eigen::Index k2) {
    if (m.rows() != k1 || m.cols() != k2)
        throw std::invalid_argument("cost matrix shape does not match the weight vectors");
    if (!m.allFinite()) throw std::invalid_argument("cost matrix must be finite");
}

double plan_residual(const Eigen::MatrixXd& w, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b) {
    const double row = (w.rowwise().sum() - a).cwiseAbs().maxCoeff();
    const double col = (w.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
    return std::max(row, col);
}

}  // namespace

void SinkhornConfig::check() const {
    if (gamma < 0.0 || lambda_level < 0.0)
        throw std::invalid_argument("sinkhorn: gamma and lambda_level must be non-negative");
    if ((gamma > 0.0) == (lambda_level > 0.0))
        throw std::invalid_argument("sinkhorn: set exactly one of gamma / lambda_level");
    if (max_iterations < 1) throw std::invalid_argument("sinkhorn: max_iterations must be >= 1");
    if (!(stop_threshold > 0.0))
        throw std::invalid_argument("sinkhorn: stop_threshold must be positive");
}

double median_entry(const Eigen::MatrixXd& m) {
    std::vector<double> entries(m.data(), m.data() + m.size());
    std::sort(entries.begin(), entries.end());
    const size_t n = entries.size();
    if (n == 0) throw std::invalid_argument("median_entry: empty matrix");
    return n % 2 == 1 ? entries[n / 2] : 0.5 * (entries[n / 2 - 1] + entries[n / 2]);
}

double resolve_gamma(const SinkhornConfig& cfg, const Eigen::MatrixXd& m) {
    cfg.check();
    if (cfg.gamma > 0.0) return cfg.gamma;
    const double med = median_entry(m);
    if (med > 0.0) return med / cfg.lambda_level;
    const double mx = m.maxCoeff();
    if (mx > 0.0) return mx / cfg.lambda_level;
    return 1.0;  // all-zero cost: any gamma yields the product coupling
}

TransportPlan solve_exact(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                          const Eigen::MatrixXd& m) {
    const Eigen::VectorXd a = checked_weights(alpha, "solve_exact alpha");
    const Eigen::VectorXd b = checked_weights(beta, "solve_exact beta");
    const int k1 = static_cast<int>(a.size());
    const int k2 = static_cast<int>(b.size());
    check_cost(m, k1, k2);

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(k1, k2);
    std::vector<std::vector<int8_t>> basic(k1, std::vector<int8_t>(k2, 0));
    std::vector<std::vector<int>> row_adj(k1), col_adj(k2);
    const auto add_basis = [&](int i, int j) {
        basic[i][j] = 1;
        row_adj[i].push_back(j);
        col_adj[j].push_back(i);
    };
    const auto drop_basis = [&](int i, int j) {
        basic[i][j] = 0;
        std::erase(row_adj[i], j);
        std::erase(col_adj[j], i);
    };

    // Northwest-corner initial basic feasible solution: exactly k1+k2-1 basic
    // cells (possibly with zero allocation).
    {
        Eigen::VectorXd ar = a, br = b;
        int i = 0, j = 0;
        while (true) {
            const double t = std::min(ar[i], br[j]);
            x(i, j) = t;
            add_basis(i, j);
            ar[i] -= t;
            br[j] -= t;
            if (i == k1 - 1 && j == k2 - 1) break;
            if (i < k1 - 1 && ar[i] <= br[j])
                ++i;
            else if (j < k2 - 1)
                ++j;
            else
                ++i;
        }
    }

    const double tol = 1e-11 * std::max(1.0, m.cwiseAbs().maxCoeff());
    std::vector<double> u(static_cast<size_t>(k1)), v(static_cast<size_t>(k2));
    std::vector<int8_t> seen_u(static_cast<size_t>(k1)), seen_v(static_cast<size_t>(k2));
    int pivots = 0;
    const int pivot_cap = 1000 * (k1 + k2) + 10000;
    while (true) {
        // Duals from the basis tree, rooted at row 0.
        std::fill(seen_u.begin(), seen_u.end(), 0);
        std::fill(seen_v.begin(), seen_v.end(), 0);
        u[0] = 0.0;
        seen_u[0] = 1;
        std::deque<int> queue{0};  // rows are 0..k1-1, cols are k1..k1+k2-1
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node < k1) {
                for (int j : row_adj[node])
                    if (!seen_v[static_cast<size_t>(j)]) {
                        v[static_cast<size_t>(j)] = m(node, j) - u[static_cast<size_t>(node)];
                        seen_v[static_cast<size_t>(j)] = 1;
                        queue.push_back(k1 + j);
                    }
            } else {
                const int j = node - k1;
                for (int i : col_adj[j])
                    if (!seen_u[static_cast<size_t>(i)]) {
                        u[static_cast<size_t>(i)] = m(i, j) - v[static_cast<size_t>(j)];
                        seen_u[static_cast<size_t>(i)] = 1;
                        queue.push_back(i);
                    }
            }
        }

        // Dantzig entering rule; first hit in row-major order wins ties.
        double best = -tol;
        int bi = -1, bj = -1;
        for (int i = 0; i < k1; ++i)
            for (int j = 0; j < k2; ++j) {
                if (basic[i][j]) continue;
                const double r = m(i, j) - u[static_cast<size_t>(i)] - v[static_cast<size_t>(j)];
                if (r < best) {
                    best = r;
                    bi = i;
                    bj = j;
                }
            }
        if (bi < 0) break;
        if (++pivots > pivot_cap)
            throw NumericalError("solve_exact: pivot budget exhausted (cycling?)");

        // Unique tree path from row bi to column bj; with the entering cell it
        // closes the pivot cycle.
        std::vector<int> parent(static_cast<size_t>(k1 + k2), -1);
        std::deque<int> bfs{bi};
        parent[static_cast<size_t>(bi)] = bi;
        while (!bfs.empty()) {
            const int node = bfs.front();
            bfs.pop_front();
            if (node == k1 + bj) break;
            if (node < k1) {
                for (int j : row_adj[node])
                    if (parent[static_cast<size_t>(k1 + j)] < 0) {
                        parent[static_cast<size_t>(k1 + j)] = node;
                        bfs.push_back(k1 + j);
                    }
            } else {
                for (int i : col_adj[node - k1])
                    if (parent[static_cast<size_t>(i)] < 0) {
                        parent[static_cast<size_t>(i)] = node;
                        bfs.push_back(i);
                    }
            }
        }
        std::vector<std::pair<int, int>> cycle{{bi, bj}};  // even index: +, odd: -
        for (int node = k1 + bj; node != bi;) {
            const int prev = parent[static_cast<size_t>(node)];
            if (node < k1)
                cycle.emplace_back(node, prev - k1);
            else
                cycle.emplace_back(prev, node - k1);
            node = prev;
        }

        double theta = kInf;
        size_t leave = 0;
        for (size_t t = 1; t < cycle.size(); t += 2) {
            const auto [i, j] = cycle[t];
            const double amount = x(i, j);
            if (amount < theta ||
                (amount == theta && cycle[t] < cycle[leave]))
                theta = amount, leave = t;
        }
        for (size_t t = 0; t < cycle.size(); ++t) {
            const auto [i, j] = cycle[t];
            x(i, j) = t % 2 == 0 ? x(i, j) + theta : std::max(0.0, x(i, j) - theta);
        }
        x(cycle[leave].first, cycle[leave].second) = 0.0;
        drop_basis(cycle[leave].first, cycle[leave].second);
        add_basis(bi, bj);
    }

    TransportPlan plan;
    plan.coupling = x.cwiseMax(0.0);
    plan.value = (plan.coupling.array() * m.array()).sum();
    plan.solver = SolverKind::exact;
    plan.iterations = pivots;
    plan.marginal_residual = plan_residual(plan.coupling, a, b);
    return plan;
}

TransportPlan solve_sinkhorn(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                             const Eigen::MatrixXd& m, const SinkhornConfig& cfg) {
    const Eigen::VectorXd a = checked_weights(alpha, "solve_sinkhorn alpha");
    const Eigen::VectorXd b = checked_weights(beta, "solve_sinkhorn beta");
    const auto k1 = a.size();
    const auto k2 = b.size();
    check_cost(m, k1, k2);
    const double gamma = resolve_gamma(cfg, m);

    const Eigen::MatrixXd c = m / gamma;
    Eigen::VectorXd la(k1), lb(k2);
    for (Eigen::Index i = 0; i < k1; ++i) la[i] = std::log(a[i]);
    for (Eigen::Index j = 0; j < k2; ++j) lb[j] = std::log(b[j]);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(k1);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(k2);
    std::vector<double> terms;
    int used = 0;
    double residual = kInf;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        used = it;
        for (Eigen::Index i = 0; i < k1; ++i) {
            if (la[i] == -kInf) {
                u[i] = -kInf;
                continue;
            }
            terms.assign(static_cast<size_t>(k2), 0.0);
            for (Eigen::Index j = 0; j < k2; ++j)
                terms[static_cast<size_t>(j)] = v[j] - c(i, j);
            u[i] = la[i] - log_sum_exp(terms);
        }
        for (Eigen::Index j = 0; j < k2; ++j) {
            if (lb[j] == -kInf) {
                v[j] = -kInf;
                continue;
            }
            terms.assign(static_cast<size_t>(k1), 0.0);
            for (Eigen::Index i = 0; i < k1; ++i)
                terms[static_cast<size_t>(i)] = u[i] - c(i, j);
            v[j] = lb[j] - log_sum_exp(terms);
        }
        if (u.hasNaN() || v.hasNaN())
            throw NumericalError("solve_sinkhorn: NaN in scaling; gamma too small");
        // Columns are exact right after the v update; track the row residual.
        residual = 0.0;
        for (Eigen::Index i = 0; i < k1; ++i) {
            double row = 0.0;
            for (Eigen::Index j = 0; j < k2; ++j) row += std::exp(u[i] + v[j] - c(i, j));
            residual = std::max(residual, std::fabs(row - a[i]));
        }
        if (residual <= cfg.stop_threshold) break;
    }

    TransportPlan plan;
    plan.coupling.resize(k1, k2);
    for (Eigen::Index i = 0; i < k1; ++i)
        for (Eigen::Index j = 0; j < k2; ++j)
            plan.coupling(i, j) = std::exp(u[i] + v[j] - c(i, j));
    if (plan.coupling.hasNaN())
        throw NumericalError("solve_sinkhorn: NaN in scaling; gamma too small");
    plan.solver = SolverKind::sinkhorn;
    plan.iterations = used;
    // Convergence diagnostic of the scaling loop, before rounding.
    plan.marginal_residual = plan_residual(plan.coupling, a, b);

    // Round onto the transport polytope: cap row and column sums, then patch
    // the deficit with a rank-one correction.  A feasible plan's cost can
    // never undercut the exact optimum, which keeps the dominance over
    // solve_exact intact at any finite stopping residual.
    for (Eigen::Index i = 0; i < k1; ++i) {
        const double rs = plan.coupling.row(i).sum();
        if (rs > a[i] && rs > 0.0) plan.coupling.row(i) *= a[i] / rs;
    }
    for (Eigen::Index j = 0; j < k2; ++j) {
        const double cs = plan.coupling.col(j).sum();
        if (cs > b[j] && cs > 0.0) plan.coupling.col(j) *= b[j] / cs;
    }
    const Eigen::VectorXd row_gap =
        (a - plan.coupling.rowwise().sum()).cwiseMax(0.0);
    const Eigen::VectorXd col_gap =
        (b - plan.coupling.colwise().sum().transpose()).cwiseMax(0.0);
    const double gap_mass = row_gap.sum();
    if (gap_mass > 0.0) plan.coupling += (row_gap * col_gap.transpose()) / gap_mass;

    plan.value = (plan.coupling.array() * m.array()).sum();
    return plan;
}

CrotResult crot_distance(const Mixture& m1, const Mixture& m2, const GroundSpec& spec,
                         SolverKind solver, const SinkhornConfig& cfg) {
    CrotResult result;
    result.cost = cost_matrix(m1, m2, spec);
    result.plan = solver == SolverKind::exact
                      ? solve_exact(m1.weights(), m2.weights(), result.cost.values)
                      : solve_sinkhorn(m1.weights(), m2.weights(), result.cost.values, cfg);
    result.value = result.plan.value;
    return result;
}

bool coupling_floor_check(const TransportPlan& plan) {
    const Eigen::MatrixXd& w = plan.coupling;
    const auto k1 = w.rows();
    const auto k2 = w.cols();
    // A coupling of probability vectors carries unit mass; a damaged plan
    // (say, a zeroed row) fails here before the floor inequalities apply.
    if (std::fabs(w.sum() - 1.0) > 1e-9) return false;
    const Eigen::VectorXd a = w.rowwise().sum();
    const Eigen::VectorXd b = w.colwise().sum().transpose();
    for (Eigen::Index i = 0; i < k1; ++i)
        if (w.row(i).maxCoeff() < a[i] / static_cast<double>(k2) - 1e-12) return false;
    for (Eigen::Index j = 0; j < k2; ++j)
        if (w.col(j).maxCoeff() < b[j] / static_cast<double>(k1) - 1e-12) return false;
    return true;
}

}  // namespace crot
