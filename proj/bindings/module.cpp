#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "crot/bounds.hpp"
#include "crot/estimators.hpp"
#include "crot/io.hpp"
#include "crot/learn.hpp"
#include "crot/mixture.hpp"
#include "crot/numerics.hpp"
#include "crot/transport.hpp"

namespace py = pybind11;

namespace {

crot::GroundSpec ground_from(const std::string& text, int mc_samples, std::uint64_t seed) {
    crot::GroundSpec spec = crot::GroundSpec::parse(text);
    spec.mc_samples = mc_samples;
    spec.seed = seed;
    spec.check();
    return spec;
}

crot::SinkhornConfig sinkhorn_from(double lambda_level, double gamma, int max_iter,
                                   double stop_tol) {
    crot::SinkhornConfig cfg;
    cfg.gamma = gamma;
    cfg.lambda_level = gamma > 0.0 ? 0.0 : lambda_level;
    cfg.max_iterations = max_iter;
    cfg.stop_threshold = stop_tol;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_crot, m) {
    m.doc() = "Chain-rule optimal transport distances between finite mixtures";

    py::register_exception<crot::NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<crot::Mixture>(m, "Mixture")
        .def_static("from_json", &crot::mixture_from_json, py::arg("text"))
        .def("to_json", [](const crot::Mixture& mx) { return crot::mixture_to_json(mx); })
        .def_static(
            "gaussian",
            [](const Eigen::VectorXd& weights, const Eigen::MatrixXd& means,
               const Eigen::MatrixXd& vars) {
                if (means.rows() != vars.rows() || means.cols() != vars.cols() ||
                    means.rows() != weights.size())
                    throw std::invalid_argument("gaussian: weights/means/vars shape mismatch");
                std::vector<crot::Component> comps;
                comps.reserve(static_cast<std::size_t>(means.rows()));
                for (Eigen::Index j = 0; j < means.rows(); ++j)
                    comps.push_back(crot::make_gaussian_diag(means.row(j).transpose(),
                                                             vars.row(j).transpose()));
                return crot::Mixture(weights, comps);
            },
            py::arg("weights"), py::arg("means"), py::arg("vars"))
        .def_property_readonly("size", &crot::Mixture::size)
        .def_property_readonly("dim", &crot::Mixture::dim)
        .def_property_readonly("weights", &crot::Mixture::weights)
        .def("log_pdf", &crot::Mixture::log_pdf, py::arg("x"))
        .def(
            "sample",
            [](const crot::Mixture& mx, int count, std::uint64_t seed) {
                crot::Rng rng(seed);
                return mx.sample(count, rng);
            },
            py::arg("count"), py::arg("seed") = 0);

    m.def(
        "cost_matrix",
        [](const crot::Mixture& a, const crot::Mixture& b, const std::string& ground,
           int mc_samples, std::uint64_t seed) {
            return crot::cost_matrix(a, b, ground_from(ground, mc_samples, seed)).values;
        },
        py::arg("a"), py::arg("b"), py::arg("ground") = "kl", py::arg("mc_samples") = 5000,
        py::arg("seed") = 0);

    m.def(
        "crot_distance",
        [](const crot::Mixture& a, const crot::Mixture& b, const std::string& ground,
           const std::string& solver, double lambda_level, double gamma, int max_iter,
           double stop_tol, int mc_samples, std::uint64_t seed) {
            const crot::GroundSpec spec = ground_from(ground, mc_samples, seed);
            const bool exact = solver == "exact";
            if (!exact && solver != "sinkhorn")
                throw std::invalid_argument("solver must be 'exact' or 'sinkhorn'");
            const crot::CrotResult r = crot::crot_distance(
                a, b, spec, exact ? crot::SolverKind::exact : crot::SolverKind::sinkhorn,
                exact ? crot::SinkhornConfig{}
                      : sinkhorn_from(lambda_level, gamma, max_iter, stop_tol));
            py::dict out;
            out["value"] = r.value;
            out["coupling"] = r.plan.coupling;
            out["iterations"] = r.plan.iterations;
            out["marginal_residual"] = r.plan.marginal_residual;
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("ground") = "kl", py::arg("solver") = "exact",
        py::arg("lambda_level") = 10.0, py::arg("gamma") = 0.0, py::arg("max_iter") = 1000,
        py::arg("stop_tol") = 1e-10, py::arg("mc_samples") = 5000, py::arg("seed") = 0);

    m.def(
        "solve_exact",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost) {
            const crot::TransportPlan plan = crot::solve_exact(a, b, cost);
            return py::make_tuple(plan.value, plan.coupling);
        },
        py::arg("a"), py::arg("b"), py::arg("cost"));

    m.def(
        "solve_sinkhorn",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost,
           double lambda_level, double gamma, int max_iter, double stop_tol) {
            const crot::TransportPlan plan = crot::solve_sinkhorn(
                a, b, cost, sinkhorn_from(lambda_level, gamma, max_iter, stop_tol));
            return py::make_tuple(plan.value, plan.coupling, plan.iterations,
                                  plan.marginal_residual);
        },
        py::arg("a"), py::arg("b"), py::arg("cost"), py::arg("lambda_level") = 10.0,
        py::arg("gamma") = 0.0, py::arg("max_iter") = 1000, py::arg("stop_tol") = 1e-10);

    auto mc_pair = [](const crot::McEstimate& e) {
        return py::make_tuple(e.estimate, e.standard_error);
    };
    m.def(
        "mc_kl",
        [mc_pair](const crot::Mixture& p, const crot::Mixture& q, int samples,
                  std::uint64_t seed) {
            return mc_pair(crot::mc_kl(p, q, {samples, seed, 10}));
        },
        py::arg("p"), py::arg("q"), py::arg("samples") = 5000, py::arg("seed") = 0);
    m.def(
        "tv_mc",
        [mc_pair](const crot::Mixture& p, const crot::Mixture& q, int samples,
                  std::uint64_t seed) {
            return mc_pair(crot::tv_mc(p, q, {samples, seed, 10}));
        },
        py::arg("p"), py::arg("q"), py::arg("samples") = 5000, py::arg("seed") = 0);
    m.def(
        "mc_renyi",
        [mc_pair](const crot::Mixture& p, const crot::Mixture& q, double alpha, int samples,
                  std::uint64_t seed) {
            return mc_pair(crot::mc_renyi(p, q, alpha, {samples, seed, 10}));
        },
        py::arg("p"), py::arg("q"), py::arg("alpha"), py::arg("samples") = 5000,
        py::arg("seed") = 0);

    m.def(
        "bound_report_json",
        [](const crot::Mixture& a, const crot::Mixture& b, const std::string& ground,
           int mc_samples, std::uint64_t seed) {
            return crot::report_to_json(
                crot::bound_report(a, b, ground_from(ground, mc_samples, seed)));
        },
        py::arg("a"), py::arg("b"), py::arg("ground") = "kl", py::arg("mc_samples") = 5000,
        py::arg("seed") = 0);

    m.def("scub",
          [](const crot::Mixture& a, const crot::Mixture& b, const std::string& ground) {
              return crot::scub(a, b, crot::GroundSpec::parse(ground));
          },
          py::arg("a"), py::arg("b"), py::arg("ground") = "kl");
    m.def("gelbrich_lb", &crot::gelbrich_lb, py::arg("a"), py::arg("b"));
    m.def("js_alpha_cap", &crot::js_alpha_cap, py::arg("alpha"));
    m.def("chi2_kl_bound", &crot::chi2_kl_bound, py::arg("p"), py::arg("q"),
          py::arg("quad_tol") = 1e-10);
    m.def(
        "expfam_kl_bound",
        [](const crot::Mixture& p, const crot::Mixture& q) {
            const crot::ExpfamBound b = crot::expfam_kl_bound(p, q);
            return py::make_tuple(b.value, b.domain_ok);
        },
        py::arg("p"), py::arg("q"));

    m.def("softmin_weights",
          [](const Eigen::MatrixXd& kl, double lambda) {
              return crot::softmin_weights(kl, lambda);
          },
          py::arg("kl"), py::arg("lambda_"));

    m.def(
        "fit_scrot",
        [](const Eigen::MatrixXd& data, int components, double lambda, double bandwidth,
           int batch_size, int epochs, double step_size, std::uint64_t seed,
           const Eigen::MatrixXd& eval_data) {
            crot::LearnConfig cfg;
            cfg.components = components;
            cfg.lambda = lambda;
            cfg.bandwidth = bandwidth;
            cfg.batch_size = batch_size;
            cfg.epochs = epochs;
            cfg.step_size = step_size;
            cfg.seed = seed;
            crot::Kde kde{crot::Mixture::single(crot::make_gaussian_1d(0.0, 1.0)), 0.0, 0};
            const crot::Kde* eval = nullptr;
            if (eval_data.rows() > 0) {
                kde = crot::kde_build(eval_data, bandwidth);
                eval = &kde;
            }
            const crot::LearnState st = crot::fit_scrot(data, cfg, eval);
            Eigen::MatrixXd traj(static_cast<Eigen::Index>(st.trajectory.size()), 3);
            for (Eigen::Index i = 0; i < traj.rows(); ++i) {
                const crot::EpochStats& s = st.trajectory[static_cast<std::size_t>(i)];
                traj(i, 0) = s.epoch;
                traj(i, 1) = s.objective;
                traj(i, 2) = s.kl_eval;
            }
            return py::make_tuple(st.gmm, traj, st.aborted);
        },
        py::arg("data"), py::arg("components") = 10, py::arg("lambda_") = 0.005,
        py::arg("bandwidth") = 1e-6, py::arg("batch_size") = 256, py::arg("epochs") = 100,
        py::arg("step_size") = 1e-2, py::arg("seed") = 0,
        py::arg("eval_data") = Eigen::MatrixXd());

    m.def(
        "fit_em",
        [](const Eigen::MatrixXd& data, int components, std::uint64_t seed) {
            return crot::fit_em(data, components, seed);
        },
        py::arg("data"), py::arg("components") = 10, py::arg("seed") = 0);

    m.def(
        "pca_fit_transform",
        [](const Eigen::MatrixXd& data, int target_dim) {
            const crot::PcaResult r = crot::pca_fit_transform(data, target_dim);
            return py::make_tuple(r.projected, r.basis, r.mean, r.eigenvalues);
        },
        py::arg("data"), py::arg("target_dim"));

    m.def(
        "kde_log_pdf",
        [](const Eigen::MatrixXd& points, double bandwidth, const Eigen::VectorXd& x) {
            return crot::kde_build(points, bandwidth).mixture.log_pdf(x);
        },
        py::arg("points"), py::arg("bandwidth"), py::arg("x"));

    m.def(
        "idx_points",
        [](const std::string& path) { return crot::idx_to_points(crot::load_idx(path)); },
        py::arg("path"));
}
