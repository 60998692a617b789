#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crot/bounds.hpp"
#include "crot/estimators.hpp"
#include "crot/experiments.hpp"
#include "crot/io.hpp"
#include "crot/learn.hpp"
#include "crot/numerics.hpp"
#include "crot/transport.hpp"

namespace {

struct DistArgs {
    std::string mixture_a, mixture_b, ground = "kl", solver = "exact", out;
    double lambda_level = 0.0, gamma = 0.0, stop_tol = 1e-10, quad_tol = 1e-8;
    int max_iter = 1000, mc_samples = 5000;
    std::uint64_t seed = 0;
};

struct EstimateArgs {
    std::string mixture_a, mixture_b, kind = "kl", out;
    int mc_samples = 5000;
    std::uint64_t seed = 0;
};

struct LearnArgs {
    std::string data, test, out, curve;
    int components = 10, epochs = 100, batch = 256;
    double lambda = 0.005, bandwidth = 1e-6, step = 1e-2;
    std::uint64_t seed = 42;
};

struct TableArgs {
    std::string data, format = "csv", ground = "kl", out;
    int pca = 2, repeats = 1, em_components = 10;
    double tau = 1.0;
    std::uint64_t seed = 0;
};

struct SweepArgs {
    std::string kind = "separation", family = "gaussian", ground = "tv", out;
    int points = 13;
    std::uint64_t seed = 0;
};

crot::GroundSpec make_ground(const std::string& text, int mc_samples, double quad_tol,
                             std::uint64_t seed) {
    crot::GroundSpec spec = crot::GroundSpec::parse(text);
    spec.mc_samples = mc_samples;
    spec.quad_tol = quad_tol;
    spec.seed = seed;
    spec.check();
    return spec;
}

void emit(const std::string& text, const std::string& out_path) {
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot write file: " + out_path);
        out << text << "\n";
    }
}

int run_dist(const DistArgs& a) {
    const crot::Mixture m1 = crot::load_mixture(a.mixture_a);
    const crot::Mixture m2 = crot::load_mixture(a.mixture_b);
    const crot::GroundSpec ground = make_ground(a.ground, a.mc_samples, a.quad_tol, a.seed);

    crot::SolverKind solver = crot::SolverKind::exact;
    crot::SinkhornConfig cfg;
    if (a.solver == "sinkhorn") {
        solver = crot::SolverKind::sinkhorn;
        cfg.gamma = a.gamma;
        cfg.lambda_level = a.gamma > 0.0 ? 0.0 : (a.lambda_level > 0.0 ? a.lambda_level : 10.0);
        cfg.max_iterations = a.max_iter;
        cfg.stop_threshold = a.stop_tol;
    } else if (a.solver != "exact") {
        throw std::invalid_argument("--solver must be 'exact' or 'sinkhorn'");
    }

    const crot::CrotResult result = crot::crot_distance(m1, m2, ground, solver, cfg);
    std::ostringstream msg;
    msg.precision(17);
    msg << "{\n  \"ground\": \"" << ground.name() << "\",\n  \"solver\": \"" << a.solver
        << "\",\n  \"value\": " << result.value
        << ",\n  \"iterations\": " << result.plan.iterations
        << ",\n  \"marginal_residual\": " << result.plan.marginal_residual << "\n}";
    std::cout << msg.str() << "\n";
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw std::invalid_argument("cannot write file: " + a.out);
        out << crot::plan_to_json(result.plan) << "\n";
    }
    return 0;
}

int run_bounds(const DistArgs& a) {
    const crot::Mixture m1 = crot::load_mixture(a.mixture_a);
    const crot::Mixture m2 = crot::load_mixture(a.mixture_b);
    const crot::GroundSpec ground = make_ground(a.ground, a.mc_samples, a.quad_tol, a.seed);
    const crot::BoundReport report = crot::bound_report(m1, m2, ground);
    emit(crot::report_to_json(report), a.out);
    return 0;
}

int run_estimate(const EstimateArgs& a) {
    const crot::Mixture m1 = crot::load_mixture(a.mixture_a);
    const crot::Mixture m2 = crot::load_mixture(a.mixture_b);
    const crot::GroundSpec spec = crot::GroundSpec::parse(a.kind);
    crot::McConfig mc;
    mc.samples = a.mc_samples;
    mc.seed = a.seed;

    crot::McEstimate est;
    switch (spec.kind) {
        case crot::DistanceKind::kl:
            est = crot::mc_kl(m1, m2, mc);
            break;
        case crot::DistanceKind::tv:
            est = crot::tv_mc(m1, m2, mc);
            break;
        case crot::DistanceKind::renyi:
            est = crot::mc_renyi(m1, m2, spec.alpha, mc);
            break;
        default:
            throw std::invalid_argument("estimate: --kind must be kl, tv, or renyi:<alpha>");
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "{\n  \"estimate\": " << est.estimate << ",\n  \"stderr\": " << est.standard_error
        << ",\n  \"samples\": " << est.samples << "\n}";
    emit(msg.str(), a.out);
    return 0;
}

int run_learn(const LearnArgs& a) {
    const Eigen::MatrixXd train = crot::read_csv_matrix(a.data);

    crot::LearnConfig cfg;
    cfg.components = a.components;
    cfg.lambda = a.lambda;
    cfg.bandwidth = a.bandwidth;
    cfg.batch_size = a.batch;
    cfg.epochs = a.epochs;
    cfg.step_size = a.step;
    cfg.seed = a.seed;

    const crot::Kde* eval_ptr = nullptr;
    crot::Kde eval_kde{crot::Mixture::single(crot::make_gaussian_1d(0.0, 1.0)), 0.0, 0};
    Eigen::MatrixXd test;
    if (!a.test.empty()) {
        test = crot::read_csv_matrix(a.test);
        eval_kde = crot::kde_build(test, a.bandwidth);
        eval_ptr = &eval_kde;
    }

    const crot::LearnState state = crot::fit_scrot(train, cfg, eval_ptr);

    if (!a.out.empty()) crot::save_mixture(a.out, state.gmm);

    if (!a.curve.empty()) {
        // Constant EM baseline column for side-by-side comparison.
        const crot::Mixture em = crot::fit_em(train, a.components, a.seed);
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(state.trajectory.size()), 4);
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            const crot::EpochStats& s = state.trajectory[static_cast<std::size_t>(i)];
            double em_eval = 0.0;
            if (eval_ptr != nullptr) {
                crot::McConfig mc;
                mc.samples = cfg.eval_samples;
                mc.seed = crot::derive_seed(a.seed, 0xe3u, static_cast<std::uint64_t>(s.epoch));
                em_eval = crot::kl_eval_bound(eval_kde, em, mc).estimate;
            }
            rows(i, 0) = s.epoch;
            rows(i, 1) = s.objective;
            rows(i, 2) = s.kl_eval;
            rows(i, 3) = em_eval;
        }
        crot::write_csv(a.curve, {"epoch", "scrot_objective", "kl_eval", "kl_eval_em_baseline"},
                        rows);
    }

    std::ostringstream msg;
    msg.precision(17);
    msg << "{\n  \"epochs_run\": " << state.epochs_run << ",\n  \"final_objective\": "
        << (state.trajectory.empty() ? 0.0 : state.trajectory.back().objective)
        << ",\n  \"aborted\": " << (state.aborted ? "true" : "false") << "\n}";
    std::cout << msg.str() << "\n";
    if (state.aborted) {
        std::cerr << "learn: objective diverged; last finite state written\n";
        return 2;
    }
    return 0;
}

crot::ExperimentConfig make_experiment(const TableArgs& a) {
    crot::ExperimentConfig cfg;
    cfg.dataset_path = a.data;
    if (a.format == "csv")
        cfg.format = crot::DatasetFormat::csv;
    else if (a.format == "idx")
        cfg.format = crot::DatasetFormat::idx;
    else
        throw std::invalid_argument("--format must be 'csv' or 'idx'");
    cfg.pca_dim = a.pca;
    cfg.sample_fraction = a.tau;
    cfg.repeats = a.repeats;
    cfg.em_components = a.em_components;
    cfg.ground = crot::GroundSpec::parse(a.ground);
    cfg.seed = a.seed;
    return cfg;
}

int run_table_cmd(const TableArgs& a) {
    crot::ExperimentConfig cfg = make_experiment(a);
    cfg.out_path = a.out;
    const crot::TableResult result = crot::run_table(cfg);
    for (const std::string& f : result.failures) std::cerr << "table: " << f << "\n";
    if (result.repeats_completed == 0)
        throw crot::NumericalError("table: every repeat failed");
    std::cout << result.to_csv();
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw std::invalid_argument("cannot write file: " + a.out);
        out << result.to_csv();
    }
    return 0;
}

int run_sweep_cmd(const SweepArgs& a) {
    crot::ExperimentConfig cfg;
    cfg.ground = crot::GroundSpec::parse(a.ground);
    cfg.sweep_points = a.points;
    cfg.seed = a.seed;
    if (a.family == "gaussian")
        cfg.sweep_family = crot::Family::gaussian_1d;
    else if (a.family == "gamma")
        cfg.sweep_family = crot::Family::gamma;
    else if (a.family == "rayleigh")
        cfg.sweep_family = crot::Family::rayleigh;
    else
        throw std::invalid_argument("--family must be gaussian, gamma, or rayleigh");

    crot::SweepResult sweep;
    if (a.kind == "separation")
        sweep = crot::run_figure_sweep(cfg);
    else if (a.kind == "js")
        sweep = crot::run_js_sweep(cfg);
    else
        throw std::invalid_argument("--kind must be 'separation' or 'js'");

    std::ostringstream text;
    text.precision(17);
    for (std::size_t j = 0; j < sweep.columns.size(); ++j)
        text << sweep.columns[j] << (j + 1 < sweep.columns.size() ? "," : "\n");
    for (Eigen::Index i = 0; i < sweep.rows.rows(); ++i)
        for (Eigen::Index j = 0; j < sweep.rows.cols(); ++j)
            text << sweep.rows(i, j) << (j + 1 < sweep.rows.cols() ? "," : "\n");
    std::cout << text.str();
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw std::invalid_argument("cannot write file: " + a.out);
        out << text.str();
    }
    return 0;
}

int run_idx_info(const std::string& path) {
    const crot::IdxData data = crot::load_idx(path);
    std::cout << "magic: 0x" << std::hex << std::setw(8) << std::setfill('0') << data.magic
              << std::dec << "\ndims:";
    for (const std::uint32_t d : data.dims) std::cout << " " << d;
    std::cout << "\nbytes: " << data.bytes.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chain-rule optimal transport distances between finite mixtures"};
    app.require_subcommand(1);

    DistArgs dist_args;
    CLI::App* dist = app.add_subcommand("dist", "CROT distance between two mixtures");
    dist->add_option("--mixture-a", dist_args.mixture_a, "first mixture JSON")->required();
    dist->add_option("--mixture-b", dist_args.mixture_b, "second mixture JSON")->required();
    dist->add_option("--ground", dist_args.ground,
                     "ground distance: kl|tv|w2|w2sq|renyi:<a>|js:<a>|w1d:<p>");
    dist->add_option("--solver", dist_args.solver, "exact|sinkhorn");
    dist->add_option("--lambda-level", dist_args.lambda_level,
                     "sinkhorn gamma = median(M)/lambda");
    dist->add_option("--gamma", dist_args.gamma, "explicit sinkhorn regularization");
    dist->add_option("--max-iter", dist_args.max_iter, "sinkhorn iteration cap");
    dist->add_option("--stop-tol", dist_args.stop_tol, "sinkhorn marginal residual threshold");
    dist->add_option("--mc-samples", dist_args.mc_samples, "MC samples for sampled grounds");
    dist->add_option("--quad-tol", dist_args.quad_tol, "quadrature tolerance");
    dist->add_option("--seed", dist_args.seed, "RNG seed");
    dist->add_option("--out", dist_args.out, "write the transport plan JSON here");

    DistArgs bounds_args;
    CLI::App* bounds = app.add_subcommand("bounds", "divergence bound report");
    bounds->add_option("--mixture-a", bounds_args.mixture_a, "first mixture JSON")->required();
    bounds->add_option("--mixture-b", bounds_args.mixture_b, "second mixture JSON")->required();
    bounds->add_option("--ground", bounds_args.ground, "target ground distance");
    bounds->add_option("--mc-samples", bounds_args.mc_samples, "MC reference samples");
    bounds->add_option("--quad-tol", bounds_args.quad_tol, "quadrature tolerance");
    bounds->add_option("--seed", bounds_args.seed, "RNG seed");
    bounds->add_option("--out", bounds_args.out, "write the report JSON here");

    EstimateArgs est_args;
    CLI::App* estimate = app.add_subcommand("estimate", "Monte Carlo divergence estimate");
    estimate->add_option("--mixture-a", est_args.mixture_a, "first mixture JSON")->required();
    estimate->add_option("--mixture-b", est_args.mixture_b, "second mixture JSON")->required();
    estimate->add_option("--kind", est_args.kind, "kl|tv|renyi:<alpha>");
    estimate->add_option("--mc-samples", est_args.mc_samples, "sample count");
    estimate->add_option("--seed", est_args.seed, "RNG seed");
    estimate->add_option("--out", est_args.out, "write the estimate JSON here");

    LearnArgs learn_args;
    CLI::App* learn = app.add_subcommand("learn", "fit a GMM by the Sinkhorn-relaxed objective");
    learn->add_option("--data", learn_args.data, "training CSV (numeric matrix)")->required();
    learn->add_option("--test", learn_args.test, "held-out CSV for kl_eval");
    learn->add_option("--components", learn_args.components, "GMM size");
    learn->add_option("--lambda", learn_args.lambda, "softmin sharpness");
    learn->add_option("--bandwidth", learn_args.bandwidth, "KDE bandwidth epsilon");
    learn->add_option("--epochs", learn_args.epochs, "training epochs");
    learn->add_option("--batch", learn_args.batch, "minibatch size");
    learn->add_option("--step", learn_args.step, "Adam step size");
    learn->add_option("--seed", learn_args.seed, "RNG seed");
    learn->add_option("--out", learn_args.out, "write the fitted mixture JSON here");
    learn->add_option("--curve", learn_args.curve, "write the per-epoch curve CSV here");

    TableArgs table_args;
    CLI::App* table = app.add_subcommand("table", "two-fit bound table over repeats");
    table->add_option("--data", table_args.data, "dataset path")->required();
    table->add_option("--format", table_args.format, "csv|idx");
    table->add_option("--pca", table_args.pca, "projection dimension D");
    table->add_option("--tau", table_args.tau, "sample fraction in (0,1]");
    table->add_option("--repeats", table_args.repeats, "number of repeats");
    table->add_option("--em-components", table_args.em_components, "GMM size per half");
    table->add_option("--ground", table_args.ground, "ground distance");
    table->add_option("--seed", table_args.seed, "RNG seed");
    table->add_option("--out", table_args.out, "write the table CSV here");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "separation or js:alpha sweep CSV");
    sweep->add_option("--kind", sweep_args.kind, "separation|js");
    sweep->add_option("--family", sweep_args.family, "gaussian|gamma|rayleigh");
    sweep->add_option("--ground", sweep_args.ground, "ground distance for the separation sweep");
    sweep->add_option("--points", sweep_args.points, "sweep resolution");
    sweep->add_option("--seed", sweep_args.seed, "RNG seed");
    sweep->add_option("--out", sweep_args.out, "write the sweep CSV here");

    std::string idx_path;
    CLI::App* idx_info = app.add_subcommand("idx-info", "describe an IDX tensor file");
    idx_info->add_option("--file", idx_path, "IDX file path")->required();

    try {
        app.parse(argc, argv);
        if (dist->parsed()) return run_dist(dist_args);
        if (bounds->parsed()) return run_bounds(bounds_args);
        if (estimate->parsed()) return run_estimate(est_args);
        if (learn->parsed()) return run_learn(learn_args);
        if (table->parsed()) return run_table_cmd(table_args);
        if (sweep->parsed()) return run_sweep_cmd(sweep_args);
        if (idx_info->parsed()) return run_idx_info(idx_path);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const crot::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
