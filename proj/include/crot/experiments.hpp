#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crot/ground.hpp"
#include "crot/mixture.hpp"
#include "crot/transport.hpp"

namespace crot {

enum class DatasetFormat { csv, idx };

struct ExperimentConfig {
    std::string dataset_path;
    DatasetFormat format = DatasetFormat::csv;
    int pca_dim = 2;               // D
    double sample_fraction = 1.0;  // tau
    int repeats = 1;
    GroundSpec ground = GroundSpec::parse("kl");
    int em_components = 10;
    int sweep_points = 13;
    Family sweep_family = Family::gaussian_1d;
    std::string out_path;
    std::uint64_t seed = 0;

    void check() const;  // tau in (0,1], repeats >= 1, pca_dim >= 1
};

Eigen::MatrixXd load_dataset(const ExperimentConfig& cfg);

// Seeded shuffle, two disjoint floor(tau*n/2)-point halves, PCA on the full
// set, then an EM diagonal-GMM fit per half.
std::pair<Mixture, Mixture> split_two_gmm(const Eigen::MatrixXd& data,
                                          const ExperimentConfig& cfg);

struct TableCell {
    double mean = 0.0;
    double std_dev = 0.0;
};

struct TableResult {
    std::vector<std::string> columns;  // mc_ref, crot_exact, sinkhorn_l10, sinkhorn_l1
    std::vector<TableCell> cells;
    int repeats_completed = 0;
    std::vector<std::string> failures;  // messages from skipped repeats

    std::string to_csv() const;  // header row + one mean,std pair per column
};

TableResult run_table(const ExperimentConfig& cfg);

struct SweepResult {
    std::vector<std::string> columns;
    Eigen::MatrixXd rows;
};

// Mixture-separation sweep: MC truth, exact CROT, Sinkhorn CROT per point.
SweepResult run_figure_sweep(const ExperimentConfig& cfg);

// sqrt(JS_alpha) against its cap and the CROT upper bound across alpha.
SweepResult run_js_sweep(const ExperimentConfig& cfg);

}  // namespace crot
