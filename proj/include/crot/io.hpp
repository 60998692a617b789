#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crot/bounds.hpp"
#include "crot/mixture.hpp"
#include "crot/transport.hpp"

namespace crot {

// ---- Mixture / plan / report JSON (text round-trips at 17 significant digits)

std::string mixture_to_json(const Mixture& m, int indent = 2);
Mixture mixture_from_json(const std::string& text);

void save_mixture(const std::string& path, const Mixture& m);
Mixture load_mixture(const std::string& path);

std::string plan_to_json(const TransportPlan& plan, int indent = 2);
TransportPlan plan_from_json(const std::string& text);

std::string report_to_json(const BoundReport& report, int indent = 2);
BoundReport report_from_json(const std::string& text);

// ---- IDX binary tensors (big-endian magic + dimension sizes + raw bytes)

struct IdxMagicError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IdxTruncatedError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IdxData {
    std::uint32_t magic = 0;           // 0x00000803 images, 0x00000801 labels
    std::vector<std::uint32_t> dims;   // big-endian u32 sizes, outermost first
    std::vector<std::uint8_t> bytes;   // row-major payload
};

IdxData load_idx(const std::string& path);
void write_idx(const std::string& path, const IdxData& data);

// Flattens a 3D byte tensor to (n x r*c) points scaled into [0,1] by /255.
Eigen::MatrixXd idx_to_points(const IdxData& data);

// ---- numeric CSV

Eigen::MatrixXd read_csv_matrix(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows);

}  // namespace crot
