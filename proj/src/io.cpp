#include "crot/io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace crot {

using nlohmann::json;

namespace {

json parse_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string(what) + ": malformed JSON: " + e.what());
    }
}

const json& require_field(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object())
        throw std::invalid_argument("field '" + path + "' must be an object");
    const auto it = obj.find(key);
    if (it == obj.end())
        throw std::invalid_argument("missing field '" + path + "." + key + "'");
    return *it;
}

double number_at(const json& value, const std::string& path) {
    if (!value.is_number())
        throw std::invalid_argument("field '" + path + "' must be a number");
    return value.get<double>();
}

Eigen::VectorXd vector_at(const json& value, const std::string& path) {
    if (!value.is_array())
        throw std::invalid_argument("field '" + path + "' must be an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i)
        out(static_cast<Eigen::Index>(i)) =
            number_at(value[i], path + "[" + std::to_string(i) + "]");
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json component_to_json(const Component& c) {
    json obj;
    switch (family_of(c)) {
        case Family::gaussian_diag: {
            const auto& g = std::get<GaussianDiag>(c);
            obj["mean"] = vector_to_json(g.mean);
            obj["var"] = vector_to_json(g.var);
            break;
        }
        case Family::gaussian_1d: {
            const auto& g = std::get<Gaussian1d>(c);
            obj["mu"] = g.mu;
            obj["sigma"] = g.sigma;
            break;
        }
        case Family::gamma: {
            const auto& g = std::get<GammaDist>(c);
            obj["shape"] = g.shape;
            obj["scale"] = g.scale;
            break;
        }
        case Family::rayleigh: {
            obj["scale"] = std::get<RayleighDist>(c).scale;
            break;
        }
    }
    return obj;
}

Component component_from_json(Family family, const json& obj, const std::string& path) {
    // Re-throw parameter-validation failures with the entry named, so a bad
    // document points at the offending component.
    try {
        switch (family) {
            case Family::gaussian_diag:
                return make_gaussian_diag(
                    vector_at(require_field(obj, path, "mean"), path + ".mean"),
                    vector_at(require_field(obj, path, "var"), path + ".var"));
            case Family::gaussian_1d:
                return make_gaussian_1d(
                    number_at(require_field(obj, path, "mu"), path + ".mu"),
                    number_at(require_field(obj, path, "sigma"), path + ".sigma"));
            case Family::gamma:
                return make_gamma(
                    number_at(require_field(obj, path, "shape"), path + ".shape"),
                    number_at(require_field(obj, path, "scale"), path + ".scale"));
            case Family::rayleigh:
                return make_rayleigh(
                    number_at(require_field(obj, path, "scale"), path + ".scale"));
        }
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        if (what.find(path) != std::string::npos) throw;
        throw std::invalid_argument(path + ": " + what);
    }
    throw std::invalid_argument("field '" + path + "': unknown family");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << text;
}

std::uint32_t read_be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void append_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

}  // namespace

std::string mixture_to_json(const Mixture& m, int indent) {
    json obj;
    obj["family"] = family_name(m.family());
    obj["weights"] = vector_to_json(m.weights());
    json comps = json::array();
    for (const Component& c : m.components()) comps.push_back(component_to_json(c));
    obj["components"] = comps;
    return obj.dump(indent);
}

Mixture mixture_from_json(const std::string& text) {
    const json obj = parse_text(text, "mixture");
    if (!obj.is_object()) throw std::invalid_argument("mixture JSON must be an object");
    const json& fam = require_field(obj, "mixture", "family");
    if (!fam.is_string())
        throw std::invalid_argument("field 'mixture.family' must be a string");
    const Family family = family_from_name(fam.get<std::string>());

    const Eigen::VectorXd weights =
        vector_at(require_field(obj, "mixture", "weights"), "mixture.weights");

    const json& comps = require_field(obj, "mixture", "components");
    if (!comps.is_array())
        throw std::invalid_argument("field 'mixture.components' must be an array");
    if (static_cast<Eigen::Index>(comps.size()) != weights.size())
        throw std::invalid_argument(
            "field 'mixture.components' length does not match 'mixture.weights'");
    std::vector<Component> parsed;
    parsed.reserve(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i)
        parsed.push_back(component_from_json(
            family, comps[i], "mixture.components[" + std::to_string(i) + "]"));
    return Mixture(weights, parsed);
}

void save_mixture(const std::string& path, const Mixture& m) {
    write_file(path, mixture_to_json(m) + "\n");
}

Mixture load_mixture(const std::string& path) { return mixture_from_json(read_file(path)); }

std::string plan_to_json(const TransportPlan& plan, int indent) {
    json obj;
    obj["value"] = plan.value;
    obj["solver"] = plan.solver == SolverKind::exact ? "exact" : "sinkhorn";
    obj["iterations"] = plan.iterations;
    obj["marginal_residual"] = plan.marginal_residual;
    json rows = json::array();
    for (Eigen::Index i = 0; i < plan.coupling.rows(); ++i)
        rows.push_back(vector_to_json(plan.coupling.row(i).transpose()));
    obj["coupling"] = rows;
    return obj.dump(indent);
}

TransportPlan plan_from_json(const std::string& text) {
    const json obj = parse_text(text, "plan");
    TransportPlan plan;
    plan.value = number_at(require_field(obj, "plan", "value"), "plan.value");
    const json& solver = require_field(obj, "plan", "solver");
    if (!solver.is_string() ||
        (solver.get<std::string>() != "exact" && solver.get<std::string>() != "sinkhorn"))
        throw std::invalid_argument("field 'plan.solver' must be \"exact\" or \"sinkhorn\"");
    plan.solver =
        solver.get<std::string>() == "exact" ? SolverKind::exact : SolverKind::sinkhorn;
    plan.iterations = static_cast<int>(
        number_at(require_field(obj, "plan", "iterations"), "plan.iterations"));
    plan.marginal_residual = number_at(
        require_field(obj, "plan", "marginal_residual"), "plan.marginal_residual");

    const json& rows = require_field(obj, "plan", "coupling");
    if (!rows.is_array() || rows.empty())
        throw std::invalid_argument("field 'plan.coupling' must be a non-empty array");
    const Eigen::Index k1 = static_cast<Eigen::Index>(rows.size());
    Eigen::Index k2 = -1;
    for (Eigen::Index i = 0; i < k1; ++i) {
        const std::string path = "plan.coupling[" + std::to_string(i) + "]";
        const Eigen::VectorXd row = vector_at(rows[static_cast<std::size_t>(i)], path);
        if (k2 < 0) {
            k2 = row.size();
            plan.coupling.resize(k1, k2);
        } else if (row.size() != k2) {
            throw std::invalid_argument("field '" + path + "' has inconsistent length");
        }
        plan.coupling.row(i) = row.transpose();
    }
    return plan;
}

std::string report_to_json(const BoundReport& report, int indent) {
    json obj;
    obj["target"] = report.target;
    obj["mc_estimate"] = report.mc_estimate;
    obj["mc_standard_error"] = report.mc_standard_error;
    json records = json::array();
    for (const BoundRecord& r : report.records) {
        json rec;
        rec["name"] = r.name;
        rec["value"] = r.value;
        rec["side"] = r.side == BoundSide::upper ? "upper" : "lower";
        rec["seconds"] = r.seconds;
        records.push_back(rec);
    }
    obj["records"] = records;
    return obj.dump(indent);
}

BoundReport report_from_json(const std::string& text) {
    const json obj = parse_text(text, "report");
    BoundReport report;
    const json& target = require_field(obj, "report", "target");
    if (!target.is_string())
        throw std::invalid_argument("field 'report.target' must be a string");
    report.target = target.get<std::string>();
    report.mc_estimate =
        number_at(require_field(obj, "report", "mc_estimate"), "report.mc_estimate");
    report.mc_standard_error = number_at(
        require_field(obj, "report", "mc_standard_error"), "report.mc_standard_error");
    const json& records = require_field(obj, "report", "records");
    if (!records.is_array())
        throw std::invalid_argument("field 'report.records' must be an array");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string path = "report.records[" + std::to_string(i) + "]";
        const json& rec = records[i];
        BoundRecord r;
        const json& name = require_field(rec, path, "name");
        if (!name.is_string())
            throw std::invalid_argument("field '" + path + ".name' must be a string");
        r.name = name.get<std::string>();
        r.value = number_at(require_field(rec, path, "value"), path + ".value");
        const json& side = require_field(rec, path, "side");
        if (!side.is_string() ||
            (side.get<std::string>() != "upper" && side.get<std::string>() != "lower"))
            throw std::invalid_argument("field '" + path +
                                        ".side' must be \"upper\" or \"lower\"");
        r.side = side.get<std::string>() == "upper" ? BoundSide::upper : BoundSide::lower;
        r.seconds = number_at(require_field(rec, path, "seconds"), path + ".seconds");
        report.records.push_back(r);
    }
    return report;
}

IdxData load_idx(const std::string& path) {
    const std::string raw = read_file(path);
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(raw.data());
    if (raw.size() < 4) throw IdxTruncatedError("idx: file too short for magic number");

    IdxData data;
    data.magic = read_be32(bytes);
    std::size_t ndims = 0;
    if (data.magic == 0x00000803u)
        ndims = 3;
    else if (data.magic == 0x00000801u)
        ndims = 1;
    else {
        std::ostringstream msg;
        msg << "idx: unsupported magic 0x" << std::hex << std::setw(8) << std::setfill('0')
            << data.magic;
        throw IdxMagicError(msg.str());
    }

    const std::size_t header = 4 + 4 * ndims;
    if (raw.size() < header)
        throw IdxTruncatedError("idx: file too short for dimension sizes");
    std::size_t expected = 1;
    for (std::size_t k = 0; k < ndims; ++k) {
        data.dims.push_back(read_be32(bytes + 4 + 4 * k));
        expected *= data.dims.back();
    }
    const std::size_t available = raw.size() - header;
    if (available != expected) {
        std::ostringstream msg;
        msg << "idx: payload size mismatch: expected " << expected << " bytes, found "
            << available;
        throw IdxTruncatedError(msg.str());
    }
    data.bytes.assign(bytes + header, bytes + raw.size());
    return data;
}

void write_idx(const std::string& path, const IdxData& data) {
    const std::size_t ndims = data.magic == 0x00000803u  ? 3
                              : data.magic == 0x00000801u ? 1
                                                          : 0;
    if (ndims == 0) throw std::invalid_argument("idx: unsupported magic for writing");
    if (data.dims.size() != ndims)
        throw std::invalid_argument("idx: dimension count does not match magic");
    std::size_t expected = 1;
    for (const std::uint32_t d : data.dims) expected *= d;
    if (expected != data.bytes.size())
        throw std::invalid_argument("idx: payload size does not match dimensions");

    std::string out;
    append_be32(out, data.magic);
    for (const std::uint32_t d : data.dims) append_be32(out, d);
    out.append(data.bytes.begin(), data.bytes.end());
    write_file(path, out);
}

Eigen::MatrixXd idx_to_points(const IdxData& data) {
    if (data.magic != 0x00000803u || data.dims.size() != 3)
        throw std::invalid_argument("idx: points conversion needs a 3D byte tensor");
    const Eigen::Index n = data.dims[0];
    const Eigen::Index stride =
        static_cast<Eigen::Index>(data.dims[1]) * static_cast<Eigen::Index>(data.dims[2]);
    Eigen::MatrixXd points(n, stride);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < stride; ++j)
            points(i, j) =
                static_cast<double>(data.bytes[static_cast<std::size_t>(i * stride + j)]) /
                255.0;
    return points;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream cells(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) numeric = false;
                row.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
            }
            if (!numeric) break;
        }
        if (!numeric) {
            if (header_allowed) {  // a leading header row is skipped
                header_allowed = false;
                continue;
            }
            throw std::invalid_argument("csv: non-numeric cell at line " +
                                        std::to_string(line_no));
        }
        header_allowed = false;
        if (!rows.empty() && rows.front().size() != row.size())
            throw std::invalid_argument("csv: ragged row at line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows) {
    if (!header.empty() && static_cast<Eigen::Index>(header.size()) != rows.cols() &&
        rows.rows() > 0)
        throw std::invalid_argument("csv: header width does not match data");
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << std::setprecision(17);
    for (std::size_t j = 0; j < header.size(); ++j)
        out << header[j] << (j + 1 < header.size() ? "," : "");
    if (!header.empty()) out << "\n";
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j)
            out << rows(i, j) << (j + 1 < rows.cols() ? "," : "");
        out << "\n";
    }
}

}  // namespace crot
