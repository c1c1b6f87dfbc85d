#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "riskscope/certificates.hpp"
#include "riskscope/instance.hpp"

namespace riskscope {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV: row-major, '.' decimal separator, '\n' row terminator.  Parsing is
// strict (to_chars/from_chars, locale-free); errors carry 1-based line and
// field positions.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string matrix_to_csv(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

inline Matrix parse_csv_matrix(std::string_view text) {
    std::vector<std::vector<double>> rows;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (pos > text.size()) break;  // trailing newline
            throw ParseError("csv: empty row", line_no);
        }
        std::vector<double> row;
        std::size_t field_start = 0;
        int field_no = 0;
        while (field_start <= line.size()) {
            std::size_t comma = line.find(',', field_start);
            if (comma == std::string_view::npos) comma = line.size();
            std::string_view field = line.substr(field_start, comma - field_start);
            ++field_no;
            while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
                field.remove_prefix(1);
            while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
                field.remove_suffix(1);
            double v = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
                throw ParseError("csv: malformed number '" + std::string(field) + "'", line_no,
                                 field_no);
            row.push_back(v);
            field_start = comma + 1;
            if (comma == line.size()) break;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("csv: ragged row (expected " +
                                 std::to_string(rows.front().size()) + " fields, got " +
                                 std::to_string(row.size()) + ")",
                             line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("csv: no data rows", 1);
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write file: " + path.string());
    out << text;
}

inline Matrix read_csv_matrix(const std::filesystem::path& path) {
    return parse_csv_matrix(read_text_file(path));
}

inline void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
    write_text_file(path, matrix_to_csv(m));
}

// Vectors are stored as a single CSV column; a single row is also accepted.
inline Vector read_csv_vector(const std::filesystem::path& path) {
    const Matrix m = read_csv_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw ParseError("csv: expected a vector (one column or one row), got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()),
                     1);
}

inline void write_csv_vector(const std::filesystem::path& path, const Vector& v) {
    write_csv_matrix(path, v);
}

// ---------------------------------------------------------------------------
// JSON schemas.  Extended reals serialize as numbers when finite and as the
// strings "inf" / "-inf" otherwise (nlohmann would emit null for infinities).
// ---------------------------------------------------------------------------

inline const Json& require_field(const Json& j, const char* field, const char* context) {
    const auto it = j.find(field);
    if (it == j.end())
        throw SchemaError(std::string(context) + ": missing field '" + field + "'");
    return *it;
}

template <typename T>
T require_typed(const Json& j, const char* field, const char* context) {
    const Json& v = require_field(j, field, context);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError(std::string(context) + ": field '" + field + "' has the wrong type");
    }
}

inline double json_to_extended(const Json& j, const char* context = "value") {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw SchemaError(std::string(context) + ": expected a number or 'inf'/'-inf'");
}

inline Json extended_to_json(double v) {
    if (std::isfinite(v)) return Json(v);
    return Json(v > 0 ? "inf" : "-inf");
}

inline Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline Vector json_to_vector(const Json& j, const char* context) {
    if (!j.is_array()) throw SchemaError(std::string(context) + ": expected an array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw SchemaError(std::string(context) + ": expected numeric entries");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline std::string named_norm_name(NamedNorm n) {
    switch (n) {
        case NamedNorm::l1: return "l1";
        case NamedNorm::l2: return "l2";
        case NamedNorm::linf: return "linf";
    }
    return "l2";
}

inline NamedNorm named_norm_from(const std::string& s, const char* context) {
    if (s == "l1") return NamedNorm::l1;
    if (s == "l2") return NamedNorm::l2;
    if (s == "linf") return NamedNorm::linf;
    throw SchemaError(std::string(context) + ": unknown norm '" + s + "'");
}

inline Json set_to_json(const ConvexSet& set) {
    Json j;
    if (const auto* box = std::get_if<BoxSet>(&set)) {
        j["type"] = "box";
        j["lo"] = vector_to_json(box->lo);
        j["hi"] = vector_to_json(box->hi);
    } else if (const auto* ball = std::get_if<BallSet>(&set)) {
        j["type"] = "ball";
        j["center"] = vector_to_json(ball->center);
        j["radius"] = ball->radius;
    } else {
        j["type"] = "singleton";
        j["point"] = vector_to_json(std::get<SingletonSet>(set).point);
    }
    return j;
}

inline ConvexSet set_from_json(const Json& j) {
    const std::string type = require_typed<std::string>(j, "type", "set");
    if (type == "box")
        return BoxSet{json_to_vector(require_field(j, "lo", "set"), "set.lo"),
                      json_to_vector(require_field(j, "hi", "set"), "set.hi")};
    if (type == "ball")
        return BallSet{json_to_vector(require_field(j, "center", "set"), "set.center"),
                       require_typed<double>(j, "radius", "set")};
    if (type == "singleton")
        return SingletonSet{json_to_vector(require_field(j, "point", "set"), "set.point")};
    throw SchemaError("set: unknown type '" + type + "'");
}

inline Json finite_penalty_to_json(const FinitePenalty& pen);
inline FinitePenalty finite_penalty_from_json(const Json& j);

inline Json penalty_to_json(const PenaltySpec& pen) {
    Json j;
    if (std::holds_alternative<ZeroPenalty>(pen)) {
        j["type"] = "zero";
    } else if (const auto* l1 = std::get_if<ScaledL1>(&pen)) {
        j["type"] = "scaled_l1";
        j["lam"] = l1->lam;
        j["n"] = l1->n;
    } else if (const auto* lq = std::get_if<ScaledLqNorm>(&pen)) {
        j["type"] = "scaled_lq";
        j["lam"] = lq->lam;
        j["q"] = lq->q;
        j["norm"] = named_norm_name(lq->norm);
    } else if (const auto* sq = std::get_if<SquaredL2>(&pen)) {
        j["type"] = "squared_l2";
        j["lam"] = sq->lam;
    } else if (const auto* ind = std::get_if<IndicatorPenalty>(&pen)) {
        j["type"] = "indicator";
        j["set"] = set_to_json(ind->set);
    } else {
        const auto& sum = std::get<SumPenalty>(pen);
        j["type"] = "sum";
        j["finite"] = finite_penalty_to_json(sum.finite);
        j["indicator"] = set_to_json(sum.indicator.set);
    }
    return j;
}

inline Json finite_penalty_to_json(const FinitePenalty& pen) {
    return std::visit([](const auto& h) { return penalty_to_json(PenaltySpec{h}); }, pen);
}

inline PenaltySpec penalty_from_json(const Json& j) {
    const std::string type = require_typed<std::string>(j, "type", "penalty");
    if (type == "zero") return ZeroPenalty{};
    if (type == "scaled_l1")
        return ScaledL1{require_typed<double>(j, "lam", "penalty"),
                        require_typed<int>(j, "n", "penalty")};
    if (type == "scaled_lq")
        return ScaledLqNorm{require_typed<double>(j, "lam", "penalty"),
                            require_typed<int>(j, "q", "penalty"),
                            named_norm_from(require_typed<std::string>(j, "norm", "penalty"),
                                            "penalty")};
    if (type == "squared_l2")
        return SquaredL2{require_typed<double>(j, "lam", "penalty")};
    if (type == "indicator")
        return IndicatorPenalty{set_from_json(require_field(j, "set", "penalty"))};
    if (type == "sum")
        return SumPenalty{finite_penalty_from_json(require_field(j, "finite", "penalty")),
                          IndicatorPenalty{set_from_json(require_field(j, "indicator", "penalty"))}};
    throw SchemaError("penalty: unknown type '" + type + "'");
}

inline FinitePenalty finite_penalty_from_json(const Json& j) {
    PenaltySpec pen = penalty_from_json(j);
    return std::visit(
        [](const auto& h) -> FinitePenalty {
            using H = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<H, ZeroPenalty> || std::is_same_v<H, ScaledL1> ||
                          std::is_same_v<H, ScaledLqNorm> || std::is_same_v<H, SquaredL2>)
                return FinitePenalty{h};
            else
                throw SchemaError("penalty: the finite part of a sum cannot be an indicator");
        },
        pen);
}

inline Json noise_to_json(const NoiseSpec& noise) {
    Json j;
    if (const auto* fixed = std::get_if<FixedNoise>(&noise)) {
        j["type"] = "fixed";
        j["values"] = vector_to_json(fixed->values);
    } else {
        const auto& g = std::get<GaussianNoise>(noise);
        j["type"] = "gaussian";
        j["sigma"] = g.sigma;
        j["seed"] = g.seed;
    }
    return j;
}

inline NoiseSpec noise_from_json(const Json& j) {
    const std::string type = require_typed<std::string>(j, "type", "noise");
    if (type == "fixed")
        return FixedNoise{json_to_vector(require_field(j, "values", "noise"), "noise.values")};
    if (type == "gaussian")
        return GaussianNoise{require_typed<double>(j, "sigma", "noise"),
                             require_typed<std::uint64_t>(j, "seed", "noise")};
    throw SchemaError("noise: unknown type '" + type + "'");
}

// Saves the instance as <path> (JSON metadata) plus a sibling CSV holding X,
// referenced by a path relative to the JSON file.
inline void save_instance(const ProblemInstance& inst, const std::filesystem::path& json_path) {
    validate_instance(inst);
    std::filesystem::path csv_path = json_path;
    csv_path.replace_extension(".X.csv");
    write_csv_matrix(csv_path, inst.X);
    Json j;
    j["n"] = inst.n();
    j["p"] = inst.p();
    j["x_csv"] = csv_path.filename().string();
    j["beta_star"] = vector_to_json(inst.beta_star);
    j["noise"] = noise_to_json(inst.noise);
    j["penalty"] = penalty_to_json(inst.penalty);
    write_text_file(json_path, j.dump(2) + "\n");
}

inline ProblemInstance load_instance(const std::filesystem::path& json_path) {
    Json j;
    try {
        j = Json::parse(read_text_file(json_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("instance json: ") + e.what(), 1);
    }
    ProblemInstance inst;
    const std::string x_csv = require_typed<std::string>(j, "x_csv", "instance");
    inst.X = read_csv_matrix(json_path.parent_path() / x_csv);
    inst.beta_star = json_to_vector(require_field(j, "beta_star", "instance"),
                                    "instance.beta_star");
    inst.noise = noise_from_json(require_field(j, "noise", "instance"));
    inst.penalty = penalty_from_json(require_field(j, "penalty", "instance"));
    if (j.contains("n") && require_typed<int>(j, "n", "instance") != inst.n())
        throw SchemaError("instance: field 'n' does not match the CSV row count");
    if (j.contains("p") && require_typed<int>(j, "p", "instance") != inst.p())
        throw SchemaError("instance: field 'p' does not match the CSV column count");
    validate_instance(inst);
    return inst;
}

inline Json solve_result_to_json(const SolveResult& res) {
    Json j;
    j["beta_hat"] = vector_to_json(res.beta_hat);
    j["risk"] = res.risk;
    j["objective"] = res.objective;
    j["opt_residual"] = res.opt_residual;
    j["iterations"] = res.iterations;
    j["method"] = method_name(res.method);
    return j;
}

inline Json certificate_to_json(const Certificate& cert) {
    Json j;
    j["kind"] = certificate_kind_name(cert.kind);
    j["direction"] = cert.direction;
    j["bound"] = extended_to_json(cert.bound);
    j["verdict"] = cert.verdict == CertVerdict::Verified ? "Verified" : "NotApplicable";
    j["slack"] = extended_to_json(cert.slack);
    Json prems = Json::array();
    for (const auto& p : cert.premises) {
        Json pj;
        pj["name"] = p.name;
        pj["op"] = p.op;
        pj["lhs"] = extended_to_json(p.lhs);
        pj["rhs"] = extended_to_json(p.rhs);
        pj["satisfied"] = p.satisfied;
        pj["margin"] = extended_to_json(p.margin);
        prems.push_back(std::move(pj));
    }
    j["premises"] = std::move(prems);
    Json flags = Json::object();
    for (const auto& [k, v] : cert.flags) flags[k] = v;
    j["flags"] = std::move(flags);
    return j;
}

}  // namespace riskscope
