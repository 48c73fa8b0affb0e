#pragma once

// JSON and CSV plumbing: domain descriptors, matrices, reports. Numbers are
// written with 17 significant digits through std::to_chars so output does not
// depend on the locale; infinities become the strings "inf" / "-inf".

#include "grhilbert/domains.hpp"
#include "grhilbert/errors.hpp"
#include "grhilbert/linalg.hpp"
#include "grhilbert/metric.hpp"
#include "grhilbert/rescaling.hpp"
#include "grhilbert/symmetry.hpp"

#include <json.hpp>

#include <charconv>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace grh {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number and JSON text

inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// JSON value for a real; non-finite values become strings.
inline Json number_json(double v)
{
    if (!std::isfinite(v)) return format_number(v);
    return v;
}

namespace detail {

inline void escape_string(std::string& out, const std::string& s)
{
    out += '"';
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(c)));
                out += buf;
            } else {
                out += c;
            }
        }
    }
    out += '"';
}

inline void dump_into(std::string& out, const Json& j, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (std::isfinite(v))
            out += format_number(v);
        else
            escape_string(out, format_number(v));
        break;
    }
    case Json::value_t::string: escape_string(out, j.get<std::string>()); break;
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            break;
        }
        // Arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& e : j) flat = flat && !e.is_structured();
        out += '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first) out += flat ? ", " : ",";
            if (!flat) out += nl + pad;
            dump_into(out, e, indent, depth + 1);
            first = false;
        }
        if (!flat) out += nl + close;
        out += ']';
        break;
    }
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            break;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ',';
            out += nl + pad;
            escape_string(out, it.key());
            out += indent > 0 ? ": " : ":";
            dump_into(out, it.value(), indent, depth + 1);
            first = false;
        }
        out += nl + close;
        out += '}';
        break;
    }
    default: out += "null";
    }
}

} // namespace detail

inline std::string dump_json(const Json& j, int indent = 2)
{
    std::string out;
    detail::dump_into(out, j, indent, 0);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Matrices

inline Json matrix_json(const Matrix& m)
{
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline double real_from_json(const Json& j, const std::string& what)
{
    if (!j.is_number()) throw DescriptorError(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw DescriptorError(what + " must be finite");
    return v;
}

/// Rows of numbers; a bare number is a 1 x 1 matrix, a flat array a column.
inline Matrix matrix_from_json(const Json& j, const std::string& what)
{
    if (j.is_number()) {
        Matrix m(1, 1);
        m(0, 0) = real_from_json(j, what);
        return m;
    }
    if (!j.is_array() || j.empty()) throw DescriptorError(what + " must be a nonempty array");
    if (!j.front().is_array()) {
        Matrix m(static_cast<Eigen::Index>(j.size()), 1);
        for (std::size_t i = 0; i < j.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = real_from_json(j[i], what);
        return m;
    }
    const std::size_t cols = j.front().size();
    if (cols == 0) throw DescriptorError(what + " has an empty row");
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw DescriptorError(what + " is not rectangular");
        for (std::size_t k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = real_from_json(j[i][k], what);
    }
    return m;
}

inline Matrix chart_matrix_from_json(const Json& j, ChartShape shape, const std::string& what)
{
    Matrix m = matrix_from_json(j, what);
    if (!shape.matches(m))
        throw DescriptorError(what + " must be " + std::to_string(shape.q) + " x " + std::to_string(shape.p));
    return m;
}

// ---------------------------------------------------------------------------
// Descriptors

/// Throws DescriptorError for any key outside `allowed`.
inline void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object()) throw DescriptorError(where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw DescriptorError("unknown field '" + it.key() + "' in " + where);
}

inline int int_field(const Json& j, const char* key, const std::string& where, std::optional<int> fallback = std::nullopt)
{
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw DescriptorError(std::string("missing field '") + key + "' in " + where);
    }
    if (!j[key].is_number_integer()) throw DescriptorError(std::string("field '") + key + "' must be an integer");
    return j[key].get<int>();
}

inline const Json& required(const Json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) throw DescriptorError(std::string("missing field '") + key + "' in " + where);
    return j[key];
}

inline BodyPtr parse_body(const Json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw DescriptorError("domain needs a string 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    const std::string where = "domain '" + kind + "'";
    if (kind == "operator_ball") {
        reject_unknown(j, {"kind", "p", "q"}, where);
        return operator_ball(ChartShape(int_field(j, "p", where), int_field(j, "q", where)));
    }
    if (kind == "half_cone") {
        reject_unknown(j, {"kind", "p", "q"}, where);
        const int p = int_field(j, "p", where);
        if (int_field(j, "q", where, p) != p) throw DescriptorError("half_cone needs q = p");
        return half_cone(p);
    }
    if (kind == "full_chart") {
        reject_unknown(j, {"kind", "p", "q"}, where);
        return full_chart(ChartShape(int_field(j, "p", where), int_field(j, "q", where)));
    }
    if (kind == "polytope") {
        reject_unknown(j, {"kind", "p", "q", "functionals", "interior", "bounding_radius"}, where);
        const ChartShape shape(int_field(j, "p", where), int_field(j, "q", where));
        const Json& fs = required(j, "functionals", where);
        if (!fs.is_array() || fs.empty()) throw DescriptorError("polytope functionals must be a nonempty array");
        std::vector<Halfspace> faces;
        for (const auto& f : fs) {
            reject_unknown(f, {"a", "b"}, "polytope functional");
            faces.push_back(Halfspace{chart_matrix_from_json(required(f, "a", "functional"), shape, "functional a"),
                                      real_from_json(required(f, "b", "functional"), "functional b")});
        }
        std::optional<Matrix> interior;
        if (j.contains("interior")) interior = chart_matrix_from_json(j["interior"], shape, "interior");
        const double radius = j.contains("bounding_radius") ? real_from_json(j["bounding_radius"], "bounding_radius") : kInf;
        return polytope(shape, std::move(faces), interior, radius);
    }
    if (kind == "dominance_polytope") {
        reject_unknown(j, {"kind", "p"}, where);
        return dominance_polytope(int_field(j, "p", where));
    }
    if (kind == "random_polytope") {
        reject_unknown(j, {"kind", "p", "q", "cuts", "box", "seed"}, where);
        const ChartShape shape(int_field(j, "p", where), int_field(j, "q", where));
        const double box = j.contains("box") ? real_from_json(j["box"], "box") : 0.45;
        const int seed = int_field(j, "seed", where, 1);
        return random_polytope(shape, int_field(j, "cuts", where, 6), box, static_cast<std::uint64_t>(seed));
    }
    if (kind == "affine_image") {
        reject_unknown(j, {"kind", "inner", "matrix", "offset"}, where);
        BodyPtr inner = parse_body(required(j, "inner", where));
        const Matrix lin = matrix_from_json(required(j, "matrix", where), "affine matrix");
        const Matrix off = j.contains("offset") ? chart_matrix_from_json(j["offset"], inner->shape, "offset")
                                                : Matrix(Matrix::Zero(inner->shape.q, inner->shape.p));
        return affine_image(inner, lin, off);
    }
    if (kind == "tangent_cone") {
        reject_unknown(j, {"kind", "inner", "point"}, where);
        BodyPtr inner = parse_body(required(j, "inner", where));
        return tangent_cone(inner, chart_matrix_from_json(required(j, "point", where), inner->shape, "point"));
    }
    throw DescriptorError("unknown domain kind '" + kind + "'");
}

inline Json body_json(const ConvexBody& b)
{
    Json j;
    j["kind"] = to_string(b.kind);
    j["label"] = b.label;
    j["p"] = b.shape.p;
    j["q"] = b.shape.q;
    return j;
}

// ---------------------------------------------------------------------------
// Reports

inline Json budget_json(const MetricBudget& b)
{
    Json j;
    j["max_segments"] = b.max_segments;
    j["grid"] = b.grid;
    j["golden_iterations"] = b.golden_iterations;
    j["sweeps"] = b.sweeps;
    j["passes"] = b.passes;
    j["restarts"] = b.restarts;
    j["seed"] = b.seed;
    return j;
}

inline Json budget_json(const RProperBudget& b)
{
    Json j;
    j["random_starts"] = b.random_starts;
    j["local_iterations"] = b.local_iterations;
    j["boundary_probes"] = b.boundary_probes;
    j["seed"] = b.seed;
    return j;
}

inline Json budget_json(const ExtremeBudget& b)
{
    Json j;
    j["samples"] = b.samples;
    j["descent_iterations"] = b.descent_iterations;
    j["seed"] = b.seed;
    return j;
}

inline Json reals_json(const std::vector<double>& v)
{
    Json a = Json::array();
    for (double x : v) a.push_back(number_json(x));
    return a;
}

inline Json estimate_json(const MetricEstimate& e)
{
    Json j;
    j["value"] = number_json(e.value);
    Json chain = Json::array();
    for (const auto& w : e.chain.waypoints) chain.push_back(matrix_json(w));
    j["chain"] = std::move(chain);
    j["segment_rhos"] = reals_json(e.segment_rhos);
    j["trace"] = reals_json(e.trace);
    j["seed"] = e.budget.seed;
    j["budget"] = budget_json(e.budget);
    return j;
}

inline Json verdict_json(const RProperVerdict& v)
{
    Json j;
    j["status"] = to_string(v.status);
    if (v.witness_point) j["witness_point"] = matrix_json(*v.witness_point);
    if (v.witness_direction) j["witness_direction"] = matrix_json(v.witness_direction->matrix());
    j["candidates_tested"] = v.candidates_tested;
    j["best_score"] = number_json(v.best_score);
    j["budget"] = budget_json(v.budget);
    return j;
}

inline Json extreme_row_json(const ExtremeSuiteRow& r)
{
    Json j;
    j["point"] = matrix_json(r.point);
    Json t1;
    t1["extreme"] = r.test1_extreme();
    if (r.test1_adjacency.partner) t1["partner"] = matrix_json(*r.test1_adjacency.partner);
    t1["candidates_tested"] = r.test1_adjacency.candidates_tested;
    j["test1_adjacency"] = std::move(t1);
    Json t2;
    t2["extreme"] = r.test2_extreme();
    if (r.test2_ze.witness) {
        t2["witness"] = matrix_json(*r.test2_ze.witness);
        t2["witness_det"] = number_json(r.test2_ze.witness_det);
    }
    t2["min_normalized_det"] = number_json(r.test2_ze.min_normalized_det);
    t2["evaluations"] = r.test2_ze.evaluations;
    t2["budget"] = budget_json(r.test2_ze.budget);
    j["test2_ze"] = std::move(t2);
    Json t3 = verdict_json(r.test3_tc_proper);
    t3["extreme"] = r.test3_extreme();
    j["test3_tc_proper"] = std::move(t3);
    if (r.test4_residual) {
        Json t4;
        t4["first_residual"] = number_json(*r.test4_residual);
        t4["image_angle"] = number_json(r.test4_angle.value_or(kInf));
        j["test4_degenerate_limit"] = std::move(t4);
    }
    j["consistent"] = r.consistent();
    j["extreme"] = r.extreme();
    return j;
}

inline Json convergence_json(const ConvergenceReport& r)
{
    Json j;
    j["parameter_values"] = reals_json(r.parameter_values);
    j["hausdorff_values"] = reals_json(r.hausdorff_values);
    j["metric_disagreements"] = reals_json(r.metric_disagreements);
    j["verdict"] = to_string(r.verdict);
    j["budget"] = budget_json(r.budget);
    return j;
}

inline Json check_json(const CheckReport& r)
{
    Json j;
    j["check"] = r.check;
    j["p"] = r.p;
    j["samples"] = r.samples;
    j["violations"] = r.violations;
    j["max_defect"] = number_json(r.max_defect);
    Json c = Json::object();
    for (const auto& [k, v] : r.convention) c[k] = v;
    j["convention"] = std::move(c);
    return j;
}

inline Json limit_json(const DegenerateLimit& d)
{
    Json j;
    j["parameters"] = reals_json(d.parameters);
    j["residuals"] = reals_json(d.residuals);
    j["rank"] = d.rank;
    j["image_angle"] = number_json(d.image_angle);
    j["target"] = matrix_json(d.target);
    if (d.image) j["image"] = reals_json(std::vector<double>(d.image->coords.data(), d.image->coords.data() + d.image->coords.size()));
    return j;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_row(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

inline std::string convergence_csv(const ConvergenceReport& r)
{
    std::string out = csv_row({"parameter", "hausdorff", "metric_disagreement"});
    for (std::size_t i = 0; i < r.parameter_values.size(); ++i) {
        out += csv_row({format_number(r.parameter_values[i]),
                        i < r.hausdorff_values.size() ? format_number(r.hausdorff_values[i]) : "",
                        i < r.metric_disagreements.size() ? format_number(r.metric_disagreements[i]) : ""});
    }
    return out;
}

inline std::string extreme_csv(const std::vector<ExtremeSuiteRow>& rows)
{
    std::string out = csv_row({"row", "point", "test1", "test2", "test3", "test4_angle", "consistent"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::string pt;
        for (Eigen::Index k = 0; k < r.point.size(); ++k) pt += (k ? " " : "") + format_number(r.point(k / r.point.cols(), k % r.point.cols()));
        out += csv_row({std::to_string(i), pt, r.test1_extreme() ? "1" : "0", r.test2_extreme() ? "1" : "0", r.test3_extreme() ? "1" : "0",
                        r.test4_angle ? format_number(*r.test4_angle) : "", r.consistent() ? "1" : "0"});
    }
    return out;
}

} // namespace grh
