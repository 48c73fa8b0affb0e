#pragma once

// Experiment drivers for the limit statements: dilations toward a boundary
// point converging to the tangent cone, metric convergence for shrinking
// nested bodies, the extreme-point equivalence suite and the failure of the
// tangent-cone criterion when p != q.

#include "grhilbert/domains.hpp"
#include "grhilbert/errors.hpp"
#include "grhilbert/linalg.hpp"
#include "grhilbert/lingeom.hpp"
#include "grhilbert/metric.hpp"
#include "grhilbert/symmetry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace grh {

struct ConvergenceReport {
    enum class Verdict { ConvergentTrend, NoTrend };
    std::vector<double> parameter_values;
    std::vector<double> hausdorff_values;
    std::vector<double> metric_disagreements;
    Verdict verdict = Verdict::NoTrend;
    MetricBudget budget;
};

inline const char* to_string(ConvergenceReport::Verdict v)
{
    return v == ConvergenceReport::Verdict::ConvergentTrend ? "ConvergentTrend" : "NoTrend";
}

/// Last value at most a quarter of the first, and nonincreasing after the maximum.
inline ConvergenceReport::Verdict trend_verdict(const std::vector<double>& v)
{
    if (v.size() < 2) return ConvergenceReport::Verdict::NoTrend;
    if (!(v.back() <= 0.25 * v.front())) return ConvergenceReport::Verdict::NoTrend;
    const auto top = std::max_element(v.begin(), v.end());
    for (auto it = top; it + 1 != v.end(); ++it)
        if (*(it + 1) > *it) return ConvergenceReport::Verdict::NoTrend;
    return ConvergenceReport::Verdict::ConvergentTrend;
}

using ProbePair = std::pair<Matrix, Matrix>;

/// Pairs around center within estimated metric radius `radius`: random
/// offsets are halved until both ends are members with K-hat <= radius.
inline std::vector<ProbePair> default_probe_pairs(const ConvexBody& body, const Matrix& center, int count = 8, double radius = 2.0,
                                                  std::uint64_t seed = 23)
{
    if (!body.contains(center)) throw ProbeOutside("probe center not in " + body.label);
    Rng rng(seed);
    MetricBudget quick;
    quick.restarts = 0;
    quick.passes = 1;
    std::vector<ProbePair> out;
    const double scale = 0.25 * std::max(1.0, center.norm());
    auto draw = [&]() {
        Matrix z = center + scale * rng.gaussian_matrix(center.rows(), center.cols()) / std::sqrt(double(center.size()));
        for (int k = 0; k < 60; ++k) {
            if (body.contains(z) && k_estimate(body, center, z, quick).value <= radius) return z;
            z = center + 0.5 * (z - center);
        }
        return Matrix(center);
    };
    for (int k = 0; k < count; ++k) {
        Matrix a = draw();
        Matrix b = draw();
        out.emplace_back(std::move(a), std::move(b));
    }
    return out;
}

namespace detail {

inline void require_probes(const ConvexBody& body, const std::vector<ProbePair>& probes)
{
    for (const auto& [a, b] : probes)
        if (!body.contains(a) || !body.contains(b)) throw ProbeOutside("probe pair not in " + body.label);
}

inline double max_disagreement(const ConvexBody& a, const ConvexBody& b, const std::vector<ProbePair>& probes, const MetricBudget& budget)
{
    double m = 0.0;
    for (const auto& [x, y] : probes) m = std::max(m, std::abs(k_estimate(a, x, y, budget).value - k_estimate(b, x, y, budget).value));
    return m;
}

} // namespace detail

struct TangentConvergenceOptions {
    double radius = 2.0;
    int directions = 256;
    std::uint64_t seed = 7;
    MetricBudget budget;
    BodyPtr cone;                    ///< exact tangent cone if known; else the dilation oracle
    std::optional<Matrix> center;    ///< common interior point for radial profiles
};

/// d_H^{(R)}(A_t Omega, TC_e Omega) and the probe-pair metric gap for each t.
inline ConvergenceReport tangent_cone_convergence(const BodyPtr& body, const Matrix& e, const std::vector<double>& t_grid,
                                                  const std::vector<ProbePair>& probes, const TangentConvergenceOptions& opt = {})
{
    if (t_grid.empty()) throw DescriptorError("empty parameter grid");
    const BodyPtr cone = opt.cone ? opt.cone : tangent_cone(body, e);
    certify_boundary(*body, e);
    const Matrix center = opt.center.value_or(Matrix(e + 0.5 * (body->interior - e)));
    const OneParameterGroup group = rescaling_group(e);

    ConvergenceReport rep;
    rep.budget = opt.budget;
    detail::require_probes(*cone, probes);
    for (double t : t_grid) {
        const BodyPtr scaled = chart_affine_image(body, group.evaluate(t));
        if (t == t_grid.front()) detail::require_probes(*scaled, probes);
        rep.parameter_values.push_back(t);
        rep.hausdorff_values.push_back(hausdorff_distance_clipped(*scaled, *cone, opt.radius, opt.directions, opt.seed, center));
        rep.metric_disagreements.push_back(detail::max_disagreement(*scaled, *cone, probes, opt.budget));
    }
    rep.verdict = trend_verdict(rep.hausdorff_values);
    return rep;
}

/// Metric gap between lambda * Omega (dilated about center) and Omega.
inline ConvergenceReport nested_body_metric_convergence(const BodyPtr& body, const std::vector<double>& lambdas,
                                                        const std::vector<ProbePair>& probes, const MetricBudget& budget = {},
                                                        std::optional<Matrix> center = std::nullopt)
{
    detail::require_probes(*body, probes);
    const Matrix c = center.value_or(body->interior);
    ConvergenceReport rep;
    rep.budget = budget;
    for (double lam : lambdas) {
        if (lam < 1.0) throw DescriptorError("dilation factors must be at least 1");
        const BodyPtr big = dilation(body, lam, c);
        rep.parameter_values.push_back(lam);
        rep.metric_disagreements.push_back(detail::max_disagreement(*big, *body, probes, budget));
    }
    rep.verdict = trend_verdict(rep.metric_disagreements);
    return rep;
}

// ---------------------------------------------------------------------------
// Extreme-point suite

struct ExtremeSuiteBudget {
    int adjacency_random_directions = 32;
    ExtremeBudget extreme;
    RProperBudget rproper;
    std::vector<double> boost_parameters{2, 4, 6, 8, 10, 12};
};

struct ExtremeSuiteRow {
    Matrix point;
    AdjacencySearchResult test1_adjacency;
    ExtremeTestResult test2_ze;
    RProperVerdict test3_tc_proper;
    std::optional<double> test4_residual;
    std::optional<double> test4_angle;

    bool test1_extreme() const { return !test1_adjacency.partner.has_value(); }
    bool test2_extreme() const { return test2_ze.extreme(); }
    bool test3_extreme() const { return !test3_tc_proper.violated(); }
    bool consistent() const { return test1_extreme() == test2_extreme() && test2_extreme() == test3_extreme(); }
    bool extreme() const { return consistent() && test1_extreme(); }
};

inline bool is_orthogonal(const Matrix& e, double tol = 1e-10)
{
    return e.rows() == e.cols() && (e.transpose() * e - Matrix::Identity(e.rows(), e.cols())).norm() <= tol;
}

inline std::vector<ExtremeSuiteRow> extreme_equivalence_suite(const BodyPtr& body, const std::vector<Matrix>& points,
                                                              const ExtremeSuiteBudget& budget = {})
{
    if (body->shape.p != body->shape.q) throw DescriptorError("extreme suite needs p = q");
    std::vector<ExtremeSuiteRow> rows;
    for (const Matrix& e : points) {
        certify_boundary(*body, e);
        ExtremeSuiteRow row;
        row.point = e;
        row.test1_adjacency = find_adjacent_partner(*body, e, budget.adjacency_random_directions, budget.rproper.seed + 2);
        row.test2_ze = extreme_point_test(*body, e, budget.extreme);
        row.test3_tc_proper = is_r_proper(*tangent_cone(body, e), budget.rproper);
        if (body->kind == BodyKind::OperatorBall && is_orthogonal(e) && !budget.boost_parameters.empty()) {
            const DegenerateLimit lim = boost_degenerate_limit(body->shape.p, budget.boost_parameters, e);
            row.test4_residual = lim.residuals.front();
            row.test4_angle = lim.image_angle;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Looks for a rank-one line in the tangent cone of the (q x p) operator
/// ball at an isometric extreme point. For p != q one exists; p = q is the
/// control.
struct PnotqResult {
    Matrix point;
    RProperVerdict verdict;
};

inline Matrix isometry_point(int p, int q)
{
    Matrix e = Matrix::Zero(q, p);
    for (int i = 0; i < std::min(p, q); ++i) e(i, i) = 1.0;
    return e;
}

inline PnotqResult pnotq_failure_demo(int p, int q, const RProperBudget& budget = {})
{
    const ChartShape shape(p, q);
    const BodyPtr ball = operator_ball(shape);
    PnotqResult out;
    out.point = isometry_point(p, q);
    out.verdict = is_r_proper(*tangent_cone(ball, out.point), budget);
    return out;
}

// ---------------------------------------------------------------------------
// Face relation along boundary-converging sequences

struct FaceProbeResult {
    enum class Verdict { Unbounded, BoundedAdjacent, BoundedNotReached, Falsification, Inconclusive };
    Verdict verdict = Verdict::Inconclusive;
    std::vector<double> k_hat;        ///< K-hat(x_n, y_n)
    std::vector<double> lower;        ///< hilbert_lower_bound(x_n, y_n)
    int reach_steps = -1;             ///< adjacency steps used, -1 if not reached
};

inline const char* to_string(FaceProbeResult::Verdict v)
{
    switch (v) {
    case FaceProbeResult::Verdict::Unbounded: return "Unbounded";
    case FaceProbeResult::Verdict::BoundedAdjacent: return "BoundedAdjacent";
    case FaceProbeResult::Verdict::BoundedNotReached: return "BoundedNotReached";
    case FaceProbeResult::Verdict::Falsification: return "Falsification";
    case FaceProbeResult::Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

namespace detail {

/// Boundary chain from x to y through staircase corners, at most n steps.
inline int adjacency_reach(const ConvexBody& body, const Matrix& x, const Matrix& y, int n)
{
    if (boundary_adjacent(body, x, y)) return (x - y).norm() == 0.0 ? 0 : 1;
    const Chain base = svd_chain(x, y);
    std::vector<int> order(base.segments());
    std::iota(order.begin(), order.end(), 0);
    if (static_cast<int>(order.size()) > n || order.size() > 4) return -1;
    do {
        const Chain c = svd_chain(x, y, &order);
        bool ok = true;
        for (std::size_t i = 0; i + 1 < c.waypoints.size() && ok; ++i) ok = boundary_adjacent(body, c.waypoints[i], c.waypoints[i + 1]);
        if (ok) return static_cast<int>(c.segments());
    } while (std::next_permutation(order.begin(), order.end()));
    return -1;
}

/// Increments shrink geometrically: the sequence has a finite limit.
inline bool increments_shrink(const std::vector<double>& v)
{
    if (v.size() < 3) return false;
    const double first = std::abs(v[1] - v[0]);
    const double last = std::abs(v.back() - v[v.size() - 2]);
    return last <= 0.25 * std::max(first, 1e-12) || last <= 1e-6;
}

/// Increments stay comparable to the first: logarithmic divergence.
inline bool increments_persist(const std::vector<double>& v)
{
    if (v.size() < 3) return false;
    const double first = v[1] - v[0];
    const double last = v.back() - v[v.size() - 2];
    return first > 0 && last >= 0.5 * first;
}

} // namespace detail

/// x_n -> x and y_n -> y on the boundary. Bounded K-hat requires the limits to
/// be reachable by boundary adjacency; a bounded estimate between two distinct
/// certified extreme points is a falsification.
inline FaceProbeResult face_relation_probe(const BodyPtr& body, const std::vector<Matrix>& xs, const std::vector<Matrix>& ys,
                                           const Matrix& x_limit, const Matrix& y_limit, int max_steps, const MetricBudget& budget = {})
{
    if (xs.size() != ys.size() || xs.empty()) throw DescriptorError("sequence lengths differ or are empty");
    FaceProbeResult res;
    for (std::size_t n = 0; n < xs.size(); ++n) {
        res.k_hat.push_back(k_estimate(*body, xs[n], ys[n], budget).value);
        res.lower.push_back(hilbert_lower_bound(*body, xs[n], ys[n]));
    }
    if (detail::increments_persist(res.lower)) {
        res.verdict = FaceProbeResult::Verdict::Unbounded;
        return res;
    }
    if (!detail::increments_shrink(res.k_hat)) return res;
    res.reach_steps = detail::adjacency_reach(*body, x_limit, y_limit, max_steps);
    if (res.reach_steps >= 0 && res.reach_steps <= max_steps) {
        res.verdict = FaceProbeResult::Verdict::BoundedAdjacent;
        return res;
    }
    res.verdict = FaceProbeResult::Verdict::BoundedNotReached;
    if (body->shape.p == body->shape.q && (x_limit - y_limit).norm() > 1e-9) {
        const bool ex = extreme_point_test(*body, x_limit).extreme() && !find_adjacent_partner(*body, x_limit).partner;
        const bool ey = extreme_point_test(*body, y_limit).extreme() && !find_adjacent_partner(*body, y_limit).partner;
        if (ex && ey) res.verdict = FaceProbeResult::Verdict::Falsification;
    }
    return res;
}

/// x + 2^{-n} (c - x) for n = 1..count: a sequence converging to x.
inline std::vector<Matrix> geometric_approach(const Matrix& x, const Matrix& c, int count)
{
    std::vector<Matrix> out;
    double s = 0.5;
    for (int n = 0; n < count; ++n, s *= 0.5) out.push_back(x + s * (c - x));
    return out;
}

} // namespace grh
