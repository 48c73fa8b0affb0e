#pragma once

// The generalized Hilbert metric on a convex chart domain.
//
//   rho(X, Y)   single rank-one segment: |log cross ratio| against the two
//               boundary hits of the line through X and Y; +inf when Y - X
//               has rank above one.
//   K(X, Y)     infimum of sum rho over chains of rank-one segments.
//
// K is only ever approximated from above (k_estimate). The classical
// Hilbert metric of the body viewed as a convex set in R^{pq}
// (hilbert_lower_bound) is a certified lower bound, so every estimate comes
// with a sandwich H <= K <= K-hat.

#include "grhilbert/domains.hpp"
#include "grhilbert/errors.hpp"
#include "grhilbert/linalg.hpp"
#include "grhilbert/lingeom.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

namespace grh {

struct RhoValue {
    double value = 0.0;
    SegmentHit endpoints;
};

namespace detail {

inline void require_member(const ConvexBody& body, const Matrix& x, const char* which)
{
    check_shape(body, x);
    if (!body.contains(x)) throw PointOutside(std::string(which) + " not in " + body.label);
}

inline double diff_scale(const Matrix& x, const Matrix& y) { return std::max(x.norm(), y.norm()); }

/// |log cross ratio| of the points at parameters 0 and len on a line with hits h.
inline double log_cross(const SegmentHit& h, double len)
{
    return std::abs(std::log(cross_ratio(h.t_minus, 0.0, len, h.t_plus)));
}

} // namespace detail

/// Classical Hilbert distance along the straight segment from X to Y,
/// ignoring the rank constraint.
inline RhoValue segment_rho(const ConvexBody& body, const Matrix& x, const Matrix& y)
{
    detail::require_member(body, x, "X");
    detail::require_member(body, y, "Y");
    const Matrix d = y - x;
    const double len = d.norm();
    if (len == 0.0) return {};
    const Matrix dir = d / len;
    const SegmentHit h = line_hits(body, x, dir);
    return RhoValue{detail::log_cross(h, len), h};
}

inline RhoValue rho(const ConvexBody& body, const Matrix& x, const Matrix& y)
{
    detail::require_member(body, x, "X");
    detail::require_member(body, y, "Y");
    const Matrix d = y - x;
    const int r = numerical_rank(d, kRankTol, rank_floor(detail::diff_scale(x, y)));
    if (r == 0) return {};
    if (r > 1) return RhoValue{kInf, {}};
    double sigma = 0.0;
    const RankOneDirection s = RankOneDirection::from_matrix(d, &sigma);
    const SegmentHit h = boundary_hits(body, x, s);
    return RhoValue{detail::log_cross(h, sigma), h};
}

/// Classical Hilbert metric for p = 1 charts, where every direction is rank one.
inline double hilbert_classical(const ConvexBody& body, const Matrix& x, const Matrix& y)
{
    if (body.shape.p != 1) throw DescriptorError("hilbert_classical needs p = 1");
    return segment_rho(body, x, y).value;
}

/// Hilbert metric of the body as a convex subset of R^{pq}; a lower bound for K.
inline double hilbert_lower_bound(const ConvexBody& body, const Matrix& x, const Matrix& y)
{
    return segment_rho(body, x, y).value;
}

// ---------------------------------------------------------------------------
// Chains

/// Rank-one chain X_0, ..., X_m with X_{i+1} = X_i + steps[i] * directions[i].
struct Chain {
    std::vector<Matrix> waypoints;
    std::vector<RankOneDirection> directions;
    std::vector<double> steps;

    std::size_t segments() const { return directions.size(); }

    /// Builds the direction/step data from waypoints. Repeated waypoints are
    /// dropped; throws if a consecutive difference has rank above one.
    static Chain from_waypoints(const std::vector<Matrix>& pts)
    {
        Chain c;
        if (pts.empty()) return c;
        c.waypoints.push_back(pts.front());
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const Matrix d = pts[i] - c.waypoints.back();
            const int r = numerical_rank(d, kRankTol, rank_floor(detail::diff_scale(pts[i], c.waypoints.back())));
            if (r == 0) continue;
            if (r > 1) throw DegenerateConfiguration("chain step has rank above one");
            double sigma = 0.0;
            c.directions.push_back(RankOneDirection::from_matrix(d, &sigma));
            c.steps.push_back(sigma);
            c.waypoints.push_back(pts[i]);
        }
        if (c.waypoints.size() == 1 && pts.size() > 1) c.waypoints.back() = pts.back();
        return c;
    }

    /// Largest |X_{i+1} - (X_i + t_i S_i)| over the segments.
    double reconstruction_error() const
    {
        double e = 0.0;
        for (std::size_t i = 0; i < segments(); ++i)
            e = std::max(e, (waypoints[i + 1] - waypoints[i] - steps[i] * directions[i].matrix()).norm());
        return e;
    }
};

/// Singular-value staircase from X to Y: Y - X = sum sigma_i u_i v_i^T,
/// traversed in decreasing sigma (stable on ties).
inline Chain svd_chain(const Matrix& x, const Matrix& y, const std::vector<int>* order = nullptr)
{
    const Matrix d = y - x;
    Eigen::JacobiSVD<Matrix> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector s = svd.singularValues();
    const double floor = rank_floor(detail::diff_scale(x, y));
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(0) > floor && s(i) > kRankTol * s(0)) idx.push_back(static_cast<int>(i));
    if (order) idx = *order;
    Chain c;
    c.waypoints.push_back(x);
    Matrix cur = x;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const int i = idx[k];
        RankOneDirection dir(svd.matrixU().col(i), svd.matrixV().col(i));
        c.directions.push_back(dir);
        c.steps.push_back(s(i));
        cur = (k + 1 == idx.size()) ? y : Matrix(cur + s(i) * dir.matrix());
        c.waypoints.push_back(cur);
    }
    return c;
}

inline bool chain_feasible(const ConvexBody& body, const Chain& c)
{
    for (const auto& w : c.waypoints)
        if (!body.contains(w)) return false;
    return true;
}

/// svd_chain made feasible: first every ordering of the singular terms,
/// then subdivision of the straight segment into 2, 4, 8, ... pieces, each
/// piece its own staircase. Waypoints of a subdivided staircase approach the
/// segment, which lies in the open convex body.
inline Chain feasible_chain(const ConvexBody& body, const Matrix& x, const Matrix& y)
{
    Chain c = svd_chain(x, y);
    if (chain_feasible(body, c)) return c;
    std::vector<int> order(c.segments());
    std::iota(order.begin(), order.end(), 0);
    if (order.size() <= 4) {
        while (std::next_permutation(order.begin(), order.end())) {
            Chain alt = svd_chain(x, y, &order);
            if (chain_feasible(body, alt)) return alt;
        }
    }
    for (int pieces = 2; pieces <= (1 << 20); pieces *= 2) {
        std::vector<Matrix> pts;
        bool ok = true;
        for (int k = 0; k < pieces && ok; ++k) {
            const Matrix a = x + (static_cast<double>(k) / pieces) * (y - x);
            const Matrix b = (k + 1 == pieces) ? y : Matrix(x + (static_cast<double>(k + 1) / pieces) * (y - x));
            const Chain piece = svd_chain(a, b);
            ok = chain_feasible(body, piece);
            const std::size_t start = pts.empty() ? 0 : 1;
            for (std::size_t i = start; i < piece.waypoints.size(); ++i) pts.push_back(piece.waypoints[i]);
        }
        if (ok) return Chain::from_waypoints(pts);
    }
    throw DegenerateConfiguration("no feasible rank-one chain found");
}

struct MetricBudget {
    int max_segments = 0;       ///< 0: 2 * min(p, q)
    int grid = 12;              ///< coarse grid per mixing angle
    int golden_iterations = 30; ///< golden-section steps per angle
    int sweeps = 3;             ///< alternating angle sweeps
    int passes = 3;             ///< refinement passes over the chain
    int restarts = 2;           ///< random intermediate-point restarts
    std::uint64_t seed = 1;

    int segment_cap(ChartShape s) const { return max_segments > 0 ? max_segments : 2 * std::min(s.p, s.q); }
};

struct MetricEstimate {
    double value = 0.0;
    Chain chain;
    std::vector<double> segment_rhos;
    std::vector<double> trace;
    MetricBudget budget;
};

namespace detail {

inline double chain_value(const ConvexBody& body, const Chain& c, std::vector<double>* rhos = nullptr)
{
    double v = 0.0;
    if (rhos) rhos->clear();
    for (std::size_t i = 0; i + 1 < c.waypoints.size(); ++i) {
        const double r = rho(body, c.waypoints[i], c.waypoints[i + 1]).value;
        if (rhos) rhos->push_back(r);
        v += r;
    }
    return v;
}

/// rho that returns +inf instead of throwing for non-members.
inline double rho_or_inf(const ConvexBody& body, const Matrix& a, const Matrix& b)
{
    if (!body.contains(a) || !body.contains(b)) return kInf;
    return rho(body, a, b).value;
}

inline double wrap_pi(double a)
{
    const double pi = 3.14159265358979323846;
    a = std::fmod(a, pi);
    return a < 0 ? a + pi : a;
}

/// Golden-section minimization of f on [lo, hi]; returns (argmin, min),
/// never worse than the supplied incumbent.
template <typename F>
std::pair<double, double> golden(F&& f, double lo, double hi, int iters, double x0, double f0)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    double bx = x0, bf = f0;
    for (int i = 0; i < iters; ++i) {
        if (fc < bf) { bx = c; bf = fc; }
        if (fd < bf) { bx = d; bf = fd; }
        if (fc <= fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if (fc < bf) { bx = c; bf = fc; }
    if (fd < bf) { bx = d; bf = fd; }
    return {bx, bf};
}

/// Best replacement for the middle waypoint of w0 -> w1 -> w2 over all
/// rank-one splittings of w2 - w0. Returns the new middle point (or an empty
/// optional for "merge into one segment") and its two-segment value.
struct SplitResult {
    bool merge = false;
    Matrix middle;
    double value = kInf;
};

inline SplitResult best_split(const ConvexBody& body, const Matrix& w0, const Matrix& w1, const Matrix& w2, const MetricBudget& budget)
{
    SplitResult best;
    best.middle = w1;
    best.value = rho_or_inf(body, w0, w1) + rho_or_inf(body, w1, w2);

    const Matrix d = w2 - w0;
    const int r = numerical_rank(d, kRankTol, rank_floor(diff_scale(w0, w2)));
    if (r == 0) {
        best.merge = true;
        best.value = 0.0;
        return best;
    }
    if (r == 1) {
        const double merged = rho(body, w0, w2).value;
        if (merged <= best.value + 1e-12 * std::max(1.0, best.value)) {
            best.merge = true;
            best.value = merged;
        }
        return best;
    }
    if (r != 2) return best;

    Eigen::JacobiSVD<Matrix> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix u2 = svd.matrixU().leftCols(2);
    const Matrix v2 = svd.matrixV().leftCols(2);
    const double s1 = svd.singularValues()(0);
    const double s2 = svd.singularValues()(1);

    // S1 = U2 x y^T V2^T with x = (cos a, sin a), y = w / (x^T Sigma^{-1} w),
    // w = (cos b, sin b); then D - S1 has rank one.
    auto middle_at = [&](double a, double b, Matrix& out) {
        const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
        const double c = ca * cb / s1 + sa * sb / s2;
        if (std::abs(c) < 1e-12) return false;
        Vector xv(2), yv(2);
        xv << ca, sa;
        yv << cb / c, sb / c;
        out = w0 + (u2 * xv) * (v2 * yv).transpose();
        return true;
    };
    auto phi = [&](double a, double b) {
        Matrix m;
        if (!middle_at(a, b, m) || !body.contains(m)) return kInf;
        return rho(body, w0, m).value + rho(body, m, w2).value;
    };

    // Angles of the incumbent split.
    double a0 = 0.0, b0 = 0.0;
    {
        const Matrix small = u2.transpose() * (w1 - w0) * v2;
        Eigen::JacobiSVD<Matrix> s(small, Eigen::ComputeFullU | Eigen::ComputeFullV);
        a0 = wrap_pi(std::atan2(s.matrixU()(1, 0), s.matrixU()(0, 0)));
        b0 = wrap_pi(std::atan2(s.matrixV()(1, 0), s.matrixV()(0, 0)));
    }
    const double pi = 3.14159265358979323846;
    double ba = a0, bb = b0, bf = best.value;
    const int g = std::max(2, budget.grid);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double a = (i + 0.5) * pi / g;
            const double b = (j + 0.5) * pi / g;
            const double f = phi(a, b);
            if (f < bf) { ba = a; bb = b; bf = f; }
        }
    double half = pi / g;
    for (int sweep = 0; sweep < budget.sweeps; ++sweep) {
        auto ra = golden([&](double a) { return phi(a, bb); }, ba - half, ba + half, budget.golden_iterations, ba, bf);
        ba = ra.first; bf = ra.second;
        auto rb = golden([&](double b) { return phi(ba, b); }, bb - half, bb + half, budget.golden_iterations, bb, bf);
        bb = rb.first; bf = rb.second;
        half *= 0.5;
    }
    if (bf < best.value) {
        Matrix m;
        if (middle_at(ba, bb, m) && body.contains(m)) {
            best.middle = m;
            best.value = bf;
        }
    }
    return best;
}

/// Local improvement of a feasible chain; never increases its value.
inline Chain refine_chain(const ConvexBody& body, Chain chain, const MetricBudget& budget, std::vector<double>& trace)
{
    std::vector<Matrix> pts = chain.waypoints;
    double value = chain_value(body, chain);
    constexpr double kGain = 1e-13;
    for (int pass = 0; pass < budget.passes; ++pass) {
        bool improved = false;
        for (std::size_t i = 0; i + 2 < pts.size();) {
            const double cur = rho(body, pts[i], pts[i + 1]).value + rho(body, pts[i + 1], pts[i + 2]).value;
            // Parallelogram swap: traverse the two directions in the other order.
            const Matrix swapped = pts[i] + (pts[i + 2] - pts[i + 1]);
            const double fs = rho_or_inf(body, pts[i], swapped) + rho_or_inf(body, swapped, pts[i + 2]);
            SplitResult sr = best_split(body, pts[i], pts[i + 1], pts[i + 2], budget);
            if (fs < sr.value && !sr.merge) {
                sr.middle = swapped;
                sr.value = fs;
            }
            if (sr.value < cur - kGain * std::max(1.0, cur)) {
                if (sr.merge)
                    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i + 1));
                else
                    pts[i + 1] = sr.middle;
                value = chain_value(body, Chain::from_waypoints(pts));
                trace.push_back(std::min(trace.back(), value));
                improved = true;
                if (sr.merge) continue;
            }
            ++i;
        }
        if (!improved) break;
    }
    return Chain::from_waypoints(pts);
}

inline Chain route_through(const ConvexBody& body, const Matrix& x, const std::vector<Matrix>& via, const Matrix& y)
{
    std::vector<Matrix> stops;
    stops.push_back(x);
    stops.insert(stops.end(), via.begin(), via.end());
    stops.push_back(y);
    std::vector<Matrix> pts{x};
    for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
        const Chain leg = feasible_chain(body, stops[k], stops[k + 1]);
        for (std::size_t i = 1; i < leg.waypoints.size(); ++i) pts.push_back(leg.waypoints[i]);
    }
    return Chain::from_waypoints(pts);
}

} // namespace detail

/// Upper bound for K(X, Y): the best rank-one chain found from the
/// singular-value staircase, optional seeded routes and random restarts,
/// each improved by two-segment re-decomposition. Deterministic given the
/// budget seed.
inline MetricEstimate k_estimate(const ConvexBody& body, const Matrix& x, const Matrix& y, const MetricBudget& budget = {},
                                 const std::vector<std::vector<Matrix>>& seed_routes = {})
{
    detail::require_member(body, x, "X");
    detail::require_member(body, y, "Y");
    MetricEstimate est;
    est.budget = budget;
    if ((y - x).norm() <= rank_floor(detail::diff_scale(x, y))) {
        est.chain.waypoints = {x};
        est.trace = {0.0};
        return est;
    }

    Chain best = feasible_chain(body, x, y);
    double best_value = detail::chain_value(body, best);
    est.trace.push_back(best_value);
    for (const auto& route : seed_routes) {
        for (const auto& w : route)
            if (!body.contains(w)) throw PointOutside("seed waypoint not in " + body.label);
        Chain c = detail::route_through(body, x, route, y);
        const double v = detail::chain_value(body, c);
        if (v < best_value - 1e-12 * std::max(1.0, best_value)) {
            best = c;
            best_value = v;
        }
    }
    est.trace.front() = best_value;

    best = detail::refine_chain(body, best, budget, est.trace);
    best_value = detail::chain_value(body, best);

    Rng rng(budget.seed);
    const int cap = budget.segment_cap(body.shape);
    const double span = (y - x).norm();
    for (int r = 0; r < budget.restarts; ++r) {
        const double lam = rng.uniform(0.25, 0.75);
        Matrix z = x + lam * (y - x) + 0.25 * span * rng.gaussian_matrix(x.rows(), x.cols()) / std::sqrt(double(x.size()));
        for (int k = 0; k < 30 && !body.contains(z); ++k) z = x + lam * (y - x) + 0.5 * (z - x - lam * (y - x));
        if (!body.contains(z)) continue;
        Chain c = detail::route_through(body, x, {z}, y);
        if (static_cast<int>(c.segments()) > cap) continue;
        std::vector<double> local{detail::chain_value(body, c)};
        c = detail::refine_chain(body, c, budget, local);
        const double v = detail::chain_value(body, c);
        if (v < best_value - 1e-12 * std::max(1.0, best_value)) {
            best = c;
            best_value = v;
            est.trace.push_back(std::min(est.trace.back(), v));
        }
    }

    est.chain = best;
    est.value = detail::chain_value(body, best, &est.segment_rhos);
    if (est.trace.back() != est.value) est.trace.push_back(std::min(est.trace.back(), est.value));
    return est;
}

// ---------------------------------------------------------------------------
// Lower bound on a small ball

struct BallLowerBound {
    double factor = 0.0;     ///< 1 / (eps + M)
    double sampled_max = 0.0; ///< M: sampled sup of delta_along over the ball
    int samples = 0;
};

/// rho(z1, z2) >= factor * |z1 - z2| for rank-one pairs in the closed
/// eps-ball around x, with M estimated by sampling.
inline BallLowerBound rho_lower_bound_ball(const ConvexBody& body, const Matrix& x, double eps, int samples = 400, std::uint64_t seed = 5)
{
    detail::require_member(body, x, "center");
    Rng rng(seed);
    const Eigen::Index q = x.rows(), p = x.cols();
    // Containment: along sampled directions the boundary is farther than eps.
    for (int k = 0; k < samples; ++k) {
        const Matrix d = rng.gaussian_matrix(q, p);
        const SegmentHit h = line_hits(body, x, d / d.norm());
        if (std::min(std::abs(h.t_minus), std::abs(h.t_plus)) <= eps)
            throw BallNotContained("eps-ball around the center meets the boundary");
    }
    BallLowerBound out;
    out.samples = samples;
    for (int k = 0; k < samples; ++k) {
        Matrix z = x;
        if (k > 0) {
            const Matrix d = rng.gaussian_matrix(q, p);
            const double r = (k % 4 == 0) ? eps : eps * std::pow(rng.uniform(), 1.0 / double(q * p));
            z = x + r * d / d.norm();
        }
        const RankOneDirection s(rng.unit_vector(q), rng.unit_vector(p));
        out.sampled_max = std::max(out.sampled_max, delta_along(body, z, s));
        if (p == 1 || q == 1) {
            // Axis directions hit the extremes in low dimension.
            for (Eigen::Index i = 0; i < std::max(q, p); ++i) {
                const RankOneDirection a = (p == 1) ? RankOneDirection(Vector::Unit(q, i), Vector::Ones(1))
                                                    : RankOneDirection(Vector::Ones(1), Vector::Unit(p, i));
                out.sampled_max = std::max(out.sampled_max, delta_along(body, z, a));
            }
        }
    }
    out.factor = 1.0 / (eps + out.sampled_max);
    return out;
}

} // namespace grh
