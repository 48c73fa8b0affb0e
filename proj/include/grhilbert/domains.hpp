#pragma once

// Convex bodies in an affine chart, given as membership oracles, and the
// geometric tests built on top of them: boundary hits along lines,
// R-properness search, tangent cones, clipped Hausdorff distance,
// Z-hypersurface and extreme-point tests, boundary adjacency.
//
// Every body answers membership. Bodies with a spectrahedral or polyhedral
// description also answer line hits in closed form; everything else falls
// back to bisection along the line.

#include "grhilbert/errors.hpp"
#include "grhilbert/linalg.hpp"
#include "grhilbert/lingeom.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace grh {

/// Exit parameters of the line X + tD from the body.
struct SegmentHit {
    double t_minus = -kInf;
    double t_plus = kInf;
};

enum class BodyKind { OperatorBall, HalfCone, Polytope, AffineImage, FullChart, TangentCone };

inline const char* to_string(BodyKind k)
{
    switch (k) {
    case BodyKind::OperatorBall: return "operator_ball";
    case BodyKind::HalfCone: return "half_cone";
    case BodyKind::Polytope: return "polytope";
    case BodyKind::AffineImage: return "affine_image";
    case BodyKind::FullChart: return "full_chart";
    case BodyKind::TangentCone: return "tangent_cone";
    }
    return "unknown";
}

/// Open convex subset of a chart. Immutable after construction; the
/// membership predicate is pure.
struct ConvexBody {
    using Membership = std::function<bool(const Matrix&)>;
    using LineSolver = std::function<std::optional<SegmentHit>(const Matrix& x, const Matrix& dir)>;

    BodyKind kind = BodyKind::FullChart;
    ChartShape shape;
    Membership contains;
    LineSolver exact_hits;            ///< optional closed-form line intersection
    std::function<std::shared_ptr<const ConvexBody>(const Matrix& e)> tangent_at;  ///< optional exact tangent cone
    double bounding_radius = kInf;    ///< Frobenius radius about the origin, kInf if unbounded
    bool is_cone = false;
    Matrix apex;                      ///< set when is_cone
    Matrix interior;                  ///< reference interior point
    std::string label;

    bool bounded() const { return std::isfinite(bounding_radius); }
};

using BodyPtr = std::shared_ptr<const ConvexBody>;

/// Rays are expanded up to this parameter before being declared unbounded.
inline constexpr double kTBig = 1e3;
/// Boundary certification tolerance.
inline constexpr double kBoundaryTol = 1e-9;
/// Inward perturbation used to test that a point lies on the boundary.
inline constexpr double kInwardStep = 1e-8;
/// Tangent-cone scan floor 2^-40.
inline constexpr int kTangentScanDepth = 40;

namespace detail {

inline void check_shape(const ConvexBody& body, const Matrix& x)
{
    if (!body.shape.matches(x)) throw DescriptorError("chart point shape does not match body " + body.label);
}

/// Exit parameter of x + t*dir for t > 0 by ray expansion and bisection to
/// full floating-point resolution. Returns the outside end of the final
/// bracket, or kInf once the ray passes the expansion cap.
inline double bisect_exit(const ConvexBody& body, const Matrix& x, const Matrix& dir, double cap)
{
    const double dn = dir.norm();
    if (dn == 0.0) return kInf;
    double lo = 0.0;
    double hi = 1.0 / dn;
    if (body.bounded()) hi = std::min(hi, 2.0 * (body.bounding_radius + x.norm()) / dn);
    while (body.contains(x + hi * dir)) {
        lo = hi;
        if (hi >= cap) return kInf;
        hi = std::min(2.0 * hi, cap);
        if (lo == hi) return kInf;
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (body.contains(x + mid * dir))
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

inline double expansion_cap(const ConvexBody& body, const Matrix& x, const Matrix& dir)
{
    const double dn = dir.norm();
    if (body.bounded()) return std::max(kTBig, 4.0 * (body.bounding_radius + x.norm())) / dn;
    return kTBig / dn;
}

/// Closed-form hits for an LMI body {X : M(X) > 0} along X + tD where
/// M(X + tD) = M(X) + t N(D).
inline std::optional<SegmentHit> lmi_hits(const Matrix& m, const Matrix& n)
{
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Matrix l = llt.matrixL();
    const Matrix linv_n = l.triangularView<Eigen::Lower>().solve(n);
    const Matrix k = l.triangularView<Eigen::Lower>().solve(linv_n.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly);
    const Vector lam = es.eigenvalues();
    SegmentHit h;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < 0.0) h.t_plus = std::min(h.t_plus, -1.0 / lam(i));
        if (lam(i) > 0.0) h.t_minus = std::max(h.t_minus, -1.0 / lam(i));
    }
    return h;
}

inline Vector vec_rowmajor(const Matrix& x)
{
    Vector v(x.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) v(i * x.cols() + j) = x(i, j);
    return v;
}

inline Matrix unvec_rowmajor(const Vector& v, Eigen::Index rows, Eigen::Index cols)
{
    Matrix x(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = v(i * cols + j);
    return x;
}

using MatrixMap = std::function<Matrix(const Matrix&)>;

/// Tangent cone of {X : M(X) > 0} (M affine, N its linear part) at a
/// boundary point e: {Y : K^T M(Y) K > 0} with K spanning ker M(e).
inline BodyPtr lmi_tangent_cone(ChartShape shape, const MatrixMap& m, const MatrixMap& n, const Matrix& e, const Matrix& reference,
                                const std::string& label)
{
    const Matrix me = m(e);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (me + me.transpose()));
    const double tol = 1e-8 * std::max(1.0, me.norm());
    std::vector<Eigen::Index> ker;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) <= tol) ker.push_back(i);
    if (ker.empty()) throw NotBoundary("no active constraint at the point for " + label);
    Matrix k(me.rows(), static_cast<Eigen::Index>(ker.size()));
    for (std::size_t j = 0; j < ker.size(); ++j) k.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(ker[j]);

    auto b = std::make_shared<ConvexBody>();
    b->kind = BodyKind::TangentCone;
    b->shape = shape;
    b->label = "tangent_cone(" + label + ")";
    b->contains = [m, k](const Matrix& y) {
        Eigen::LLT<Matrix> llt(k.transpose() * m(y) * k);
        return llt.info() == Eigen::Success;
    };
    b->exact_hits = [m, n, k](const Matrix& x, const Matrix& d) {
        return lmi_hits(k.transpose() * m(x) * k, k.transpose() * n(d) * k);
    };
    b->is_cone = true;
    b->apex = e;
    b->interior = reference;
    return b;
}

} // namespace detail

/// Line hits for an arbitrary nonzero chart direction (not necessarily rank one).
inline SegmentHit line_hits(const ConvexBody& body, const Matrix& x, const Matrix& dir)
{
    detail::check_shape(body, x);
    if (!body.contains(x)) throw PointOutside(body.label);
    if (body.exact_hits) {
        if (auto h = body.exact_hits(x, dir)) return *h;
    }
    const double cap = detail::expansion_cap(body, x, dir);
    SegmentHit h;
    h.t_plus = detail::bisect_exit(body, x, dir, cap);
    h.t_minus = -detail::bisect_exit(body, x, -dir, cap);
    return h;
}

/// Line hits computed only by bisection, ignoring any closed form. Used as
/// an independent check of the closed-form solvers.
inline SegmentHit line_hits_bisection(const ConvexBody& body, const Matrix& x, const Matrix& dir)
{
    detail::check_shape(body, x);
    if (!body.contains(x)) throw PointOutside(body.label);
    const double cap = detail::expansion_cap(body, x, dir);
    return SegmentHit{-detail::bisect_exit(body, x, -dir, cap), detail::bisect_exit(body, x, dir, cap)};
}

inline SegmentHit boundary_hits(const ConvexBody& body, const Matrix& x, const RankOneDirection& s)
{
    return line_hits(body, x, s.matrix());
}

/// min(|t-|, |t+|) along a unit rank-one direction: the distance to the
/// boundary along that line.
inline double delta_along(const ConvexBody& body, const Matrix& x, const RankOneDirection& s)
{
    const SegmentHit h = boundary_hits(body, x, s);
    return std::min(std::abs(h.t_minus), std::abs(h.t_plus));
}

// ---------------------------------------------------------------------------
// Constructors

inline BodyPtr operator_ball(ChartShape shape)
{
    auto b = std::make_shared<ConvexBody>();
    b->kind = BodyKind::OperatorBall;
    b->shape = shape;
    b->label = "operator_ball(q=" + std::to_string(shape.q) + ",p=" + std::to_string(shape.p) + ")";
    b->contains = [](const Matrix& x) { return op_norm(x) < 1.0; };
    const int p = shape.p;
    const int q = shape.q;
    auto n = [p, q](const Matrix& d) {
        Matrix out = Matrix::Zero(p + q, p + q);
        out.bottomLeftCorner(q, p) = d;
        out.topRightCorner(p, q) = d.transpose();
        return out;
    };
    auto m = [n, p, q](const Matrix& x) { return Matrix(Matrix::Identity(p + q, p + q) + n(x)); };
    b->exact_hits = [m, n](const Matrix& x, const Matrix& d) { return detail::lmi_hits(m(x), n(d)); };
    const std::string label = b->label;
    b->tangent_at = [shape, m, n, label](const Matrix& e) {
        return detail::lmi_tangent_cone(shape, m, n, e, Matrix(0.5 * e), label);
    };
    b->bounding_radius = std::sqrt(static_cast<double>(std::min(shape.p, shape.q)));
    b->interior = Matrix::Zero(shape.q, shape.p);
    return b;
}

/// {X : X + X^T > 0} in the square chart of size p.
inline BodyPtr half_cone(int p)
{
    auto b = std::make_shared<ConvexBody>();
    b->kind = BodyKind::HalfCone;
    b->shape = ChartShape(p, p);
    b->label = "half_cone(p=" + std::to_string(p) + ")";
    b->contains = [](const Matrix& x) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(x + x.transpose(), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0) > 0.0;
    };
    auto sym = [](const Matrix& x) { return Matrix(x + x.transpose()); };
    b->exact_hits = [sym](const Matrix& x, const Matrix& d) { return detail::lmi_hits(sym(x), sym(d)); };
    const std::string label = b->label;
    b->tangent_at = [p, sym, label](const Matrix& e) {
        return detail::lmi_tangent_cone(ChartShape(p, p), sym, sym, e, Matrix(e + Matrix::Identity(p, p)), label);
    };
    b->is_cone = true;
    b->apex = Matrix::Zero(p, p);
    b->interior = Matrix::Identity(p, p);
    return b;
}

/// Open half-space <a, X> < b with the Frobenius pairing.
struct Halfspace {
    Matrix a;
    double b = 0.0;
};

inline BodyPtr polytope(ChartShape shape, std::vector<Halfspace> faces, std::optional<Matrix> interior = std::nullopt,
                        double bounding_radius = kInf)
{
    if (faces.empty()) throw DescriptorError("polytope needs at least one functional");
    for (const auto& f : faces)
        if (!shape.matches(f.a)) throw DescriptorError("polytope functional shape mismatch");
    auto b = std::make_shared<ConvexBody>();
    b->kind = BodyKind::Polytope;
    b->shape = shape;
    b->label = "polytope(" + std::to_string(faces.size()) + " faces)";
    auto fs = std::make_shared<const std::vector<Halfspace>>(std::move(faces));
    b->contains = [fs](const Matrix& x) {
        for (const auto& f : *fs)
            if (!((f.a.array() * x.array()).sum() < f.b)) return false;
        return true;
    };
    b->exact_hits = [fs](const Matrix& x, const Matrix& d) -> std::optional<SegmentHit> {
        SegmentHit h;
        for (const auto& f : *fs) {
            const double slack = f.b - (f.a.array() * x.array()).sum();
            const double rate = (f.a.array() * d.array()).sum();
            if (rate > 0.0) h.t_plus = std::min(h.t_plus, slack / rate);
            if (rate < 0.0) h.t_minus = std::max(h.t_minus, slack / rate);
        }
        return h;
    };
    b->interior = interior.value_or(Matrix::Zero(shape.q, shape.p));
    if (!b->contains(b->interior)) throw DescriptorError("polytope interior reference point is not inside");
    const Matrix ref = b->interior;
    b->tangent_at = [fs, shape, ref](const Matrix& e) {
        std::vector<Halfspace> active;
        for (const auto& f : *fs) {
            const double v = (f.a.array() * e.array()).sum();
            if (std::abs(f.b - v) <= 1e-9 * std::max(1.0, std::abs(f.b))) active.push_back(Halfspace{f.a, v});
        }
        if (active.empty()) throw NotBoundary("no active face at the point");
        auto c = std::const_pointer_cast<ConvexBody>(polytope(shape, std::move(active), ref));
        c->kind = BodyKind::TangentCone;
        c->label = "tangent_cone(" + c->label + ")";
        c->is_cone = true;
        c->apex = e;
        return BodyPtr(c);
    };
    b->bounding_radius = bounding_radius;
    return b;
}

/// Square chart polytope around I: with H = X - I,
/// h_ii + |h_ij| < 0 and h_ii + |h_ji| < 0 for j != i, and h_ii > -1.
/// I is a vertex; [[0, 1], [0, 0]] sits on an edge when p = 2.
inline BodyPtr dominance_polytope(int p)
{
    const ChartShape shape(p, p);
    std::vector<Halfspace> faces;
    const Matrix id = Matrix::Identity(p, p);
    auto add = [&](Matrix a) {
        const double b = (a.array() * id.array()).sum();
        faces.push_back(Halfspace{std::move(a), b});
    };
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;
            for (double s : {1.0, -1.0}) {
                Matrix a = Matrix::Zero(p, p);
                a(i, i) = 1.0;
                a(i, j) = s;
                add(a);
                a(i, j) = 0.0;
                a(j, i) = s;
                add(a);
            }
        }
        Matrix a = Matrix::Zero(p, p);
        a(i, i) = -1.0;
        faces.push_back(Halfspace{a, 0.0});
    }
    auto b = std::const_pointer_cast<ConvexBody>(polytope(shape, std::move(faces), Matrix(0.5 * id), std::sqrt(double(p)) * 2.0));
    b->label = "dominance_polytope(p=" + std::to_string(p) + ")";
    return b;
}

/// Box |X_ij| < box cut by random half-spaces through points at distance
/// in [0.3, 1] * box from the origin; always contains a neighbourhood of 0.
inline BodyPtr random_polytope(ChartShape shape, int cuts, double box, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Halfspace> faces;
    for (int i = 0; i < shape.q; ++i)
        for (int j = 0; j < shape.p; ++j)
            for (double s : {1.0, -1.0}) {
                Matrix a = Matrix::Zero(shape.q, shape.p);
                a(i, j) = s;
                faces.push_back(Halfspace{a, box});
            }
    for (int k = 0; k < cuts; ++k) {
        Matrix a = rng.gaussian_matrix(shape.q, shape.p);
        a /= a.norm();
        faces.push_back(Halfspace{a, box * rng.uniform(0.3, 1.0)});
    }
    auto b = std::const_pointer_cast<ConvexBody>(polytope(shape, std::move(faces), std::nullopt, box * std::sqrt(double(shape.p * shape.q))));
    b->label = "random_polytope(seed=" + std::to_string(seed) + ")";
    return b;
}

inline BodyPtr full_chart(ChartShape shape)
{
    auto b = std::make_shared<ConvexBody>();
    b->kind = BodyKind::FullChart;
    b->shape = shape;
    b->label = "full_chart(q=" + std::to_string(shape.q) + ",p=" + std::to_string(shape.p) + ")";
    b->contains = [](const Matrix& x) { return x.allFinite(); };
    b->exact_hits = [](const Matrix&, const Matrix&) -> std::optional<SegmentHit> { return SegmentHit{}; };
    b->interior = Matrix::Zero(shape.q, shape.p);
    return b;
}

/// Image of a body under Y = L(X) + offset, L acting on row-major vec(X).
inline BodyPtr affine_image(BodyPtr inner, const Matrix& linear, const Matrix& offset)
{
    const ChartShape shape = inner->shape;
    const Eigen::Index n = shape.chart_dim();
    if (linear.rows() != n || linear.cols() != n) throw DescriptorError("affine map has wrong size");
    if (!shape.matches(offset)) throw DescriptorError("affine offset has wrong shape");
    Eigen::FullPivLU<Matrix> lu(linear);
    if (!lu.isInvertible()) throw DescriptorError("affine map is not invertible");
    const Matrix inv = lu.inverse();
    const Eigen::Index q = shape.q;
    const Eigen::Index p = shape.p;

    auto pre = [inv, offset, q, p](const Matrix& y) {
        return detail::unvec_rowmajor(inv * detail::vec_rowmajor(y - offset), q, p);
    };
    auto pre_dir = [inv, q, p](const Matrix& d) { return detail::unvec_rowmajor(inv * detail::vec_rowmajor(d), q, p); };
    auto fwd = [linear, offset, q, p](const Matrix& x) {
        return Matrix(detail::unvec_rowmajor(linear * detail::vec_rowmajor(x), q, p) + offset);
    };

    auto b = std::make_shared<ConvexBody>();
    b->kind = BodyKind::AffineImage;
    b->shape = shape;
    b->label = "affine_image(" + inner->label + ")";
    b->contains = [inner, pre](const Matrix& y) { return inner->contains(pre(y)); };
    if (inner->exact_hits) {
        b->exact_hits = [inner, pre, pre_dir](const Matrix& y, const Matrix& d) { return inner->exact_hits(pre(y), pre_dir(d)); };
    }
    if (inner->tangent_at) {
        b->tangent_at = [inner, pre, linear, offset](const Matrix& y) { return affine_image(inner->tangent_at(pre(y)), linear, offset); };
    }
    b->interior = fwd(inner->interior);
    if (inner->bounded()) b->bounding_radius = op_norm(linear) * inner->bounding_radius + offset.norm();
    b->is_cone = inner->is_cone;
    if (inner->is_cone) b->apex = fwd(inner->apex);
    return b;
}

/// Linear part (on row-major vec) and offset of the chart map X -> D X A + C.
inline std::pair<Matrix, Matrix> chart_affine_map(const Matrix& left, const Matrix& right, const Matrix& shift)
{
    const Eigen::Index q = left.rows();
    const Eigen::Index p = right.rows();
    Matrix l(q * p, q * p);
    for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index k = 0; k < q; ++k)
                for (Eigen::Index m = 0; m < p; ++m) l(i * p + j, k * p + m) = left(i, k) * right(m, j);
    return {l, shift};
}

/// Chart-affine part of a projective transform with b = 0:
/// X -> (c + dX) a^{-1} = d X a^{-1} + c a^{-1}.
inline BodyPtr chart_affine_image(BodyPtr inner, const ProjectiveTransform& g)
{
    if (g.b().norm() > 1e-14 * g.matrix().norm()) throw DescriptorError("transform does not preserve the chart (b != 0)");
    const Matrix ainv = g.a().inverse();
    auto [l, off] = chart_affine_map(g.d(), ainv, g.c() * ainv);
    return affine_image(std::move(inner), l, off);
}

/// Dilation Y = center + factor (X - center).
inline BodyPtr dilation(BodyPtr inner, double factor, const Matrix& center)
{
    const Eigen::Index n = inner->shape.chart_dim();
    return affine_image(inner, factor * Matrix::Identity(n, n), (1.0 - factor) * center);
}

// ---------------------------------------------------------------------------
// Boundary certification and tangent cones

struct BoundaryCertificate {
    Matrix point;       ///< the projected boundary point along the ray from the reference
    double distance = 0.0;
    bool inside = false; ///< the supplied point tested as a member
};

/// Projects e onto the boundary along the segment from the interior
/// reference point; throws NotBoundary if e is farther than tol from it.
inline BoundaryCertificate certify_boundary(const ConvexBody& body, const Matrix& e, double tol = kBoundaryTol)
{
    detail::check_shape(body, e);
    const Matrix dir = e - body.interior;
    if (dir.norm() == 0.0) throw NotBoundary("point equals the interior reference of " + body.label);
    const SegmentHit h = line_hits(body, body.interior, dir);
    if (!std::isfinite(h.t_plus)) throw NotBoundary("ray through the point never leaves " + body.label);
    BoundaryCertificate c;
    c.point = body.interior + h.t_plus * dir;
    c.distance = std::abs(h.t_plus - 1.0) * dir.norm();
    c.inside = body.contains(e);
    if (c.distance > tol * std::max(1.0, e.norm()))
        throw NotBoundary(body.label + " (distance " + std::to_string(c.distance) + ")");
    return c;
}

/// True iff x is not a member while its inward perturbation toward the
/// interior reference is.
inline bool on_boundary(const ConvexBody& body, const Matrix& x, double step = kInwardStep)
{
    return !body.contains(x) && body.contains(x + step * (body.interior - x));
}

/// Tangent cone e + U_{t>0} t (Omega - e) as a generic membership oracle
/// built from dilations of the body.
inline BodyPtr tangent_cone_scan(BodyPtr inner, const Matrix& e)
{
    const BoundaryCertificate cert = certify_boundary(*inner, e);
    Matrix apex = e;
    if (cert.inside) {
        // Rounding left e inside; nudge it outward along the reference ray.
        const Matrix out = e - inner->interior;
        double k = 1.0;
        do {
            apex = inner->interior + (1.0 + k * 1e-16) * out;
            k *= 2.0;
        } while (inner->contains(apex) && k < 1e6);
    }
    auto b = std::make_shared<ConvexBody>();
    b->kind = BodyKind::TangentCone;
    b->shape = inner->shape;
    b->label = "tangent_cone(" + inner->label + ")";
    b->contains = [inner, apex](const Matrix& y) {
        const Matrix d = y - apex;
        double s = 1.0;
        for (int k = 0; k <= kTangentScanDepth; ++k, s *= 0.5)
            if (inner->contains(apex + s * d)) return true;
        return false;
    };
    b->is_cone = true;
    b->apex = apex;
    b->interior = inner->interior;
    return b;
}

/// Tangent cone at a boundary point: the closed form of the body when it
/// has one, the dilation scan otherwise.
inline BodyPtr tangent_cone(BodyPtr inner, const Matrix& e)
{
    certify_boundary(*inner, e);
    if (inner->tangent_at) return inner->tangent_at(e);
    return tangent_cone_scan(std::move(inner), e);
}

// ---------------------------------------------------------------------------
// R-properness search

struct RProperBudget {
    int random_starts = 16;
    int local_iterations = 60;
    int boundary_probes = 4;
    std::uint64_t seed = 1;
};

struct RProperVerdict {
    enum class Status { NoViolationFound, ViolationWitness };
    Status status = Status::NoViolationFound;
    std::optional<Matrix> witness_point;
    std::optional<RankOneDirection> witness_direction;
    int candidates_tested = 0;
    double best_score = kInf;  ///< min of 1/|t+| + 1/|t-| seen; 0 means a full line
    RProperBudget budget;

    bool violated() const { return status == Status::ViolationWitness; }
};

inline const char* to_string(RProperVerdict::Status s)
{
    return s == RProperVerdict::Status::ViolationWitness ? "ViolationWitness" : "NoViolationFound";
}

/// Rank-one directions from full singular bases of the given anchor
/// matrices, followed by the standard matrix units.
inline std::vector<RankOneDirection> structured_directions(ChartShape shape, const std::vector<Matrix>& anchors)
{
    std::vector<RankOneDirection> out;
    for (const auto& m : anchors) {
        if (m.norm() == 0.0) continue;
        Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Matrix& u = svd.matrixU();
        const Matrix& v = svd.matrixV();
        for (Eigen::Index i = 0; i < u.cols(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j) out.emplace_back(u.col(i), v.col(j));
    }
    for (int i = 0; i < shape.q; ++i)
        for (int j = 0; j < shape.p; ++j)
            out.emplace_back(Vector::Unit(shape.q, i), Vector::Unit(shape.p, j));
    return out;
}

inline RProperVerdict is_r_proper(const ConvexBody& body, const RProperBudget& budget = {})
{
    RProperVerdict verdict;
    verdict.budget = budget;
    Rng rng(budget.seed);
    const Matrix x0 = body.interior;

    auto score = [&](const RankOneDirection& s) {
        ++verdict.candidates_tested;
        const SegmentHit h = boundary_hits(body, x0, s);
        auto inv = [](double t) { return (std::isinf(t) || std::abs(t) > kTBig) ? 0.0 : 1.0 / std::abs(t); };
        const double f = inv(h.t_minus) + inv(h.t_plus);
        verdict.best_score = std::min(verdict.best_score, f);
        return f;
    };
    auto verify = [&](const RankOneDirection& s) {
        const Matrix sm = s.matrix();
        for (int k = -100; k <= 100; ++k)
            if (!body.contains(x0 + (kTBig * k / 100.0) * sm)) return false;
        return true;
    };
    auto accept = [&](const RankOneDirection& s) {
        verdict.status = RProperVerdict::Status::ViolationWitness;
        verdict.witness_point = x0;
        verdict.witness_direction = s;
    };

    std::vector<Matrix> anchors;
    if (body.is_cone) anchors.push_back(body.apex - x0);
    for (int k = 0; k < budget.boundary_probes; ++k) {
        const Matrix d = rng.gaussian_matrix(body.shape.q, body.shape.p);
        const SegmentHit h = line_hits(body, x0, d);
        if (std::isfinite(h.t_plus)) anchors.push_back(h.t_plus * d);
    }
    for (const auto& s : structured_directions(body.shape, anchors)) {
        if (score(s) == 0.0 && verify(s)) {
            accept(s);
            return verdict;
        }
    }

    for (int r = 0; r < budget.random_starts; ++r) {
        RankOneDirection cur(rng.unit_vector(body.shape.q), rng.unit_vector(body.shape.p));
        double fcur = score(cur);
        double step = 0.5;
        for (int it = 0; it < budget.local_iterations && fcur > 0.0; ++it) {
            RankOneDirection cand(cur.u + step * rng.gaussian_vector(body.shape.q), cur.v + step * rng.gaussian_vector(body.shape.p));
            const double f = score(cand);
            if (f < fcur) {
                cur = cand;
                fcur = f;
                step = std::min(1.0, step * 1.5);
            } else {
                step *= 0.7;
            }
        }
        if (fcur == 0.0 && verify(cur)) {
            accept(cur);
            return verdict;
        }
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Clipped Hausdorff distance

/// Radial extent of body intersected with the Frobenius ball B_R(0), from c along unit u.
inline double clipped_radial(const ConvexBody& body, const Matrix& c, const Matrix& u, double radius)
{
    const double cu = (c.array() * u.array()).sum();
    const double disc = cu * cu - c.squaredNorm() + radius * radius;
    const double r_ball = -cu + std::sqrt(std::max(0.0, disc));
    if (body.contains(c + r_ball * u)) return r_ball;
    if (body.exact_hits) {
        if (auto h = body.exact_hits(c, u)) return std::min(r_ball, h->t_plus);
    }
    double lo = 0.0;
    double hi = r_ball;
    for (int it = 0; it < 400; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (body.contains(c + mid * u))
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

/// Sampled unit chart directions, shared so repeated distances use the same grid.
inline std::vector<Matrix> sample_directions(ChartShape shape, int count, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Matrix> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Matrix d = rng.gaussian_matrix(shape.q, shape.p);
        dirs.push_back(d / d.norm());
    }
    return dirs;
}

inline std::vector<double> radial_profile(const ConvexBody& body, const Matrix& center, double radius, const std::vector<Matrix>& dirs)
{
    std::vector<double> r;
    r.reserve(dirs.size());
    for (const auto& u : dirs) r.push_back(clipped_radial(body, center, u, radius));
    return r;
}

inline double profile_distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Local Hausdorff seminorm d_H(A cap B_R, B cap B_R), estimated as the
/// largest gap of radial functions from a common interior point over
/// sampled directions.
inline double hausdorff_distance_clipped(const ConvexBody& a, const ConvexBody& b, double radius, int direction_count,
                                         std::uint64_t seed = 7, std::optional<Matrix> center = std::nullopt)
{
    if (!(a.shape == b.shape)) throw DescriptorError("bodies of different shapes");
    Matrix c;
    if (center) {
        c = *center;
    } else if (b.contains(a.interior) && a.interior.norm() < radius) {
        c = a.interior;
    } else if (a.contains(b.interior) && b.interior.norm() < radius) {
        c = b.interior;
    } else {
        throw EmptyClip("no common interior point inside the clip ball");
    }
    if (!a.contains(c) || !b.contains(c) || c.norm() >= radius) throw EmptyClip("center not common to both clipped bodies");
    const auto dirs = sample_directions(a.shape, direction_count, seed);
    return profile_distance(radial_profile(a, c, radius, dirs), radial_profile(b, c, radius, dirs));
}

// ---------------------------------------------------------------------------
// Z-hypersurfaces and extreme points

/// x meets the q-plane spanned by the columns of xi_frame ((p+q) x q) nontrivially.
inline bool z_hypersurface_contains_frame(const Matrix& xi_frame, const Matrix& x)
{
    Matrix both(x.rows() + x.cols(), x.cols() + xi_frame.cols());
    both << chart_frame(x), xi_frame;
    return numerical_rank(both) < both.rows();
}

/// Square charts: x meets the plane of the chart point xi iff det(X - Xi) = 0.
inline bool z_hypersurface_contains(const Matrix& xi, const Matrix& x)
{
    if (xi.rows() != xi.cols() || !(shape_of(xi) == shape_of(x))) throw DescriptorError("Z test needs square charts of one shape");
    return numerical_rank(x - xi, kRankTol, rank_floor(std::max(x.norm(), xi.norm()))) < x.cols();
}

struct ExtremeBudget {
    int samples = 400;
    int descent_iterations = 200;
    std::uint64_t seed = 11;
};

struct ExtremeTestResult {
    enum class Status { ExtremeEvidence, NonExtremeWitness };
    Status status = Status::ExtremeEvidence;
    std::optional<Matrix> witness;     ///< X in Omega with det(X - e) = 0
    double witness_det = 0.0;
    double min_normalized_det = kInf;  ///< min |det(X-e)| / ||X-e||^p seen
    int observed_sign = 0;
    int evaluations = 0;
    ExtremeBudget budget;

    bool extreme() const { return status == Status::ExtremeEvidence; }
};

/// Pivot threshold for det(X - e) at a witness.
inline constexpr double kDetTol = 1e-8;
/// Normalized determinants below this are treated as sign-unresolved.
inline constexpr double kDetSignFloor = 1e-10;

/// Searches for X in Omega on the hypersurface det(X - e) = 0. A witness is
/// certified by a sign change of det(X - e) between two members followed by
/// bisection on the segment joining them (which stays in Omega).
inline ExtremeTestResult extreme_point_test(const ConvexBody& body, const Matrix& e, const ExtremeBudget& budget = {})
{
    if (body.shape.p != body.shape.q) throw DescriptorError("extreme-point test needs p = q");
    certify_boundary(body, e);
    const int p = body.shape.p;
    ExtremeTestResult res;
    res.budget = budget;
    Rng rng(budget.seed);

    auto ndet = [&](const Matrix& x) {
        ++res.evaluations;
        const Matrix d = x - e;
        return d.determinant() / std::pow(d.norm(), p);
    };

    std::optional<Matrix> pos;
    std::optional<Matrix> neg;
    auto record = [&](const Matrix& x, double v) {
        res.min_normalized_det = std::min(res.min_normalized_det, std::abs(v));
        if (v > kDetSignFloor && !pos) pos = x;
        if (v < -kDetSignFloor && !neg) neg = x;
    };

    const Matrix ref = body.interior;
    const double scale = std::max(1.0, (e - ref).norm());
    std::vector<std::pair<Matrix, double>> pool;
    for (int k = 0; k < budget.samples && !(pos && neg); ++k) {
        const double s = (k % 2 == 0) ? rng.uniform(0.0, 1.0) : std::pow(10.0, rng.uniform(-4.0, 0.0));
        const Matrix x = e + s * (ref - e) + s * rng.uniform(0.0, 1.0) * scale * rng.gaussian_matrix(p, p) / std::sqrt(double(p * p));
        if (!body.contains(x)) continue;
        const double v = ndet(x);
        record(x, v);
        pool.emplace_back(x, v);
    }

    // Descent on the signed normalized determinant toward the other sign.
    if (!(pos && neg) && !pool.empty()) {
        const int sign = pos ? 1 : -1;
        res.observed_sign = sign;
        auto best = *std::min_element(pool.begin(), pool.end(), [&](const auto& l, const auto& r) { return sign * l.second < sign * r.second; });
        Matrix cur = best.first;
        double fcur = sign * best.second;
        double step = 0.1 * scale;
        for (int it = 0; it < budget.descent_iterations && !(pos && neg); ++it) {
            Matrix cand = cur + step * rng.gaussian_matrix(p, p) / std::sqrt(double(p * p));
            if (!body.contains(cand)) {
                step *= 0.8;
                continue;
            }
            const double v = ndet(cand);
            record(cand, v);
            if (sign * v < fcur) {
                cur = cand;
                fcur = sign * v;
                step *= 1.3;
            } else {
                step *= 0.8;
            }
        }
    }

    if (pos && neg) {
        Matrix a = *pos;
        Matrix b = *neg;
        Matrix mid = a;
        double dm = 0.0;
        for (int it = 0; it < 200; ++it) {
            mid = 0.5 * (a + b);
            dm = (mid - e).determinant();
            if (std::abs(dm) < 1e-3 * kDetTol) break;
            if (dm > 0)
                a = mid;
            else
                b = mid;
        }
        if (std::abs(dm) < kDetTol && body.contains(mid)) {
            res.status = ExtremeTestResult::Status::NonExtremeWitness;
            res.witness = mid;
            res.witness_det = dm;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Boundary adjacency

/// Fractional extension beyond both endpoints used to check that the
/// endpoints lie in the open interior of the boundary segment.
inline constexpr double kAdjacencyExtension = 1e-3;

/// x ~ y: equal, or both in one open component of (rank-one line) cap boundary.
inline bool boundary_adjacent(const ConvexBody& body, const Matrix& x, const Matrix& y, int samples = 16)
{
    detail::check_shape(body, x);
    detail::check_shape(body, y);
    const double scale = std::max(x.norm(), y.norm());
    if ((y - x).norm() <= 1e-12 * std::max(1.0, scale)) return true;
    if (numerical_rank(y - x, kRankTol, rank_floor(scale)) > 1) return false;
    if (!on_boundary(body, x) || !on_boundary(body, y)) return false;
    const Matrix d = y - x;
    for (int k = -1; k <= samples + 1; ++k) {
        double lam = static_cast<double>(k) / samples;
        if (k == -1) lam = -kAdjacencyExtension;
        if (k == samples + 1) lam = 1.0 + kAdjacencyExtension;
        if (!on_boundary(body, x + lam * d)) return false;
    }
    return true;
}

struct AdjacencySearchResult {
    std::optional<Matrix> partner;
    std::optional<RankOneDirection> direction;
    double step = 0.0;
    int candidates_tested = 0;
};

/// Looks for y != e on the boundary adjacent to e along rank-one
/// perturbations y = e + tau S.
inline AdjacencySearchResult find_adjacent_partner(const ConvexBody& body, const Matrix& e, int random_directions = 32,
                                                   std::uint64_t seed = 3)
{
    AdjacencySearchResult res;
    std::vector<RankOneDirection> dirs = structured_directions(body.shape, {e - body.interior});
    Rng rng(seed);
    for (int k = 0; k < random_directions; ++k) dirs.emplace_back(rng.unit_vector(body.shape.q), rng.unit_vector(body.shape.p));
    const double scale = std::max(1.0, e.norm());
    for (const auto& s : dirs) {
        for (double tau : {0.1, -0.1, 0.03, -0.03, 0.01, -0.01}) {
            ++res.candidates_tested;
            const Matrix y = e + tau * scale * s.matrix();
            if (boundary_adjacent(body, e, y)) {
                res.partner = y;
                res.direction = s;
                res.step = tau * scale;
                return res;
            }
        }
    }
    return res;
}

} // namespace grh
