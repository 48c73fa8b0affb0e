#pragma once

// Automorphisms of the symmetric model domain: the indefinite orthogonal
// action on the square operator ball, the Cayley map to the half cone,
// homothety/rescaling one-parameter groups, unipotent translations and the
// boost iteration whose normalized compounds degenerate to rank one.

#include "grhilbert/domains.hpp"
#include "grhilbert/errors.hpp"
#include "grhilbert/linalg.hpp"
#include "grhilbert/lingeom.hpp"

#include <map>
#include <string>
#include <vector>

namespace grh {

/// J = diag(I_p, -I_p); positive p-planes of J are exactly the graphs of
/// operator-ball points in the chart.
inline Matrix indefinite_form(int p)
{
    Matrix j = Matrix::Identity(2 * p, 2 * p);
    j.bottomRightCorner(p, p) *= -1.0;
    return j;
}

struct IndefiniteGenerator {
    int p = 1;
    Matrix element;

    double defect() const
    {
        const Matrix j = indefinite_form(p);
        return (element.transpose() * j + j * element).norm();
    }
};

struct OneParameterGroup {
    ChartShape shape;
    Matrix generator;

    ProjectiveTransform evaluate(double t) const { return ProjectiveTransform(shape, expm(t * generator)); }
};

/// Generic pass/fail tally used by the symmetry checks.
struct CheckReport {
    std::string check;
    int p = 0;
    int samples = 0;
    int violations = 0;
    double max_defect = 0.0;
    std::map<std::string, std::string> convention;

    bool ok() const { return violations == 0; }
};

/// Random so(p,p) element [[A, B], [B^T, D]] with A, D antisymmetric,
/// scaled to operator norm at most one.
inline IndefiniteGenerator random_so_pp(int p, std::uint64_t seed)
{
    if (p < 1) throw DescriptorError("p must be positive");
    Rng rng(seed);
    const Matrix ga = rng.gaussian_matrix(p, p);
    const Matrix gd = rng.gaussian_matrix(p, p);
    const Matrix a = 0.5 * (ga - ga.transpose());
    const Matrix d = 0.5 * (gd - gd.transpose());
    const Matrix b = rng.gaussian_matrix(p, p);
    Matrix m(2 * p, 2 * p);
    m << a, b, b.transpose(), d;
    m /= std::max(1.0, op_norm(m));
    return IndefiniteGenerator{p, m};
}

/// Samples of the square operator ball: uniform directions with operator
/// norm drawn in [0, 0.999), a few pushed close to the boundary.
inline std::vector<Matrix> sample_ball(ChartShape shape, int count, Rng& rng)
{
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Matrix g = rng.gaussian_matrix(shape.q, shape.p);
        const double r = (k % 10 == 9) ? rng.uniform(0.99, 0.999) : rng.uniform(0.0, 0.99);
        out.push_back(r * g / op_norm(g));
    }
    return out;
}

/// Maps sampled ball points through g; a violation is a chart escape or an
/// image outside the ball. max_defect records the largest change of the
/// boundary margin 1 - ||X||.
inline CheckReport verify_ball_preserved(const ProjectiveTransform& g, int samples, std::uint64_t seed = 17)
{
    const ChartShape shape = g.shape();
    CheckReport rep;
    rep.check = "ball_preserved";
    rep.p = shape.p;
    rep.samples = samples;
    rep.convention["form"] = "diag(I_p,-I_p)";
    rep.convention["action"] = "X -> (c + dX)(a + bX)^-1";
    const BodyPtr ball = operator_ball(shape);
    Rng rng(seed);
    for (const Matrix& x : sample_ball(shape, samples, rng)) {
        try {
            const Matrix y = apply_transform(g, x);
            if (!ball->contains(y)) ++rep.violations;
            rep.max_defect = std::max(rep.max_defect, std::abs((1.0 - op_norm(y)) - (1.0 - op_norm(x))));
        } catch (const ChartEscape&) {
            ++rep.violations;
        }
    }
    return rep;
}

struct CayleyMap {
    ProjectiveTransform transform;
    bool sign_fixed = false;  ///< X -> -X composed after the raw block map
    int orientation_samples = 0;
};

/// Cayley transform of the square ball onto the positive half cone built from
/// the block matrix [[-I, A^-1], [I, A^-1]]. The orientation of the image is
/// resolved on 8 samples; the raw map lands in the negative cone and is then
/// composed with X -> -X.
inline CayleyMap cayley(int p, const Matrix& a)
{
    if (a.rows() != p || a.cols() != p) throw DescriptorError("Cayley parameter must be p x p");
    if ((a.transpose() * a - Matrix::Identity(p, p)).norm() > 1e-10) throw NotOrthogonal("Cayley parameter is not orthogonal");
    const Matrix ai = a.transpose();
    const Matrix id = Matrix::Identity(p, p);
    const ProjectiveTransform raw = ProjectiveTransform::from_blocks(-id, ai, id, ai);
    const ChartShape shape(p, p);
    const BodyPtr cone = half_cone(p);

    Rng rng(29);
    const auto probe = sample_ball(shape, 8, rng);
    auto count_inside = [&](const ProjectiveTransform& g) {
        int n = 0;
        for (const auto& x : probe) {
            try {
                n += cone->contains(apply_transform(g, x)) ? 1 : 0;
            } catch (const ChartEscape&) {
            }
        }
        return n;
    };
    CayleyMap out{raw, false, static_cast<int>(probe.size())};
    if (count_inside(raw) == static_cast<int>(probe.size())) return out;
    const ProjectiveTransform flip(shape, indefinite_form(p));
    out.transform = flip * raw;
    out.sign_fixed = true;
    if (count_inside(out.transform) != static_cast<int>(probe.size()))
        throw DegenerateConfiguration("Cayley image is not the positive cone in either orientation");
    return out;
}

/// X -> e^t X.
inline OneParameterGroup homothety_group(int p)
{
    const ChartShape shape(p, p);
    Matrix g = Matrix::Zero(2 * p, 2 * p);
    g.bottomRightCorner(p, p) = Matrix::Identity(p, p);
    return OneParameterGroup{shape, g};
}

/// X -> e^t (X - X0) + X0. The generator [[0, 0], [-X0, I]] is idempotent.
inline OneParameterGroup rescaling_group(const Matrix& x0)
{
    if (x0.rows() != x0.cols()) throw DescriptorError("rescaling group needs a square chart");
    const int p = static_cast<int>(x0.cols());
    Matrix g = Matrix::Zero(2 * p, 2 * p);
    g.bottomLeftCorner(p, p) = -x0;
    g.bottomRightCorner(p, p) = Matrix::Identity(p, p);
    return OneParameterGroup{ChartShape(p, p), g};
}

/// X -> X + Y.
inline ProjectiveTransform unipotent_translations(int p, int q, const Matrix& y)
{
    if (y.rows() != q || y.cols() != p) throw DescriptorError("translation must be q x p");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y.data()[i] != std::round(y.data()[i])) throw DescriptorError("translation entries must be integers");
    return ProjectiveTransform::from_blocks(Matrix::Identity(p, p), Matrix::Zero(p, q), y, Matrix::Identity(q, q));
}

/// [[cosh t I, sinh t I], [sinh t I, cosh t I]]; attracts the ball to I.
inline ProjectiveTransform boost(int p, double t)
{
    const Matrix id = Matrix::Identity(p, p);
    return ProjectiveTransform::from_blocks(std::cosh(t) * id, std::sinh(t) * id, std::sinh(t) * id, std::cosh(t) * id);
}

struct DegenerateLimit {
    std::vector<double> parameters;
    std::vector<CompoundTransform> sequence;  ///< unit Frobenius norm representatives
    std::vector<double> residuals;            ///< ||S_n - S||
    Matrix limit;                             ///< rank-one truncation of the last term
    int rank = 0;
    std::optional<PluckerVector> image;
    double image_angle = kInf;                ///< angle to plucker_embed(target)
    Matrix target;
};

/// Normalized compounds of the boosts conjugated by X -> eX (e orthogonal;
/// identity by default). Their limit has rank one with image the Plücker
/// point of e.
inline DegenerateLimit boost_degenerate_limit(int p, const std::vector<double>& ts, std::optional<Matrix> e = std::nullopt)
{
    if (ts.empty()) throw DescriptorError("empty parameter sequence");
    const Matrix id = Matrix::Identity(p, p);
    const Matrix target = e.value_or(id);
    if ((target.transpose() * target - id).norm() > 1e-10) throw NotOrthogonal("conjugating point is not orthogonal");
    const ProjectiveTransform h = ProjectiveTransform::from_blocks(id, Matrix::Zero(p, p), Matrix::Zero(p, p), target);
    const ProjectiveTransform hinv = h.inverse();

    DegenerateLimit out;
    out.target = target;
    out.parameters = ts;
    for (double t : ts) {
        CompoundTransform c = compound(h * boost(p, t) * hinv);
        c.matrix /= c.matrix.norm();
        // Fix the overall sign by the largest-magnitude entry.
        Eigen::Index r = 0, col = 0;
        c.matrix.cwiseAbs().maxCoeff(&r, &col);
        if (c.matrix(r, col) < 0) c.matrix = -c.matrix;
        out.sequence.push_back(c);
    }
    const Matrix& last = out.sequence.back().matrix;
    Eigen::JacobiSVD<Matrix> svd(last, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.rank = numerical_rank(last, kRankTol);
    out.limit = svd.singularValues()(0) * svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
    for (const auto& c : out.sequence) out.residuals.push_back((c.matrix - out.limit).norm());
    if (out.rank != 1) throw ConvergenceNotReached("normalized compound has rank " + std::to_string(out.rank) + " at the last parameter");
    out.image = PluckerVector{normalize_projective(svd.matrixU().col(0))};
    out.image_angle = line_angle(out.image->coords, plucker_embed(target).coords);
    return out;
}

} // namespace grh
