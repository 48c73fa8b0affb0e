#pragma once

// Projective and linear geometry of the affine chart of Gr_p(R^{p+q}).
//
// A chart point is a q x p matrix X standing for the p-plane spanned by the
// columns of the stacked block [I_p ; X]. A projective transformation g with
// row blocks (a b ; c d) acts on the chart by X -> (c + dX)(a + bX)^{-1}.

#include "grhilbert/errors.hpp"
#include "grhilbert/linalg.hpp"

#include <string>
#include <vector>

namespace grh {

struct ChartShape {
    int p = 1; ///< plane dimension (columns of a chart point)
    int q = 1; ///< complement dimension (rows of a chart point)

    ChartShape() = default;
    ChartShape(int p_, int q_) : p(p_), q(q_)
    {
        if (p < 1 || q < 1) throw DescriptorError("chart shape needs p >= 1 and q >= 1");
    }

    int ambient() const { return p + q; }
    int chart_dim() const { return p * q; }
    bool matches(const Matrix& x) const { return x.rows() == q && x.cols() == p; }
    bool operator==(const ChartShape&) const = default;
};

inline ChartShape shape_of(const Matrix& x) { return ChartShape(static_cast<int>(x.cols()), static_cast<int>(x.rows())); }

/// A validated chart point. Library routines take the raw matrix; this type
/// is the checked entry point for external input.
class ChartPoint {
public:
    explicit ChartPoint(Matrix x) : shape_(shape_of(x)), x_(std::move(x))
    {
        if (!x_.allFinite()) throw DescriptorError("chart point has non-finite entries");
    }
    ChartPoint(ChartShape shape, Matrix x) : ChartPoint(std::move(x))
    {
        if (!(shape_ == shape)) throw DescriptorError("chart point shape mismatch");
    }

    const ChartShape& shape() const { return shape_; }
    const Matrix& matrix() const { return x_; }

private:
    ChartShape shape_;
    Matrix x_;
};

/// Rank-one chart direction S = u v^T with unit u (length q) and v (length p).
struct RankOneDirection {
    Vector u;
    Vector v;

    RankOneDirection() = default;
    RankOneDirection(Vector u_, Vector v_) : u(std::move(u_)), v(std::move(v_))
    {
        const double nu = u.norm();
        const double nv = v.norm();
        if (nu == 0.0 || nv == 0.0) throw DegenerateConfiguration("rank-one direction needs nonzero factors");
        u /= nu;
        v /= nv;
    }

    Matrix matrix() const { return u * v.transpose(); }

    /// Factor a numerically rank-one matrix as sigma * u v^T. Returns sigma.
    static RankOneDirection from_matrix(const Matrix& s, double* sigma = nullptr)
    {
        Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.singularValues()(0) == 0.0) throw DegenerateConfiguration("zero matrix has no rank-one direction");
        if (svd.singularValues().size() > 1 && svd.singularValues()(1) > kRankTol * svd.singularValues()(0))
            throw DegenerateConfiguration("matrix is not rank one");
        if (sigma) *sigma = svd.singularValues()(0);
        return RankOneDirection(svd.matrixU().col(0), svd.matrixV().col(0));
    }
};

/// Invertible (p+q) x (p+q) matrix modulo scale, stored with |det| = 1.
class ProjectiveTransform {
public:
    ProjectiveTransform(ChartShape shape, const Matrix& g) : shape_(shape)
    {
        if (g.rows() != shape.ambient() || g.cols() != shape.ambient())
            throw DescriptorError("transform size does not match chart shape");
        const double det = g.determinant();
        if (!std::isfinite(det) || det == 0.0) throw DegenerateConfiguration("transform is singular");
        g_ = g / std::pow(std::abs(det), 1.0 / static_cast<double>(shape.ambient()));
    }

    static ProjectiveTransform identity(ChartShape shape)
    {
        return ProjectiveTransform(shape, Matrix::Identity(shape.ambient(), shape.ambient()));
    }

    static ProjectiveTransform from_blocks(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d)
    {
        const ChartShape shape(static_cast<int>(a.rows()), static_cast<int>(d.rows()));
        Matrix g(shape.ambient(), shape.ambient());
        g << a, b, c, d;
        return ProjectiveTransform(shape, g);
    }

    const ChartShape& shape() const { return shape_; }
    const Matrix& matrix() const { return g_; }

    Matrix a() const { return g_.topLeftCorner(shape_.p, shape_.p); }
    Matrix b() const { return g_.topRightCorner(shape_.p, shape_.q); }
    Matrix c() const { return g_.bottomLeftCorner(shape_.q, shape_.p); }
    Matrix d() const { return g_.bottomRightCorner(shape_.q, shape_.q); }

    ProjectiveTransform inverse() const { return ProjectiveTransform(shape_, g_.inverse()); }

    friend ProjectiveTransform operator*(const ProjectiveTransform& lhs, const ProjectiveTransform& rhs)
    {
        if (!(lhs.shape_ == rhs.shape_)) throw DescriptorError("composing transforms of different shapes");
        return ProjectiveTransform(lhs.shape_, lhs.g_ * rhs.g_);
    }

private:
    ChartShape shape_;
    Matrix g_;
};

/// Chart-denominator conditioning limit: a + bX with condition number above
/// 1/kChartEscapeTol is treated as singular.
inline constexpr double kChartEscapeTol = 1e-12;

inline Matrix apply_transform(const ProjectiveTransform& g, const Matrix& x)
{
    if (!g.shape().matches(x)) throw DescriptorError("chart point shape does not match transform");
    const Matrix den = g.a() + g.b() * x;
    const Matrix num = g.c() + g.d() * x;
    const Vector s = singular_values(den);
    if (s(s.size() - 1) <= kChartEscapeTol * s(0)) throw ChartEscape("a + bX is singular");
    // Y den = num  <=>  den^T Y^T = num^T
    return den.transpose().fullPivLu().solve(num.transpose()).transpose();
}

/// Cross ratio (|x-b||y-a|)/(|x-a||y-b|) of four parameters on one line,
/// with a = -inf and/or b = +inf handled by their limit forms.
inline double cross_ratio(double a, double x, double y, double b)
{
    if (std::isnan(a) || std::isnan(x) || std::isnan(y) || std::isnan(b))
        throw DegenerateConfiguration("NaN line parameter");
    if (x == a || y == b) throw DegenerateConfiguration("interior point coincides with an endpoint");
    const bool a_inf = std::isinf(a);
    const bool b_inf = std::isinf(b);
    if (a_inf && b_inf) return 1.0;
    if (a_inf) return std::abs(x - b) / std::abs(y - b);
    if (b_inf) return std::abs(y - a) / std::abs(x - a);
    return (std::abs(x - b) * std::abs(y - a)) / (std::abs(x - a) * std::abs(y - b));
}

/// p - rank(X - Y): the dimension of the intersection of the two planes.
inline int intersection_dim(const Matrix& x, const Matrix& y)
{
    const double scale = std::max(x.norm(), y.norm());
    return static_cast<int>(x.cols()) - numerical_rank(x - y, kRankTol, rank_floor(scale));
}

/// The chart trace t -> X + tS of a projective line in the Grassmannian.
struct RankOneLine {
    Matrix base;
    RankOneDirection direction;

    Matrix at(double t) const { return base + t * direction.matrix(); }
};

inline RankOneLine rank_one_line(const Matrix& x, const RankOneDirection& s)
{
    if (s.u.size() != x.rows() || s.v.size() != x.cols()) throw DescriptorError("direction shape mismatch");
    return RankOneLine{x, s};
}

/// Unit Pluecker coordinates; the first nonzero coordinate is positive.
struct PluckerVector {
    Vector coords;
};

/// The stacked (p+q) x p frame [I_p ; X].
inline Matrix chart_frame(const Matrix& x)
{
    const Eigen::Index p = x.cols();
    Matrix f(p + x.rows(), p);
    f << Matrix::Identity(p, p), x;
    return f;
}

/// Raw (unnormalized) vector of p x p minors of a frame, rows in
/// lexicographic subset order.
inline Vector frame_minors(const Matrix& frame)
{
    const int n = static_cast<int>(frame.rows());
    const int p = static_cast<int>(frame.cols());
    std::vector<int> cols(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) cols[static_cast<std::size_t>(j)] = j;
    const auto subsets = combinations(n, p);
    Vector m(static_cast<Eigen::Index>(subsets.size()));
    for (std::size_t i = 0; i < subsets.size(); ++i) m(static_cast<Eigen::Index>(i)) = submatrix(frame, subsets[i], cols).determinant();
    return m;
}

/// Scale a nonzero vector to unit norm with first significant coordinate positive.
inline Vector normalize_projective(const Vector& v)
{
    const double n = v.norm();
    if (n == 0.0) throw DegenerateConfiguration("zero vector has no projective class");
    Vector w = v / n;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (std::abs(w(i)) > 1e-14) {
            if (w(i) < 0) w = -w;
            break;
        }
    }
    return w;
}

inline PluckerVector plucker_of_frame(const Matrix& frame)
{
    return PluckerVector{normalize_projective(frame_minors(frame))};
}

inline PluckerVector plucker_embed(const Matrix& x) { return plucker_of_frame(chart_frame(x)); }

/// p-th compound (matrix of p x p minors) of a square matrix.
struct CompoundTransform {
    int p = 1;
    Matrix matrix;
};

inline CompoundTransform compound(const Matrix& g, int p)
{
    const int n = static_cast<int>(g.rows());
    const auto subsets = combinations(n, p);
    const auto m = static_cast<Eigen::Index>(subsets.size());
    CompoundTransform out{p, Matrix(m, m)};
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            out.matrix(i, j) = submatrix(g, subsets[static_cast<std::size_t>(i)], subsets[static_cast<std::size_t>(j)]).determinant();
    return out;
}

inline CompoundTransform compound(const ProjectiveTransform& g) { return compound(g.matrix(), g.shape().p); }

/// Eigenvalue moduli and the dominant (attracting) eigenspace.
struct DominantSpectrum {
    Vector moduli;              ///< ascending, after unit-|det| normalization
    Matrix dominant_subspace;   ///< orthonormal basis of E+
    int jordan_size_bound = 1;  ///< m+ estimate; 1 for the accepted semisimple inputs
    bool is_diagonalizable = true;
};

/// Modulus clustering tolerance for the dominant eigenvalue cluster.
inline constexpr double kEigTol = 1e-7;

inline DominantSpectrum dominant_spectrum(const Matrix& m)
{
    const Eigen::Index n = m.rows();
    const double det = m.determinant();
    const Matrix g = (det != 0.0 && std::isfinite(det)) ? Matrix(m / std::pow(std::abs(det), 1.0 / static_cast<double>(n))) : m;

    Eigen::EigenSolver<Matrix> es(g, true);
    const Eigen::VectorXcd vals = es.eigenvalues();
    const Eigen::MatrixXcd vecs = es.eigenvectors();

    DominantSpectrum out;
    out.moduli = vals.cwiseAbs();
    std::sort(out.moduli.data(), out.moduli.data() + out.moduli.size());
    const double top = out.moduli(n - 1);

    // Real form of a set of eigenvectors: real vectors stay, a conjugate pair
    // contributes its real and imaginary parts.
    auto real_form = [&](auto&& select, int& count) {
        std::vector<Vector> cols;
        count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!select(i)) continue;
            ++count;
            const double im = vals(i).imag();
            if (std::abs(im) <= kEigTol * std::max(1.0, std::abs(vals(i)))) {
                cols.push_back(vecs.col(i).real().normalized());
            } else if (im > 0) {
                cols.push_back(vecs.col(i).real());
                cols.push_back(vecs.col(i).imag());
            }
        }
        Matrix c(n, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) c.col(static_cast<Eigen::Index>(j)) = cols[j] / cols[j].norm();
        return c;
    };

    int dom_count = 0;
    const Matrix dom = real_form([&](Eigen::Index i) { return std::abs(vals(i)) >= top * (1.0 - kEigTol); }, dom_count);
    if (numerical_rank(dom, kEigTol) < dom_count)
        throw NonDiagonalizableBeyondTolerance("dominant eigenvectors do not span the cluster");
    out.dominant_subspace = orthonormal_basis(dom, kEigTol);

    int all_count = 0;
    const Matrix all = real_form([](Eigen::Index) { return true; }, all_count);
    out.is_diagonalizable = numerical_rank(all, kEigTol) == all_count;
    out.jordan_size_bound = 1;
    return out;
}

inline DominantSpectrum dominant_spectrum(const ProjectiveTransform& g) { return dominant_spectrum(g.matrix()); }
inline DominantSpectrum dominant_spectrum(const CompoundTransform& g) { return dominant_spectrum(g.matrix); }

} // namespace grh
