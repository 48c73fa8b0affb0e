#pragma once

// Dense linear-algebra helpers shared by every module: numerical rank,
// subspace angles, subset enumeration, the matrix exponential and a seeded
// random source.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace grh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative singular-value cutoff used for every rank decision.
inline constexpr double kRankTol = 1e-9;

inline Vector singular_values(const Matrix& m)
{
    if (m.size() == 0) return Vector();
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

/// Number of singular values above tau * sigma_max. Matrices whose largest
/// singular value does not exceed abs_floor have rank zero.
inline int numerical_rank(const Matrix& m, double tau = kRankTol, double abs_floor = 0.0)
{
    const Vector s = singular_values(m);
    if (s.size() == 0 || s(0) <= abs_floor || s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tau * s(0)) ++r;
    return r;
}

/// Absolute floor for rank tests on differences of chart points of size ~scale.
inline double rank_floor(double scale) { return 1e-13 * std::max(1.0, scale); }

inline double op_norm(const Matrix& m)
{
    const Vector s = singular_values(m);
    return s.size() ? s(0) : 0.0;
}

inline std::uint64_t binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> combinations(int n, int k)
{
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

inline Matrix submatrix(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols)
{
    Matrix s(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    return s;
}

/// Orthonormal basis of the column span, columns with singular value below
/// tau * sigma_max dropped.
inline Matrix orthonormal_basis(const Matrix& cols, double tau = kRankTol)
{
    if (cols.cols() == 0) return Matrix(cols.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
    const Vector s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(0) > 0 && s(i) > tau * s(0)) ++r;
    return svd.matrixU().leftCols(r);
}

/// Angle between a nonzero vector and the span of the orthonormal columns of basis.
inline double angle_to_subspace(const Vector& v, const Matrix& basis)
{
    const double n = v.norm();
    if (n == 0.0) return 0.0;
    const Vector proj = basis * (basis.transpose() * v);
    const Vector perp = v - proj;
    return std::atan2(perp.norm(), proj.norm());
}

/// Angle between two lines through the origin (sign-insensitive).
inline double line_angle(const Vector& a, const Vector& b)
{
    const Vector ah = a / a.norm();
    const Vector bh = b / b.norm();
    const double c = ah.dot(bh);
    return std::atan2((bh - c * ah).norm(), std::abs(c));
}

/// Matrix exponential (scaling and squaring with Pade approximants).
inline Matrix expm(const Matrix& m)
{
    return m.exp();
}

/// Seeded random source. All stochastic searches draw from this type so that
/// results are reproducible from (inputs, seed).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform(double a = 0.0, double b = 1.0) { return a + (b - a) * unit_(engine_); }
    std::uint64_t next() { return engine_(); }

    Vector gaussian_vector(Eigen::Index n)
    {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

    Vector unit_vector(Eigen::Index n)
    {
        Vector v = gaussian_vector(n);
        while (v.norm() == 0.0) v = gaussian_vector(n);
        return v / v.norm();
    }

    Matrix gaussian_matrix(Eigen::Index r, Eigen::Index c)
    {
        Matrix m(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal();
        return m;
    }

    Matrix uniform_matrix(Eigen::Index r, Eigen::Index c, double a, double b)
    {
        Matrix m(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i) m(i, j) = uniform(a, b);
        return m;
    }

    /// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
    Matrix orthogonal(Eigen::Index n)
    {
        Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n));
        Matrix q = qr.householderQ();
        const Matrix r = qr.matrixQR();
        for (Eigen::Index i = 0; i < n; ++i)
            if (r(i, i) < 0) q.col(i) = -q.col(i);
        return q;
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

} // namespace grh
