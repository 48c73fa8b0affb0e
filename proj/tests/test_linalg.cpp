#include "grhilbert/linalg.hpp"

#include <gtest/gtest.h>

using namespace grh;

TEST(Linalg, NumericalRankCountsSingularValues)
{
    Matrix m = Matrix::Zero(3, 3);
    EXPECT_EQ(numerical_rank(m), 0);
    m(0, 0) = 1.0;
    EXPECT_EQ(numerical_rank(m), 1);
    m(1, 1) = 1e-12;
    EXPECT_EQ(numerical_rank(m), 1);
    m(1, 1) = 1e-6;
    EXPECT_EQ(numerical_rank(m), 2);
}

TEST(Linalg, AbsoluteFloorSuppressesTinyMatrices)
{
    Matrix m = Matrix::Identity(2, 2) * 1e-15;
    EXPECT_EQ(numerical_rank(m), 2);
    EXPECT_EQ(numerical_rank(m, kRankTol, rank_floor(1.0)), 0);
}

TEST(Linalg, CombinationsAreLexicographic)
{
    const auto c = combinations(4, 2);
    ASSERT_EQ(c.size(), 6u);
    EXPECT_EQ(c.front(), (std::vector<int>{0, 1}));
    EXPECT_EQ(c[1], (std::vector<int>{0, 2}));
    EXPECT_EQ(c.back(), (std::vector<int>{2, 3}));
    EXPECT_EQ(binomial(5, 2), 10u);
    EXPECT_EQ(binomial(6, 3), combinations(6, 3).size());
}

TEST(Linalg, ExpmOfRotationGenerator)
{
    Matrix m(2, 2);
    m << 0, -0.7, 0.7, 0;
    const Matrix e = expm(m);
    EXPECT_NEAR(e(0, 0), std::cos(0.7), 1e-14);
    EXPECT_NEAR(e(1, 0), std::sin(0.7), 1e-14);
    EXPECT_NEAR(e.determinant(), 1.0, 1e-14);
}

TEST(Linalg, ExpmOfIdempotent)
{
    Matrix g(2, 2);
    g << 0, 0, -0.3, 1;  // g^2 = g
    ASSERT_LT((g * g - g).norm(), 1e-15);
    const double t = 1.3;
    const Matrix expected = Matrix::Identity(2, 2) + (std::exp(t) - 1.0) * g;
    EXPECT_LT((expm(t * g) - expected).norm(), 1e-12);
}

TEST(Linalg, HaarOrthogonalIsOrthogonal)
{
    Rng rng(4);
    for (int n : {1, 2, 5}) {
        const Matrix q = rng.orthogonal(n);
        EXPECT_LT((q.transpose() * q - Matrix::Identity(n, n)).norm(), 1e-12);
    }
}

TEST(Linalg, RngIsReproducible)
{
    Rng a(9), b(9);
    EXPECT_EQ(a.gaussian_matrix(3, 2), b.gaussian_matrix(3, 2));
    EXPECT_DOUBLE_EQ(a.uniform(), b.uniform());
}

TEST(Linalg, AnglesBetweenLinesAndSubspaces)
{
    Vector a(2), b(2);
    a << 1, 0;
    b << -1, 0;
    EXPECT_NEAR(line_angle(a, b), 0.0, 1e-15);
    b << 1, 1;
    EXPECT_NEAR(line_angle(a, b), std::atan(1.0), 1e-15);
    Matrix basis(3, 1);
    basis << 1, 0, 0;
    Vector v(3);
    v << 0, 2, 0;
    EXPECT_NEAR(angle_to_subspace(v, basis), std::acos(0.0), 1e-15);
}

TEST(Linalg, OperatorNormAndBasis)
{
    Matrix m(2, 2);
    m << 3, 0, 0, -4;
    EXPECT_NEAR(op_norm(m), 4.0, 1e-14);
    Matrix cols(3, 2);
    cols << 1, 2, 0, 0, 0, 0;
    EXPECT_EQ(orthonormal_basis(cols).cols(), 1);
}
