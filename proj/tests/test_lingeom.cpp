#include "grhilbert/lingeom.hpp"

#include <gtest/gtest.h>

using namespace grh;

TEST(Lingeom, ChartShapeValidates)
{
    EXPECT_THROW(ChartShape(0, 2), DescriptorError);
    const ChartShape s(2, 3);
    EXPECT_EQ(s.ambient(), 5);
    EXPECT_EQ(s.chart_dim(), 6);
    EXPECT_TRUE(s.matches(Matrix::Zero(3, 2)));
    EXPECT_FALSE(s.matches(Matrix::Zero(2, 3)));
}

TEST(Lingeom, ChartPointRejectsNonFinite)
{
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(ChartPoint{m}, Error);
}

TEST(Lingeom, RankOneDirectionFromMatrix)
{
    Vector u(3), v(2);
    u << 1, 2, 2;
    v << 3, 4;
    double sigma = 0.0;
    const RankOneDirection d = RankOneDirection::from_matrix(u * v.transpose(), &sigma);
    EXPECT_NEAR(sigma, 15.0, 1e-12);
    EXPECT_LT((sigma * d.matrix() - u * v.transpose()).norm(), 1e-12);
    EXPECT_THROW(RankOneDirection::from_matrix(Matrix::Identity(2, 2)), Error);
}

TEST(Lingeom, TransformsAreNormalizedAndCompose)
{
    Rng rng(2);
    const ChartShape s(2, 2);
    const ProjectiveTransform g(s, 3.0 * Matrix::Identity(4, 4) + 0.2 * rng.gaussian_matrix(4, 4));
    EXPECT_NEAR(std::abs(g.matrix().determinant()), 1.0, 1e-12);
    const Matrix x = 0.1 * rng.gaussian_matrix(2, 2);
    const Matrix back = apply_transform(g.inverse(), apply_transform(g, x));
    EXPECT_LT((back - x).norm(), 1e-12);
    const ProjectiveTransform h(s, 2.0 * Matrix::Identity(4, 4) + 0.1 * rng.gaussian_matrix(4, 4));
    EXPECT_LT((apply_transform(g * h, x) - apply_transform(g, apply_transform(h, x))).norm(), 1e-12);
}

TEST(Lingeom, BlockActionFormula)
{
    const Matrix id = Matrix::Identity(2, 2);
    Matrix c(2, 2), x(2, 2);
    c << 0.5, 0, 1, -1;
    x << 0.1, 0.2, 0.3, 0.4;
    const auto g = ProjectiveTransform::from_blocks(id, Matrix::Zero(2, 2), c, 2.0 * id);
    EXPECT_LT((apply_transform(g, x) - (c + 2.0 * x)).norm(), 1e-14);
}

TEST(Lingeom, ChartEscapeWhenDenominatorSingular)
{
    const Matrix id = Matrix::Identity(1, 1);
    const auto g = ProjectiveTransform::from_blocks(Matrix::Zero(1, 1), id, id, Matrix::Zero(1, 1));  // x -> 1/x
    EXPECT_THROW(apply_transform(g, Matrix::Zero(1, 1)), ChartEscape);
    Matrix x(1, 1);
    x << 4.0;
    EXPECT_NEAR(apply_transform(g, x)(0, 0), 0.25, 1e-15);
}

TEST(Lingeom, CrossRatioValuesAndLimits)
{
    EXPECT_NEAR(std::log(cross_ratio(-1, 0, 0.5, 1)), std::log(3.0), 1e-15);
    EXPECT_DOUBLE_EQ(cross_ratio(-kInf, 0, 1, kInf), 1.0);
    EXPECT_NEAR(cross_ratio(-kInf, 0, 0.5, 1), 2.0, 1e-15);
    EXPECT_NEAR(cross_ratio(-1, 0, 1, kInf), 2.0, 1e-15);
    EXPECT_THROW(cross_ratio(-1, -1, 0, 1), DegenerateConfiguration);
}

TEST(Lingeom, CrossRatioIsProjectivelyInvariant)
{
    auto mob = [](double t) { return (2.0 * t + 1.0) / (0.5 * t + 3.0); };
    const double a = -1, x = 0.2, y = 0.7, b = 1.5;
    EXPECT_NEAR(cross_ratio(a, x, y, b), cross_ratio(mob(a), mob(x), mob(y), mob(b)), 1e-13);
}

TEST(Lingeom, IntersectionDimension)
{
    const Matrix z = Matrix::Zero(2, 2);
    Matrix y = Matrix::Zero(2, 2);
    EXPECT_EQ(intersection_dim(z, y), 2);
    y(0, 0) = 1;
    EXPECT_EQ(intersection_dim(z, y), 1);
    y(1, 1) = 1;
    EXPECT_EQ(intersection_dim(z, y), 0);
}

TEST(Lingeom, PluckerEmbeddingOfOrigin)
{
    const PluckerVector v = plucker_embed(Matrix::Zero(2, 2));
    ASSERT_EQ(v.coords.size(), 6);
    EXPECT_NEAR(v.coords(0), 1.0, 1e-15);
    EXPECT_NEAR(v.coords.tail(5).norm(), 0.0, 1e-15);
}

TEST(Lingeom, CompoundIntertwinesAction)
{
    Rng rng(5);
    const ChartShape s(2, 3);
    const ProjectiveTransform g(s, 2.0 * Matrix::Identity(5, 5) + 0.3 * rng.gaussian_matrix(5, 5));
    const Matrix x = 0.2 * rng.gaussian_matrix(3, 2);
    const Vector lhs = normalize_projective(compound(g).matrix * plucker_embed(x).coords);
    const Vector rhs = plucker_embed(apply_transform(g, x)).coords;
    EXPECT_LT(line_angle(lhs, rhs), 1e-12);
}

TEST(Lingeom, CompoundIsMultiplicative)
{
    Rng rng(6);
    const Matrix a = rng.gaussian_matrix(4, 4);
    const Matrix b = rng.gaussian_matrix(4, 4);
    EXPECT_LT((compound(a * b, 2).matrix - compound(a, 2).matrix * compound(b, 2).matrix).norm(), 1e-10);
}

TEST(Lingeom, DominantSpectrumOfDiagonal)
{
    Vector d(3);
    d << 4, 1, 0.25;
    const DominantSpectrum s = dominant_spectrum(Matrix(d.asDiagonal()));
    EXPECT_EQ(s.dominant_subspace.cols(), 1);
    EXPECT_NEAR(std::abs(s.dominant_subspace(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(s.moduli(2), 4.0, 1e-12);
    EXPECT_TRUE(s.is_diagonalizable);
}

TEST(Lingeom, DominantSpectrumRejectsDefectiveCluster)
{
    Matrix j(2, 2);
    j << 1, 1, 0, 1;
    EXPECT_THROW(dominant_spectrum(j), NonDiagonalizableBeyondTolerance);
}

TEST(Lingeom, RankOneLinePoints)
{
    Vector u(2), v(2);
    u << 1, 0;
    v << 0, 1;
    const RankOneLine l = rank_one_line(Matrix::Zero(2, 2), RankOneDirection(u, v));
    EXPECT_NEAR(l.at(2.0)(0, 1), 2.0, 1e-15);
}
