#include "grhilbert/domains.hpp"

#include <gtest/gtest.h>

using namespace grh;

namespace {

Matrix diag2(double a, double b)
{
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Matrix rotation(double th)
{
    Matrix r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return r;
}

Matrix col(double a, double b)
{
    Matrix m(2, 1);
    m << a, b;
    return m;
}

} // namespace

TEST(Domains, BallMembership)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    EXPECT_TRUE(b->contains(diag2(0.9, -0.9)));
    EXPECT_FALSE(b->contains(Matrix::Identity(2, 2)));
    EXPECT_FALSE(b->contains(diag2(1.01, 0)));
}

TEST(Domains, ClosedFormHitsMatchBisection)
{
    Rng rng(12);
    const std::vector<BodyPtr> bodies{operator_ball(ChartShape(2, 2)), operator_ball(ChartShape(2, 3)), half_cone(2),
                                      random_polytope(ChartShape(2, 2), 6, 0.45, 3), dominance_polytope(2)};
    for (const auto& b : bodies) {
        for (int k = 0; k < 40; ++k) {
            Matrix x = b->interior + 0.1 * rng.gaussian_matrix(b->shape.q, b->shape.p);
            if (!b->contains(x)) continue;
            const RankOneDirection s(rng.unit_vector(b->shape.q), rng.unit_vector(b->shape.p));
            const SegmentHit exact = boundary_hits(*b, x, s);
            const SegmentHit bis = line_hits_bisection(*b, x, s.matrix());
            // bisection cannot see past its expansion cap
            const double cap = detail::expansion_cap(*b, x, s.matrix());
            if (std::abs(exact.t_plus) < 0.5 * cap) EXPECT_NEAR(exact.t_plus, bis.t_plus, 1e-9 * std::max(1.0, std::abs(exact.t_plus))) << b->label;
            else EXPECT_TRUE(std::isinf(bis.t_plus) || bis.t_plus >= 0.5 * cap) << b->label;
            if (std::abs(exact.t_minus) < 0.5 * cap) EXPECT_NEAR(exact.t_minus, bis.t_minus, 1e-9 * std::max(1.0, std::abs(exact.t_minus))) << b->label;
            else EXPECT_TRUE(std::isinf(bis.t_minus) || bis.t_minus <= -0.5 * cap) << b->label;
        }
    }
}

TEST(Domains, BallHitsAlongMatrixUnit)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const SegmentHit h = boundary_hits(*b, Matrix::Zero(2, 2), RankOneDirection(Vector::Unit(2, 0), Vector::Unit(2, 0)));
    EXPECT_NEAR(h.t_plus, 1.0, 1e-15);
    EXPECT_NEAR(h.t_minus, -1.0, 1e-15);
}

TEST(Domains, LineHitsRejectOutsidePoint)
{
    const BodyPtr b = operator_ball(ChartShape(1, 1));
    Matrix x(1, 1);
    x << 2.0;
    EXPECT_THROW(line_hits(*b, x, Matrix::Ones(1, 1)), PointOutside);
}

TEST(Domains, HalfConeIsACone)
{
    const BodyPtr c = half_cone(2);
    Matrix x(2, 2);
    x << 1, 3, -2.5, 1;  // symmetric part diag(1,1) + off 0.25
    EXPECT_TRUE(c->contains(x));
    EXPECT_TRUE(c->contains(7.0 * x));
    EXPECT_FALSE(c->contains(-x));
    EXPECT_TRUE(c->is_cone);
}

TEST(Domains, AffineImageMovesMembershipAndHits)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    Rng rng(8);
    const Matrix left = Matrix::Identity(2, 2) + 0.3 * rng.gaussian_matrix(2, 2);
    const Matrix right = Matrix::Identity(2, 2) + 0.3 * rng.gaussian_matrix(2, 2);
    const Matrix shift = rng.gaussian_matrix(2, 2);
    auto [lin, off] = chart_affine_map(left, right, shift);
    const BodyPtr img = affine_image(b, lin, off);
    for (int k = 0; k < 20; ++k) {
        const Matrix x = 0.95 * rng.uniform() * rng.orthogonal(2);
        const Matrix y = left * x * right + shift;
        EXPECT_EQ(b->contains(x), img->contains(y));
    }
    const Matrix dir = Vector::Unit(2, 0) * Vector::Unit(2, 1).transpose();
    const SegmentHit h1 = line_hits(*b, Matrix::Zero(2, 2), dir);
    const SegmentHit h2 = line_hits(*img, shift, left * dir * right);
    EXPECT_NEAR(h1.t_plus, h2.t_plus, 1e-12);
    EXPECT_NEAR(h1.t_minus, h2.t_minus, 1e-12);
}

TEST(Domains, BoundaryCertification)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    EXPECT_NO_THROW(certify_boundary(*b, Matrix::Identity(2, 2)));
    EXPECT_NO_THROW(certify_boundary(*b, rotation(0.4)));
    EXPECT_THROW(certify_boundary(*b, 0.5 * Matrix::Identity(2, 2)), NotBoundary);
    EXPECT_TRUE(on_boundary(*b, diag2(1, 0.3)));
    EXPECT_FALSE(on_boundary(*b, diag2(0.9, 0.3)));
}

TEST(Domains, ExactTangentConeAgreesWithScan)
{
    Rng rng(21);
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    for (const Matrix& e : {Matrix(Matrix::Identity(2, 2)), rotation(1.1), diag2(1, 0.3), diag2(1, 0)}) {
        const BodyPtr exact = tangent_cone(b, e);
        const BodyPtr scan = tangent_cone_scan(b, e);
        int agree = 0, total = 0;
        for (int k = 0; k < 200; ++k) {
            const Matrix y = e + rng.gaussian_matrix(2, 2);
            // Skip points too close to the cone boundary for the scan to resolve.
            const double margin = 1e-3;
            bool in_exact = exact->contains(y);
            const bool robust = exact->contains(y + margin * (exact->interior - y)) == exact->contains(y - margin * (exact->interior - y));
            if (!robust) continue;
            ++total;
            agree += in_exact == scan->contains(y) ? 1 : 0;
        }
        EXPECT_EQ(agree, total);
    }
}

TEST(Domains, TangentConeAtIdentityIsNegativeSymmetricPart)
{
    const BodyPtr tc = tangent_cone(operator_ball(ChartShape(2, 2)), Matrix::Identity(2, 2));
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const Matrix h = rng.gaussian_matrix(2, 2);
        Eigen::SelfAdjointEigenSolver<Matrix> es(h + h.transpose());
        if (std::abs(es.eigenvalues().maxCoeff()) < 1e-6) continue;
        EXPECT_EQ(tc->contains(Matrix::Identity(2, 2) + h), es.eigenvalues().maxCoeff() < 0);
    }
}

TEST(Domains, RProperness)
{
    EXPECT_TRUE(is_r_proper(*full_chart(ChartShape(2, 2))).violated());
    EXPECT_FALSE(is_r_proper(*operator_ball(ChartShape(2, 2))).violated());
    EXPECT_FALSE(is_r_proper(*half_cone(2)).violated());
    EXPECT_TRUE(is_r_proper(*tangent_cone(operator_ball(ChartShape(2, 2)), diag2(1, 0))).violated());
    EXPECT_FALSE(is_r_proper(*tangent_cone(operator_ball(ChartShape(2, 2)), Matrix::Identity(2, 2))).violated());
}

TEST(Domains, RProperWitnessIsALine)
{
    const RProperVerdict v = is_r_proper(*full_chart(ChartShape(2, 3)));
    ASSERT_TRUE(v.violated());
    ASSERT_TRUE(v.witness_direction.has_value());
    EXPECT_NEAR(v.best_score, 0.0, 0.0);
}

TEST(Domains, ClippedHausdorffOfDilatedDisk)
{
    const double delta = 0.1;
    const BodyPtr disk = operator_ball(ChartShape(1, 2));
    const BodyPtr big = dilation(disk, 1.0 + delta, Matrix::Zero(2, 1));
    EXPECT_NEAR(hausdorff_distance_clipped(*disk, *big, 3.0, 512), delta, 1e-3);
}

TEST(Domains, ClippedHausdorffOfDilatedSquareBall)
{
    // Frobenius distance from the ball to its dilation is attained at the
    // orthogonal points, where the radial gap is delta * sqrt(2).
    const double delta = 0.1;
    const BodyPtr ball = operator_ball(ChartShape(2, 2));
    const BodyPtr big = dilation(ball, 1.0 + delta, Matrix::Zero(2, 2));
    const double d = hausdorff_distance_clipped(*ball, *big, 3.0, 4000);
    EXPECT_LE(d, delta * std::sqrt(2.0) + 1e-9);
    EXPECT_GT(d, 0.9 * delta * std::sqrt(2.0));
}

TEST(Domains, ClippedHausdorffOfEqualBodiesIsZero)
{
    const BodyPtr ball = operator_ball(ChartShape(2, 2));
    EXPECT_NEAR(hausdorff_distance_clipped(*ball, *ball, 2.0, 64), 0.0, 1e-15);
}

TEST(Domains, ZHypersurface)
{
    EXPECT_TRUE(z_hypersurface_contains(Matrix::Identity(2, 2), diag2(1, 0.5)));
    EXPECT_FALSE(z_hypersurface_contains(Matrix::Identity(2, 2), diag2(0.5, 0.5)));
}

TEST(Domains, ExtremePointTestOnBall)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    EXPECT_TRUE(extreme_point_test(*b, Matrix::Identity(2, 2)).extreme());
    EXPECT_TRUE(extreme_point_test(*b, rotation(2.3)).extreme());
    const ExtremeTestResult r = extreme_point_test(*b, diag2(1, 0.3));
    ASSERT_FALSE(r.extreme());
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_TRUE(b->contains(*r.witness));
    EXPECT_LT(std::abs((*r.witness - diag2(1, 0.3)).determinant()), kDetTol);
}

TEST(Domains, ExtremePointTestOnDominancePolytope)
{
    const BodyPtr poly = dominance_polytope(2);
    EXPECT_TRUE(extreme_point_test(*poly, Matrix::Identity(2, 2)).extreme());
    Matrix mid(2, 2);
    mid << 0, 1, 0, 0;  // interior of the boundary segment X + t e2 e1^T, |t| < 1
    EXPECT_NO_THROW(certify_boundary(*poly, mid));
    EXPECT_FALSE(extreme_point_test(*poly, mid).extreme());
}

TEST(Domains, BoundaryAdjacency)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    EXPECT_TRUE(boundary_adjacent(*b, diag2(1, 0), diag2(1, 0.4)));
    EXPECT_TRUE(boundary_adjacent(*b, diag2(1, 0.2), diag2(1, 0.6)));
    // The endpoint I is an extreme point: the segment to it does not extend past it.
    EXPECT_FALSE(boundary_adjacent(*b, Matrix::Identity(2, 2), diag2(1, 0.9)));
    EXPECT_FALSE(boundary_adjacent(*b, Matrix::Identity(2, 2), -Matrix::Identity(2, 2)));
    EXPECT_TRUE(find_adjacent_partner(*b, diag2(1, 0)).partner.has_value());
    EXPECT_FALSE(find_adjacent_partner(*b, Matrix::Identity(2, 2)).partner.has_value());
}

TEST(Domains, DeltaAlong)
{
    const BodyPtr disk = operator_ball(ChartShape(1, 2));
    const RankOneDirection s(Vector::Unit(2, 0), Vector::Ones(1));
    EXPECT_NEAR(delta_along(*disk, col(0.5, 0), s), 0.5, 1e-14);
}

TEST(Domains, PolytopeRejectsBadInterior)
{
    std::vector<Halfspace> f{{Matrix::Ones(1, 1), 1.0}};
    EXPECT_THROW(polytope(ChartShape(1, 1), f, Matrix::Constant(1, 1, 2.0)), DescriptorError);
}

TEST(Domains, FullChartHasNoBoundary)
{
    const BodyPtr f = full_chart(ChartShape(2, 2));
    const SegmentHit h = line_hits(*f, Matrix::Zero(2, 2), Matrix::Identity(2, 2));
    EXPECT_TRUE(std::isinf(h.t_plus) && std::isinf(h.t_minus));
}
