#include "grhilbert/rescaling.hpp"

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

double interval_rho(double lam, double x, double y)
{
    return std::abs(std::log((lam + y) * (lam - x) / ((lam - y) * (lam + x))));
}

} // namespace

TEST(Rescaling, TrendVerdict)
{
    using V = ConvergenceReport::Verdict;
    EXPECT_EQ(trend_verdict({1.0, 0.5, 0.2}), V::ConvergentTrend);
    EXPECT_EQ(trend_verdict({0.5, 1.0, 0.1}), V::ConvergentTrend);
    EXPECT_EQ(trend_verdict({1.0, 0.5, 0.6, 0.1}), V::NoTrend);
    EXPECT_EQ(trend_verdict({1.0, 0.9}), V::NoTrend);
}

TEST(Rescaling, TangentConeConvergenceOnBall)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const Matrix e = Matrix::Identity(2, 2);
    const auto probes = default_probe_pairs(*tangent_cone(b, e), 0.5 * e, 3);
    TangentConvergenceOptions opt;
    opt.directions = 128;
    opt.budget.restarts = 0;
    const ConvergenceReport r = tangent_cone_convergence(b, e, {0, 1, 2, 4, 6}, probes, opt);
    ASSERT_EQ(r.hausdorff_values.size(), 5u);
    EXPECT_GT(r.hausdorff_values.front(), 0.0);
    for (std::size_t i = 2; i < r.hausdorff_values.size(); ++i) EXPECT_LE(r.hausdorff_values[i], r.hausdorff_values[i - 1]);
    EXPECT_EQ(r.verdict, ConvergenceReport::Verdict::ConvergentTrend);
    EXPECT_LE(r.metric_disagreements.back(), 5e-2);
}

TEST(Rescaling, TangentConvergenceRejectsOutsideProbes)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const Matrix e = Matrix::Identity(2, 2);
    std::vector<ProbePair> bad{{2.0 * e, 0.5 * e}};
    EXPECT_THROW(tangent_cone_convergence(b, e, {0, 1}, bad), ProbeOutside);
}

TEST(Rescaling, NestedIntervalsFollowClosedForm)
{
    const BodyPtr iv = operator_ball(ChartShape(1, 1));
    const std::vector<ProbePair> probes{{Matrix::Constant(1, 1, -0.3), Matrix::Constant(1, 1, 0.5)},
                                        {Matrix::Constant(1, 1, 0.1), Matrix::Constant(1, 1, 0.2)}};
    std::vector<double> lambdas;
    for (int n = 1; n <= 32; n *= 2) lambdas.push_back(1.0 + 1.0 / n);
    lambdas.push_back(1.0);
    const ConvergenceReport r = nested_body_metric_convergence(iv, lambdas, probes);
    EXPECT_EQ(r.metric_disagreements.back(), 0.0);
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
        double expected = 0.0;
        for (const auto& [x, y] : probes)
            expected = std::max(expected, std::abs(interval_rho(lambdas[i], x(0, 0), y(0, 0)) - interval_rho(1.0, x(0, 0), y(0, 0))));
        EXPECT_NEAR(r.metric_disagreements[i], expected, 1e-9);
    }
    EXPECT_EQ(r.verdict, ConvergenceReport::Verdict::ConvergentTrend);
}

TEST(Rescaling, ExtremeSuiteOnBall)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const auto rows = extreme_equivalence_suite(b, {Matrix::Identity(2, 2), diag2(1, 0), diag2(1, 0.7)});
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) EXPECT_TRUE(r.consistent());
    EXPECT_TRUE(rows[0].extreme());
    ASSERT_TRUE(rows[0].test4_angle.has_value());
    EXPECT_LE(*rows[0].test4_angle, 1e-6);
    EXPECT_FALSE(rows[1].extreme());
    EXPECT_TRUE(rows[1].test1_adjacency.partner.has_value());
    EXPECT_TRUE(rows[1].test2_ze.witness.has_value());
    EXPECT_TRUE(rows[1].test3_tc_proper.witness_direction.has_value());
    EXPECT_FALSE(rows[2].extreme());
}

TEST(Rescaling, ExtremeSuiteOnPolytope)
{
    const BodyPtr poly = dominance_polytope(2);
    Matrix edge(2, 2);
    edge << 0, 1, 0, 0;
    const auto rows = extreme_equivalence_suite(poly, {Matrix::Identity(2, 2), edge});
    for (const auto& r : rows) EXPECT_TRUE(r.consistent());
    EXPECT_TRUE(rows[0].extreme());
    EXPECT_FALSE(rows[1].extreme());
    EXPECT_FALSE(rows[0].test4_residual.has_value());
}

TEST(Rescaling, PnotqWitnesses)
{
    for (auto [p, q] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 2}}) {
        const PnotqResult r = pnotq_failure_demo(p, q);
        ASSERT_TRUE(r.verdict.violated()) << p << "," << q;
        const BodyPtr tc = tangent_cone(operator_ball(ChartShape(p, q)), r.point);
        const Matrix s = r.verdict.witness_direction->matrix();
        for (double t : {-1e3, -1.0, 0.0, 1.0, 1e3}) EXPECT_TRUE(tc->contains(*r.verdict.witness_point + t * s));
    }
    RProperBudget big;
    big.random_starts *= 10;
    big.local_iterations *= 10;
    EXPECT_FALSE(pnotq_failure_demo(2, 2, big).verdict.violated());
}

TEST(Rescaling, FaceProbeSameExtremePoint)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const Matrix e = Matrix::Identity(2, 2);
    Matrix c2(2, 2);
    c2 << 0.3, 0.1, 0.0, 0.6;
    MetricBudget quick;
    quick.restarts = 0;
    const auto r = face_relation_probe(b, geometric_approach(e, 0.5 * e, 10), geometric_approach(e, c2, 10), e, e, 2, quick);
    EXPECT_EQ(r.verdict, FaceProbeResult::Verdict::BoundedAdjacent);
}

TEST(Rescaling, FaceProbeAntipodal)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const Matrix e = Matrix::Identity(2, 2);
    const Matrix z = Matrix::Zero(2, 2);
    MetricBudget quick;
    quick.restarts = 0;
    const auto r = face_relation_probe(b, geometric_approach(e, z, 10), geometric_approach(-e, z, 10), e, -e, 2, quick);
    EXPECT_EQ(r.verdict, FaceProbeResult::Verdict::Unbounded);
}

TEST(Rescaling, FaceProbeSharedFace)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const Matrix x = diag2(1, 0.2), y = diag2(1, 0.6);
    const Matrix cx = diag2(0.5, 0.2), cy = diag2(0.5, 0.6);
    MetricBudget quick;
    quick.restarts = 0;
    const auto r = face_relation_probe(b, geometric_approach(x, cx, 10), geometric_approach(y, cy, 10), x, y, 2, quick);
    EXPECT_EQ(r.verdict, FaceProbeResult::Verdict::BoundedAdjacent);
    EXPECT_EQ(r.reach_steps, 1);
}

TEST(Rescaling, DefaultProbesAreInside)
{
    const BodyPtr b = operator_ball(ChartShape(2, 2));
    const auto probes = default_probe_pairs(*b, Matrix::Zero(2, 2));
    EXPECT_EQ(probes.size(), 8u);
    for (const auto& [x, y] : probes) {
        EXPECT_TRUE(b->contains(x));
        EXPECT_TRUE(b->contains(y));
    }
}
