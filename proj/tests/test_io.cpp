#include "grhilbert/io.hpp"

#include <gtest/gtest.h>

using namespace grh;

TEST(Io, FormatNumberRoundTrips)
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::log(3.0)}) EXPECT_EQ(std::stod(format_number(v)), v);
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(kInf), "inf");
    EXPECT_EQ(format_number(-kInf), "-inf");
    EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Io, NonFiniteBecomesString)
{
    EXPECT_TRUE(number_json(kInf).is_string());
    EXPECT_TRUE(number_json(1.5).is_number());
}

TEST(Io, DumpIsStable)
{
    Json j;
    j["b"] = 1;
    j["a"] = Json::array({1.0, 2.5});
    j["m"] = matrix_json(Matrix::Identity(2, 2));
    j["s"] = "q\"x";
    const std::string a = dump_json(j), b = dump_json(j);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.back(), '\n');
    EXPECT_LT(a.find("\"b\""), a.find("\"a\""));
    EXPECT_NE(a.find("[1, 2.5]"), std::string::npos);
    EXPECT_NE(a.find("q\\\"x"), std::string::npos);
    EXPECT_EQ(Json::parse(a)["a"][1].get<double>(), 2.5);
}

TEST(Io, MatrixParsing)
{
    EXPECT_EQ(matrix_from_json(Json(0.5), "x")(0, 0), 0.5);
    const Matrix col = matrix_from_json(Json::parse("[1, 2]"), "x");
    EXPECT_EQ(col.rows(), 2);
    EXPECT_EQ(col.cols(), 1);
    const Matrix m = matrix_from_json(Json::parse("[[1, 2], [3, 4]]"), "x");
    EXPECT_EQ(m(1, 0), 3.0);
    EXPECT_THROW(matrix_from_json(Json::parse("[[1, 2], [3]]"), "x"), DescriptorError);
    EXPECT_THROW(matrix_from_json(Json::parse("[]"), "x"), DescriptorError);
    EXPECT_THROW(matrix_from_json(Json::parse("[[\"a\"]]"), "x"), DescriptorError);
    EXPECT_THROW(chart_matrix_from_json(Json::parse("[[1, 2]]"), ChartShape(2, 2), "x"), DescriptorError);
}

TEST(Io, ParseBodyKinds)
{
    EXPECT_EQ(parse_body(Json::parse(R"({"kind":"operator_ball","p":2,"q":3})"))->shape.q, 3);
    EXPECT_EQ(parse_body(Json::parse(R"({"kind":"half_cone","p":2})"))->kind, BodyKind::HalfCone);
    EXPECT_EQ(parse_body(Json::parse(R"({"kind":"full_chart","p":1,"q":1})"))->kind, BodyKind::FullChart);
    const BodyPtr simplex = parse_body(Json::parse(
        R"({"kind":"polytope","p":1,"q":2,"functionals":[{"a":[-1,0],"b":0},{"a":[0,-1],"b":0},{"a":[1,1],"b":1}],"interior":[0.25,0.25]})"));
    EXPECT_TRUE(simplex->contains(Matrix::Constant(2, 1, 0.3)));
    EXPECT_FALSE(simplex->contains(Matrix::Constant(2, 1, 0.6)));
    EXPECT_TRUE(parse_body(Json::parse(R"({"kind":"dominance_polytope","p":2})"))->contains(0.5 * Matrix::Identity(2, 2)));
    EXPECT_EQ(parse_body(Json::parse(R"({"kind":"random_polytope","p":2,"q":2,"cuts":4,"seed":3})"))->kind, BodyKind::Polytope);
    const BodyPtr img =
        parse_body(Json::parse(R"({"kind":"affine_image","inner":{"kind":"operator_ball","p":1,"q":1},"matrix":[[2]],"offset":1})"));
    EXPECT_TRUE(img->contains(Matrix::Constant(1, 1, 2.5)));
    const BodyPtr tc =
        parse_body(Json::parse(R"({"kind":"tangent_cone","inner":{"kind":"operator_ball","p":2,"q":2},"point":[[1,0],[0,1]]})"));
    EXPECT_EQ(tc->kind, BodyKind::TangentCone);
}

TEST(Io, ParseBodyRejectsBadDescriptors)
{
    EXPECT_THROW(parse_body(Json::parse(R"({"kind":"operator_ball","p":2,"q":2,"extra":1})")), DescriptorError);
    EXPECT_THROW(parse_body(Json::parse(R"({"kind":"pentagon"})")), DescriptorError);
    EXPECT_THROW(parse_body(Json::parse(R"({"p":2})")), DescriptorError);
    EXPECT_THROW(parse_body(Json::parse(R"({"kind":"operator_ball","p":2})")), DescriptorError);
    EXPECT_THROW(parse_body(Json::parse(R"({"kind":"operator_ball","p":2.5,"q":2})")), DescriptorError);
    EXPECT_THROW(parse_body(Json::parse(R"({"kind":"operator_ball","p":0,"q":2})")), DescriptorError);
    EXPECT_THROW(parse_body(Json::parse(R"({"kind":"half_cone","p":2,"q":3})")), DescriptorError);
}

TEST(Io, CsvRows)
{
    EXPECT_EQ(csv_row({"a", "b", "c"}), "a,b,c\n");
    ConvergenceReport r;
    r.parameter_values = {0, 1};
    r.hausdorff_values = {0.5, 0.25};
    const std::string s = convergence_csv(r);
    EXPECT_EQ(s, "parameter,hausdorff,metric_disagreement\n0,0.5,\n1,0.25,\n");
}
