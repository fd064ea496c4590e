#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pxlab/expr.hpp"
#include "pxlab/identity_suite.hpp"

using namespace pxlab::expr;

namespace {

double at(const Expression& e, double x1, double x2, double x3 = 0.0) {
  const double p[3] = {x1, x2, x3};
  return evaluate(e, p);
}

}  // namespace

TEST(Parse, Literal) {
  const Expression e = parse_expression("2", 2);
  double v = 0.0;
  ASSERT_TRUE(e.is_constant(&v));
  EXPECT_EQ(v, 2.0);
}

TEST(Parse, SaddleEvaluates) {
  const Expression e = parse_expression("x1^2 - x2^2", 2);
  EXPECT_EQ(at(e, 1.0, 2.0), -3.0);
}

TEST(Parse, SyntaxErrorOffset) {
  try {
    parse_expression("2 + (p-?)", 2);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(Parse, UnknownIdentifier) { EXPECT_THROW(parse_expression("2 + y", 2), ParseError); }

TEST(Parse, VariableBeyondDimension) {
  EXPECT_THROW(parse_expression("x3", 2), ParseError);
  EXPECT_NO_THROW(parse_expression("x3", 3));
}

TEST(Parse, ArityMismatch) {
  EXPECT_THROW(parse_expression("sin(x1, x2)", 2), ParseError);
  EXPECT_THROW(parse_expression("max(x1)", 2), ParseError);
}

TEST(Parse, EmptySource) { EXPECT_THROW(parse_expression("   ", 2), ParseError); }

TEST(Parse, Precedence) {
  EXPECT_EQ(at(parse_expression("2+3*4^2", 2), 0, 0), 50.0);
  EXPECT_EQ(at(parse_expression("-2^2", 2), 0, 0), -4.0);
  EXPECT_EQ(at(parse_expression("2^-1", 2), 0, 0), 0.5);
  EXPECT_EQ(at(parse_expression("2^3^2", 2), 0, 0), 512.0);
  EXPECT_EQ(at(parse_expression("8/4/2", 2), 0, 0), 1.0);
  EXPECT_EQ(at(parse_expression("8-4-2", 2), 0, 0), 2.0);
}

TEST(Evaluate, Functions) {
  EXPECT_EQ(at(parse_expression("abs(x1)", 2), -4.0, 0.0), 4.0);
  EXPECT_EQ(at(parse_expression("exp(0*x1)", 2), 3.7, -1.2), 1.0);
  EXPECT_EQ(at(parse_expression("min(x1, x2) + max(x1, x2)", 2), 3.0, -1.0), 2.0);
  EXPECT_DOUBLE_EQ(at(parse_expression("sqrt(x1) * log(exp(x2))", 2), 4.0, 1.5), 3.0);
}

TEST(Evaluate, DomainErrors) {
  EXPECT_THROW(at(parse_expression("log(x1)", 2), 0.0, 0.0), DomainError);
  EXPECT_THROW(at(parse_expression("sqrt(x1)", 2), -1.0, 0.0), DomainError);
  EXPECT_THROW(at(parse_expression("1/x2", 2), 1.0, 0.0), DomainError);
  try {
    at(parse_expression("x2 + log(x1 - 1)", 2), 0.5, 0.0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(e.subexpression().find("log"), std::string::npos);
  }
}

TEST(Differentiate, Basic) {
  const Expression e = parse_expression("x1^2 - x2^2", 2);
  const Expression d = differentiate(e, 0);
  for (double x : {-1.0, 0.3, 2.0}) EXPECT_DOUBLE_EQ(at(d, x, 5.0), 2.0 * x);
  EXPECT_EQ(at(differentiate(parse_expression("sin(x1)", 2), 1), 0.4, 0.2), 0.0);
}

TEST(Differentiate, ExpProductAgainstDifferenceQuotient) {
  const Expression e = parse_expression("exp(x1*x2)", 2);
  const double exact = at(differentiate(e, 0), 1.0, 1.0);
  const double h = 1e-6;
  const double fd = (at(e, 1.0 + h, 1.0) - at(e, 1.0 - h, 1.0)) / (2 * h);
  EXPECT_NEAR(exact, std::exp(1.0), 1e-14);
  EXPECT_NEAR(exact, fd, 1e-8);
}

TEST(Differentiate, RejectsNonSmooth) {
  EXPECT_THROW(differentiate(parse_expression("x2 + abs(x1)", 2), 1), NotDifferentiable);
  EXPECT_THROW(differentiate(parse_expression("max(x1, 1)", 2), 0), NotDifferentiable);
}

TEST(Differentiate, SimplifiesTrivialPatterns) {
  const Expression d = differentiate(parse_expression("3*x2", 2), 0);
  double v = -1.0;
  ASSERT_TRUE(d.is_constant(&v));
  EXPECT_EQ(v, 0.0);
}

TEST(Differentiate, VariableExponent) {
  const Expression e = parse_expression("x1^x2", 2);
  const double h = 1e-6;
  const double fd = (at(e, 1.3, 2.0 + h) - at(e, 1.3, 2.0 - h)) / (2 * h);
  EXPECT_NEAR(at(differentiate(e, 1), 1.3, 2.0), fd, 1e-8);
}

TEST(Property, RandomPolynomialDerivatives) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const int n = k % 2 == 0 ? 2 : 3;
    const Expression e = pxlab::theory::random_polynomial(rng, n, 4);
    const double x[3] = {u(rng), u(rng), n == 3 ? u(rng) : 0.0};
    for (int i = 0; i < n; ++i) {
      const double h = 1e-5;
      double xp[3] = {x[0], x[1], x[2]};
      double xm[3] = {x[0], x[1], x[2]};
      xp[i] += h;
      xm[i] -= h;
      const double fd = (evaluate(e, xp) - evaluate(e, xm)) / (2 * h);
      const double d = evaluate(differentiate(e, i), x);
      ASSERT_LE(std::abs(d - fd), 1e-6 * (1.0 + std::abs(d))) << to_string(e);
    }
  }
}

TEST(Property, PrintParseRoundTrip) {
  const char* sources[] = {"x1^2 - x2^2",          "-2^2 + x1",          "2 + 0.5*sin(x1)",
                           "exp(x1)*cos(x2)",      "(x1 - x2)/(1 + x1^2)", "-(x1 - (x2 - 3))",
                           "max(x1, -x2)^3",       "2^-x1",               "x1/(x2*x1)",
                           "sqrt(abs(x1)) - -x2"};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (const char* s : sources) {
    const Expression e = parse_expression(s, 2);
    const Expression r = parse_expression(to_string(e), 2);
    for (int k = 0; k < 20; ++k) {
      const double x1 = u(rng);
      const double x2 = u(rng);
      EXPECT_EQ(at(e, x1, x2), at(r, x1, x2)) << s << " printed as " << to_string(e);
    }
  }
}

TEST(Property, ParsingIsDeterministic) {
  const Expression a = parse_expression("x1*x2 + sin(x1)^2", 2);
  const Expression b = parse_expression("x1*x2 + sin(x1)^2", 2);
  EXPECT_EQ(to_string(a), to_string(b));
}

TEST(Builders, FoldConstants) {
  const Expression two = Expression::constant(2.0, 2);
  const Expression x = Expression::variable(0, 2);
  double v = 0.0;
  ASSERT_TRUE((two * two + two).is_constant(&v));
  EXPECT_EQ(v, 6.0);
  EXPECT_EQ(to_string(x * Expression::constant(1.0, 2) + Expression::constant(0.0, 2)), to_string(x));
}
