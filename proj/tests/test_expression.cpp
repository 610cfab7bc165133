#include "mpoc/common.hpp"
#include "mpoc/expression.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using mpoc::Expression;

namespace {

double ev(const std::string& text, double x = 0, double y = 0, double s = 0) {
  return Expression::parse(text, {"x", "y", "s"})({x, y, s});
}

}  // namespace

TEST(Expression, Precedence) {
  EXPECT_DOUBLE_EQ(ev("1 + 2*3"), 7.0);
  EXPECT_DOUBLE_EQ(ev("(1 + 2)*3"), 9.0);
  EXPECT_DOUBLE_EQ(ev("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(ev("-2^2"), -4.0);
  EXPECT_DOUBLE_EQ(ev("8/4/2"), 1.0);
  EXPECT_DOUBLE_EQ(ev("1 - 2 - 3"), -4.0);
}

TEST(Expression, VariablesAndFunctions) {
  EXPECT_DOUBLE_EQ(ev("x*y + s", 2, 3, 4), 10.0);
  EXPECT_NEAR(ev("sin(pi*x)*cos(y)", 0.5, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(ev("exp(log(3))"), 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(ev("sqrt(abs(-16))"), 4.0);
  EXPECT_NEAR(ev("e"), std::numbers::e, 0.0);
  EXPECT_DOUBLE_EQ(ev("1.5e-1*2"), 0.3);
  EXPECT_DOUBLE_EQ(ev("-4*s*(1-s)", 0, 0, 0.5), -1.0);
}

TEST(Expression, ConstantFolding) {
  EXPECT_TRUE(Expression::parse("2*pi + sin(0)", {}).is_constant());
  EXPECT_FALSE(Expression::parse("2*x", {"x"}).is_constant());
  EXPECT_TRUE(Expression().is_constant());
}

TEST(Expression, Errors) {
  for (const char* bad : {"", "1 +", "(1", "foo", "sin 1", "1 2", "x $ 1", "2*)"})
    EXPECT_THROW(Expression::parse(bad, {"x"}), mpoc::InputError) << bad;
  try {
    Expression::parse("x + z", {"x"});
    FAIL();
  } catch (const mpoc::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown name 'z'"), std::string::npos);
  }
}
