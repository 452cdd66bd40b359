#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flexbid/common.hpp"
#include "flexbid/lp.hpp"

using namespace flexbid;

TEST(Date, ParsesAndFormatsIso) {
  Date d = Date::parse("2024-10-07");
  EXPECT_EQ(d.iso(), "2024-10-07");
  EXPECT_EQ(d, Date(2024, 10, 7));
  EXPECT_EQ((d + 25).iso(), "2024-11-01");
  EXPECT_EQ(Date(2024, 11, 1) - d, 25);
}

TEST(Date, Weekdays) {
  EXPECT_EQ(Date(2024, 10, 7).weekday(), 1u);  // Monday
  EXPECT_TRUE(Date(2024, 10, 5).is_weekend());
  EXPECT_TRUE(Date(2024, 10, 6).is_weekend());
  EXPECT_FALSE(Date(2024, 10, 4).is_weekend());
}

TEST(Date, RejectsMalformed) {
  for (const char* s : {"2024-1-07", "2024/10/07", "2024-02-30", "", "abcd-ef-gh"}) {
    try {
      Date::parse(s);
      FAIL() << s;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
}

TEST(FormatDouble, RoundTripsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = u(rng);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Stats, PopulationStddev) {
  std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(stddev(v), 2.0);
  EXPECT_DOUBLE_EQ(stddev(std::vector<double>(5, 3.0)), 0.0);
}

TEST(Lp, SolvesSmallProgram) {
  // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  -> (1.6, 1.2)
  lp::Model m;
  int x = m.add_variable(0, lp::inf, -1);
  int y = m.add_variable(0, lp::inf, -1);
  m.add_row(-lp::inf, 4, {{x, 1}, {y, 2}});
  m.add_row(-lp::inf, 6, {{x, 3}, {y, 1}});
  auto s = m.solve();
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x[x], 1.6, 1e-9);
  EXPECT_NEAR(s.x[y], 1.2, 1e-9);
  EXPECT_NEAR(s.objective, -2.8, 1e-9);
}

TEST(Lp, ReportsInfeasible) {
  lp::Model m;
  int x = m.add_variable(0, 1, 1);
  m.add_equality(2, {{x, 1}});
  EXPECT_EQ(m.solve().status, lp::Status::Infeasible);
}

TEST(Lp, SolvesKnapsackMip) {
  // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5 over binaries: a = b = 1 gives 9
  lp::Model m;
  int a = m.add_variable(0, 1, -5, true);
  int b = m.add_variable(0, 1, -4, true);
  int c = m.add_variable(0, 1, -3, true);
  m.add_row(-lp::inf, 5, {{a, 2}, {b, 3}, {c, 1}});
  auto s = m.solve();
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, -9.0, 1e-9);
}
