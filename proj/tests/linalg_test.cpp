#include <gtest/gtest.h>

#include "algcalc/linalg.hpp"
#include "oracles.hpp"

using namespace algcalc;

TEST(Linalg, InverseOfDoubles) {
  const std::vector<double> a = {4, 1, 0, 1, 3, 1, 0, 1, 2};
  std::vector<double> inv;
  ASSERT_TRUE(try_invert(a, 3, inv));
  EXPECT_LT(max_abs_identity_defect(matmul(a, inv, 3), 3), 1e-15);
  const auto ref = oracle::invert(a, 3);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(inv[i], ref[i], 1e-15);
  EXPECT_FALSE(try_invert(std::vector<double>{1, 2, 2, 4}, 2, inv));
}

TEST(Linalg, InverseOfJetsDifferentiates) {
  // d/dt (A + tB)^-1 = -A^-1 B A^-1
  const double A[4] = {2, 1, 1, 3}, B[4] = {0.5, -1, 0.25, 2};
  std::vector<Jet> m;
  for (int i = 0; i < 4; ++i) m.push_back(A[i] + B[i] * Jet::variable(1, 1, 0, 0.0));
  std::vector<Jet> inv;
  ASSERT_TRUE(try_invert(m, 2, inv));
  const auto ai = oracle::invert({A[0], A[1], A[2], A[3]}, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) s -= ai[i * 2 + k] * B[k * 2 + l] * ai[l * 2 + j];
      EXPECT_NEAR(inv[i * 2 + j].d(0), s, 1e-14);
    }
}

TEST(Linalg, InertiaAndDefiniteness) {
  EXPECT_TRUE(positive_definite({2, 1, 1, 2}, 2));
  EXPECT_FALSE(positive_definite({1, 2, 2, 1}, 2));
  const Inertia in = inertia({0, 1, 1, 0}, 2);  // needs the 2x2 pivot
  EXPECT_EQ(in.positive, 1);
  EXPECT_EQ(in.negative, 1);
  EXPECT_EQ(in.zero, 0);
  const Inertia d = inertia({1, 0, 0, 0, -1, 0, 0, 0, 0}, 3);
  EXPECT_EQ(d.positive, 1);
  EXPECT_EQ(d.negative, 1);
  EXPECT_EQ(d.zero, 1);
}

TEST(Linalg, NumericRank) {
  EXPECT_EQ(numeric_rank({1, 0, 0, 1}, 2, 2), 2);
  EXPECT_EQ(numeric_rank({1, 2, 2, 4}, 2, 2), 1);
  EXPECT_EQ(numeric_rank({0, 0, 0, 0}, 2, 2), 0);
  EXPECT_EQ(numeric_rank({1, 2, 3, 2, 4, 6.0000001}, 2, 3), 2);
}
