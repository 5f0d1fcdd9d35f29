#include <gtest/gtest.h>

#include <cmath>

#include "qlga/complexity.hpp"
#include "qlga/state.hpp"

using namespace qlga;

TEST(Variables, SmallExactValues) {
  EXPECT_EQ(*count_variables(2, 2, 2).exact_ops, 6u);
  EXPECT_EQ(*count_variables(3, 2, 0).exact_ops, 1u);
  EXPECT_THROW(count_variables(2, 2, 5), InvalidArgument);
}

TEST(Variables, LargeLatticeApproximation) {
  const auto r = count_variables(20 * 20 * 20, 6, 100);
  ASSERT_TRUE(r.log10_approximation.has_value());
  EXPECT_NEAR(*r.log10_approximation, 310.0, 1.0);
  EXPECT_FALSE(r.exact_ops.has_value());
  EXPECT_TRUE(std::isfinite(r.log10_ops));
}

TEST(Variables, ExactAndLogGammaAgree) {
  for (std::uint64_t lm = 1; lm <= 60; ++lm) {
    for (std::uint64_t n = 0; n <= lm; ++n) {
      const auto r = count_variables(lm, 1, n);
      ASSERT_TRUE(r.exact_ops.has_value());
      const double lg = (std::lgamma(lm + 1.0) - std::lgamma(n + 1.0) - std::lgamma(lm - n + 1.0)) / std::log(10.0);
      const double exact = std::log10(static_cast<double>(*r.exact_ops));
      EXPECT_NEAR(exact, lg, 1e-9 * std::max(1.0, std::abs(lg))) << lm << " " << n;
    }
  }
}

TEST(Classical, WorkedValues) {
  EXPECT_NEAR(t_classical(20, 3, 100).log10_ops, 312.0, 1.0);
  EXPECT_EQ(*t_classical(7, 2, 0).exact_ops, 49u);
  EXPECT_EQ(*t_classical(10, 1, 1).exact_ops, 2000u);
  EXPECT_FALSE(t_classical(20, 3, 100).exact_ops.has_value());
  EXPECT_THROW(t_classical(0, 1, 1), InvalidArgument);
}

TEST(Quantum, WorkedValues) {
  EXPECT_EQ(*t_quantum(20, 3).exact_ops, 19'200'000u);
  EXPECT_EQ(*t_quantum(1, 3).exact_ops, 6u);
  EXPECT_EQ(*t_quantum(2, 1).exact_ops, 16u);
  const auto pw = t_quantum_pairwise(20, 3);
  EXPECT_EQ(*pw.exact_ops, 921'600'000'000u);
  EXPECT_NEAR(pw.log10_ops, 11.965, 0.05);
  EXPECT_EQ(*t_quantum_pairwise(1, 2).exact_ops, 16u);
  EXPECT_EQ(*t_quantum_pairwise(2, 2).exact_ops, 1024u);
}

TEST(Quantum, PairwiseNeverCheaper) {
  for (long long q = 2; q <= 40; ++q)
    for (long long d = 1; d <= 4; ++d) EXPECT_LE(t_quantum(q, d).log10_ops, t_quantum_pairwise(q, d).log10_ops);
}

TEST(Estimates, ExactAndLogFormsConsistent) {
  for (long long q : {2, 5, 20})
    for (long long d : {1, 2, 3})
      for (const auto& r : {t_quantum(q, d), t_quantum_pairwise(q, d), t_classical(q, d, 2)})
        if (r.exact_ops) {
          EXPECT_NEAR(r.log10_ops, std::log10(static_cast<double>(*r.exact_ops)), 1e-9);
        }
}
