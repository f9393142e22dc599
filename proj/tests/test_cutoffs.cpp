#include <gtest/gtest.h>

#include <random>

#include "freechan/cutoffs.hpp"
#include "test_util.hpp"

using namespace freechan;

TEST(Chi, SupportEndpoints) {
  EXPECT_EQ(chi_eval(0.4), 0.0);
  EXPECT_EQ(chi_eval(0.5), 0.0);
  EXPECT_EQ(chi_eval(1.2), 1.0);
  EXPECT_EQ(chi_eval(1.0), 1.0);
  EXPECT_GT(chi_eval(0.75), 0.0);
  EXPECT_LT(chi_eval(0.75), 1.0);
  EXPECT_NEAR(chi_eval(0.75), 0.5, 1e-15);
  EXPECT_EQ(chi_prime(0.3), 0.0);
  EXPECT_EQ(chi_prime(1.3), 0.0);
}

TEST(Chi, DerivativeMatchesFiniteDifference) {
  const double h = 2e-4;
  for (double k = 0.3; k < 1.2; k += 0.0137) {
    // five-point stencil, truncation O(h^4)
    const double fd = (-chi_eval(k + 2 * h) + 8 * chi_eval(k + h) - 8 * chi_eval(k - h) + chi_eval(k - 2 * h)) / (12 * h);
    EXPECT_NEAR(chi_prime(k), fd, 1e-9 * std::max(1.0, fd)) << k;
    EXPECT_GE(chi_prime(k), 0.0);
  }
}

TEST(Chi, Monotone) {
  double prev = 0;
  for (double k = 0; k < 1.5; k += 1e-3) {
    const double v = chi_eval(k);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Chi, DerivativeIntegratesToOne) {
  // composite Simpson on [1/2, 1]
  const int n = 20000;
  const double h = 0.5 / n;
  double s = chi_prime(0.5) + chi_prime(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * chi_prime(0.5 + i * h);
  EXPECT_NEAR(s * h / 3, 1.0, 1e-8);
}

TEST(CutoffField, ValuesAndComplements) {
  const Grid g = make_grid(2, 64, 8.0);
  const double t = 5.0, alpha = 0.5;
  const auto fc = cutoff_field(g, CutoffSpec::scaled(CutoffKind::Fc_leq, alpha), t);
  const auto fcb = cutoff_field(g, CutoffSpec::scaled(CutoffKind::Fc_bar_gt, alpha), t);
  const double a = std::pow(t, alpha);
  for_each_position(g, [&](std::size_t i, const Point& x) {
    EXPECT_EQ(fc[i] + fcb[i], 1.0);
    const double r = std::hypot(x[0], x[1]);
    if (r <= a / 2) { EXPECT_EQ(fc[i], 1.0); }
    if (r >= a) { EXPECT_EQ(fc[i], 0.0); }
    EXPECT_GE(fc[i], 0.0);
    EXPECT_LE(fc[i], 1.0);
  });
  // x = 0 sample
  const Grid g1 = make_grid(1, 64, 8.0);
  EXPECT_EQ(cutoff_field(g1, CutoffSpec::scaled(CutoffKind::Fc_leq, alpha), t)[32], 1.0);

  const double b = 0.3;
  const auto f1 = cutoff_field(g, CutoffSpec::scaled(CutoffKind::F1_gt, -b), t);
  const auto f1b = cutoff_field(g, CutoffSpec::scaled(CutoffKind::F1_bar_leq, -b), t);
  for_each_frequency(g, [&](std::size_t i, const Point& k) {
    EXPECT_EQ(f1[i] + f1b[i], 1.0);
    if (std::hypot(k[0], k[1]) >= std::pow(t, -b)) { EXPECT_EQ(f1[i], 1.0); }
  });

  const auto f2 = cutoff_field(g, CutoffSpec::fixed(CutoffKind::F2_gt_halfspace, 2.0, 1, -1), 1.0);
  const auto f2b = cutoff_field(g, CutoffSpec::fixed(CutoffKind::F2_bar_leq_halfspace, 2.0, 1, -1), 1.0);
  for_each_position(g, [&](std::size_t i, const Point& x) {
    EXPECT_EQ(f2[i] + f2b[i], 1.0);
    EXPECT_EQ(f2[i], chi_eval(-x[1] / 2.0));
  });
  EXPECT_THROW(cutoff_field(g, CutoffSpec::fixed(CutoffKind::Fc_leq, 0.0), 1.0), DomainError);
  EXPECT_THROW(cutoff_field(g, CutoffSpec::fixed(CutoffKind::F2_gt_halfspace, 1.0, 2), 1.0), UsageError);
}

TEST(CutoffField, TimeMonotone) {
  const Grid g = make_grid(1, 256, 20.0);
  const auto spec = CutoffSpec::scaled(CutoffKind::Fc_leq, 0.7);
  auto prev = cutoff_field(g, spec, 1.0);
  for (double t = 1.1; t < 40; t *= 1.1) {
    const auto cur = cutoff_field(g, spec, t);
    for (std::size_t i = 0; i < cur.size(); ++i) EXPECT_GE(cur[i], prev[i]);
    prev = cur;
  }
}

TEST(CutoffDerivative, FiniteDifferenceAndSign) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 50.0);
  for (int trial = 0; trial < 6; ++trial) {
    const Grid g = make_grid(1 + trial % 2, trial % 2 ? 64 : 512, 12.0);
    const double t = u(rng);
    const double h = 1e-4 * t;
    for (const auto& spec : {CutoffSpec::scaled(CutoffKind::Fc_leq, 0.4), CutoffSpec::scaled(CutoffKind::F1_gt, -0.2),
                             CutoffSpec::scaled(CutoffKind::Fc_bar_gt, 0.6)}) {
      const auto d = cutoff_time_derivative_field(g, spec, t);
      const auto fp2 = cutoff_field(g, spec, t + 2 * h);
      const auto fp = cutoff_field(g, spec, t + h);
      const auto fm = cutoff_field(g, spec, t - h);
      const auto fm2 = cutoff_field(g, spec, t - 2 * h);
      double scale = 0;
      for (double v : d) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double fd = (-fp2[i] + 8 * fp[i] - 8 * fm[i] + fm2[i]) / (12 * h);
        EXPECT_NEAR(d[i], fd, 1e-7 * scale + 1e-13);
        if (spec.kind != CutoffKind::Fc_bar_gt) { EXPECT_GE(d[i], 0.0); }
      }
    }
  }
}

TEST(CutoffDerivative, AnnulusSupport) {
  const Grid g = make_grid(1, 512, 20.0);
  const double t = 9.0, alpha = 0.5;
  const auto d = cutoff_time_derivative_field(g, CutoffSpec::scaled(CutoffKind::Fc_leq, alpha), t);
  const double a = std::pow(t, alpha);
  for_each_position(g, [&](std::size_t i, const Point& x) {
    if (std::abs(x[0]) <= a / 2 || std::abs(x[0]) >= a) { EXPECT_EQ(d[i], 0.0); }
  });
  EXPECT_THROW(cutoff_time_derivative_field(g, CutoffSpec::fixed(CutoffKind::Fc_leq, 2.0), t), UsageError);
}
