#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gnbfit/distributions.hpp"
#include "support/oracles.hpp"

using namespace gnbfit;
namespace oracle = gnbfit::testing;

TEST(Params, ValidateAtConstruction) {
  EXPECT_THROW(GammaParams(0.0, 1.0), DomainError);
  EXPECT_THROW(GammaParams(1.0, -1.0), DomainError);
  EXPECT_THROW(GGParams(1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(GGParams(1.0, 5e-4, 1.0), DomainError);
  EXPECT_NO_THROW(GGParams(1.0, -1e-3, 1.0));
  EXPECT_THROW(NBParams(1.0, 1.0), DomainError);
  EXPECT_THROW(NBParams(1.0, 0.0), DomainError);
}

TEST(GammaPdf, Examples) {
  EXPECT_NEAR(gamma_pdf(1.0, {1.0, 1.0}), std::exp(-1.0), 1e-15);
  EXPECT_EQ(gamma_pdf(0.0, {2.0, 3.0}), 0.0);
  EXPECT_NEAR(gamma_pdf(2.0, {2.0, 1.0}), 2.0 * std::exp(-2.0), 1e-15);
}

TEST(GammaPdf, SingularityAtZeroIsInfinite) {
  EXPECT_TRUE(std::isinf(gamma_pdf(0.0, {0.5, 1.0})));
  EXPECT_NEAR(gamma_pdf(0.0, {1.0, 3.0}), 3.0, 1e-15);
  EXPECT_THROW(gamma_pdf(-1.0, {1.0, 1.0}), DomainError);
}

TEST(GGPdf, Examples) {
  EXPECT_NEAR(gg_pdf(1.0, {1.0, 2.0, 1.0}), 2.0 * std::exp(-1.0), 1e-15);
  // |−1|·1²/Γ(2)·x^{−3}·e^{−1/x} at x = 1
  EXPECT_NEAR(gg_pdf(1.0, {2.0, -1.0, 1.0}), std::exp(-1.0), 1e-15);
  EXPECT_EQ(gg_pdf(0.0, {2.0, -1.0, 1.0}), 0.0);
  EXPECT_TRUE(std::isinf(gg_pdf(0.0, {0.5, 1.5, 1.0})));
}

TEST(GGPdf, LogPdfMatchesPdf) {
  const GGParams p(2.5, -0.7, 1.3);
  for (double x : {0.01, 0.3, 1.0, 4.0, 40.0}) {
    EXPECT_NEAR(std::exp(gg_log_pdf(x, p)), gg_pdf(x, p), 1e-15 * std::max(1.0, gg_pdf(x, p)));
  }
  // Far tails stay finite in log form where the density underflows.
  EXPECT_TRUE(std::isfinite(gg_log_pdf(1e-300, GGParams(5.0, 3.0, 1.0))));
}

TEST(GGPdf, ReducesToGammaBitwiseAtUnitExponent) {
  for (double r : {0.5, 1.0, 2.0, 5.0}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      for (double x = 0.0; x < 20.0; x += 0.0731) {
        EXPECT_EQ(gg_pdf(x, {r, 1.0, mu}), gamma_pdf(x, {r, mu}));
      }
    }
  }
}

TEST(GGPowerIdentity, Examples) {
  const std::vector<double> probes = {0.5, 1.0, 2.0};
  EXPECT_EQ(gg_power_identity_check({2.0, 1.0, 1.0}, probes), 0.0);
  EXPECT_LE(gg_power_identity_check({2.0, 3.0, 1.0}, probes), 1e-12);
  EXPECT_LE(gg_power_identity_check({1.0, -2.0, 2.0}, probes), 1e-12);
  EXPECT_THROW(gg_power_identity_check({1.0, 2.0, 1.0}, std::vector<double>{0.0}), DomainError);
}

TEST(GGPdf, NormalizesOnGrid) {
  for (double r : {0.5, 1.0, 2.0, 5.0}) {
    for (double g : {-2.0, -1.0, -0.5, 0.5, 1.0, 3.0}) {
      for (double mu : {0.5, 1.0, 2.0}) {
        const GGParams p(r, g, mu);
        // Integrate in log form to absorb the power singularity when γr < 1.
        const auto res = log_integrate_semiinfinite([&](double x) { return gg_log_pdf(x, p); });
        EXPECT_NEAR(std::exp(res.log_value), 1.0, 1e-8) << r << " " << g << " " << mu;
      }
    }
  }
}

TEST(NBPmf, Examples) {
  EXPECT_NEAR(nb_pmf(0, {1.0, 0.5}), 0.5, 1e-15);
  EXPECT_NEAR(nb_pmf(2, {1.0, 0.5}), 0.125, 1e-15);
  EXPECT_NEAR(nb_pmf(1, {2.0, 0.25}), 0.09375, 1e-15);
}

TEST(NBPmf, MatchesClosedFormOracle) {
  for (double r : {0.3, 1.0, 7.5}) {
    for (double p : {0.1, 0.5, 0.9}) {
      for (std::uint64_t k = 0; k < 60; ++k) {
        const double ref = oracle::nb_pmf_closed_form(k, r, p);
        EXPECT_NEAR(nb_pmf(k, {r, p}), ref, 1e-13 * std::max(ref, 1e-300));
      }
    }
  }
}

TEST(GnbPmf, Examples) {
  EXPECT_NEAR(gnb_pmf(0, {2.0, 1.0, 1.0}), 0.25, 1e-15);
  EXPECT_NEAR(gnb_pmf(0, {2.0, 1.0, 1.0}, PmfRoute::quadrature), 0.25, 1e-10);
  // k = 0, r = 1, γ = 2, μ = 1 is ∫ e^{−√t} e^{−t} dt = ∫ 2u e^{−u−u²} du.
  const double brute = oracle::trapezoid(
      [](double u) { return 2.0 * u * std::exp(-u - u * u); }, 40.0, 4000000);
  EXPECT_NEAR(gnb_pmf(0, {1.0, 2.0, 1.0}), brute, 1e-9);
  EXPECT_NEAR(gnb_pmf(0, {1.0, 2.0, 1.0}), 0.4543586392349529579, 1e-13);
}

TEST(GnbPmf, QuadratureRouteReducesToNB) {
  for (double r : {0.5, 1.0, 2.0, 5.0}) {
    for (double mu : {0.5, 1.0, 2.0, 5.0}) {
      const auto probs = gnb_pmf_batch(100, {r, 1.0, mu}, PmfRoute::quadrature);
      for (std::uint64_t k = 0; k <= 100; ++k) {
        EXPECT_NEAR(probs[k], oracle::nb_pmf_closed_form(k, r, mu / (1.0 + mu)), 1e-8);
      }
    }
  }
}

TEST(GnbPmf, MatchesTrapezoidOracle) {
  struct Case {
    double r, g, mu;
  };
  for (const Case& c : {Case{2.0, 1.5, 1.0}, Case{0.5, 2.0, 1.0}, Case{2.0, 0.5, 2.0},
                        Case{2.0, -1.0, 1.0}, Case{1.0, -0.5, 0.5}, Case{5.0, 3.0, 2.0}}) {
    const auto probs = gnb_pmf_batch(30, {c.r, c.g, c.mu});
    for (std::uint64_t k : {0, 1, 2, 5, 10, 20, 30}) {
      const double ref = oracle::gnb_pmf_trapezoid(k, c.r, c.g, c.mu);
      EXPECT_NEAR(probs[k], ref, 1e-9 * ref + 1e-15)
          << "k=" << k << " r=" << c.r << " g=" << c.g << " mu=" << c.mu;
    }
  }
}

TEST(GnbPmf, BatchMatchesSingleEvaluations) {
  const GGParams p(1.5, 0.8, 0.7);
  const auto batch = gnb_pmf_batch(40, p);
  for (std::uint64_t k = 0; k <= 40; k += 7) {
    EXPECT_NEAR(batch[k], gnb_pmf(k, p), 1e-10 * batch[k]);
  }
}

TEST(GnbPmf, LogPmfFiniteAtLargeK) {
  const GGParams p(2.0, 1.5, 1.0);
  const double lp = gnb_log_pmf(400, p);
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_LT(lp, -300.0);  // far below double's smallest normal
}

TEST(GnbPmf, NormalizesOnGrid) {
  for (double r : {0.5, 1.0, 2.0, 5.0}) {
    for (double g : {-2.0, -1.0, -0.5, 0.5, 1.0, 3.0}) {
      for (double mu : {0.5, 1.0, 2.0}) {
        const GGParams p(r, g, mu);
        const auto t = gnb_truncation_point(p);
        if (t.capped) continue;  // heavy tails; covered by the acceptance suite
        EXPECT_GE(t.mass, 1.0 - 1e-6) << r << " " << g << " " << mu;
        EXPECT_LE(t.mass, 1.0 + 1e-8);
      }
    }
  }
}

TEST(GnbPmf, TruncationPointIsSmallest) {
  const GGParams p(2.0, 1.5, 1.0);
  const auto t = gnb_truncation_point(p, 0.999);
  const auto probs = gnb_pmf_batch(t.k_max, p);
  double below = 0.0;
  for (std::uint64_t k = 0; k < t.k_max; ++k) below += probs[k];
  EXPECT_LT(below, 0.999);
  EXPECT_GE(below + probs[t.k_max], 0.999);
  EXPECT_FALSE(t.capped);
}

TEST(GnbRecurrence, Examples) {
  EXPECT_NEAR(gnb_recurrence_residual(0, {1.0, 1.0, 1.0}), 0.0, 1e-10);
  EXPECT_NEAR(gnb_recurrence_residual(0, {1.0, 1.0, 1.0}, PmfRoute::quadrature), 0.0, 1e-10);
  EXPECT_LE(std::abs(gnb_recurrence_residual(3, {0.5, 2.0, 1.0})), 1e-6);
  EXPECT_LE(std::abs(gnb_recurrence_residual(10, {2.0, 0.5, 2.0})), 1e-6);
}

TEST(GnbRecurrence, OracleAgreesOnTheIdentity) {
  // Same identity, all three pmfs from the trapezoid oracle.
  auto residual = [](std::uint64_t k, double r, double g, double mu) {
    const double kd = static_cast<double>(k);
    return oracle::gnb_pmf_trapezoid(k + 1, r, g, mu) -
           ((g * r + kd) / (kd + 1.0) * oracle::gnb_pmf_trapezoid(k, r, g, mu) -
            g * r / (kd + 1.0) * oracle::gnb_pmf_trapezoid(k, r + 1.0, g, mu));
  };
  EXPECT_LE(std::abs(residual(3, 0.5, 2.0, 1.0)), 1e-10);
  EXPECT_LE(std::abs(residual(10, 2.0, 0.5, 2.0)), 1e-10);
}

TEST(GnbRecurrence, CoefficientIsGammaTimesShape) {
  // With |γ|μ in place of γr the identity breaks as soon as μ differs from r.
  const GGParams p(2.0, 1.0, 0.5);
  const double p0 = gnb_pmf(0, p), p1 = gnb_pmf(1, p);
  const double shifted = gnb_pmf(0, GGParams(3.0, 1.0, 0.5));
  EXPECT_GT(std::abs(p1 - (2.0 * p0 - 0.5 * shifted)), 1e-2);
  EXPECT_LE(std::abs(gnb_recurrence_residual(0, p)), 1e-12);
}

TEST(GnbRecurrence, HoldsForNegativeExponent) {
  for (double g : {-0.5, -1.0, -2.0}) {
    for (std::uint64_t k = 0; k <= 10; ++k) {
      EXPECT_LE(std::abs(gnb_recurrence_residual(k, {2.0, g, 1.0})), 1e-6) << g << " " << k;
    }
  }
}

TEST(GGMean, MatchesQuadrature) {
  for (auto [r, g, mu] : {std::tuple{1.0, 2.0, 1.0}, std::tuple{2.0, -1.0, 1.0},
                          std::tuple{3.0, 0.7, 2.0}}) {
    const GGParams p(r, g, mu);
    const auto m = log_integrate_semiinfinite(
        [&](double x) { return std::log(x) + gg_log_pdf(x, p); });
    EXPECT_NEAR(gg_mean(p), std::exp(m.log_value), 1e-9);
    EXPECT_NEAR(gg_mean(p), oracle::gg_mean_formula(r, g, mu), 1e-12);
  }
  EXPECT_TRUE(std::isinf(gg_mean({0.5, -1.0, 1.0})));
}

// Reference values from 40-digit quadrature.
TEST(LargeShape, LogDensitiesMatchReference) {
  EXPECT_NEAR(gg_log_pdf(0.5, GGParams(50.0, -0.7, 3.0)), -69.91202033485752, 1e-12);
  EXPECT_NEAR(gamma_log_pdf(10.0, GammaParams(20.0, 1.0)), -5.590767420312626, 1e-13);
  EXPECT_NEAR(gg_log_pdf(0.611, GGParams(2.09768e6, 0.00245107, 2.09978e6)), 0.7957500490515486,
              1e-12);
}

TEST(LargeShape, GnbPmfMatchesReference) {
  EXPECT_NEAR(gnb_pmf(0, GGParams(2692.0, 0.0657156, 2685.0)), 0.3551828433605485, 1e-12);
  // Either side of the switch to the centred form.
  EXPECT_NEAR(gnb_pmf(2, GGParams(9.99, 0.3, 2.0)), 0.00047342507314184786, 1e-16);
  EXPECT_NEAR(gnb_pmf(2, GGParams(10.01, 0.3, 2.0)), 0.00046247298190266634, 1e-16);
}

TEST(LargeShape, SmallGammaPeaksAreFound) {
  // Unguarded Newton crawls in steps of ~γ here and lands off the peak for k >= 2.
  const GGParams p(1.97531e6, 0.00242592, 1.9736e6);
  const auto probs = gnb_pmf_batch(8, p);
  EXPECT_NEAR(probs[0], 0.24575649719517522, 1e-12);
  double sum = 0.0;
  for (double v : probs) sum += v;
  EXPECT_GT(sum, 0.99);
  EXPECT_LE(sum, 1.0);
}
