#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gnbfit/histogram.hpp"
#include "gnbfit/sampling.hpp"

using namespace gnbfit;

namespace {

double area(const Histogram& h) {
  double a = 0.0;
  for (std::size_t i = 0; i < h.bin_count(); ++i) a += h.heights()[i] * h.width(i);
  return a;
}

std::vector<double> heights_of(const Histogram& h) {
  return {h.heights().begin(), h.heights().end()};
}

}  // namespace

TEST(BinInteger, Examples) {
  const auto a = bin_integer(std::vector<double>{0, 0, 1, 2, 2, 2});
  EXPECT_EQ(heights_of(a), (std::vector<double>{1.0 / 3.0, 1.0 / 6.0, 0.5}));
  EXPECT_EQ(a.rule(), BinningRule::integer);
  EXPECT_EQ(a.sample_size(), 6u);

  const auto b = bin_integer(std::vector<double>{5});
  EXPECT_EQ(heights_of(b), (std::vector<double>{0, 0, 0, 0, 0, 1}));

  const auto c = bin_integer(std::vector<double>{0, 0, 0});
  EXPECT_EQ(heights_of(c), (std::vector<double>{1.0}));
}

TEST(BinInteger, HalfIntegerUnitEdges) {
  const auto h = bin_integer(std::vector<std::uint64_t>{3, 1, 4, 1, 5});
  ASSERT_EQ(h.bin_count(), 6u);
  for (std::size_t i = 0; i < h.bin_count(); ++i) {
    EXPECT_EQ(h.left(i), double(i) - 0.5);
    EXPECT_EQ(h.width(i), 1.0);
    EXPECT_EQ(h.value(i), i);
  }
}

TEST(BinInteger, Errors) {
  EXPECT_THROW(bin_integer(std::vector<double>{}), DomainError);
  EXPECT_THROW(bin_integer(std::vector<double>{1.5}), DomainError);
  EXPECT_THROW(bin_integer(std::vector<double>{-1}), DomainError);
}

TEST(BinInteger, HeightsSumToOneAndIgnoreOrder) {
  auto draws = sample_gnb({2.0, 1.5, 1.0}, 5000, 4);
  const auto h = bin_integer(std::span<const std::uint64_t>(draws));
  double sum = 0.0;
  for (double x : h.heights()) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);

  std::mt19937_64 rng(1);
  std::shuffle(draws.begin(), draws.end(), rng);
  const auto shuffled = bin_integer(std::span<const std::uint64_t>(draws));
  EXPECT_EQ(heights_of(shuffled), heights_of(h));
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> s = {1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_DOUBLE_EQ(quantile_linear(s, 0.25), 2.75);
  EXPECT_DOUBLE_EQ(quantile_linear(s, 0.75), 6.25);
  EXPECT_EQ(quantile_linear(s, 0.0), 1.0);
  EXPECT_EQ(quantile_linear(s, 1.0), 8.0);
}

TEST(BinFD, WidthExamples) {
  EXPECT_DOUBLE_EQ(fd_bin_width(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8}), 3.5);

  // Evenly spaced: q0.25 = 2 and q0.75 = 6 under the interpolation rule.
  std::vector<double> even(1000);
  for (std::size_t i = 0; i < even.size(); ++i) even[i] = double(i) * 4.0 / 499.5;
  EXPECT_NEAR(fd_bin_width(even), 0.8, 1e-12);
}

TEST(BinFD, ZeroIqrNamesQuantiles) {
  const std::vector<double> flat = {1, 2, 2, 2, 2, 2, 2, 3};
  try {
    bin_fd(flat);
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("q0.25"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("q0.75"), std::string::npos);
  }
  EXPECT_THROW(bin_fd(std::vector<double>{}), DomainError);
}

TEST(BinFD, Invariants) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = sample_gg({2.0, 1.5, 1.0}, 2000 * seed, seed);
    const auto h = bin_fd(x);
    const double w = fd_bin_width(x);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());

    EXPECT_NEAR(area(h), 1.0, 1e-12);
    EXPECT_EQ(h.edges().size(), std::size_t(std::ceil((*hi - *lo) / w)) + 1);
    EXPECT_EQ(h.left(0), *lo);
    EXPECT_GE(h.edges().back(), *hi);

    // Counts recovered from heights are integers and add up to n.
    double total = 0.0;
    for (std::size_t i = 0; i < h.bin_count(); ++i) {
      const double count = h.heights()[i] * h.width(i) * double(x.size());
      EXPECT_NEAR(count, std::round(count), 1e-6);
      total += std::round(count);
    }
    EXPECT_EQ(total, double(x.size()));
  }
}

TEST(BinFD, EveryPointInExactlyOneBin) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  const auto h = bin_fd(x);  // edges 1, 4.5, 8
  ASSERT_EQ(h.bin_count(), 2u);
  EXPECT_DOUBLE_EQ(h.heights()[0] * 3.5 * 8, 4.0);  // 1,2,3,4
  EXPECT_DOUBLE_EQ(h.heights()[1] * 3.5 * 8, 4.0);  // 5..8, max lands in the closed last bin
}

TEST(Histogram, ConstructorValidates) {
  EXPECT_THROW(Histogram({0.0, 1.0}, {0.5}, BinningRule::freedman_diaconis, 2), DomainError);
  EXPECT_THROW(Histogram({0.0, 1.0, 0.5}, {1.0, 0.0}, BinningRule::freedman_diaconis, 2),
               DomainError);
  EXPECT_THROW(Histogram({0.0, 1.0}, {1.0}, BinningRule::integer, 1), DomainError);
  EXPECT_NO_THROW(Histogram({-0.5, 0.5}, {1.0}, BinningRule::integer, 1));
}

TEST(Histogram, Csv) {
  const auto h = bin_integer(std::vector<double>{0, 1, 1, 3});
  EXPECT_EQ(to_csv(h),
            "edge_left,edge_right,height\n"
            "-0.5,0.5,0.25\n"
            "0.5,1.5,0.5\n"
            "1.5,2.5,0\n"
            "2.5,3.5,0.25\n");
  EXPECT_STREQ(to_string(BinningRule::freedman_diaconis), "freedman-diaconis");
}
