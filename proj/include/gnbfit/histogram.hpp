#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gnbfit/errors.hpp"

namespace gnbfit {

enum class BinningRule { integer, freedman_diaconis };

inline const char* to_string(BinningRule rule) {
  return rule == BinningRule::integer ? "integer" : "freedman-diaconis";
}

/// Normalized histogram: bar areas sum to one.
///
/// Bins are [edges[i], edges[i+1]) with the last bin closed. Integer-rule
/// histograms have unit bins centered on 0, 1, 2, ...
class Histogram {
 public:
  Histogram(std::vector<double> edges, std::vector<double> heights, BinningRule rule, std::size_t n)
      : edges_(std::move(edges)), heights_(std::move(heights)), rule_(rule), n_(n) {
    if (heights_.empty() || edges_.size() != heights_.size() + 1) {
      throw DomainError("Histogram: need N_b >= 1 heights and N_b + 1 edges");
    }
    double area = 0.0;
    for (std::size_t i = 0; i < heights_.size(); ++i) {
      if (!(edges_[i] < edges_[i + 1])) throw DomainError("Histogram: edges must increase");
      if (!(heights_[i] >= 0.0) || !std::isfinite(heights_[i])) {
        throw DomainError("Histogram: heights must be finite and nonnegative");
      }
      if (rule_ == BinningRule::integer && (edges_[i + 1] - edges_[i] != 1.0 ||
                                            edges_[i] + 0.5 != std::floor(edges_[i] + 0.5))) {
        throw DomainError("Histogram: integer bins must be unit width at half-integer edges");
      }
      area += heights_[i] * (edges_[i + 1] - edges_[i]);
    }
    if (std::abs(area - 1.0) > 1e-9) throw DomainError("Histogram: bar areas must sum to 1");
  }

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> heights() const noexcept { return heights_; }
  BinningRule rule() const noexcept { return rule_; }
  std::size_t sample_size() const noexcept { return n_; }
  std::size_t bin_count() const noexcept { return heights_.size(); }
  double left(std::size_t i) const { return edges_[i]; }
  double right(std::size_t i) const { return edges_[i + 1]; }
  double width(std::size_t i) const { return edges_[i + 1] - edges_[i]; }
  double midpoint(std::size_t i) const { return 0.5 * (edges_[i] + edges_[i + 1]); }

  /// Count value represented by bin i of an integer-rule histogram.
  std::uint64_t value(std::size_t i) const {
    return static_cast<std::uint64_t>(std::llround(edges_[i] + 0.5));
  }

 private:
  std::vector<double> edges_;
  std::vector<double> heights_;
  BinningRule rule_;
  std::size_t n_;
};

/// One unit bin per value 0..max(data); height = count / n.
inline Histogram bin_integer(std::span<const double> data) {
  if (data.empty()) throw DomainError("bin_integer: empty data");
  double top = 0.0;
  for (double x : data) {
    if (!(x >= 0.0) || x != std::floor(x) || !std::isfinite(x)) {
      throw DomainError("bin_integer: data must be nonnegative integers");
    }
    top = std::max(top, x);
  }
  if (top > 1e8) throw DomainError("bin_integer: values above 1e8 are not supported");
  const auto bins = static_cast<std::size_t>(top) + 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : data) ++counts[static_cast<std::size_t>(x)];

  std::vector<double> edges(bins + 1), heights(bins);
  const double n = static_cast<double>(data.size());
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = static_cast<double>(i) - 0.5;
  for (std::size_t i = 0; i < bins; ++i) heights[i] = static_cast<double>(counts[i]) / n;
  return {std::move(edges), std::move(heights), BinningRule::integer, data.size()};
}

inline Histogram bin_integer(std::span<const std::uint64_t> data) {
  std::vector<double> values(data.begin(), data.end());
  return bin_integer(std::span<const double>(values));
}

/// Quantile by linear interpolation between order statistics at 1-based
/// position 1 + (n-1)q. `sorted` must be ascending.
inline double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile_linear: empty data");
  const double pos = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Freedman-Diaconis bin width 2·IQR / n^(1/3).
inline double fd_bin_width(std::span<const double> data) {
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double q25 = quantile_linear(sorted, 0.25);
  const double q75 = quantile_linear(sorted, 0.75);
  if (!(q75 > q25)) {
    std::ostringstream msg;
    msg << "bin_fd: interquartile range is zero (q0.25 = " << q25 << ", q0.75 = " << q75 << ")";
    throw EstimationError(msg.str());
  }
  return 2.0 * (q75 - q25) / std::cbrt(static_cast<double>(sorted.size()));
}

/// Freedman-Diaconis histogram anchored at min(data); heights = count/(n·w).
inline Histogram bin_fd(std::span<const double> data) {
  if (data.empty()) throw DomainError("bin_fd: empty data");
  for (double x : data) {
    if (!std::isfinite(x)) throw DomainError("bin_fd: data must be finite");
  }
  const double w = fd_bin_width(data);
  const auto [min_it, max_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *min_it;
  const double hi = *max_it;
  const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / w)));

  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + static_cast<double>(i) * w;
  if (edges.back() < hi) edges.back() = hi;

  std::vector<std::size_t> counts(bins, 0);
  for (double x : data) {
    auto idx = static_cast<std::size_t>(std::min(std::floor((x - lo) / w), double(bins - 1)));
    while (idx > 0 && x < edges[idx]) --idx;
    while (idx + 1 < bins && x >= edges[idx + 1]) ++idx;
    ++counts[idx];
  }
  std::vector<double> heights(bins);
  const double n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < bins; ++i) {
    heights[i] = static_cast<double>(counts[i]) / (n * (edges[i + 1] - edges[i]));
  }
  return {std::move(edges), std::move(heights), BinningRule::freedman_diaconis, data.size()};
}

/// "edge_left,edge_right,height" rows, 15 significant digits.
inline std::string to_csv(const Histogram& hist) {
  std::string out = "edge_left,edge_right,height\n";
  char line[96];
  for (std::size_t i = 0; i < hist.bin_count(); ++i) {
    std::snprintf(line, sizeof line, "%.15g,%.15g,%.15g\n", hist.left(i), hist.right(i),
                  hist.heights()[i]);
    out += line;
  }
  return out;
}

}  // namespace gnbfit
