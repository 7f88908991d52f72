#pragma once

// Minimum-distance target functions.
//
// Discrete (count data, integer-rule histogram), with m_k the model pmf and
// h_k the bar height over the histogram's bins:
//   l1 = Σ|m_k - h_k|,  l2 = sqrt(Σ(m_k - h_k)^2),  linf = max|m_k - h_k|.
// Continuous (positive data, Freedman-Diaconis histogram), with per-bin
// integrals I_k over [b_k, b_{k+1}]:
//   L1 = Σ I_k|g - h_k|,  L2 = sqrt(Σ I_k (g - h_k)^2),  Linf = max I_k|g - h_k|.
// Model mass outside the histogram's range is not penalized.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnbfit/distributions.hpp"
#include "gnbfit/errors.hpp"
#include "gnbfit/histogram.hpp"
#include "gnbfit/numerics.hpp"

namespace gnbfit {

enum class MetricKind { l1, l2, linf };
inline constexpr MetricKind kAllMetrics[] = {MetricKind::l1, MetricKind::l2, MetricKind::linf};

inline const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::l1: return "l1";
    case MetricKind::l2: return "l2";
    case MetricKind::linf: return "linf";
  }
  return "?";
}

enum class ModelFamily { nb, gnb, gamma, gg };

inline const char* to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::nb: return "nb";
    case ModelFamily::gnb: return "gnb";
    case ModelFamily::gamma: return "gamma";
    case ModelFamily::gg: return "gg";
  }
  return "?";
}

inline bool is_discrete(ModelFamily f) { return f == ModelFamily::nb || f == ModelFamily::gnb; }
inline bool is_generalized(ModelFamily f) { return f == ModelFamily::gnb || f == ModelFamily::gg; }

inline BinningRule binning_for(ModelFamily f) {
  return is_discrete(f) ? BinningRule::integer : BinningRule::freedman_diaconis;
}

struct DiscreteOptions {
  /// Whether the bar at k = 0 takes part in the sums.
  bool include_zero_bin = true;
  double pmf_rel_tol = 1e-10;
};

struct ContinuousOptions {
  double bin_rel_tol = 1e-8;
  double bin_abs_tol = 1e-14;
};

/// l1/l2/linf distance between equally long model and height vectors.
inline double discrete_distance(std::span<const double> model, std::span<const double> heights,
                                MetricKind metric) {
  if (model.size() != heights.size()) throw DomainError("discrete_distance: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double d = std::abs(model[i] - heights[i]);
    switch (metric) {
      case MetricKind::l1: acc += d; break;
      case MetricKind::l2: acc += d * d; break;
      case MetricKind::linf: acc = std::max(acc, d); break;
    }
  }
  return metric == MetricKind::l2 ? std::sqrt(acc) : acc;
}

namespace detail {

inline void require_integer_rule(const Histogram& hist) {
  if (hist.rule() != BinningRule::integer) {
    throw DomainError("discrete_objective: histogram must use the integer rule");
  }
}

template <class PmfRange>
double discrete_objective_impl(PmfRange&& pmf_range, const Histogram& hist, MetricKind metric,
                               const DiscreteOptions& opts) {
  require_integer_rule(hist);
  const std::size_t n = hist.bin_count();
  const std::uint64_t k0 = hist.value(0);
  const std::vector<double> log_pmf = pmf_range(k0, hist.value(n - 1));
  std::vector<double> model, heights;
  model.reserve(n);
  heights.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!opts.include_zero_bin && hist.value(i) == 0) continue;
    model.push_back(std::exp(log_pmf[i]));
    heights.push_back(hist.heights()[i]);
  }
  return discrete_distance(model, heights, metric);
}

}  // namespace detail

inline double discrete_objective(const GGParams& params, const Histogram& hist, MetricKind metric,
                                 const DiscreteOptions& opts = {}) {
  return detail::discrete_objective_impl(
      [&](std::uint64_t lo, std::uint64_t hi) {
        return gnb_log_pmf_range(lo, hi, params, PmfRoute::automatic, opts.pmf_rel_tol);
      },
      hist, metric, opts);
}

inline double discrete_objective(const NBParams& params, const Histogram& hist, MetricKind metric,
                                 const DiscreteOptions& opts = {}) {
  return detail::discrete_objective_impl(
      [&](std::uint64_t lo, std::uint64_t hi) {
        std::vector<double> out;
        for (std::uint64_t k = lo; k <= hi; ++k) out.push_back(nb_log_pmf(k, params));
        return out;
      },
      hist, metric, opts);
}

/// Per-bin integrals: ∫|g - h_k| for l1/linf, ∫(g - h_k)^2 for l2.
template <class Density>
std::vector<double> continuous_bin_integrals(Density&& density, const Histogram& hist,
                                             MetricKind metric, const ContinuousOptions& opts = {}) {
  if (hist.left(0) < 0.0) throw DomainError("continuous_objective: edges must be nonnegative");
  QuadratureOptions q;
  q.rel_tol = opts.bin_rel_tol;
  q.abs_tol = opts.bin_abs_tol;
  std::vector<double> out(hist.bin_count());
  for (std::size_t i = 0; i < hist.bin_count(); ++i) {
    const double h = hist.heights()[i];
    auto deviation = [&](double z) {
      const double d = density(z) - h;
      return metric == MetricKind::l2 ? d * d : std::abs(d);
    };
    try {
      out[i] = integrate_interval(deviation, hist.left(i), hist.right(i), q).value;
    } catch (const QuadratureError& e) {
      throw QuadratureError("continuous_objective: bin " + std::to_string(i) + ": " + e.what(),
                            e.best_value(), e.abs_error_estimate(), e.evaluations());
    }
  }
  return out;
}

template <class Density>
double continuous_distance(Density&& density, const Histogram& hist, MetricKind metric,
                           const ContinuousOptions& opts = {}) {
  const auto bins = continuous_bin_integrals(density, hist, metric, opts);
  double acc = 0.0;
  for (double v : bins) acc = metric == MetricKind::linf ? std::max(acc, v) : acc + v;
  return metric == MetricKind::l2 ? std::sqrt(acc) : acc;
}

inline void require_fd_rule(const Histogram& hist) {
  if (hist.rule() != BinningRule::freedman_diaconis) {
    throw DomainError("continuous_objective: histogram must use the Freedman-Diaconis rule");
  }
}

inline double continuous_objective(const GGParams& params, const Histogram& hist,
                                   MetricKind metric, const ContinuousOptions& opts = {}) {
  require_fd_rule(hist);
  return continuous_distance([&](double z) { return gg_pdf(z, params); }, hist, metric, opts);
}

inline double continuous_objective(const GammaParams& params, const Histogram& hist,
                                   MetricKind metric, const ContinuousOptions& opts = {}) {
  require_fd_rule(hist);
  return continuous_distance([&](double z) { return gamma_pdf(z, params); }, hist, metric, opts);
}

}  // namespace gnbfit
