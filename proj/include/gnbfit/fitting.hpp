#pragma once

// End-to-end minimum-distance estimation: bin, assemble the objective, pick
// starts, run the simplex search and report the fit under all three metrics.
//
// Internal coordinates are (ln r, sγ, ln μ) where sγ is the nonzero_signed
// transform of γ (γ = 1 maps to ln 1000 and back exactly). The classical
// families (NB, gamma) use (ln r, ln μ); NB is parameterized by the gamma
// mixing law, p = μ/(1+μ). A generalized fit (GNB, GG) first fits its
// classical family and starts from that optimum embedded at γ = 1, where the
// generalized objective takes the classical code path bit for bit. Since the
// simplex never returns a point worse than its start, the generalized fit's
// objective can never exceed the classical one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gnbfit/distributions.hpp"
#include "gnbfit/errors.hpp"
#include "gnbfit/histogram.hpp"
#include "gnbfit/objectives.hpp"
#include "gnbfit/optimizer.hpp"

namespace gnbfit {

enum class SampleKind { discrete, continuous };

struct Sample {
  std::vector<double> values;
  SampleKind kind = SampleKind::continuous;
  std::string provenance;

  /// Discrete when every value is a nonnegative integer.
  static Sample from_values(std::vector<double> values, std::string provenance = {}) {
    bool integral = !values.empty();
    for (double v : values) integral = integral && v >= 0.0 && v == std::floor(v);
    return {std::move(values), integral ? SampleKind::discrete : SampleKind::continuous,
            std::move(provenance)};
  }

  static Sample from_counts(const std::vector<std::uint64_t>& counts, std::string provenance = {}) {
    return {std::vector<double>(counts.begin(), counts.end()), SampleKind::discrete,
            std::move(provenance)};
  }
};

/// Natural parameters of any of the four families. Classical families have
/// gamma_exp = 1; NB's success probability is p() = μ/(1+μ).
struct ModelParams {
  double r = 1.0;
  double gamma_exp = 1.0;
  double mu = 1.0;

  double p() const { return mu / (1.0 + mu); }
  GGParams gg() const { return {r, gamma_exp, mu}; }
  GammaParams gamma() const { return {r, mu}; }
  NBParams nb() const { return NBParams::from_gamma_mixture(r, mu); }
};

inline SimplexOptions fit_simplex_defaults() {
  SimplexOptions o;
  o.max_iters = 20000;
  return o;
}

struct FitRequest {
  ModelFamily family = ModelFamily::gnb;
  MetricKind metric = MetricKind::l2;
  std::optional<double> fix_r;
  DiscreteOptions discrete;
  ContinuousOptions continuous;
  /// The l1 and linf objectives have kinks and a flat (r, γ, μ) valley; the
  /// three-parameter fits can need several thousand iterations per start.
  SimplexOptions simplex = fit_simplex_defaults();
};

using ErrorRow = std::map<MetricKind, double>;

struct FitResult {
  ModelFamily family = ModelFamily::gnb;
  MetricKind metric = MetricKind::l2;
  ModelParams params;
  double achieved_objective = 0.0;
  ErrorRow errors;
  Histogram histogram;
  std::size_t starts_used = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

// --- objectives by family ----------------------------------------------------

inline double objective_at(const ModelParams& p, ModelFamily family, const Histogram& hist,
                           MetricKind metric, const DiscreteOptions& dopts = {},
                           const ContinuousOptions& copts = {}) {
  switch (family) {
    case ModelFamily::nb: return discrete_objective(p.nb(), hist, metric, dopts);
    case ModelFamily::gnb: return discrete_objective(p.gg(), hist, metric, dopts);
    case ModelFamily::gamma: return continuous_objective(p.gamma(), hist, metric, copts);
    case ModelFamily::gg: return continuous_objective(p.gg(), hist, metric, copts);
  }
  throw DomainError("objective_at: unknown family");
}

/// The family's objective under all three metrics at fixed parameters.
inline ErrorRow error_report(const ModelParams& p, ModelFamily family, const Histogram& hist,
                             const DiscreteOptions& dopts = {}, const ContinuousOptions& copts = {}) {
  if (hist.rule() != binning_for(family)) {
    throw DomainError(std::string("error_report: histogram rule does not match family ") +
                      to_string(family));
  }
  ErrorRow row;
  for (MetricKind m : kAllMetrics) row[m] = objective_at(p, family, hist, m, dopts, copts);
  return row;
}

// --- data checks and starts --------------------------------------------------

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased (n - 1)
};

inline Moments sample_moments(std::span<const double> data) {
  if (data.size() < 2) throw EstimationError("need at least two observations");
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(data.size() - 1)};
}

/// Method-of-moments start plus the four (×0.5, ×2) rescalings of r and μ.
inline std::vector<ModelParams> moment_starts(const Moments& m, ModelFamily family) {
  if (!(m.variance > 0.0) || !std::isfinite(m.variance)) {
    throw EstimationError("degenerate data: zero variance");
  }
  if (!(m.mean > 0.0)) throw EstimationError("degenerate data: nonpositive mean");
  ModelParams base;
  if (is_discrete(family)) {
    const double p0 = std::clamp(m.mean / m.variance, 0.01, 0.99);
    base.r = m.mean * p0 / (1.0 - p0);
    base.mu = p0 / (1.0 - p0);
  } else {
    base.r = m.mean * m.mean / m.variance;
    base.mu = m.mean / m.variance;
  }
  std::vector<ModelParams> starts = {base};
  for (double fr : {0.5, 2.0}) {
    for (double fm : {0.5, 2.0}) starts.push_back({base.r * fr, 1.0, base.mu * fm});
  }
  return starts;
}

inline std::vector<ModelParams> moment_starts(std::span<const double> data, ModelFamily family) {
  return moment_starts(sample_moments(data), family);
}

inline void check_sample_for(std::span<const double> data, ModelFamily family) {
  if (data.empty()) throw EstimationError("empty sample");
  for (double x : data) {
    if (is_discrete(family)) {
      if (!(x >= 0.0) || x != std::floor(x)) {
        throw EstimationError(std::string(to_string(family)) +
                              " requires nonnegative integer data");
      }
    } else if (!(x > 0.0) || !std::isfinite(x)) {
      throw EstimationError(std::string(to_string(family)) + " requires positive real data");
    }
  }
}

inline Histogram build_histogram(std::span<const double> data, ModelFamily family) {
  return is_discrete(family) ? bin_integer(data) : bin_fd(data);
}

// --- fitting -----------------------------------------------------------------

namespace detail {

inline ModelFamily classical_of(ModelFamily f) {
  return is_discrete(f) ? ModelFamily::nb : ModelFamily::gamma;
}

// Coordinate layout: [ln r]? [sγ]? [ln μ]
struct Layout {
  bool has_r;
  bool has_gamma;
  std::optional<double> fixed_r;

  ParamTransform transform() const {
    std::vector<CoordinateDomain> d;
    if (has_r) d.push_back(CoordinateDomain::positive);
    if (has_gamma) d.push_back(CoordinateDomain::nonzero_signed);
    d.push_back(CoordinateDomain::positive);
    return make_transform(std::move(d));
  }

  std::vector<double> natural_vector(const ModelParams& p) const {
    std::vector<double> v;
    if (has_r) v.push_back(p.r);
    if (has_gamma) v.push_back(p.gamma_exp);
    v.push_back(p.mu);
    return v;
  }

  ModelParams params(std::span<const double> natural) const {
    ModelParams p;
    std::size_t i = 0;
    p.r = has_r ? natural[i++] : *fixed_r;
    p.gamma_exp = has_gamma ? natural[i++] : 1.0;
    p.mu = natural[i];
    return p;
  }
};

struct FamilyFit {
  FitResult result;
  std::vector<double> internal_min;
};

inline FamilyFit fit_family(const Histogram& hist, const Moments& moments, ModelFamily family,
                            const FitRequest& req, const std::vector<std::vector<double>>& seeds) {
  const Layout layout{!req.fix_r.has_value(), is_generalized(family), req.fix_r};
  const ParamTransform transform = layout.transform();

  std::vector<std::vector<double>> starts = seeds;
  for (ModelParams p : moment_starts(moments, family)) {
    if (req.fix_r) p.r = *req.fix_r;
    starts.push_back(transform.to_internal(layout.natural_vector(p)));
  }

  auto objective = [&](const std::vector<double>& internal) {
    try {
      const ModelParams p = layout.params(transform.to_natural(internal));
      return objective_at(p, family, hist, req.metric, req.discrete, req.continuous);
    } catch (const DomainError&) {
      return kInf;
    } catch (const QuadratureError&) {
      return kInf;
    }
  };

  const OptimResult opt = minimize_multistart(objective, starts, req.simplex);
  FamilyFit out{FitResult{family, req.metric, layout.params(transform.to_natural(opt.x_min)),
                          opt.f_min, {}, hist, starts.size(), opt.iterations, opt.converged},
                opt.x_min};
  out.result.errors = error_report(out.result.params, family, hist, req.discrete, req.continuous);
  return out;
}

}  // namespace detail

/// Minimum-distance fit of request.family to the sample.
///
/// Generalized families always include the classical optimum embedded at
/// γ = 1 among their starts, so fit(GNB) <= fit(NB) and fit(GG) <= fit(gamma)
/// in the requested metric. fix_r pins r and optimizes the rest. A fit that
/// fails to converge from every start is still returned, flagged.
inline FitResult fit(const Sample& data, const FitRequest& request) {
  check_sample_for(data.values, request.family);
  if (request.fix_r && !(*request.fix_r > 0.0 && std::isfinite(*request.fix_r))) {
    throw DomainError("fit: fix_r must be positive");
  }
  const Moments moments = sample_moments(data.values);
  if (!(moments.variance > 0.0)) throw EstimationError("degenerate data: zero variance");
  const Histogram hist = build_histogram(data.values, request.family);

  if (!is_generalized(request.family)) {
    return detail::fit_family(hist, moments, request.family, request, {}).result;
  }
  const auto classical =
      detail::fit_family(hist, moments, detail::classical_of(request.family), request, {});
  // Insert the internal γ coordinate for γ = 1 after the optional r slot.
  std::vector<double> embedded = classical.internal_min;
  const double gamma_one = make_transform({CoordinateDomain::nonzero_signed})
                               .to_internal(std::vector<double>{1.0})
                               .front();
  embedded.insert(embedded.begin() + (request.fix_r ? 0 : 1), gamma_one);
  return detail::fit_family(hist, moments, request.family, request, {embedded}).result;
}

}  // namespace gnbfit
