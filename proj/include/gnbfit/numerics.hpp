#pragma once

// Special functions and adaptive quadrature shared by every other module.
//
// Quadrature is global adaptive Gauss-Kronrod (7/15 pair): the panel with the
// largest error estimate is bisected until the summed estimate meets the
// tolerance or the evaluation budget is spent. Nodes are interior, so
// integrable power singularities at the endpoints are never evaluated.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "gnbfit/errors.hpp"

namespace gnbfit {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// ln Γ(x) for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  if (std::isinf(x)) return kInf;
  return boost::math::lgamma(x);
}

/// ln Σ exp(terms). -inf entries contribute nothing; all -inf yields -inf.
inline double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) throw DomainError("log_sum_exp: empty sequence");
  const double hi = *std::max_element(terms.begin(), terms.end());
  if (std::isinf(hi)) return hi;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

/// ln(exp(a) + exp(b)).
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == kNegInf) return kNegInf;
  return a + std::log1p(std::exp(b - a));
}

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Result of an integral computed in log space: ln ∫ f.
struct LogQuadratureResult {
  double log_value = kNegInf;
  double rel_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  std::size_t max_evaluations = 200000;
};

namespace detail {

// Kronrod abscissae on [0,1]; odd indices are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
inline constexpr std::size_t kPanelEvaluations = 15;

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  double roundoff = 0.0;  // error floor from cancellation; splitting can't beat it
};

template <class F>
Panel gauss_kronrod_panel(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    abs_sum += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  kronrod *= half;
  gauss *= half;
  abs_sum *= std::abs(half);
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum;
  return {a, b, kronrod, std::max(std::abs(kronrod - gauss), roundoff), roundoff};
}

inline bool splittable(double a, double b) {
  const double mid = 0.5 * (a + b);
  return mid > a && mid < b;
}

}  // namespace detail

/// Adaptive integral of f over [a, b]. Stops when the summed error estimate is
/// below max(rel_tol·|value|, abs_tol), or within twice the roundoff floor
/// 50·eps·∫|f| when cancellation puts the request out of reach. Throws
/// QuadratureError when the budget is exhausted.
template <class F>
QuadratureResult integrate_interval(F&& f, double a, double b, const QuadratureOptions& opts) {
  if (!(a < b)) throw DomainError("integrate_interval: requires a < b");
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate_interval: bounds must be finite");
  }
  // Rank by error above the roundoff floor: panels already at the floor gain nothing from a split.
  auto by_error = [](const detail::Panel& x, const detail::Panel& y) {
    return x.error - x.roundoff < y.error - y.roundoff;
  };
  std::priority_queue<detail::Panel, std::vector<detail::Panel>, decltype(by_error)> open(by_error);
  std::vector<detail::Panel> frozen;

  open.push(detail::gauss_kronrod_panel(f, a, b));
  std::size_t evaluations = detail::kPanelEvaluations;
  double value = open.top().value;
  double error = open.top().error;
  double roundoff = open.top().roundoff;

  auto target = [&] {
    return std::max({opts.rel_tol * std::abs(value), opts.abs_tol, 2.0 * roundoff});
  };
  while (error > target()) {
    if (open.empty()) break;
    if (evaluations + 2 * detail::kPanelEvaluations > opts.max_evaluations) break;
    const detail::Panel worst = open.top();
    open.pop();
    if (!detail::splittable(worst.a, worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Panel left = detail::gauss_kronrod_panel(f, worst.a, mid);
    const detail::Panel right = detail::gauss_kronrod_panel(f, mid, worst.b);
    evaluations += 2 * detail::kPanelEvaluations;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    roundoff += left.roundoff + right.roundoff - worst.roundoff;
    open.push(left);
    open.push(right);
  }

  // Resum to drop drift from the incremental updates.
  std::vector<detail::Panel> all = std::move(frozen);
  while (!open.empty()) {
    all.push_back(open.top());
    open.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  value = 0.0;
  error = 0.0;
  roundoff = 0.0;
  for (const auto& p : all) {
    value += p.value;
    error += p.error;
    roundoff += p.roundoff;
  }
  if (!std::isfinite(value) || error > target()) {
    throw QuadratureError("integrate_interval: tolerance not reached on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]",
                          value, error, evaluations);
  }
  return {value, error, evaluations};
}

template <class F>
QuadratureResult integrate_interval(F&& f, double a, double b, double rel_tol = 1e-10) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  return integrate_interval(std::forward<F>(f), a, b, opts);
}

/// ∫_0^∞ f via x = t/(1-t) on [0, 1).
template <class F>
QuadratureResult integrate_semiinfinite(F&& f, const QuadratureOptions& opts) {
  auto mapped = [&f](double t) {
    const double s = 1.0 - t;
    const double x = t / s;
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx / (s * s);
  };
  return integrate_interval(mapped, 0.0, 1.0, opts);
}

template <class F>
QuadratureResult integrate_semiinfinite(F&& f, double rel_tol = 1e-10) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  return integrate_semiinfinite(std::forward<F>(f), opts);
}

/// Result of integrating m functions over a shared node set.
struct VectorQuadratureResult {
  std::vector<double> values;
  std::vector<double> abs_error_estimates;
  std::size_t evaluations = 0;
};

/// Adaptive integral of a vector-valued integrand over [breakpoints.front(),
/// breakpoints.back()]. f(x, out) writes m component values into out. Every
/// component must meet max(rel_tol·|I_j|, abs_tol); the panel with the worst
/// normalized error across components is bisected first.
template <class F>
VectorQuadratureResult integrate_vector(F&& f, std::span<const double> breakpoints, std::size_t m,
                                        const QuadratureOptions& opts) {
  if (breakpoints.size() < 2 || m == 0) throw DomainError("integrate_vector: empty problem");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i - 1] < breakpoints[i])) {
      throw DomainError("integrate_vector: breakpoints must be strictly increasing");
    }
  }

  struct VPanel {
    double a, b;
    std::vector<double> value, error, roundoff;
  };
  std::vector<double> fc(m), f1(m), f2(m);
  auto evaluate = [&](double a, double b) {
    VPanel p{a, b, std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
             std::vector<double>(m, 0.0)};
    std::vector<double> gauss(m, 0.0), abs_sum(m, 0.0);
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    f(center, std::span<double>(fc));
    for (std::size_t c = 0; c < m; ++c) {
      p.value[c] = fc[c] * detail::kKronrodWeights[7];
      gauss[c] = fc[c] * detail::kGaussWeights[3];
      abs_sum[c] = std::abs(p.value[c]);
    }
    for (std::size_t j = 0; j < 7; ++j) {
      const double dx = half * detail::kKronrodNodes[j];
      f(center - dx, std::span<double>(f1));
      f(center + dx, std::span<double>(f2));
      const double wk = detail::kKronrodWeights[j];
      for (std::size_t c = 0; c < m; ++c) {
        p.value[c] += wk * (f1[c] + f2[c]);
        abs_sum[c] += wk * (std::abs(f1[c]) + std::abs(f2[c]));
        if (j % 2 == 1) gauss[c] += detail::kGaussWeights[j / 2] * (f1[c] + f2[c]);
      }
    }
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    for (std::size_t c = 0; c < m; ++c) {
      p.value[c] *= half;
      gauss[c] *= half;
      p.roundoff[c] = eps50 * abs_sum[c] * half;
      p.error[c] = std::max(std::abs(p.value[c] - gauss[c]), p.roundoff[c]);
    }
    return p;
  };

  std::vector<VPanel> panels;
  std::vector<double> total(m, 0.0), total_err(m, 0.0), total_round(m, 0.0);
  std::size_t evaluations = 0;
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    panels.push_back(evaluate(breakpoints[i - 1], breakpoints[i]));
    evaluations += detail::kPanelEvaluations;
    for (std::size_t c = 0; c < m; ++c) {
      total[c] += panels.back().value[c];
      total_err[c] += panels.back().error[c];
      total_round[c] += panels.back().roundoff[c];
    }
  }

  auto target = [&](std::size_t c) {
    return std::max({opts.rel_tol * std::abs(total[c]), opts.abs_tol, 2.0 * total_round[c]});
  };
  auto score = [&](const VPanel& p) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s = std::max(s, (p.error[c] - p.roundoff[c]) / target(c));
    return s;
  };
  auto done = [&] {
    for (std::size_t c = 0; c < m; ++c) {
      if (!(total_err[c] <= target(c))) return false;
    }
    return true;
  };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> open;
  for (std::size_t i = 0; i < panels.size(); ++i) open.emplace(score(panels[i]), i);

  while (!done() && !open.empty()) {
    if (evaluations + 2 * detail::kPanelEvaluations > opts.max_evaluations) break;
    const std::size_t idx = open.top().second;
    open.pop();
    const double a = panels[idx].a;
    const double b = panels[idx].b;
    if (!detail::splittable(a, b)) continue;
    const double mid = 0.5 * (a + b);
    VPanel left = evaluate(a, mid);
    VPanel right = evaluate(mid, b);
    evaluations += 2 * detail::kPanelEvaluations;
    for (std::size_t c = 0; c < m; ++c) {
      total[c] += left.value[c] + right.value[c] - panels[idx].value[c];
      total_err[c] += left.error[c] + right.error[c] - panels[idx].error[c];
      total_round[c] += left.roundoff[c] + right.roundoff[c] - panels[idx].roundoff[c];
    }
    panels[idx] = std::move(left);
    panels.push_back(std::move(right));
    open.emplace(score(panels[idx]), idx);
    open.emplace(score(panels.back()), panels.size() - 1);
  }

  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  VectorQuadratureResult out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), evaluations};
  std::fill(total_round.begin(), total_round.end(), 0.0);
  for (const auto& p : panels) {
    for (std::size_t c = 0; c < m; ++c) {
      out.values[c] += p.value[c];
      out.abs_error_estimates[c] += p.error[c];
      total_round[c] += p.roundoff[c];
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    const double tgt =
        std::max({opts.rel_tol * std::abs(out.values[c]), opts.abs_tol, 2.0 * total_round[c]});
    if (!std::isfinite(out.values[c]) || out.abs_error_estimates[c] > tgt) {
      throw QuadratureError("integrate_vector: component " + std::to_string(c) +
                                " did not reach tolerance",
                            out.values[c], out.abs_error_estimates[c], evaluations);
    }
  }
  return out;
}

/// ln ∫_0^∞ f for f supplied as log_f(x) = ln f(x).
///
/// Works on u = ln x, where the log-integrand log_f(e^u) + u must be unimodal
/// (log-concave integrands qualify). The mode is located on a unit grid and
/// refined; the window extends until the log-integrand has dropped 50 below
/// the mode, and the excluded tails are bounded from the edge slope.
template <class LogF>
LogQuadratureResult log_integrate_semiinfinite(LogF&& log_f, const QuadratureOptions& opts) {
  constexpr double kSpan = 700.0;
  constexpr double kDrop = 50.0;
  std::size_t evaluations = 0;
  auto g = [&](double u) {
    ++evaluations;
    const double v = log_f(std::exp(u)) + u;
    return std::isnan(v) ? kNegInf : v;
  };

  double best_u = 0.0;
  double best = kNegInf;
  for (double u = -kSpan; u <= kSpan; u += 1.0) {
    const double v = g(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  if (best == kNegInf) return {kNegInf, 0.0, evaluations};
  if (std::isinf(best)) throw DomainError("log_integrate_semiinfinite: integrand is infinite");

  // Golden-section refinement of the mode inside the bracketing grid cell.
  {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best_u - 1.0, hi = best_u + 1.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
      if (g1 < g2) {
        lo = x1;
        x1 = x2;
        g1 = g2;
        x2 = lo + phi * (hi - lo);
        g2 = g(x2);
      } else {
        hi = x2;
        x2 = x1;
        g2 = g1;
        x1 = hi - phi * (hi - lo);
        g1 = g(x1);
      }
    }
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm > best) {
      best = gm;
      best_u = mid;
    }
  }

  // Walk outwards with doubling steps until the integrand is negligible.
  auto edge = [&](double dir) {
    for (double step = 0.125;; step *= 2.0) {
      const double next = best_u + dir * step;
      if (std::abs(next) > kSpan + 50.0) return std::pair{next, kNegInf};
      const double v = g(next);
      if (v < best - kDrop) return std::pair{next, v};
    }
  };
  const auto [lo, g_lo] = edge(-1.0);
  const auto [hi, g_hi] = edge(+1.0);

  auto scaled = [&](double u) {
    const double v = g(u) - best;
    return v == kNegInf ? 0.0 : std::exp(v);
  };
  QuadratureOptions inner = opts;
  inner.abs_tol = 0.0;
  inner.max_evaluations = opts.max_evaluations > evaluations ? opts.max_evaluations - evaluations : 1;
  QuadratureResult body;
  try {
    body = integrate_interval(scaled, lo, hi, inner);
  } catch (const QuadratureError& e) {
    throw QuadratureError(std::string("log_integrate_semiinfinite: ") + e.what(),
                          best + std::log(std::max(e.best_value(), 0.0)), e.abs_error_estimate(),
                          evaluations);
  }

  // Tail bound from the local slope at each edge; flat tails fall back to a
  // bound over the remaining representable range.
  auto tail = [&](double u_edge, double g_edge, double dir) {
    if (g_edge == kNegInf) return 0.0;
    const double h = 1e-3;
    const double slope = dir * (g(u_edge + dir * h) - g_edge) / h;
    const double scale = std::exp(g_edge - best);
    if (slope < -1e-3) return scale / -slope;
    return scale * (kSpan + 50.0);
  };
  const double tails = tail(lo, g_lo, -1.0) + tail(hi, g_hi, +1.0);
  const double value = body.value;
  const double rel_err = (body.abs_error_estimate + tails) / value;
  if (!(value > 0.0) || rel_err > opts.rel_tol) {
    throw QuadratureError("log_integrate_semiinfinite: tolerance not reached",
                          best + std::log(std::max(value, 0.0)), rel_err, evaluations);
  }
  return {best + std::log(value), rel_err, evaluations};
}

template <class LogF>
LogQuadratureResult log_integrate_semiinfinite(LogF&& log_f, double rel_tol = 1e-10) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  return log_integrate_semiinfinite(std::forward<LogF>(log_f), opts);
}

}  // namespace gnbfit
