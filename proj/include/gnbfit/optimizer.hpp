#pragma once

// Nelder-Mead simplex search with in-place restarts, multi-start driver and
// the coordinate transforms that let it walk an unconstrained space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gnbfit/errors.hpp"

namespace gnbfit {

struct SimplexOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double x_tol = 1e-8;
  double f_tol = 1e-10;
  std::size_t max_iters = 2000;  ///< across all restarts
  std::size_t restarts = 5;

  void validate() const {
    if (!(reflection > 0.0) || !(expansion > 1.0) || !(contraction > 0.0 && contraction < 1.0) ||
        !(shrink > 0.0 && shrink < 1.0)) {
      throw DomainError("SimplexOptions: coefficients out of range");
    }
    if (!(x_tol >= 0.0) || !(f_tol >= 0.0)) throw DomainError("SimplexOptions: negative tolerance");
  }
};

struct OptimResult {
  std::vector<double> x_min;
  double f_min = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::size_t restart_index = 0;  ///< index of the start that produced x_min
};

namespace detail {

struct Vertex {
  std::vector<double> x;
  double f;
};

// Runs one simplex from x0 until the diameter is within x_tol and the
// f-spread within f_tol, or the iteration budget runs out; returns the best
// vertex, updating the counters.
template <class Eval>
Vertex nelder_mead_run(Eval& eval, const Vertex& start, const SimplexOptions& opts,
                       std::size_t& iterations, bool& converged) {
  const std::size_t n = start.x.size();
  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  simplex.push_back(start);
  for (std::size_t i = 0; i < n; ++i) {
    Vertex v = start;
    v.x[i] += 0.05 * std::max(std::abs(start.x[i]), 1.0);
    v.f = eval(v.x);
    simplex.push_back(std::move(v));
  }

  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  auto point = [&](const std::vector<double>& c, double t, const std::vector<double>& toward) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = c[j] + t * (toward[j] - c[j]);
    return out;
  };

  converged = false;
  order();
  while (true) {
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        diameter = std::max(diameter, std::abs(simplex[i].x[j] - simplex[0].x[j]));
      }
    }
    const double spread = simplex[n].f - simplex[0].f;
    // Both must hold: an f-spread test alone stops a quadratic ~sqrt(f_tol) from its minimum.
    if (diameter <= opts.x_tol && spread <= opts.f_tol) {
      converged = true;
      break;
    }
    if (iterations >= opts.max_iters) break;
    ++iterations;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    Vertex& worst = simplex[n];
    const double f_best = simplex[0].f;
    const double f_second = simplex[n - 1].f;

    Vertex reflected{point(centroid, -opts.reflection, worst.x), 0.0};
    reflected.f = eval(reflected.x);

    bool accepted = false;
    if (reflected.f < f_best) {
      Vertex expanded{point(centroid, -opts.reflection * opts.expansion, worst.x), 0.0};
      expanded.f = eval(expanded.x);
      worst = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
      accepted = true;
    } else if (reflected.f < f_second) {
      worst = std::move(reflected);
      accepted = true;
    } else if (reflected.f < worst.f) {
      Vertex outside{point(centroid, opts.contraction, reflected.x), 0.0};
      outside.f = eval(outside.x);
      if (outside.f <= reflected.f) {
        worst = std::move(outside);
        accepted = true;
      }
    } else {
      Vertex inside{point(centroid, opts.contraction, worst.x), 0.0};
      inside.f = eval(inside.x);
      if (inside.f < worst.f) {
        worst = std::move(inside);
        accepted = true;
      }
    }
    if (!accepted) {
      for (std::size_t i = 1; i <= n; ++i) {
        simplex[i].x = point(simplex[0].x, opts.shrink, simplex[i].x);
        simplex[i].f = eval(simplex[i].x);
      }
    }
    order();
  }
  return simplex[0];
}

}  // namespace detail

/// Minimizes f from x0. Non-finite values during the search count as +inf.
/// After convergence the simplex is rebuilt at the best point up to
/// opts.restarts times, stopping early once a restart gains nothing.
template <class F>
OptimResult minimize(F&& f, std::vector<double> x0, const SimplexOptions& opts = {}) {
  opts.validate();
  if (x0.empty()) throw DomainError("minimize: dimension must be at least 1");
  OptimResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  const double f0 = f(x0);
  ++result.evaluations;
  if (!std::isfinite(f0)) throw DomainError("minimize: objective is not finite at the start point");

  detail::Vertex best{std::move(x0), f0};
  bool converged = false;
  for (std::size_t round = 0; round <= opts.restarts; ++round) {
    const double before = best.f;
    detail::Vertex next = detail::nelder_mead_run(eval, best, opts, result.iterations, converged);
    if (next.f <= best.f) best = std::move(next);
    if (!converged) break;
    if (round > 0 && before - best.f <= opts.f_tol) break;
  }
  result.x_min = std::move(best.x);
  result.f_min = best.f;
  result.converged = converged;
  return result;
}

/// Best minimize() result over the starts; ties keep the earliest start.
template <class F>
OptimResult minimize_multistart(F&& f, std::span<const std::vector<double>> starts,
                                const SimplexOptions& opts = {}) {
  if (starts.empty()) throw DomainError("minimize_multistart: no starts");
  OptimResult best;
  bool have = false;
  std::string failures;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    try {
      OptimResult r = minimize(f, starts[i], opts);
      r.restart_index = i;
      if (!have || r.f_min < best.f_min) {
        best = std::move(r);
        have = true;
      }
    } catch (const std::exception& e) {
      failures += "start " + std::to_string(i) + ": " + e.what() + "; ";
    }
  }
  if (!have) throw EstimationError("minimize_multistart: every start failed: " + failures);
  return best;
}

// --- transforms --------------------------------------------------------------

enum class CoordinateDomain { positive, nonzero_signed, unbounded };

/// Bijection between natural and internal (unconstrained) coordinates.
///   positive:       u = ln x,                      x = max(e^u, DBL_MIN)
///   nonzero_signed: u = sign(x)(ln|x| + ln 1000),  |x| = max(e^(|u| - ln 1000), 1e-3)
///   unbounded:      identity
/// The nonzero_signed map sends x = ±1 to u = ±ln 1000 and back exactly.
class ParamTransform {
 public:
  static constexpr double kSignedFloor = 1e-3;

  explicit ParamTransform(std::vector<CoordinateDomain> domains) : domains_(std::move(domains)) {
    if (domains_.empty()) throw DomainError("make_transform: empty coordinate list");
  }

  std::size_t size() const noexcept { return domains_.size(); }
  std::span<const CoordinateDomain> domains() const noexcept { return domains_; }

  std::vector<double> to_internal(std::span<const double> natural) const {
    check_size(natural.size());
    std::vector<double> out(natural.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double x = natural[i];
      switch (domains_[i]) {
        case CoordinateDomain::positive:
          if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("transform: value must be positive");
          out[i] = std::log(x);
          break;
        case CoordinateDomain::nonzero_signed:
          if (!(std::abs(x) >= kSignedFloor) || !std::isfinite(x)) {
            throw DomainError("transform: |value| must be at least 1e-3");
          }
          out[i] = std::copysign(std::log(std::abs(x)) + log_floor_inv(), x);
          break;
        case CoordinateDomain::unbounded:
          if (!std::isfinite(x)) throw DomainError("transform: value must be finite");
          out[i] = x;
          break;
      }
    }
    return out;
  }

  std::vector<double> to_natural(std::span<const double> internal) const {
    check_size(internal.size());
    std::vector<double> out(internal.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double u = internal[i];
      switch (domains_[i]) {
        case CoordinateDomain::positive:
          out[i] = std::max(std::exp(u), std::numeric_limits<double>::min());
          break;
        case CoordinateDomain::nonzero_signed:
          out[i] = std::copysign(std::max(std::exp(std::abs(u) - log_floor_inv()), kSignedFloor), u);
          break;
        case CoordinateDomain::unbounded:
          out[i] = u;
          break;
      }
    }
    return out;
  }

 private:
  static double log_floor_inv() { return std::log(1.0 / kSignedFloor); }

  void check_size(std::size_t n) const {
    if (n != domains_.size()) throw DomainError("transform: dimension mismatch");
  }

  std::vector<CoordinateDomain> domains_;
};

inline ParamTransform make_transform(std::vector<CoordinateDomain> domains) {
  return ParamTransform(std::move(domains));
}

}  // namespace gnbfit
