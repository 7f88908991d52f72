#pragma once

// Seeded variate generation for synthesizing test data.
//
// Only std::mt19937_64's raw output is used (its sequence is fixed by the
// standard); uniform, normal, gamma and Poisson transforms are local so draws
// are reproducible across standard libraries.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gnbfit/distributions.hpp"
#include "gnbfit/errors.hpp"

namespace gnbfit {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal, Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Gamma(shape, 1): Marsaglia-Tsang with squeeze for shape >= 1; shape < 1
  /// draws Gamma(shape + 1) and scales by U^(1/shape).
  double standard_gamma(double shape) {
    if (shape < 1.0) {
      const double g = standard_gamma(shape + 1.0);
      return std::exp(std::log(g) + std::log(uniform()) / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double z, v;
      do {
        z = normal();
        v = 1.0 + c * z;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double z2 = z * z;
      if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
      if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double gamma(const GammaParams& p) { return standard_gamma(p.r()) / p.mu(); }

  /// G^(1/γ) with G ~ gamma(r, μ).
  double gg(const GGParams& p) {
    const double g = gamma(p.base());
    return p.gamma_exp() == 1.0 ? g : std::pow(g, 1.0 / p.gamma_exp());
  }

  /// Poisson(λ): sequential inversion below 30, PTRS transformed rejection
  /// (Hörmann) above.
  std::uint64_t poisson(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw DomainError("poisson: rate must be finite and nonnegative");
    }
    if (lambda > 4e18) throw DomainError("poisson: rate too large for an integer count");
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) {
      double prob = std::exp(-lambda);
      double cumulative = prob;
      const double u = uniform();
      std::uint64_t k = 0;
      while (u > cumulative) {
        ++k;
        prob *= lambda / static_cast<double>(k);
        cumulative += prob;
        if (prob == 0.0 && cumulative < u) break;  // u beyond representable mass
      }
      return k;
    }
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -lambda + k * loglam - log_gamma(k + 1.0)) {
        return static_cast<std::uint64_t>(k);
      }
    }
  }

  std::uint64_t gnb(const GGParams& p) { return poisson(gg(p)); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::vector<double> sample_gamma(const GammaParams& params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_gamma: n must be at least 1");
  Sampler s(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = s.gamma(params);
  return out;
}

inline std::vector<double> sample_gg(const GGParams& params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_gg: n must be at least 1");
  Sampler s(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = s.gg(params);
  return out;
}

inline std::vector<std::uint64_t> sample_gnb(const GGParams& params, std::size_t n,
                                             std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_gnb: n must be at least 1");
  Sampler s(seed);
  std::vector<std::uint64_t> out(n);
  for (auto& k : out) k = s.gnb(params);
  return out;
}

}  // namespace gnbfit
