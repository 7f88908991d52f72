#pragma once

// Gamma, generalized gamma (GG), negative binomial (NB) and generalized
// negative binomial (GNB) laws.
//
//   gamma:  g(x; r, μ)     = μ^r x^(r-1) e^(-μx) / Γ(r)
//   GG:     g*(x; r, γ, μ) = |γ| μ^r x^(γr-1) e^(-μx^γ) / Γ(r)
//   NB:     P(N=k)         = Γ(r+k) / (k! Γ(r)) p^r (1-p)^k
//   GNB:    P(N=k)         = (1/k!) ∫ e^(-z) z^k g*(z; r, γ, μ) dz
//
// GG contains gamma (γ=1), Weibull (r=1) and inverse gamma (γ=-1); GNB is the
// Poisson law mixed over a GG rate and contains NB (γ=1, p = μ/(1+μ)), Sichel
// (γ=-1) and Weibull-Poisson (r=1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gnbfit/errors.hpp"
#include "gnbfit/numerics.hpp"

namespace gnbfit {

inline constexpr double kMinAbsGammaExp = 1e-3;

namespace detail {

// From this shape on, log densities are evaluated around the mode of the
// gamma kernel (see centred_kernel); below it the direct form is exact enough.
inline constexpr double kCentredShape = 10.0;

/// r ln r - r - ln Γ(r). For r >= 10 the Stirling series gives it to ~1e-14;
/// the direct form would lose about eps·r ln r.
inline double gamma_mode_log_norm(double r, double log_gamma_r) {
  if (r < kCentredShape) return r * std::log(r) - r - log_gamma_r;
  const double w = 1.0 / (r * r);
  const double series =
      (1.0 / 12.0 - w * (1.0 / 360.0 - w * (1.0 / 1260.0 - w * (1.0 / 1680.0 - w / 1188.0)))) / r;
  return 0.5 * std::log(r / (2.0 * std::numbers::pi)) - series;
}

/// r ln t - t - (r ln r - r) at t = r e^v, free of the O(r ln r) cancellation.
inline double centred_kernel(double r, double v) { return -r * (std::expm1(v) - v); }

inline double log_ratio(double a, double b) {
  const double q = a / b;
  return std::isfinite(q) && q > 0.0 ? std::log(q) : std::log(a) - std::log(b);
}

}  // namespace detail

class GammaParams {
 public:
  GammaParams(double r, double mu) : r_(r), mu_(mu) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("GammaParams: r must be positive");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("GammaParams: mu must be positive");
    const double lgr = log_gamma(r);
    log_norm_ = r * std::log(mu) - lgr;
    mode_log_norm_ = detail::gamma_mode_log_norm(r, lgr);
  }

  double r() const noexcept { return r_; }
  double mu() const noexcept { return mu_; }
  /// r·ln μ - ln Γ(r)
  double log_norm() const noexcept { return log_norm_; }
  /// r·ln r - r - ln Γ(r)
  double mode_log_norm() const noexcept { return mode_log_norm_; }

 private:
  double r_;
  double mu_;
  double log_norm_;
  double mode_log_norm_;
};

class GGParams {
 public:
  GGParams(double r, double gamma_exp, double mu) : r_(r), gamma_exp_(gamma_exp), mu_(mu) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("GGParams: r must be positive");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("GGParams: mu must be positive");
    if (!(std::abs(gamma_exp) >= kMinAbsGammaExp) || !std::isfinite(gamma_exp)) {
      throw DomainError("GGParams: |gamma| must be at least 1e-3");
    }
    log_gamma_r_ = log_gamma(r);
    mode_log_norm_ = detail::gamma_mode_log_norm(r, log_gamma_r_);
  }

  double r() const noexcept { return r_; }
  double gamma_exp() const noexcept { return gamma_exp_; }
  double mu() const noexcept { return mu_; }
  double log_gamma_r() const noexcept { return log_gamma_r_; }
  /// r·ln r - r - ln Γ(r)
  double mode_log_norm() const noexcept { return mode_log_norm_; }
  GammaParams base() const { return {r_, mu_}; }

 private:
  double r_;
  double gamma_exp_;
  double mu_;
  double log_gamma_r_;
  double mode_log_norm_;
};

class NBParams {
 public:
  NBParams(double r, double p) : r_(r), p_(p) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("NBParams: r must be positive");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("NBParams: p must lie in (0, 1)");
  }

  /// NB law of the gamma(r, μ)-mixed Poisson.
  static NBParams from_gamma_mixture(double r, double mu) { return {r, mu / (1.0 + mu)}; }

  double r() const noexcept { return r_; }
  double p() const noexcept { return p_; }

 private:
  double r_;
  double p_;
};

// --- densities -------------------------------------------------------------

/// ln g(x; r, μ). At x = 0 with r < 1 the density is infinite and +inf is
/// returned.
inline double gamma_log_pdf(double x, const GammaParams& params) {
  if (!(x >= 0.0)) throw DomainError("gamma_pdf: x must be nonnegative");
  const double r = params.r();
  if (x == 0.0) {
    if (r < 1.0) return kInf;
    if (r > 1.0) return kNegInf;
    return std::log(params.mu());
  }
  const double lx = std::log(x);
  if (r >= detail::kCentredShape) {
    // t = μx = r e^v
    const double v = lx + detail::log_ratio(params.mu(), r);
    return params.mode_log_norm() - lx + detail::centred_kernel(r, v);
  }
  return params.log_norm() + (r - 1.0) * lx - params.mu() * x;
}

inline double gamma_pdf(double x, const GammaParams& params) {
  return std::exp(gamma_log_pdf(x, params));
}

inline double gg_log_pdf(double x, const GGParams& params) {
  const double g = params.gamma_exp();
  if (g == 1.0) return gamma_log_pdf(x, params.base());
  if (!(x >= 0.0)) throw DomainError("gg_pdf: x must be nonnegative");
  const double r = params.r();
  const double mu = params.mu();
  const double log_norm = std::log(std::abs(g)) + r * std::log(mu) - params.log_gamma_r();
  if (x == 0.0) {
    if (g < 0.0) return kNegInf;
    const double power = g * r;
    if (power < 1.0) return kInf;
    if (power > 1.0) return kNegInf;
    return log_norm;
  }
  const double lx = std::log(x);
  if (r >= detail::kCentredShape) {
    // t = μx^γ = r e^v
    const double v = g * lx + detail::log_ratio(mu, r);
    return std::log(std::abs(g)) + params.mode_log_norm() - lx + detail::centred_kernel(r, v);
  }
  return log_norm + (g * r - 1.0) * lx - mu * std::exp(g * lx);
}

/// g*(x; r, γ, μ). For γ = 1 this is exactly gamma_pdf(x; r, μ).
inline double gg_pdf(double x, const GGParams& params) {
  if (params.gamma_exp() == 1.0) return gamma_pdf(x, params.base());
  return std::exp(gg_log_pdf(x, params));
}

/// Largest |g*(x) - |γ| x^(γ-1) g(x^γ; r, μ)| over the probes: the density
/// form of X ~ G^(1/γ) for G ~ gamma(r, μ).
inline double gg_power_identity_check(const GGParams& params, std::span<const double> probe_xs) {
  const double g = params.gamma_exp();
  double worst = 0.0;
  for (double x : probe_xs) {
    if (!(x > 0.0)) throw DomainError("gg_power_identity_check: probes must be positive");
    const double transformed =
        std::abs(g) * std::pow(x, g - 1.0) * gamma_pdf(std::pow(x, g), params.base());
    worst = std::max(worst, std::abs(gg_pdf(x, params) - transformed));
  }
  return worst;
}

// --- NB ----------------------------------------------------------------------

inline double nb_log_pmf(std::uint64_t k, const NBParams& params) {
  const double r = params.r();
  const double kd = static_cast<double>(k);
  return log_gamma(r + kd) - log_gamma(kd + 1.0) - log_gamma(r) + r * std::log(params.p()) +
         kd * std::log1p(-params.p());
}

inline double nb_pmf(std::uint64_t k, const NBParams& params) {
  return std::exp(nb_log_pmf(k, params));
}

// --- GNB ---------------------------------------------------------------------

enum class PmfRoute {
  automatic,  ///< closed NB form when γ == 1, quadrature otherwise
  quadrature  ///< always integrate the mixture
};

namespace detail {

// After t = μ z^γ the mixing law becomes gamma(r, 1). With u = ln t = ln r + v,
//   P(N=k) = ∫ exp(l_k(v)) dv,
//   l_k(v) = C - r·(e^v - 1 - v) + k·s - e^s - ln Γ(k+1),  s = (v + ln r - ln μ)/γ,
//   C = r ln r - r - ln Γ(r).
// Centring at the mode of the gamma factor keeps l_k free of the O(r ln r)
// cancellation that otherwise swamps it when r is large. l_k is strictly
// concave in v, so each k has a single peak.
class GnbLogIntegrand {
 public:
  explicit GnbLogIntegrand(const GGParams& p)
      : r_(p.r()), inv_g_(1.0 / p.gamma_exp()), c_(detail::log_ratio(p.r(), p.mu()) / p.gamma_exp()), log_norm_(p.mode_log_norm()) {}

  double s(double v) const { return v * inv_g_ + c_; }

  /// Part of l_k shared by every k, without the constant C.
  double common(double v) const { return centred_kernel(r_, v) - std::exp(s(v)); }

  double value(double v, double k) const {
    const double l = log_norm_ + common(v) + k * s(v) - log_gamma(k + 1.0);
    return std::isnan(l) ? kNegInf : l;
  }

  double slope(double v, double k) const {
    return -r_ * std::expm1(v) + (k - std::exp(s(v))) * inv_g_;
  }

  double curvature(double v) const {
    return -r_ * std::exp(v) - std::exp(s(v)) * inv_g_ * inv_g_;
  }

  /// Root of slope(·, k), by bracketed Newton. A step that leaves the bracket
  /// or fails to halve the step before last is replaced by bisection, which
  /// keeps Newton from crawling down the e^s wall in steps of γ when |γ| is small.
  double peak(double k) const {
    double lo = 0.0, hi = 0.0;
    for (double step = 1.0; slope(lo, k) <= 0.0; step *= 2.0) lo -= step;
    for (double step = 1.0; slope(hi, k) >= 0.0; step *= 2.0) hi += step;
    double v = 0.5 * (lo + hi);
    double step_old = hi - lo, step = step_old;
    for (int it = 0; it < 200; ++it) {
      const double d = slope(v, k);
      if (d == 0.0) return v;
      (d > 0.0 ? lo : hi) = v;
      const double newton = v - d / curvature(v);
      if (newton > lo && newton < hi && std::isfinite(newton) &&
          std::abs(newton - v) <= 0.5 * std::abs(step_old)) {
        step_old = step;
        step = newton - v;
        v = newton;
      } else {
        step_old = step;
        step = 0.5 * (hi - lo);
        v = lo + step;
      }
      if (hi - lo < 1e-13 * std::max(1.0, std::abs(v))) break;
    }
    return v;
  }

  /// C = r ln r - r - ln Γ(r)
  double log_norm() const { return log_norm_; }

  double r() const { return r_; }
  double inv_g() const { return inv_g_; }

 private:
  double r_;
  double inv_g_;
  double c_;
  double log_norm_;
};

struct GnbPeak {
  double at;
  double log_value;
  double width;
  double lo;
  double hi;
  double log_tail_bound;  // ln of the excluded mass bound, relative to peak
};

inline GnbPeak locate_gnb_peak(const GnbLogIntegrand& f, double k) {
  constexpr double kDrop = 50.0;
  GnbPeak pk{};
  pk.at = f.peak(k);
  pk.log_value = f.value(pk.at, k);
  pk.width = 1.0 / std::sqrt(-f.curvature(pk.at));
  if (!std::isfinite(pk.width) || pk.width <= 0.0) pk.width = 1e-8;
  auto walk = [&](double dir) {
    for (double step = pk.width;; step *= 2.0) {
      const double u = pk.at + dir * step;
      if (f.value(u, k) < pk.log_value - kDrop) return u;
    }
  };
  pk.lo = walk(-1.0);
  pk.hi = walk(+1.0);
  // Concavity: beyond an edge, l(u) <= l(edge) + l'(edge)(u - edge).
  const double left = f.value(pk.lo, k) - pk.log_value - std::log(f.slope(pk.lo, k));
  const double right = f.value(pk.hi, k) - pk.log_value - std::log(-f.slope(pk.hi, k));
  pk.log_tail_bound = log_add(left, right);
  return pk;
}

}  // namespace detail

/// ln P(N_{r,γ,μ} = k) for k = k_lo..k_hi.
///
/// Consecutive k whose integrand peaks lie within a couple of peak widths
/// share one adaptive node set. Accuracy is relative, rel_tol per value.
inline std::vector<double> gnb_log_pmf_range(std::uint64_t k_lo, std::uint64_t k_hi,
                                             const GGParams& params,
                                             PmfRoute route = PmfRoute::automatic,
                                             double rel_tol = 1e-10) {
  if (k_hi < k_lo) throw DomainError("gnb_log_pmf_range: empty range");
  const std::size_t count = static_cast<std::size_t>(k_hi - k_lo + 1);
  std::vector<double> out(count);
  if (route == PmfRoute::automatic && params.gamma_exp() == 1.0) {
    const auto nb = NBParams::from_gamma_mixture(params.r(), params.mu());
    for (std::size_t i = 0; i < count; ++i) out[i] = nb_log_pmf(k_lo + i, nb);
    return out;
  }

  const detail::GnbLogIntegrand f(params);
  std::vector<detail::GnbPeak> peaks(count);
  for (std::size_t i = 0; i < count; ++i) {
    peaks[i] = detail::locate_gnb_peak(f, static_cast<double>(k_lo + i));
  }

  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = 0.0;
  constexpr std::size_t kMaxChunk = 64;

  std::size_t first = 0;
  while (first < count) {
    std::size_t last = first;
    while (last + 1 < count && last + 1 - first < kMaxChunk &&
           std::abs(peaks[last + 1].at - peaks[first].at) <= 2.0 * peaks[first].width) {
      ++last;
    }
    const std::size_t m = last - first + 1;

    double lo = peaks[first].lo, hi = peaks[first].hi;
    for (std::size_t i = first; i <= last; ++i) {
      lo = std::min(lo, peaks[i].lo);
      hi = std::max(hi, peaks[i].hi);
    }
    std::vector<double> cuts = {lo, hi};
    for (std::size_t i : {first, last}) {
      for (double d : {-3.0, 0.0, 3.0}) {
        const double c = peaks[i].at + d * peaks[i].width;
        if (c > lo && c < hi) cuts.push_back(c);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> shift(m);
    for (std::size_t c = 0; c < m; ++c) {
      const double k = static_cast<double>(k_lo + first + c);
      shift[c] = peaks[first + c].log_value - f.log_norm() + log_gamma(k + 1.0);
    }
    auto integrand = [&](double v, std::span<double> values) {
      const double s = f.s(v);
      const double common = f.common(v);
      for (std::size_t c = 0; c < m; ++c) {
        const double k = static_cast<double>(k_lo + first + c);
        const double l = common + k * s - shift[c];
        values[c] = std::isnan(l) ? 0.0 : std::exp(l);
      }
    };

    VectorQuadratureResult res;
    try {
      res = integrate_vector(integrand, cuts, m, opts);
    } catch (const QuadratureError& e) {
      throw QuadratureError(std::string("gnb_pmf(r=") + std::to_string(params.r()) +
                                ", gamma=" + std::to_string(params.gamma_exp()) +
                                ", mu=" + std::to_string(params.mu()) + "): " + e.what(),
                            e.best_value(), e.abs_error_estimate(), e.evaluations());
    }
    for (std::size_t c = 0; c < m; ++c) {
      const auto& pk = peaks[first + c];
      const double tail = std::exp(pk.log_tail_bound);
      if (!(res.values[c] > 0.0) || tail > rel_tol * res.values[c]) {
        throw QuadratureError("gnb_pmf: mixture window excludes too much mass", res.values[c],
                              res.abs_error_estimates[c] + tail, res.evaluations);
      }
      out[first + c] = pk.log_value + std::log(res.values[c]);
    }
    first = last + 1;
  }
  return out;
}

inline double gnb_log_pmf(std::uint64_t k, const GGParams& params,
                          PmfRoute route = PmfRoute::automatic, double rel_tol = 1e-10) {
  return gnb_log_pmf_range(k, k, params, route, rel_tol).front();
}

inline double gnb_pmf(std::uint64_t k, const GGParams& params,
                      PmfRoute route = PmfRoute::automatic, double rel_tol = 1e-10) {
  return std::exp(gnb_log_pmf(k, params, route, rel_tol));
}

/// P(N = k) for k = 0..k_max.
inline std::vector<double> gnb_pmf_batch(std::uint64_t k_max, const GGParams& params,
                                         PmfRoute route = PmfRoute::automatic,
                                         double rel_tol = 1e-10) {
  auto out = gnb_log_pmf_range(0, k_max, params, route, rel_tol);
  for (double& v : out) v = std::exp(v);
  return out;
}

/// E[Λ] for Λ ~ GG(r, γ, μ), which is also the GNB mean; +inf when r + 1/γ <= 0.
inline double gg_mean(const GGParams& params) {
  const double shifted = params.r() + 1.0 / params.gamma_exp();
  if (!(shifted > 0.0)) return kInf;
  const double log_mean = log_gamma(shifted) - params.log_gamma_r() -
                          std::log(params.mu()) / params.gamma_exp();
  return std::exp(log_mean);
}

struct GnbTruncation {
  std::uint64_t k_max = 0;  ///< last index kept
  double mass = 0.0;        ///< Σ_{k<=k_max} P(N=k)
  bool capped = false;      ///< cap reached before the mass target
};

/// Smallest K with Σ_{k<=K} P(N=k) >= target_mass, capped at
/// max(10·mean, 10^4) and never above 10^6 (infinite mean uses 10^4).
inline GnbTruncation gnb_truncation_point(const GGParams& params, double target_mass = 1.0 - 1e-10) {
  const double mean = gg_mean(params);
  double cap = 1e4;
  if (std::isfinite(mean)) cap = std::min(std::max(std::ceil(10.0 * mean), 1e4), 1e6);
  const auto k_cap = static_cast<std::uint64_t>(cap);

  GnbTruncation t;
  std::uint64_t lo = 0;
  std::uint64_t block = 64;
  while (lo <= k_cap) {
    const std::uint64_t hi = std::min(lo + block - 1, k_cap);
    const auto probs = gnb_log_pmf_range(lo, hi, params);
    for (std::uint64_t i = 0; i < probs.size(); ++i) {
      t.mass += std::exp(probs[i]);
      t.k_max = lo + i;
      if (t.mass >= target_mass) return t;
    }
    lo = hi + 1;
    block *= 2;
  }
  t.capped = true;
  return t;
}

/// P(N_{r,γ,μ}=k+1) - [(γr+k)/(k+1)·P(N_{r,γ,μ}=k) - γr/(k+1)·P(N_{r+1,γ,μ}=k)].
///
/// Integration by parts of the mixture integral gives the γr coefficient on
/// the shifted-shape term; the identity holds for either sign of γ.
inline double gnb_recurrence_residual(std::uint64_t k, const GGParams& params,
                                      PmfRoute route = PmfRoute::automatic) {
  const double g = params.gamma_exp();
  const double r = params.r();
  const double kd = static_cast<double>(k);
  const auto pair = gnb_log_pmf_range(k, k + 1, params, route);
  const double shifted = gnb_pmf(k, GGParams(r + 1.0, g, params.mu()), route);
  const double p_k = std::exp(pair[0]);
  const double p_next = std::exp(pair[1]);
  return p_next - ((g * r + kd) / (kd + 1.0) * p_k - g * r / (kd + 1.0) * shifted);
}

}  // namespace gnbfit
