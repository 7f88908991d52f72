#pragma once

// Command-line workflow: read or synthesize a sample, fit the requested
// (family, metric) cells and write a JSON report plus optional plot CSV.
//
// Report layout:
//   { "input": { "path" | "synth": {...}, "n", "binning", "N_b" },
//     "cells": [ { "family", "metric", "params": {"r", "gamma", "mu" | "p"},
//                  "achieved_objective", "errors": {"l1", "l2", "linf"},
//                  "converged", "starts_used", "iterations" } ],
//     "failures": [ { "family", "metric", "message" } ] }
// Numbers carry 15 significant digits.
//
// Exit codes: 0 every cell converged, 1 bad configuration, 2 unreadable or
// malformed input, 3 a cell failed or did not converge (completed cells are
// still written).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnbfit/errors.hpp"
#include "gnbfit/fitting.hpp"
#include "gnbfit/sampling.hpp"

namespace gnbfit {

enum class FamilyChoice { nb, gnb, gamma, gg, auto_pair };

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitEstimation = 3;

struct SynthSpec {
  ModelFamily family = ModelFamily::gnb;
  double r = 1.0;
  double gamma_exp = 1.0;
  double mu = 1.0;
  std::size_t n = 0;
};

struct RunConfig {
  std::optional<std::string> input_path;
  std::optional<SynthSpec> synth;
  FamilyChoice family = FamilyChoice::auto_pair;
  std::vector<MetricKind> metrics;
  std::optional<double> fix_r;
  std::optional<std::string> output_json_path;  ///< stdout when empty
  std::optional<std::string> output_csv_path;
  std::uint64_t seed = 1;
};

// --- parsing ---------------------------------------------------------------

inline std::optional<ModelFamily> parse_family(std::string_view s) {
  if (s == "nb") return ModelFamily::nb;
  if (s == "gnb") return ModelFamily::gnb;
  if (s == "gamma") return ModelFamily::gamma;
  if (s == "gg") return ModelFamily::gg;
  return std::nullopt;
}

inline std::optional<MetricKind> parse_metric(std::string_view s) {
  if (s == "l1") return MetricKind::l1;
  if (s == "l2") return MetricKind::l2;
  if (s == "linf") return MetricKind::linf;
  return std::nullopt;
}

inline std::optional<double> parse_real(std::string_view token) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// "FAMILY,r=..,gamma=..,mu=..,n=.." ; nb also accepts p= in place of mu=.
inline SynthSpec parse_synth(std::string_view text) {
  SynthSpec spec;
  std::vector<std::string_view> parts;
  while (true) {
    const auto comma = text.find(',');
    parts.push_back(text.substr(0, comma));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  const auto family = parse_family(parts.front());
  if (!family) throw DomainError("--synth: unknown family '" + std::string(parts.front()) + "'");
  spec.family = *family;
  bool have_r = false, have_mu = false, have_n = false, have_gamma = false;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) throw DomainError("--synth: expected key=value");
    const auto key = parts[i].substr(0, eq);
    const auto value = parse_real(parts[i].substr(eq + 1));
    if (!value) throw DomainError("--synth: bad number for " + std::string(key));
    if (key == "r") {
      spec.r = *value;
      have_r = true;
    } else if (key == "gamma") {
      spec.gamma_exp = *value;
      have_gamma = true;
    } else if (key == "mu") {
      spec.mu = *value;
      have_mu = true;
    } else if (key == "p" && spec.family == ModelFamily::nb) {
      if (!(*value > 0.0 && *value < 1.0)) throw DomainError("--synth: p must lie in (0, 1)");
      spec.mu = *value / (1.0 - *value);
      have_mu = true;
    } else if (key == "n") {
      if (!(*value >= 1.0) || *value != std::floor(*value)) {
        throw DomainError("--synth: n must be a positive integer");
      }
      spec.n = static_cast<std::size_t>(*value);
      have_n = true;
    } else {
      throw DomainError("--synth: unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_r || !have_mu || !have_n) throw DomainError("--synth: r, mu (or p) and n are required");
  if (have_gamma && !is_generalized(spec.family) && spec.gamma_exp != 1.0) {
    throw DomainError("--synth: classical families have gamma = 1");
  }
  (void)GGParams(spec.r, spec.gamma_exp, spec.mu);
  return spec;
}

/// Whitespace-separated decimal numbers; blank lines and '#' comment lines
/// are skipped. Integer-valued content gives a discrete sample. Bad tokens
/// raise ParseError, negative values DomainError.
inline Sample parse_input(std::istream& in, std::string provenance = {}) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string token;
    bool first = true;
    while (tokens >> token) {
      if (first && token.front() == '#') break;
      first = false;
      const auto v = parse_real(token);
      if (!v) throw ParseError("not a number: '" + token + "'", line_no);
      if (*v < 0.0) {
        throw DomainError("line " + std::to_string(line_no) + ": negative value '" + token + "'");
      }
      values.push_back(*v);
    }
  }
  return Sample::from_values(std::move(values), std::move(provenance));
}

inline Sample parse_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
  return parse_input(in, path);
}

inline Sample synthesize(const SynthSpec& spec, std::uint64_t seed) {
  const GGParams params(spec.r, spec.gamma_exp, spec.mu);
  if (is_discrete(spec.family)) return Sample::from_counts(sample_gnb(params, spec.n, seed), "synth");
  return {sample_gg(params, spec.n, seed), SampleKind::continuous, "synth"};
}

// --- output ------------------------------------------------------------------

/// x rounded to 15 significant digits.
inline double round15(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return std::strtod(buf, nullptr);
}

inline nlohmann::ordered_json params_json(const FitResult& fit) {
  nlohmann::ordered_json p;
  p["r"] = round15(fit.params.r);
  p["gamma"] = round15(fit.params.gamma_exp);
  if (fit.family == ModelFamily::nb) {
    p["p"] = round15(fit.params.p());
  } else {
    p["mu"] = round15(fit.params.mu);
  }
  return p;
}

inline nlohmann::ordered_json cell_json(const FitResult& fit) {
  nlohmann::ordered_json cell;
  cell["family"] = to_string(fit.family);
  cell["metric"] = to_string(fit.metric);
  cell["params"] = params_json(fit);
  cell["achieved_objective"] = round15(fit.achieved_objective);
  nlohmann::ordered_json errors;
  for (MetricKind m : kAllMetrics) errors[to_string(m)] = round15(fit.errors.at(m));
  cell["errors"] = errors;
  cell["converged"] = fit.converged;
  cell["starts_used"] = fit.starts_used;
  cell["iterations"] = fit.iterations;
  return cell;
}

/// Fitted pmf at each bin's value (discrete) or density at each bin's
/// midpoint (continuous).
inline std::vector<double> fitted_curve(const FitResult& fit) {
  const Histogram& h = fit.histogram;
  std::vector<double> out(h.bin_count());
  if (is_discrete(fit.family)) {
    const auto log_pmf =
        gnb_log_pmf_range(h.value(0), h.value(h.bin_count() - 1), fit.params.gg());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_pmf[i]);
  } else {
    const GGParams p = fit.params.gg();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = gg_pdf(h.midpoint(i), p);
  }
  return out;
}

/// bin_left,bin_right,height then one fitted column per cell.
inline std::string plot_csv(const Histogram& hist, const std::vector<FitResult>& fits) {
  std::string out = "bin_left,bin_right,height";
  std::vector<std::vector<double>> curves;
  for (const auto& f : fits) {
    out += std::string(",") + to_string(f.family) + "_" + to_string(f.metric);
    curves.push_back(fitted_curve(f));
  }
  out += "\n";
  char buf[40];
  for (std::size_t i = 0; i < hist.bin_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%.15g", hist.left(i));
    out += buf;
    std::snprintf(buf, sizeof buf, ",%.15g", hist.right(i));
    out += buf;
    std::snprintf(buf, sizeof buf, ",%.15g", hist.heights()[i]);
    out += buf;
    for (const auto& c : curves) {
      std::snprintf(buf, sizeof buf, ",%.15g", c[i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

/// Writes via a sibling temporary file and rename.
inline void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

// --- run -----------------------------------------------------------------------

inline std::vector<ModelFamily> families_for(FamilyChoice choice, SampleKind kind) {
  switch (choice) {
    case FamilyChoice::nb: return {ModelFamily::nb};
    case FamilyChoice::gnb: return {ModelFamily::gnb};
    case FamilyChoice::gamma: return {ModelFamily::gamma};
    case FamilyChoice::gg: return {ModelFamily::gg};
    case FamilyChoice::auto_pair:
      if (kind == SampleKind::discrete) return {ModelFamily::nb, ModelFamily::gnb};
      return {ModelFamily::gamma, ModelFamily::gg};
  }
  return {};
}

inline int run(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (config.input_path.has_value() == config.synth.has_value()) {
    err << "error: exactly one of --input and --synth is required\n";
    return kExitUsage;
  }
  if (config.metrics.empty()) {
    err << "error: at least one metric is required\n";
    return kExitUsage;
  }

  Sample sample;
  try {
    sample = config.input_path ? parse_input(*config.input_path) : synthesize(*config.synth, config.seed);
  } catch (const ParseError& e) {
    err << "error: " << config.input_path.value_or("input") << ": " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return config.input_path ? kExitInput : kExitUsage;
  }
  if (sample.values.empty()) {
    err << "error: input contains no observations\n";
    return kExitInput;
  }

  const auto families = families_for(config.family, sample.kind);
  for (ModelFamily f : families) {
    if (is_discrete(f) != (sample.kind == SampleKind::discrete)) {
      err << "warning: fitting " << to_string(f) << " to "
          << (sample.kind == SampleKind::discrete ? "integer-valued" : "non-integer") << " data\n";
    }
  }

  nlohmann::ordered_json report;
  nlohmann::ordered_json input;
  if (config.input_path) {
    input["path"] = *config.input_path;
  } else {
    const auto& s = *config.synth;
    nlohmann::ordered_json synth;
    synth["family"] = to_string(s.family);
    synth["r"] = round15(s.r);
    synth["gamma"] = round15(s.gamma_exp);
    synth["mu"] = round15(s.mu);
    synth["n"] = s.n;
    synth["seed"] = config.seed;
    input["synth"] = synth;
  }
  input["n"] = sample.values.size();
  input["binning"] = to_string(binning_for(families.front()));

  std::vector<FitResult> fits;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  bool all_converged = true;
  for (ModelFamily family : families) {
    for (MetricKind metric : config.metrics) {
      FitRequest req;
      req.family = family;
      req.metric = metric;
      req.fix_r = config.fix_r;
      try {
        FitResult fit_result = fit(sample, req);
        all_converged = all_converged && fit_result.converged;
        if (!fit_result.converged) {
          err << "warning: " << to_string(family) << "/" << to_string(metric)
              << " did not converge\n";
        }
        cells.push_back(cell_json(fit_result));
        fits.push_back(std::move(fit_result));
      } catch (const std::exception& e) {
        all_converged = false;
        err << "error: cell " << to_string(family) << "/" << to_string(metric) << ": " << e.what()
            << "\n";
        nlohmann::ordered_json f;
        f["family"] = to_string(family);
        f["metric"] = to_string(metric);
        f["message"] = e.what();
        failures.push_back(f);
      }
    }
  }
  if (!fits.empty()) {
    input["N_b"] = fits.front().histogram.bin_count();
  } else {
    try {
      input["N_b"] = build_histogram(sample.values, families.front()).bin_count();
    } catch (const std::exception&) {
      // no histogram for this sample; the failures list says why
    }
  }
  report["input"] = input;
  report["cells"] = cells;
  report["failures"] = failures;

  try {
    const std::string json_text = report.dump(2) + "\n";
    if (config.output_json_path) {
      write_atomically(*config.output_json_path, json_text);
    } else {
      out << json_text;
    }
    if (config.output_csv_path && !fits.empty()) {
      write_atomically(*config.output_csv_path, plot_csv(fits.front().histogram, fits));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return all_converged ? kExitOk : kExitEstimation;
}

}  // namespace gnbfit
