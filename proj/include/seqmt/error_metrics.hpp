#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqmt/procedures.hpp"
#include "seqmt/theory.hpp"

namespace seqmt {

enum class ErrorMetric { fwe1, fwe2, pce1, pce2, fdr1, fdr2, pfdr1, pfdr2 };

inline std::string metric_name(ErrorMetric m) {
  switch (m) {
    case ErrorMetric::fwe1: return "fwe1";
    case ErrorMetric::fwe2: return "fwe2";
    case ErrorMetric::pce1: return "pce1";
    case ErrorMetric::pce2: return "pce2";
    case ErrorMetric::fdr1: return "fdr1";
    case ErrorMetric::fdr2: return "fdr2";
    case ErrorMetric::pfdr1: return "pfdr1";
    case ErrorMetric::pfdr2: return "pfdr2";
  }
  return "?";
}

struct ErrorReport {
  ErrorMetric metric = ErrorMetric::fwe1;
  double value = 0.0;
  double std_error = 0.0;
  bool defined = true;  // false only for pFDR with an empty conditioning event
};

namespace detail {

struct RecordCounts {
  int false_pos = 0;   // |D \ A|
  int false_neg = 0;   // |A \ D|
  int discoveries = 0; // |D|
};

inline RecordCounts count_errors(const DecisionRecord& rec,
                                 const SignalConfig& config) {
  RecordCounts c;
  for (int k = 0; k < config.num_streams(); ++k) {
    bool declared = rec.decision[k] == 1;
    if (declared) ++c.discoveries;
    if (declared && !config.is_signal(k)) ++c.false_pos;
    if (!declared && config.is_signal(k)) ++c.false_neg;
  }
  return c;
}

}  // namespace detail

// Sample estimate of one error metric over a batch of completed records.
// FWE uses indicators, PCE error proportions, FDR false-discovery fractions
// with the 0/0 = 0 convention, and pFDR conditions FDR on at least one
// discovery (type I) or at least one null declaration (type II).
inline ErrorReport empirical_error(std::span<const DecisionRecord> records,
                                   const SignalConfig& config, ErrorMetric metric) {
  if (records.empty()) throw std::invalid_argument("empirical_error: empty batch");
  int K = config.num_streams();
  std::size_t n = records.size();

  bool conditional =
      metric == ErrorMetric::pfdr1 || metric == ErrorMetric::pfdr2;
  double sum = 0.0, sum_sq = 0.0;
  double cond_sum = 0.0;
  std::size_t cond_n = 0;

  for (const DecisionRecord& rec : records) {
    auto c = detail::count_errors(rec, config);
    double stat = 0.0;
    bool in_event = true;
    switch (metric) {
      case ErrorMetric::fwe1: stat = c.false_pos > 0 ? 1.0 : 0.0; break;
      case ErrorMetric::fwe2: stat = c.false_neg > 0 ? 1.0 : 0.0; break;
      case ErrorMetric::pce1: stat = static_cast<double>(c.false_pos) / K; break;
      case ErrorMetric::pce2: stat = static_cast<double>(c.false_neg) / K; break;
      case ErrorMetric::fdr1:
      case ErrorMetric::pfdr1:
        stat = c.discoveries > 0
                   ? static_cast<double>(c.false_pos) / c.discoveries
                   : 0.0;
        in_event = c.discoveries > 0;
        break;
      case ErrorMetric::fdr2:
      case ErrorMetric::pfdr2:
        stat = c.discoveries < K
                   ? static_cast<double>(c.false_neg) / (K - c.discoveries)
                   : 0.0;
        in_event = c.discoveries < K;
        break;
    }
    sum += stat;
    sum_sq += stat * stat;
    if (in_event) {
      cond_sum += stat;
      ++cond_n;
    }
  }

  ErrorReport rep;
  rep.metric = metric;
  if (!conditional) {
    double mean = sum / n;
    double var = n > 1 ? (sum_sq - n * mean * mean) / (n - 1) : 0.0;
    rep.value = mean;
    rep.std_error = std::sqrt(std::max(var, 0.0) / n);
    return rep;
  }

  // Ratio estimate pFDR = mean(stat) / mean(indicator), with a delta-method
  // standard error; undefined when the conditioning event never occurred.
  if (cond_n == 0) {
    rep.defined = false;
    return rep;
  }
  double num = sum / n;
  double den = static_cast<double>(cond_n) / n;
  double ratio = num / den;
  double var_acc = 0.0;
  for (const DecisionRecord& rec : records) {
    auto c = detail::count_errors(rec, config);
    double stat, ind;
    if (metric == ErrorMetric::pfdr1) {
      ind = c.discoveries > 0 ? 1.0 : 0.0;
      stat = c.discoveries > 0
                 ? static_cast<double>(c.false_pos) / c.discoveries
                 : 0.0;
    } else {
      ind = c.discoveries < K ? 1.0 : 0.0;
      stat = c.discoveries < K
                 ? static_cast<double>(c.false_neg) / (K - c.discoveries)
                 : 0.0;
    }
    double infl = (stat - ratio * ind) / den;
    var_acc += infl * infl;
  }
  rep.value = ratio;
  rep.std_error = std::sqrt(var_acc / n) / std::sqrt(static_cast<double>(n));
  return rep;
}

struct SandwichCheck {
  GemConstants constants{};
  ErrorReport fwe{};
  ErrorReport gem{};
  double lower = 0.0;  // C2 * FWE minus slack
  double upper = 0.0;  // C1 * FWE plus slack
  bool defined = false;
  bool holds = false;
};

// Verifies C2 * FWE <= GEM <= C1 * FWE on one empirical batch, with a
// sigma_slack-sized allowance for the Monte Carlo noise of both estimates.
// The PCE and FDR sandwiches hold path by path; the pFDR one is an identity
// between expectations only, so it genuinely needs the slack.
inline SandwichCheck gem_sandwich_check(std::span<const DecisionRecord> records,
                                        const SignalConfig& config,
                                        GemFamily family,
                                        const PriorBounds& prior,
                                        int error_type,
                                        double sigma_slack = 3.0) {
  if (error_type != 1 && error_type != 2)
    throw std::invalid_argument("gem_sandwich_check: error_type must be 1 or 2");
  ErrorMetric gem_metric;
  switch (family) {
    case GemFamily::pce:
      gem_metric = error_type == 1 ? ErrorMetric::pce1 : ErrorMetric::pce2;
      break;
    case GemFamily::fdr:
      gem_metric = error_type == 1 ? ErrorMetric::fdr1 : ErrorMetric::fdr2;
      break;
    default:
      gem_metric = error_type == 1 ? ErrorMetric::pfdr1 : ErrorMetric::pfdr2;
      break;
  }
  SandwichCheck out;
  out.constants = gem_constants(family, prior);
  out.fwe = empirical_error(
      records, config, error_type == 1 ? ErrorMetric::fwe1 : ErrorMetric::fwe2);
  out.gem = empirical_error(records, config, gem_metric);
  out.defined = out.gem.defined;
  if (!out.defined) return out;
  double c1 = out.constants.C1, c2 = out.constants.C2;
  out.lower = c2 * out.fwe.value -
              sigma_slack * (c2 * out.fwe.std_error + out.gem.std_error);
  out.upper = c1 * out.fwe.value +
              sigma_slack * (c1 * out.fwe.std_error + out.gem.std_error);
  out.holds = out.gem.value >= out.lower && out.gem.value <= out.upper;
  return out;
}

}  // namespace seqmt
