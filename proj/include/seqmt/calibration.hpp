#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqmt/error_metrics.hpp"
#include "seqmt/procedures.hpp"
#include "seqmt/statistics.hpp"
#include "seqmt/theory.hpp"

namespace seqmt {

// Threshold recipes that guarantee the familywise error targets by the union
// bounds: the per-stream exits carry |A^c| e^{-a} / |A| e^{-b}, the gap exits
// m(K-m) e^{-c} / e^{-d} (l = u) or (K-l)K e^{-c} / uK e^{-d} (l < u).
inline Thresholds analytic_thresholds(ProcedureKind kind,
                                      const ErrorTargets& targets,
                                      const PriorBounds& prior) {
  double la = -std::log(targets.alpha);
  double lb = -std::log(targets.beta);
  Thresholds t;
  if (kind == ProcedureKind::sprt) {
    t.a = la + std::log(static_cast<double>(prior.K - prior.l));
    t.b = lb + std::log(static_cast<double>(prior.u));
    t.c = t.a;
    t.d = t.b;
    return t;
  }
  if (prior.l == prior.u) {
    double m = prior.l;
    t.c = la + std::log(m * (prior.K - m));
    t.d = lb + std::log(m * (prior.K - m));
    t.a = t.c;  // not read by the l = u rules
    t.b = t.d;
    return t;
  }
  t.a = la + std::log(static_cast<double>(prior.K));
  t.b = lb + std::log(static_cast<double>(prior.K));
  t.c = la + std::log(static_cast<double>((prior.K - prior.l) * prior.K));
  t.d = lb + std::log(static_cast<double>(prior.u * prior.K));
  return t;
}

struct FweEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

namespace detail {

// One change of measure: up_stream is sampled from its alternative although it
// is a noise stream (or, for type II, the mirrored role), down_stream from its
// null although it is a signal. log_prior_weight is the log of the unnormalized
// mixture weight, taken from the error-bound term the component covers.
struct TiltComponent {
  int up_stream = -1;    // sampled as signal regardless of the truth
  int down_stream = -1;  // sampled as noise regardless of the truth
  double log_prior_weight = 0.0;
};

// Components mirror the structure of the error bounds. SPRT-style exits get
// one tilted stream; gap exits need an overtaking / overtaken pair to reach
// the error event with linear drift. Gap pairs matter only when the rule has a
// gap exit of the requested error type that a wrong decision can actually use:
// always when l = u, and at the binding set size when l < u.
inline std::vector<TiltComponent> build_components(ProcedureKind kind,
                                                   const SignalConfig& config,
                                                   const Thresholds& t,
                                                   const PriorBounds& p,
                                                   int error_type) {
  std::vector<TiltComponent> out;
  std::vector<int> signals, noises;
  for (int k = 0; k < config.num_streams(); ++k)
    (config.is_signal(k) ? signals : noises).push_back(k);

  bool sprt = kind == ProcedureKind::sprt;
  int s = config.size();
  if (error_type == 1) {
    bool a_exit = sprt || p.l < p.u;
    bool gap_exit = !sprt && p.l >= 1 && (p.l == p.u || s == p.l);
    if (a_exit)
      for (int j : noises) out.push_back({j, -1, -t.a});
    if (gap_exit)
      for (int j : noises)
        for (int i : signals) out.push_back({j, i, -t.c});
  } else {
    bool b_exit = sprt || p.l < p.u;
    bool gap_exit = !sprt && p.u <= p.K - 1 && (p.l == p.u || s == p.u);
    if (b_exit)
      for (int i : signals) out.push_back({-1, i, -t.b});
    if (gap_exit)
      for (int i : signals)
        for (int j : noises) out.push_back({j, i, -t.d});
  }
  return out;
}

inline bool is_error(const SignalConfig& config, int stream, int decision,
                     int error_type) {
  if (error_type == 1) return decision == 1 && !config.is_signal(stream);
  return decision == 0 && config.is_signal(stream);
}

}  // namespace detail

// Familywise error estimate by importance sampling. The proposal is a mixture
// of exponential tilts (one mixture component per replication, drawn with
// probability proportional to its bound term), and the likelihood ratio
// against the mixture is evaluated at the first time the requested error type
// is committed. Replications that finish with no such error contribute zero.
// Unbiased for any component set because every tilt is equivalent to the
// nominal measure.
template <StreamModel M>
FweEstimate is_fwe_estimate(ProcedureKind kind, std::span<const M> models,
                            const SignalConfig& config, const Thresholds& t,
                            const PriorBounds& prior, int error_type,
                            std::int64_t replications, std::uint64_t master_seed,
                            std::uint64_t cell = 0, int horizon = 1000000) {
  int K = static_cast<int>(models.size());
  auto comps = detail::build_components(kind, config, t, prior, error_type);
  if (comps.empty()) return {0.0, 0.0};  // no stream can commit this error type

  double max_lw = comps[0].log_prior_weight;
  for (const auto& c : comps) max_lw = std::max(max_lw, c.log_prior_weight);
  double norm = 0.0;
  std::vector<double> cum(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    norm += std::exp(comps[i].log_prior_weight - max_lw);
    cum[i] = norm;
  }
  double log_norm = max_lw + std::log(norm);

  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> inc(K);
  std::vector<char> undecided(K);

  for (std::int64_t rep = 0; rep < replications; ++rep) {
    Rng rng(replication_seed(master_seed, cell, static_cast<std::uint64_t>(rep)));
    double pick = rng.uniform() * norm;
    std::size_t w = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    if (w >= comps.size()) w = comps.size() - 1;
    const auto& comp = comps[w];

    LlrState state(K);
    std::fill(undecided.begin(), undecided.end(), 1);
    int remaining = K;
    bool error_hit = false;

    for (int n = 1; n <= horizon && remaining > 0 && !error_hit; ++n) {
      for (int k = 0; k < K; ++k) {
        bool as_signal = config.is_signal(k);
        if (k == comp.up_stream) as_signal = true;
        if (k == comp.down_stream) as_signal = false;
        inc[k] = models[k].llr_increment(models[k].sample(as_signal, rng));
      }
      state.advance(inc);

      if (kind == ProcedureKind::synchronous) {
        if (auto dec = synchronous_fire(state, t, prior)) {
          remaining = 0;
          for (int k = 0; k < K && !error_hit; ++k)
            error_hit = detail::is_error(config, k, (*dec)[k], error_type);
        }
      } else {
        for (auto [k, d] : step_decisions(kind, state, t, prior, undecided)) {
          undecided[k] = 0;
          --remaining;
          if (detail::is_error(config, k, d, error_type)) error_hit = true;
        }
      }
    }
    if (remaining > 0 && !error_hit)
      throw HorizonExhausted("is_fwe_estimate: replication hit the horizon");

    double value = 0.0;
    if (error_hit) {
      // 1 / sum_w wbar_w exp(M_w), with M_w the tilt's log likelihood ratio at
      // the error time, evaluated as a log-sum-exp.
      double max_term = -std::numeric_limits<double>::infinity();
      double acc = 0.0;
      for (const auto& c : comps) {
        double m = 0.0;
        if (c.up_stream >= 0) m += state.value(c.up_stream);
        if (c.down_stream >= 0) m -= state.value(c.down_stream);
        double term = c.log_prior_weight - log_norm + m;
        if (term > max_term) {
          acc = acc * std::exp(max_term - term) + 1.0;
          max_term = term;
        } else {
          acc += std::exp(term - max_term);
        }
      }
      value = std::exp(-(max_term + std::log(acc)));
    }
    sum += value;
    sum_sq += value * value;
  }

  double n = static_cast<double>(replications);
  double mean = sum / n;
  double var = n > 1 ? (sum_sq - n * mean * mean) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

// Direct Monte Carlo counterpart; replications stop at the first error of the
// requested type, which leaves the indicator unchanged.
template <StreamModel M>
FweEstimate plain_fwe_estimate(ProcedureKind kind, std::span<const M> models,
                               const SignalConfig& config, const Thresholds& t,
                               const PriorBounds& prior, int error_type,
                               std::int64_t replications,
                               std::uint64_t master_seed, std::uint64_t cell = 0,
                               int horizon = 1000000) {
  int K = static_cast<int>(models.size());
  std::int64_t hits = 0;
  std::vector<double> inc(K);
  std::vector<char> undecided(K);

  for (std::int64_t rep = 0; rep < replications; ++rep) {
    Rng rng(replication_seed(master_seed, cell, static_cast<std::uint64_t>(rep)));
    LlrState state(K);
    std::fill(undecided.begin(), undecided.end(), 1);
    int remaining = K;
    bool error_hit = false;

    for (int n = 1; n <= horizon && remaining > 0 && !error_hit; ++n) {
      for (int k = 0; k < K; ++k)
        inc[k] = models[k].llr_increment(models[k].sample(config.is_signal(k), rng));
      state.advance(inc);
      if (kind == ProcedureKind::synchronous) {
        if (auto dec = synchronous_fire(state, t, prior)) {
          remaining = 0;
          for (int k = 0; k < K && !error_hit; ++k)
            error_hit = detail::is_error(config, k, (*dec)[k], error_type);
        }
      } else {
        for (auto [k, d] : step_decisions(kind, state, t, prior, undecided)) {
          undecided[k] = 0;
          --remaining;
          if (detail::is_error(config, k, d, error_type)) error_hit = true;
        }
      }
    }
    if (remaining > 0 && !error_hit)
      throw HorizonExhausted("plain_fwe_estimate: replication hit the horizon");
    if (error_hit) ++hits;
  }

  double n = static_cast<double>(replications);
  double mean = static_cast<double>(hits) / n;
  double se = std::sqrt(std::max(mean * (1.0 - mean), 0.0) / n);
  return {mean, se};
}

// Estimate used by calibration and sweeps: importance sampling in the rare
// regime, plain Monte Carlo once the rate is moderate (at or above 1e-2).
template <StreamModel M>
FweEstimate fwe_estimate_auto(ProcedureKind kind, std::span<const M> models,
                              const SignalConfig& config, const Thresholds& t,
                              const PriorBounds& prior, int error_type,
                              std::int64_t replications,
                              std::uint64_t master_seed, std::uint64_t cell = 0,
                              int horizon = 1000000) {
  FweEstimate is = is_fwe_estimate(kind, models, config, t, prior, error_type,
                                   replications, master_seed, cell, horizon);
  if (is.estimate < 1e-2) return is;
  return plain_fwe_estimate(kind, models, config, t, prior, error_type,
                            replications, master_seed, cell + 0x9e37u, horizon);
}

struct ConfigEstimate {
  SignalConfig config;
  FweEstimate fwe1, fwe2;
};

struct CalibrationResult {
  Thresholds thresholds;
  std::string method;  // "analytic" or "monte_carlo"
  double offset = 0.0; // shift applied to the analytic thresholds
  int iterations = 0;
  std::vector<ConfigEstimate> achieved;
};

struct CalibrationFailed : std::runtime_error {
  double bracket_lo, bracket_hi;
  CalibrationFailed(std::string what, double lo, double hi)
      : std::runtime_error(std::move(what)), bracket_lo(lo), bracket_hi(hi) {}
};

namespace detail {

template <StreamModel M>
double worst_target_ratio(ProcedureKind kind, std::span<const M> models,
                          std::span<const SignalConfig> reps,
                          const Thresholds& t, const PriorBounds& prior,
                          const ErrorTargets& targets, std::int64_t n,
                          std::uint64_t seed, std::uint64_t cell_base,
                          std::vector<ConfigEstimate>* out = nullptr) {
  double worst = 0.0;
  std::uint64_t cell = cell_base;
  for (const SignalConfig& cfg : reps) {
    FweEstimate e1{0.0, 0.0}, e2{0.0, 0.0};
    if (cfg.size() < cfg.num_streams())
      e1 = fwe_estimate_auto(kind, models, cfg, t, prior, 1, n, seed, cell++);
    if (cfg.size() > 0)
      e2 = fwe_estimate_auto(kind, models, cfg, t, prior, 2, n, seed, cell++);
    worst = std::max(worst, e1.estimate / targets.alpha);
    worst = std::max(worst, e2.estimate / targets.beta);
    if (out) out->push_back({cfg, e1, e2});
  }
  return worst;
}

}  // namespace detail

// All subsets with admissible sizes, as a default maximization family when no
// symmetry classes are declared. Guarded, meant for small K.
inline std::vector<SignalConfig> enumerate_prior_configs(const PriorBounds& p) {
  if (p.K > 20) throw std::invalid_argument("config enumeration: K too large");
  std::vector<SignalConfig> out;
  for (unsigned mask = 0; mask < (1u << p.K); ++mask) {
    int size = __builtin_popcount(mask);
    if (size < p.l || size > p.u) continue;
    std::vector<int> idx;
    for (int k = 0; k < p.K; ++k)
      if ((mask >> k) & 1u) idx.push_back(k);
    out.emplace_back(idx, p.K);
  }
  if (out.size() > 100000)
    throw std::invalid_argument("config enumeration guard exceeded");
  return out;
}

// Monte Carlo threshold search: bisection on a common offset added to the
// analytic thresholds (their relative spacing is the recipe's), driving the
// worst estimated error / target ratio over the representative configurations
// into [1 - tol, 1].
template <StreamModel M>
CalibrationResult calibrate_monte_carlo(ProcedureKind kind,
                                        std::span<const M> models,
                                        const PriorBounds& prior,
                                        const ErrorTargets& targets,
                                        std::span<const SignalConfig> representatives,
                                        std::int64_t replications,
                                        std::uint64_t seed,
                                        double tol = 0.05, int max_iter = 40) {
  Thresholds base = analytic_thresholds(kind, targets, prior);
  auto shifted = [&](double delta) {
    Thresholds t = base;
    t.a += delta;
    t.b += delta;
    t.c += delta;
    t.d += delta;
    return t;
  };
  auto ratio_at = [&](double delta, int iter,
                      std::vector<ConfigEstimate>* out = nullptr) {
    return detail::worst_target_ratio(kind, models, representatives,
                                      shifted(delta), prior, targets,
                                      replications, seed,
                                      static_cast<std::uint64_t>(iter) << 32, out);
  };

  int used = 0;
  double hi = 0.0;  // ratio(hi) <= 1 by the union bounds
  double lo = -1.0;
  double r_lo = ratio_at(lo, used++);
  while (r_lo <= 1.0 && lo > -40.0) {
    lo -= 1.0;
    r_lo = ratio_at(lo, used++);
  }
  if (r_lo <= 1.0)
    throw CalibrationFailed("calibrate: no bracket below the target", lo, hi);

  double delta = hi, ratio = 0.0;
  for (; used < max_iter; ) {
    delta = 0.5 * (lo + hi);
    ratio = ratio_at(delta, used++);
    if (ratio > 1.0)
      lo = delta;
    else if (ratio < 1.0 - tol)
      hi = delta;
    else
      break;
  }
  if (!(ratio <= 1.0 && ratio >= 1.0 - tol))
    throw CalibrationFailed("calibrate: bisection did not settle", lo, hi);

  CalibrationResult res;
  res.thresholds = shifted(delta);
  res.method = "monte_carlo";
  res.offset = delta;
  res.iterations = used;
  ratio_at(delta, used, &res.achieved);
  return res;
}

}  // namespace seqmt
