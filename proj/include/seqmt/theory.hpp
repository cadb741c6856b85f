#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "seqmt/procedures.hpp"

namespace seqmt {

// Per-stream KL numbers: I[k] drives signal exits, J[k] noise exits. The
// scalar type is double for simulation work and an exact rational for the
// efficiency tables.
template <class Q>
struct KlVec {
  std::vector<Q> I, J;

  int size() const { return static_cast<int>(I.size()); }
};

// min_{i in A} I_i. A minimum over an empty index set is infinite; callers of
// the formulas below never need that value, so requesting it is an error for
// scalar types without an infinity.
template <class Q>
Q i_min(const SignalConfig& config, const KlVec<Q>& kls) {
  bool found = false;
  Q best{};
  for (int k = 0; k < kls.size(); ++k) {
    if (!config.is_signal(k)) continue;
    if (!found || kls.I[k] < best) best = kls.I[k];
    found = true;
  }
  if (!found) {
    if constexpr (std::numeric_limits<Q>::has_infinity)
      return std::numeric_limits<Q>::infinity();
    else
      throw std::domain_error("i_min over an empty signal set");
  }
  return best;
}

// min_{j not in A} J_j, same conventions.
template <class Q>
Q j_min(const SignalConfig& config, const KlVec<Q>& kls) {
  bool found = false;
  Q best{};
  for (int k = 0; k < kls.size(); ++k) {
    if (config.is_signal(k)) continue;
    if (!found || kls.J[k] < best) best = kls.J[k];
    found = true;
  }
  if (!found) {
    if constexpr (std::numeric_limits<Q>::has_infinity)
      return std::numeric_limits<Q>::infinity();
    else
      throw std::domain_error("j_min over an empty noise set");
  }
  return best;
}

struct ErrorTargets {
  double alpha = 0.0;
  double beta = 0.0;

  ErrorTargets(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
      throw std::invalid_argument("targets must lie in (0,1)");
  }
};

// First-order optimal expected decision time of stream k under configuration
// A: |log alpha| / (I_k + J_A 1{|A|=l}) for a signal, the mirrored form for a
// noise stream.
inline double optimal_time_first_order(int stream, const SignalConfig& config,
                                       const PriorBounds& prior,
                                       const ErrorTargets& targets,
                                       const KlVec<double>& kls) {
  int s = config.size();
  if (config.is_signal(stream)) {
    double denom = kls.I[stream] + (s == prior.l ? j_min(config, kls) : 0.0);
    return -std::log(targets.alpha) / denom;
  }
  double denom = kls.J[stream] + (s == prior.u ? i_min(config, kls) : 0.0);
  return -std::log(targets.beta) / denom;
}

// Best achievable common decision time: the slowest stream's optimum.
inline double optimal_time_synchronous(const SignalConfig& config,
                                       const PriorBounds& prior,
                                       const ErrorTargets& targets,
                                       const KlVec<double>& kls) {
  double worst = 0.0;
  for (int k = 0; k < kls.size(); ++k)
    worst = std::max(worst,
                     optimal_time_first_order(k, config, prior, targets, kls));
  return worst;
}

// Aggregate exponent separating configurations A and C:
// sum_{k in A\C} I_k + sum_{k in C\A} J_k.
inline double lower_bound_exponent(const SignalConfig& a, const SignalConfig& c,
                                   const KlVec<double>& kls) {
  double total = 0.0;
  for (int k = 0; k < kls.size(); ++k) {
    if (a.is_signal(k) && !c.is_signal(k)) total += kls.I[k];
    if (!a.is_signal(k) && c.is_signal(k)) total += kls.J[k];
  }
  return total;
}

// min { I_{A,C} : C in Pi_{l,u}, stream's membership in C as requested }.
// Exhaustive over subsets; intended for small K cross-checks.
inline double lower_bound_min(const SignalConfig& a, int stream,
                              bool stream_in_c, const PriorBounds& prior,
                              const KlVec<double>& kls) {
  int K = kls.size();
  if (K > 20) throw std::invalid_argument("lower_bound_min: K too large");
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << K); ++mask) {
    int size = __builtin_popcount(mask);
    if (size < prior.l || size > prior.u) continue;
    if (((mask >> stream) & 1u) != static_cast<unsigned>(stream_in_c)) continue;
    std::vector<int> idx;
    for (int k = 0; k < K; ++k)
      if ((mask >> k) & 1u) idx.push_back(k);
    SignalConfig c(idx, K);
    best = std::min(best, lower_bound_exponent(a, c, kls));
  }
  return best;
}

// Efficiency of the asynchronous-optimal time against the best decentralized
// procedure, stream by stream. Exact when Q is a rational type.
template <class Q>
Q are_decentralized(int stream, const SignalConfig& config,
                    const PriorBounds& prior, const KlVec<Q>& kls) {
  int s = config.size();
  if (config.is_signal(stream)) {
    Q denom = kls.I[stream];
    if (s == prior.l) denom += j_min(config, kls);
    return kls.I[stream] / denom;
  }
  Q denom = kls.J[stream];
  if (s == prior.u) denom += i_min(config, kls);
  return kls.J[stream] / denom;
}

// Efficiency of the asynchronous-optimal time against the best synchronous
// procedure when |log alpha| ~ r |log beta|.
template <class Q>
Q are_synchronous(int stream, const SignalConfig& config,
                  const PriorBounds& prior, const KlVec<Q>& kls, Q r) {
  int s = config.size();
  Q ia = i_min(config, kls);
  Q ja = j_min(config, kls);
  Q denom_sig = ia + (s == prior.l ? ja : Q(0));
  Q denom_noi = ja + (s == prior.u ? ia : Q(0));
  Q sync = std::max(r / denom_sig, Q(1) / denom_noi);
  if (config.is_signal(stream)) {
    Q denom = kls.I[stream] + (s == prior.l ? ja : Q(0));
    return (r / denom) / sync;
  }
  Q denom = kls.J[stream] + (s == prior.u ? ia : Q(0));
  return (Q(1) / denom) / sync;
}

// Mismatched-rate limits: regime where |log alpha| << |log beta| (r -> 0) and
// the opposite one. The starved side degenerates to 0.
enum class RateRegime { alpha_negligible, beta_negligible };

template <class Q>
Q are_synchronous_limit(int stream, const SignalConfig& config,
                        const PriorBounds& prior, const KlVec<Q>& kls,
                        RateRegime regime) {
  int s = config.size();
  if (regime == RateRegime::alpha_negligible) {
    if (config.is_signal(stream)) return Q(0);
    Q ia_term = (s == prior.u) ? i_min(config, kls) : Q(0);
    return (j_min(config, kls) + ia_term) / (kls.J[stream] + ia_term);
  }
  if (!config.is_signal(stream)) return Q(0);
  Q ja_term = (s == prior.l) ? j_min(config, kls) : Q(0);
  return (i_min(config, kls) + ja_term) / (kls.I[stream] + ja_term);
}

enum class GemFamily { pce, fdr, pfdr };

struct GemConstants {
  double C1 = 0.0;
  double C2 = 0.0;
};

// Sandwich constants: C2 * FWE <= GEM <= C1 * FWE. The pFDR pair additionally
// needs 0 < l <= u < K and FWE <= 1/2 to be valid.
inline GemConstants gem_constants(GemFamily family, const PriorBounds& prior) {
  switch (family) {
    case GemFamily::pce:
      return {static_cast<double>(std::max(prior.u, prior.K - prior.l)) / prior.K,
              1.0 / prior.K};
    case GemFamily::fdr:
      return {1.0, 1.0 / prior.K};
    case GemFamily::pfdr:
      if (!(prior.l > 0 && prior.u < prior.K))
        throw std::invalid_argument("pfdr constants need 0 < l <= u < K");
      return {2.0, 1.0 / prior.K};
  }
  throw std::logic_error("unreachable");
}

// Non-asymptotic familywise error ceiling for a given procedure, threshold
// quadruple and signal count. type_one selects the false-positive bound.
inline double fwe_bound(ProcedureKind kind, const PriorBounds& prior,
                        const Thresholds& t, int signal_count, bool type_one) {
  double s = static_cast<double>(signal_count);
  double noise = static_cast<double>(prior.K - signal_count);
  if (kind == ProcedureKind::sprt)
    return type_one ? noise * std::exp(-t.a) : s * std::exp(-t.b);
  if (prior.l == prior.u) {
    double pairs = static_cast<double>(prior.l) * (prior.K - prior.l);
    if (kind == ProcedureKind::synchronous)
      return pairs * std::exp(-std::max(t.c, t.d));
    return pairs * std::exp(type_one ? -t.c : -t.d);
  }
  // Gap-intersection regime: identical ceiling for both procedures.
  if (type_one) return noise * (std::exp(-t.a) + s * std::exp(-t.c));
  return s * (std::exp(-t.b) + noise * std::exp(-t.d));
}

}  // namespace seqmt
