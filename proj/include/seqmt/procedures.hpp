#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "seqmt/random.hpp"
#include "seqmt/statistics.hpp"
#include "seqmt/stream_models.hpp"

namespace seqmt {

// Prior class: the true signal set has size between l and u. The admissible
// range is 0 <= l <= u <= K with u > 0 and l < K; anything else leaves no
// testing problem to solve.
struct PriorBounds {
  int l = 0;
  int u = 0;
  int K = 0;

  PriorBounds(int l_, int u_, int K_) : l(l_), u(u_), K(K_) {
    if (!(0 <= l && l <= u && u <= K && u > 0 && l < K))
      throw std::invalid_argument(
          "prior bounds must satisfy 0 <= l <= u <= K, u > 0, l < K");
  }
};

struct Thresholds {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

// True signal membership for one simulated scenario.
class SignalConfig {
 public:
  SignalConfig(std::span<const int> signal_streams, int k) : mask_(k, 0) {
    for (int s : signal_streams) {
      if (s < 0 || s >= k)
        throw std::invalid_argument("signal stream index out of range");
      mask_[s] = 1;
    }
    count_ = 0;
    for (char m : mask_) count_ += m;
  }

  static SignalConfig first_n(int s, int k) {
    std::vector<int> idx(s);
    for (int i = 0; i < s; ++i) idx[i] = i;
    return SignalConfig(idx, k);
  }

  bool is_signal(int stream) const { return mask_[stream] != 0; }
  int size() const { return count_; }
  int num_streams() const { return static_cast<int>(mask_.size()); }

  std::vector<int> signals() const {
    std::vector<int> out;
    for (int k = 0; k < num_streams(); ++k)
      if (mask_[k]) out.push_back(k);
    return out;
  }

 private:
  std::vector<char> mask_;
  int count_ = 0;
};

enum class ProcedureKind { sprt, asynchronous, synchronous };

struct DecisionRecord {
  std::vector<int> stop_time;     // T_k, 0 while undecided
  std::vector<std::int8_t> decision;  // D_k in {0,1}, valid once stopped
  int overall_stop = 0;           // max_k T_k

  explicit DecisionRecord(int k) : stop_time(k, 0), decision(k, -1) {}

  bool decided(int stream) const { return stop_time[stream] > 0; }
  bool complete() const {
    for (int t : stop_time)
      if (t == 0) return false;
    return true;
  }
};

struct ReplicationResult {
  DecisionRecord record;
  bool horizon_exhausted = false;
};

// Per-stream SPRT exit. Boundary attainment counts as a crossing.
inline std::optional<int> sprt_fire(const LlrState& s, const Thresholds& t,
                                    int stream) {
  double v = s.value(stream);
  if (v >= t.a) return 1;
  if (v <= -t.b) return 0;
  return std::nullopt;
}

// Asynchronous rule. With l = u = m a stream decides by its distance to the
// m-th / (m+1)-th ordered LLR; with l < u the SPRT exits are unioned with gap
// conditions at ranks l+1 and u. Order statistics run over all K streams,
// decided ones included, since every stream keeps being monitored. If the two
// exits trigger at the same step, decision 1 wins.
inline std::optional<int> asynchronous_fire(const LlrState& s, const Thresholds& t,
                                        const PriorBounds& p, int stream) {
  double v = s.value(stream);
  bool fire1, fire0;
  if (p.l == p.u) {
    int m = p.l;
    fire1 = v >= s.ordered_value(m + 1) + t.c;
    fire0 = v <= s.ordered_value(m) - t.d;
  } else {
    fire1 = v >= std::min(t.a, s.ordered_value(p.l + 1) + t.c);
    fire0 = v <= std::max(-t.b, s.ordered_value(p.u) - t.d);
  }
  if (fire1) return 1;
  if (fire0) return 0;
  return std::nullopt;
}

// Synchronous rule: one common stopping time for all streams. Returns the full
// decision vector when it fires. With l = u = m it waits for a gap of c v d at
// rank m and flags the top m streams; with l < u it stops at the first of the
// three exit times and flags the top (p(n) v l) ^ u streams.
inline std::optional<std::vector<std::int8_t>> synchronous_fire(
    const LlrState& s, const Thresholds& t, const PriorBounds& p) {
  int K = s.num_streams();
  bool fired = false;
  int top = 0;
  if (p.l == p.u) {
    int m = p.l;
    if (s.ordered_value(m) - s.ordered_value(m + 1) >= std::max(t.c, t.d)) {
      fired = true;
      top = m;
    }
  } else {
    bool tau1 = s.ordered_value(p.l + 1) <=
                std::min(-t.b, s.ordered_value(p.l) - t.c);
    bool tau3 = s.ordered_value(p.u) >=
                std::max(t.a, t.d + s.ordered_value(p.u + 1));
    bool all_out = true;
    for (int k = 0; k < K; ++k) {
      double v = s.value(k);
      if (v > -t.b && v < t.a) {
        all_out = false;
        break;
      }
    }
    bool tau2 = all_out && p.l <= s.positive_count() && s.positive_count() <= p.u;
    if (tau1 || tau2 || tau3) {
      fired = true;
      top = std::clamp(s.positive_count(), p.l, p.u);
    }
  }
  if (!fired) return std::nullopt;
  std::vector<std::int8_t> decision(K, 0);
  for (int r = 1; r <= top; ++r) decision[s.stream_at_rank(r)] = 1;
  return decision;
}

// Firing set for one step of a decentralized procedure, evaluated for every
// still-undecided stream against the same state.
inline std::vector<std::pair<int, int>> step_decisions(
    ProcedureKind kind, const LlrState& s, const Thresholds& t,
    const PriorBounds& p, std::span<const char> undecided) {
  std::vector<std::pair<int, int>> fired;
  for (int k = 0; k < s.num_streams(); ++k) {
    if (!undecided[k]) continue;
    std::optional<int> d;
    if (kind == ProcedureKind::sprt)
      d = sprt_fire(s, t, k);
    else
      d = asynchronous_fire(s, t, p, k);
    if (d) fired.emplace_back(k, *d);
  }
  return fired;
}

// Drives one procedure over one sampled path until every stream is decided or
// the horizon runs out. All streams keep sampling after their decision; firing
// conditions at step n are evaluated jointly against the state at n.
template <StreamModel M>
ReplicationResult run_replication(ProcedureKind kind, std::span<const M> models,
                                  const SignalConfig& config,
                                  const Thresholds& t, const PriorBounds& p,
                                  Rng& rng, int horizon = 1000000) {
  int K = static_cast<int>(models.size());
  LlrState state(K);
  DecisionRecord rec(K);
  std::vector<char> undecided(K, 1);
  std::vector<double> inc(K);
  int remaining = K;

  for (int n = 1; n <= horizon && remaining > 0; ++n) {
    for (int k = 0; k < K; ++k)
      inc[k] = models[k].llr_increment(models[k].sample(config.is_signal(k), rng));
    state.advance(inc);

    if (kind == ProcedureKind::synchronous) {
      if (auto dec = synchronous_fire(state, t, p)) {
        for (int k = 0; k < K; ++k) {
          rec.stop_time[k] = n;
          rec.decision[k] = (*dec)[k];
        }
        remaining = 0;
      }
    } else {
      for (auto [k, d] : step_decisions(kind, state, t, p, undecided)) {
        rec.stop_time[k] = n;
        rec.decision[k] = static_cast<std::int8_t>(d);
        undecided[k] = 0;
        --remaining;
      }
    }
  }

  rec.overall_stop = *std::max_element(rec.stop_time.begin(), rec.stop_time.end());
  return {std::move(rec), remaining > 0};
}

// Raised where a partial record cannot be tolerated.
struct HorizonExhausted : std::runtime_error {
  explicit HorizonExhausted(std::string what) : std::runtime_error(std::move(what)) {}
};

}  // namespace seqmt
