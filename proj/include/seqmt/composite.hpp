#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seqmt/procedures.hpp"
#include "seqmt/random.hpp"

namespace seqmt {

// Contract for a one-parameter composite-hypothesis stream. The model owns the
// closed forms: likelihood increments against its base measure, suprema of the
// log likelihood over each parameter space given the sufficient statistic, and
// the estimator used for the adaptive statistic.
template <class CM>
concept CompositeModel =
    requires(const CM m, double x, double theta, double suff, int n, Rng& rng) {
      { m.sample(theta, rng) } -> std::convertible_to<double>;
      { m.delta_ll(x, theta) } -> std::convertible_to<double>;
      { m.accumulate(suff, x) } -> std::convertible_to<double>;
      { m.sup_ll_null(suff, n) } -> std::convertible_to<double>;
      { m.sup_ll_alt(suff, n) } -> std::convertible_to<double>;
      { m.estimate(suff, n) } -> std::convertible_to<double>;
      { m.initial_estimate() } -> std::convertible_to<double>;
    };

// Unit-variance Gaussian mean family against the standard normal base measure:
// log dP_theta/dnu at one observation x is theta x - theta^2 / 2. Null and
// alternative parameter spaces are disjoint closed intervals; suprema and the
// maximum-likelihood estimate reduce to clamping the sample mean.
class GaussianCompositeModel {
 public:
  GaussianCompositeModel(double null_lo, double null_hi, double alt_lo,
                         double alt_hi)
      : n0_{null_lo, null_hi}, n1_{alt_lo, alt_hi} {
    if (!(null_lo <= null_hi && alt_lo <= alt_hi))
      throw std::invalid_argument("composite_gaussian: malformed intervals");
    bool disjoint = null_hi < alt_lo || alt_hi < null_lo;
    if (!disjoint)
      throw std::invalid_argument("composite_gaussian: spaces must be disjoint");
  }

  double sample(double theta, Rng& rng) const { return theta + rng.normal(); }

  double delta_ll(double x, double theta) const {
    return theta * x - 0.5 * theta * theta;
  }

  double accumulate(double suff, double x) const { return suff + x; }

  double sup_ll_null(double suff, int n) const { return sup_on(n0_, suff, n); }
  double sup_ll_alt(double suff, int n) const { return sup_on(n1_, suff, n); }

  // Clamped MLE over the union of the two spaces; equidistant gap points go to
  // the lower endpoint.
  double estimate(double suff, int n) const {
    double t0 = clamp_to(n0_, suff / n);
    double t1 = clamp_to(n1_, suff / n);
    double l0 = t0 * suff - 0.5 * n * t0 * t0;
    double l1 = t1 * suff - 0.5 * n * t1 * t1;
    if (l0 == l1) return std::min(t0, t1);
    return l0 > l1 ? t0 : t1;
  }

  // Hull midpoint, pulled to the nearest admissible point when the midpoint
  // falls between the spaces.
  double initial_estimate() const {
    double lo = std::min(n0_.lo, n1_.lo);
    double hi = std::max(n0_.hi, n1_.hi);
    double mid = 0.5 * (lo + hi);
    double t0 = clamp_to(n0_, mid);
    double t1 = clamp_to(n1_, mid);
    return std::abs(t0 - mid) <= std::abs(t1 - mid) ? t0 : t1;
  }

  bool in_null(double theta) const { return n0_.lo <= theta && theta <= n0_.hi; }
  bool in_alt(double theta) const { return n1_.lo <= theta && theta <= n1_.hi; }

  // Separation numbers: squared distance to the opposing space over two.
  double kl_vs_null(double theta) const {
    double d = theta - clamp_to(n0_, theta);
    return 0.5 * d * d;
  }
  double kl_vs_alt(double theta) const {
    double d = theta - clamp_to(n1_, theta);
    return 0.5 * d * d;
  }

  double null_lo() const { return n0_.lo; }
  double null_hi() const { return n0_.hi; }
  double alt_lo() const { return n1_.lo; }
  double alt_hi() const { return n1_.hi; }

 private:
  struct Interval {
    double lo, hi;
  };
  static double clamp_to(const Interval& iv, double x) {
    return std::clamp(x, iv.lo, iv.hi);
  }
  static double sup_on(const Interval& iv, double suff, int n) {
    double t = clamp_to(iv, suff / n);
    return t * suff - 0.5 * n * t * t;
  }

  Interval n0_, n1_;
};

// Adaptive statistics for all K streams: the one-step-delayed plug-in log
// likelihood ell_star, the per-space maxima, and the three-case statistic
// lambda_star with its order statistics (same sentinel ranks as LlrState).
class AdaptiveLlrState {
 public:
  explicit AdaptiveLlrState(int k)
      : n_(0), suff_(k, 0.0), ell_star_(k, 0.0), ell0_(k, 0.0), ell1_(k, 0.0),
        lambda_star_(k, 0.0), theta_hat_(k, 0.0), order_(k),
        positive_count_(0) {
    std::iota(order_.begin(), order_.end(), 0);
  }

  template <CompositeModel CM>
  void init(std::span<const CM> models) {
    for (int k = 0; k < num_streams(); ++k)
      theta_hat_[k] = models[k].initial_estimate();
  }

  template <CompositeModel CM>
  void advance(std::span<const double> observations, std::span<const CM> models) {
    if (static_cast<int>(observations.size()) != num_streams())
      throw std::invalid_argument("AdaptiveLlrState::advance: length mismatch");
    ++n_;
    for (int k = 0; k < num_streams(); ++k) {
      double x = observations[k];
      ell_star_[k] += models[k].delta_ll(x, theta_hat_[k]);
      suff_[k] = models[k].accumulate(suff_[k], x);
      ell0_[k] = models[k].sup_ll_null(suff_[k], n_);
      ell1_[k] = models[k].sup_ll_alt(suff_[k], n_);
      theta_hat_[k] = models[k].estimate(suff_[k], n_);
      if (!std::isfinite(ell_star_[k]) || !std::isfinite(theta_hat_[k]))
        throw std::runtime_error("adaptive statistic diverged in stream " +
                                 std::to_string(k));
      if (ell0_[k] < std::min(ell1_[k], ell_star_[k]))
        lambda_star_[k] = ell_star_[k] - ell0_[k];
      else if (ell1_[k] < std::min(ell0_[k], ell_star_[k]))
        lambda_star_[k] = ell1_[k] - ell_star_[k];
      else
        lambda_star_[k] = 0.0;
    }
    resort();
  }

  int time() const { return n_; }
  int num_streams() const { return static_cast<int>(suff_.size()); }
  double lambda_star(int k) const { return lambda_star_[k]; }
  double ell_star(int k) const { return ell_star_[k]; }
  double ell_null(int k) const { return ell0_[k]; }
  double ell_alt(int k) const { return ell1_[k]; }
  double theta_hat(int k) const { return theta_hat_[k]; }
  int positive_count() const { return positive_count_; }
  int stream_at_rank(int rank) const { return order_[rank - 1]; }

  double ordered_value(int rank) const {
    if (rank == 0) return std::numeric_limits<double>::infinity();
    if (rank == num_streams() + 1) return -std::numeric_limits<double>::infinity();
    if (rank < 0 || rank > num_streams() + 1)
      throw std::out_of_range("AdaptiveLlrState::ordered_value: bad rank");
    return lambda_star_[order_[rank - 1]];
  }

 private:
  void resort() {
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (lambda_star_[a] != lambda_star_[b])
        return lambda_star_[a] > lambda_star_[b];
      return a < b;
    });
    positive_count_ = 0;
    for (double v : lambda_star_)
      if (v > 0.0) ++positive_count_;
  }

  int n_;
  std::vector<double> suff_, ell_star_, ell0_, ell1_, lambda_star_, theta_hat_;
  std::vector<int> order_;
  int positive_count_;
};

// Composite firing rules. Unlike the simple-hypothesis forms these are strict
// inequalities with sign side-conditions on the pivotal order statistic.
inline std::optional<int> composite_sprt_fire(const AdaptiveLlrState& s,
                                              const Thresholds& t, int stream) {
  double v = s.lambda_star(stream);
  if (v >= t.a) return 1;
  if (v <= -t.b) return 0;
  return std::nullopt;
}

inline std::optional<int> composite_asynchronous_fire(const AdaptiveLlrState& s,
                                                  const Thresholds& t,
                                                  const PriorBounds& p,
                                                  int stream) {
  double v = s.lambda_star(stream);
  bool fire1, fire0;
  if (p.l == p.u) {
    int m = p.l;
    fire1 = v > std::max(s.ordered_value(m + 1) + t.c, 0.0) &&
            s.ordered_value(m + 1) < 0.0;
    fire0 = v < std::min(s.ordered_value(m) - t.d, 0.0) &&
            s.ordered_value(m) > 0.0;
  } else {
    fire1 = v > t.a || (v > std::max(s.ordered_value(p.l + 1) + t.c, 0.0) &&
                        s.ordered_value(p.l + 1) < 0.0);
    fire0 = v < -t.b || (v < std::min(s.ordered_value(p.u) - t.d, 0.0) &&
                         s.ordered_value(p.u) > 0.0);
  }
  if (fire1) return 1;
  if (fire0) return 0;
  return std::nullopt;
}

inline std::optional<std::vector<std::int8_t>> composite_synchronous_fire(
    const AdaptiveLlrState& s, const Thresholds& t, const PriorBounds& p) {
  int K = s.num_streams();
  bool fired = false;
  int top = 0;
  if (p.l == p.u) {
    int m = p.l;
    if (s.ordered_value(m) - s.ordered_value(m + 1) > std::max(t.c, t.d) &&
        s.ordered_value(m + 1) < 0.0 && s.ordered_value(m) > 0.0) {
      fired = true;
      top = m;
    }
  } else {
    bool tau1 = s.ordered_value(p.l + 1) <
                    std::min(-t.b, s.ordered_value(p.l) - t.c) &&
                s.ordered_value(p.l) > 0.0;
    bool tau3 = s.ordered_value(p.u) >
                    std::max(t.a, t.d + s.ordered_value(p.u + 1)) &&
                s.ordered_value(p.u + 1) < 0.0;
    bool all_out = true;
    for (int k = 0; k < K; ++k) {
      double v = s.lambda_star(k);
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

inline std::vector<std::pair<int, int>> composite_step_decisions(
    ProcedureKind kind, const AdaptiveLlrState& s, const Thresholds& t,
    const PriorBounds& p, std::span<const char> undecided) {
  std::vector<std::pair<int, int>> fired;
  for (int k = 0; k < s.num_streams(); ++k) {
    if (!undecided[k]) continue;
    std::optional<int> d;
    if (kind == ProcedureKind::sprt)
      d = composite_sprt_fire(s, t, k);
    else
      d = composite_asynchronous_fire(s, t, p, k);
    if (d) fired.emplace_back(k, *d);
  }
  return fired;
}

// Drives a composite procedure over one path. The true parameter of stream k
// is thetas[k]; which hypothesis it realizes is up to the caller's bookkeeping.
template <CompositeModel CM>
ReplicationResult run_composite_replication(ProcedureKind kind,
                                            std::span<const CM> models,
                                            std::span<const double> thetas,
                                            const Thresholds& t,
                                            const PriorBounds& p, Rng& rng,
                                            int horizon = 1000000) {
  int K = static_cast<int>(models.size());
  AdaptiveLlrState state(K);
  state.init(models);
  DecisionRecord rec(K);
  std::vector<char> undecided(K, 1);
  std::vector<double> obs(K);
  int remaining = K;

  for (int n = 1; n <= horizon && remaining > 0; ++n) {
    for (int k = 0; k < K; ++k) obs[k] = models[k].sample(thetas[k], rng);
    state.advance(std::span<const double>(obs), models);

    if (kind == ProcedureKind::synchronous) {
      if (auto dec = composite_synchronous_fire(state, t, p)) {
        for (int k = 0; k < K; ++k) {
          rec.stop_time[k] = n;
          rec.decision[k] = (*dec)[k];
        }
        remaining = 0;
      }
    } else {
      for (auto [k, d] :
           composite_step_decisions(kind, state, t, p, undecided)) {
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

}  // namespace seqmt
