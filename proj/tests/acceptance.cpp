// End-to-end acceptance battery. Nine numbered criteria cover the exact
// efficiency tables, non-asymptotic error ceilings, matched-error time
// anchors, growth-rate fits, exhaustive-law cross-checks, pathwise
// orderings, shape diagnostics, adaptive-statistic error control and the
// generalized-error sandwiches. Each criterion prints one PASS/FAIL line
// with its measurements; the process exits nonzero if any line fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include <seqmt/calibration.hpp>
#include <seqmt/composite.hpp>
#include <seqmt/error_metrics.hpp>
#include <seqmt/simulation.hpp>
#include <seqmt/theory.hpp>

namespace {

using namespace seqmt;
using Rat = boost::rational<long>;
using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

template <class T>
std::span<const T> cspan(const std::vector<T>& v) {
  return std::span<const T>(v.data(), v.size());
}

std::vector<GaussianMeanModel> homogeneous(int k, double mu) {
  return std::vector<GaussianMeanModel>(static_cast<std::size_t>(k),
                                        GaussianMeanModel(mu));
}

KlVec<double> homogeneous_kls(int k, double mu) {
  KlVec<double> kls;
  kls.I.assign(k, 0.5 * mu * mu);
  kls.J = kls.I;
  return kls;
}

const char* kind_name(ProcedureKind k) {
  switch (k) {
    case ProcedureKind::sprt: return "sprt";
    case ProcedureKind::asynchronous: return "asynchronous";
    default: return "synchronous";
  }
}

double binom_se(double p, std::int64_t n) {
  double v = std::max(p * (1.0 - p), 1e-12);
  return std::sqrt(v / static_cast<double>(n));
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- criterion 1
// The two-tier efficiency tables: four truth sets, four streams, both
// efficiency notions, with both the tight and the interval prior. All 64
// entries must come out as exact rationals, in under a second.

Outcome criterion1() {
  KlVec<Rat> kls;
  kls.I = {Rat(1, 32), Rat(1, 32), Rat(1, 8), Rat(1, 8)};
  kls.J = kls.I;

  const std::vector<std::vector<int>> rows = {{0}, {2}, {0, 1}, {0, 2}};
  using Row = std::array<Rat, 4>;
  const std::array<Row, 4> tight_dec = {
      Row{Rat(1, 2), Rat(1, 2), Rat(4, 5), Rat(4, 5)},
      Row{Rat(1, 5), Rat(1, 5), Rat(4, 5), Rat(1, 2)},
      Row{Rat(1, 5), Rat(1, 5), Rat(4, 5), Rat(4, 5)},
      Row{Rat(1, 2), Rat(1, 2), Rat(4, 5), Rat(4, 5)}};
  const std::array<Row, 4> tight_syn = {
      Row{Rat(1), Rat(1), Rat(2, 5), Rat(2, 5)},
      Row{Rat(1), Rat(1), Rat(1), Rat(5, 8)},
      Row{Rat(1), Rat(1), Rat(1), Rat(1)},
      Row{Rat(1), Rat(1), Rat(2, 5), Rat(2, 5)}};
  const std::array<Row, 4> band_dec = {
      Row{Rat(1, 2), Rat(1), Rat(1), Rat(1)},
      Row{Rat(1), Rat(1), Rat(4, 5), Rat(1)},
      Row{Rat(1), Rat(1), Rat(1), Rat(1)},
      Row{Rat(1), Rat(1), Rat(1), Rat(1)}};
  const std::array<Row, 4> band_syn = {
      Row{Rat(1, 2), Rat(1), Rat(1, 4), Rat(1, 4)},
      Row{Rat(1), Rat(1), Rat(1, 5), Rat(1, 4)},
      Row{Rat(1), Rat(1), Rat(1, 4), Rat(1, 4)},
      Row{Rat(1), Rat(1), Rat(1, 4), Rat(1, 4)}};

  auto start = Clock::now();
  int checked = 0, wrong = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    SignalConfig cfg(cspan(rows[r]), 4);
    PriorBounds tight(cfg.size(), cfg.size(), 4);
    PriorBounds band(1, 3, 4);
    for (int k = 0; k < 4; ++k) {
      ++checked;
      if (are_decentralized(k, cfg, tight, kls) != tight_dec[r][k]) ++wrong;
      ++checked;
      if (are_synchronous(k, cfg, tight, kls, Rat(1)) != tight_syn[r][k]) ++wrong;
      ++checked;
      if (are_decentralized(k, cfg, band, kls) != band_dec[r][k]) ++wrong;
      ++checked;
      if (are_synchronous(k, cfg, band, kls, Rat(1)) != band_syn[r][k]) ++wrong;
    }
  }
  double secs = std::chrono::duration<double>(Clock::now() - start).count();

  Outcome out;
  out.pass = wrong == 0 && checked == 64 && secs < 1.0;
  out.detail = fmt("%d/64 exact rational entries reproduced in %.3fs",
                   checked - wrong, secs);
  return out;
}

// ---------------------------------------------------------------- criterion 2
// Error-ceiling compliance on the homogeneous ten-stream problem: at the
// closed-form thresholds for every procedure, prior and target on the grid,
// both familywise error estimates must stay below the analytic ceiling plus
// three standard errors. The precision clause additionally demands a
// relative standard error of at most 0.5% from every importance-sampling
// estimate; the measured worst case is reported either way.

Outcome criterion2() {
  const int K = 10;
  auto models = homogeneous(K, 0.5);
  const std::uint64_t seed = 9002;
  std::uint64_t cell = 0;

  int cells = 0, bound_ok = 0, precise = 0;
  double worst_rel = 0.0;
  std::string worst_where = "none";
  double worst_excess = -1e300;
  std::string bound_where = "none";

  const std::array<ProcedureKind, 3> kinds = {
      ProcedureKind::sprt, ProcedureKind::asynchronous,
      ProcedureKind::synchronous};
  for (ProcedureKind kind : kinds) {
    for (int which = 0; which < 2; ++which) {
      PriorBounds prior = which == 0 ? PriorBounds(3, 3, K) : PriorBounds(3, 7, K);
      std::vector<int> sizes = which == 0 ? std::vector<int>{3}
                                          : std::vector<int>{3, 7};
      for (int s : sizes) {
        SignalConfig cfg = SignalConfig::first_n(s, K);
        for (double e : {2.0, 4.0, 6.0, 8.0}) {
          double rate = std::pow(10.0, -e);
          Thresholds t = analytic_thresholds(kind, {rate, rate}, prior);
          for (int type = 1; type <= 2; ++type) {
            FweEstimate est = is_fwe_estimate(kind, cspan(models), cfg, t,
                                              prior, type, 10000, seed, cell++);
            double ceiling = fwe_bound(kind, prior, t, s, type == 1);
            ++cells;
            double excess = est.estimate - (ceiling + 3.0 * est.std_error);
            if (excess <= 0.0) ++bound_ok;
            if (excess > worst_excess) {
              worst_excess = excess;
              bound_where = fmt("%s l=%d u=%d |A|=%d 1e-%.0f type%d",
                                kind_name(kind), prior.l, prior.u, s, e, type);
            }
            double rel = est.estimate > 0.0 ? est.std_error / est.estimate : 1.0;
            if (rel <= 0.005) ++precise;
            if (rel > worst_rel) {
              worst_rel = rel;
              worst_where = fmt("%s l=%d u=%d |A|=%d 1e-%.0f type%d",
                                kind_name(kind), prior.l, prior.u, s, e, type);
            }
          }
        }
      }
    }
  }

  Outcome out;
  bool bounds_pass = bound_ok == cells;
  bool precision_pass = precise == cells;
  out.pass = bounds_pass && precision_pass;
  out.detail = fmt(
      "ceilings: %d/%d estimates within bound + 3 se (tightest margin at %s); "
      "IS rel se <= 0.5%%: %d/%d, worst %.2f%% at %s",
      bound_ok, cells, bound_where.c_str(), precise, cells, 100.0 * worst_rel,
      worst_where.c_str());
  if (!precision_pass)
    out.detail += "; the pair-exit tilt mixture levels off above 0.5% at 1e4 "
                  "replications";
  return out;
}

// ---------------------------------------------------------------- criterion 3
// Matched-error time anchors on the homogeneous ten-stream problem with a
// tight prior. Each procedure is swept over one free threshold parameter;
// the expected decision time in a signal stream is interpolated at a common
// achieved false-positive level and compared as ratios. Per-stream times are
// the quantity that makes the
// comparison meaningful: the staggered rule releases each stream at its own
// firing time, while the one-shot rule holds every stream until the single
// common one (its per-stream time equals its completion time).

struct TraceCurve {
  std::vector<double> x;  // |ln alpha_hat|
  std::vector<double> y;  // mean decision time in a signal stream
};

TraceCurve trace_curve(ProcedureKind kind, int m,
                       const std::vector<GaussianMeanModel>& models,
                       int time_reps, int err_reps, std::uint64_t seed,
                       std::uint64_t& cell) {
  const int K = static_cast<int>(models.size());
  PriorBounds prior(m, m, K);
  SignalConfig cfg = SignalConfig::first_n(m, K);
  double pref = kind == ProcedureKind::sprt
                    ? static_cast<double>(K - m)
                    : static_cast<double>(m) * (K - m);
  TraceCurve curve;
  // The low points keep -ln(1e-2) inside the interpolation range: the
  // realized error sits below its union ceiling, so the achieved |ln alpha|
  // at a free-parameter value runs a little ahead of it, and the gap rule
  // (whose fluctuation overshoot is largest) needs the smallest anchors.
  for (double x : {1.0, 1.75, 2.5, 3.25, 4.0, 7.0, 10.0, 13.5, 16.5, 19.5}) {
    double theta = x + std::log(pref);
    Thresholds t = thresholds_from_free_param(kind, prior, theta);
    SweepCellResult tc = run_time_cell(kind, cspan(models), cfg, t, prior,
                                       time_reps, seed, cell++);
    FweEstimate a = is_fwe_estimate(kind, cspan(models), cfg, t, prior, 1,
                                    err_reps, seed, cell++);
    if (a.estimate <= 0.0) continue;
    curve.x.push_back(-std::log(a.estimate));
    curve.y.push_back(tc.mean_time[0]);  // stream 0 carries a signal
  }
  return curve;
}

Outcome criterion3() {
  const int K = 10;
  auto models = homogeneous(K, 0.5);
  const std::uint64_t seed = 9003;
  std::uint64_t cell = 0;
  const double x_mild = -std::log(1e-2);
  const double x_deep = -std::log(1e-8);

  double worst_mild = 0.0, worst_deep = 0.0, worst_sync = 0.0;
  int worst_mild_m = 0, worst_deep_m = 0, worst_sync_m = 0;
  std::vector<std::string> missing;

  for (int m : {1, 3, 5, 7, 9}) {
    TraceCurve sprt = trace_curve(ProcedureKind::sprt, m, models, 4000, 5000,
                                  seed, cell);
    TraceCurve prop = trace_curve(ProcedureKind::asynchronous, m, models, 4000,
                                  5000, seed, cell);
    auto ratio_at = [&](const TraceCurve& num, const TraceCurve& den,
                        double xq) -> std::optional<double> {
      auto n = interpolate_curve(cspan(num.x), cspan(num.y), xq);
      auto d = interpolate_curve(cspan(den.x), cspan(den.y), xq);
      if (!n || !d || *d <= 0.0) return std::nullopt;
      return *n / *d;
    };

    if (auto r = ratio_at(prop, sprt, x_mild)) {
      if (*r > worst_mild) { worst_mild = *r; worst_mild_m = m; }
    } else {
      missing.push_back(fmt("m=%d mild", m));
    }
    if (auto r = ratio_at(prop, sprt, x_deep)) {
      if (*r > worst_deep) { worst_deep = *r; worst_deep_m = m; }
    } else {
      missing.push_back(fmt("m=%d deep", m));
    }
    if (m > 1) {
      TraceCurve sync = trace_curve(ProcedureKind::synchronous, m, models,
                                    4000, 5000, seed, cell);
      if (auto r = ratio_at(prop, sync, x_mild)) {
        if (*r > worst_sync) { worst_sync = *r; worst_sync_m = m; }
      } else {
        missing.push_back(fmt("m=%d sync", m));
      }
    }
  }

  Outcome out;
  if (!missing.empty()) {
    out.pass = false;
    out.detail = "interpolation range missed at " + missing.front();
    return out;
  }
  bool ok_mild = worst_mild <= 0.85;
  bool ok_deep = worst_deep <= 0.68;
  bool ok_sync = worst_sync <= 0.81;
  out.pass = ok_mild && ok_deep && ok_sync;
  out.detail = fmt(
      "vs parallel exits: %.3f at 1e-2 (m=%d, cap 0.85), %.3f at 1e-8 "
      "(m=%d, cap 0.68); vs one-shot: %.3f at 1e-2 (m=%d, cap 0.81)",
      worst_mild, worst_mild_m, worst_deep, worst_deep_m, worst_sync,
      worst_sync_m);
  return out;
}

// ---------------------------------------------------------------- criterion 4
// Growth-rate fits. Mean per-stream decision time is regressed on the
// achieved |ln alpha| over error levels spanning 1e-5 to 1e-8, for every
// stream of twelve procedure/prior/truth curves, and the fitted slope must
// sit within 15% of its first-order prediction. The one-shot gap rule with
// the tight prior at m = K/2 carries a quadratic-in-root correction, so that
// case alone is allowed 25%.

Outcome criterion4() {
  const int K = 10;
  auto models = homogeneous(K, 0.5);
  KlVec<double> kls = homogeneous_kls(K, 0.5);
  const std::uint64_t seed = 9004;
  std::uint64_t cell = 0;

  struct Battery {
    ProcedureKind kind;
    PriorBounds prior;
    std::vector<int> sizes;
    double pref;  // leading coefficient of the false-positive ceiling
  };
  const std::vector<Battery> batteries = {
      {ProcedureKind::sprt, PriorBounds(5, 5, K), {5}, 5.0},
      {ProcedureKind::asynchronous, PriorBounds(5, 5, K), {5}, 25.0},
      {ProcedureKind::synchronous, PriorBounds(5, 5, K), {5}, 25.0},
      {ProcedureKind::sprt, PriorBounds(3, 7, K), {3, 4, 7}, 7.0},
      {ProcedureKind::asynchronous, PriorBounds(3, 7, K), {3, 4, 7}, 10.0},
      {ProcedureKind::synchronous, PriorBounds(3, 7, K), {3, 4, 7}, 10.0}};
  const std::vector<double> decades = {4.85, 5.95, 7.05, 8.15};

  int fits = 0, within = 0, relaxed_used = 0;
  double worst_dev = 0.0;
  std::string worst_where = "none";
  std::string per_battery;

  for (const Battery& bat : batteries) {
    double battery_worst = 0.0;
    std::vector<double> xs;
    std::vector<std::vector<std::vector<double>>> times(bat.sizes.size());
    for (double q : decades) {
      double theta = q * std::log(10.0) + std::log(bat.pref);
      Thresholds t = thresholds_from_free_param(bat.kind, bat.prior, theta);
      double alpha_hat = 0.0;
      for (std::size_t si = 0; si < bat.sizes.size(); ++si) {
        SignalConfig cfg = SignalConfig::first_n(bat.sizes[si], K);
        SweepCellResult tc = run_time_cell(bat.kind, cspan(models), cfg, t,
                                           bat.prior, 4000, seed, cell++);
        times[si].push_back(tc.mean_time);
        FweEstimate a = is_fwe_estimate(bat.kind, cspan(models), cfg, t,
                                        bat.prior, 1, 5000, seed, cell++);
        alpha_hat = std::max(alpha_hat, a.estimate);
      }
      if (alpha_hat <= 0.0)
        throw std::runtime_error("slope battery: zero error estimate");
      xs.push_back(-std::log(alpha_hat));
    }

    for (std::size_t si = 0; si < bat.sizes.size(); ++si) {
      SignalConfig cfg = SignalConfig::first_n(bat.sizes[si], K);
      for (int k = 0; k < K; ++k) {
        std::vector<double> ys;
        for (const auto& per_stream : times[si]) ys.push_back(per_stream[k]);
        SlopeReport rep = slope_diagnostics(cspan(xs), cspan(ys), bat.kind, k,
                                            cfg, bat.prior, kls);
        bool tight_gap_rule = bat.kind == ProcedureKind::synchronous &&
                              bat.prior.l == bat.prior.u &&
                              2 * bat.prior.l == K;
        double tol = tight_gap_rule ? 0.25 : 0.15;
        ++fits;
        if (rep.rel_dev <= tol) {
          ++within;
          if (tight_gap_rule && rep.rel_dev > 0.15) ++relaxed_used;
        }
        if (rep.rel_dev > worst_dev) {
          worst_dev = rep.rel_dev;
          worst_where = fmt("%s l=%d u=%d |A|=%d stream %d (theory %.0f/nat)",
                            kind_name(bat.kind), bat.prior.l, bat.prior.u,
                            bat.sizes[si], k, rep.theory_slope);
        }
        battery_worst = std::max(battery_worst, rep.rel_dev);
      }
    }
    if (!per_battery.empty()) per_battery += ", ";
    per_battery += fmt("%s(%d,%d) %.1f%%", kind_name(bat.kind), bat.prior.l,
                       bat.prior.u, 100.0 * battery_worst);
  }

  Outcome out;
  out.pass = within == fits;
  out.detail = fmt("%d/%d stream fits within tolerance; worst rel dev %.1f%% "
                   "at %s; per-battery worst: %s", within, fits,
                   100.0 * worst_dev, worst_where.c_str(),
                   per_battery.c_str());
  if (relaxed_used > 0)
    out.detail += fmt("; %d one-shot m=K/2 fits used the documented 25%% "
                      "allowance", relaxed_used);
  return out;
}

// ---------------------------------------------------------------- criterion 5
// Exhaustive-law cross-checks on binary streams. Six small problems covering
// every procedure and both prior shapes are enumerated exactly; the residual
// undecided mass must be below 1e-3, error masses must agree with the
// importance-sampling estimator within four standard errors, and the
// decision-time law must agree with plain Monte Carlo cell by cell. The
// whole block must finish within a minute.

Outcome criterion5() {
  auto start = Clock::now();
  const std::uint64_t seed = 9005;

  struct Case {
    ProcedureKind kind;
    int K;
    double p0, p1;
    PriorBounds prior;
    std::vector<int> signals;
    Thresholds t;
    int depth;
  };
  const std::vector<Case> cases = {
      {ProcedureKind::sprt, 1, 0.2, 0.8, PriorBounds(0, 1, 1), {0},
       {1.5, 1.5, 1.5, 1.5}, 14},
      // One widening step (2 ln 2 = 2.77) clears the 2.5 margin, so the only
      // paths left undecided at the depth cap are the all-tied ones.
      {ProcedureKind::asynchronous, 2, 0.2, 0.8, PriorBounds(1, 1, 2), {0},
       {2.5, 2.5, 2.5, 2.5}, 12},
      {ProcedureKind::synchronous, 2, 0.2, 0.8, PriorBounds(1, 1, 2), {0},
       {2.5, 2.5, 2.5, 2.5}, 12},
      {ProcedureKind::sprt, 2, 0.15, 0.85, PriorBounds(1, 2, 2), {0},
       {2.0, 2.0, 2.0, 2.0}, 12},
      // K=3 caps the enumeration depth at 8; the wide p-split keeps the
      // undecided mass after 8 steps well under the 1e-3 ceiling.
      {ProcedureKind::asynchronous, 3, 0.03, 0.97, PriorBounds(1, 2, 3), {0, 2},
       {4.0, 4.0, 4.0, 4.0}, 8},
      {ProcedureKind::synchronous, 3, 0.03, 0.97, PriorBounds(1, 2, 3), {0, 2},
       {4.0, 4.0, 4.0, 4.0}, 8}};

  std::uint64_t cell = 0;
  int checks = 0, ok = 0;
  double worst_sigma = 0.0, worst_residual = 0.0;
  std::string worst_where = "none";
  const std::int64_t R = 20000;

  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const Case& cs = cases[ci];
    std::vector<BernoulliModel> models(
        static_cast<std::size_t>(cs.K), BernoulliModel(cs.p0, cs.p1));
    SignalConfig cfg(cspan(cs.signals), cs.K);
    ExactResult exact = enumerate_exact(cs.kind, cspan(models), cfg, cs.t,
                                        cs.prior, cs.depth);
    worst_residual = std::max(worst_residual, exact.residual_mass);
    ++checks;
    if (exact.residual_mass < 1e-3) ++ok;

    for (int type = 1; type <= 2; ++type) {
      FweEstimate est = is_fwe_estimate(cs.kind, cspan(models), cfg, cs.t,
                                        cs.prior, type, R, seed, cell++);
      double ref = type == 1 ? exact.fwe1 : exact.fwe2;
      double gap = std::max(0.0, std::abs(est.estimate - ref) -
                                     exact.residual_mass);
      double sigma = gap / std::max(est.std_error, 1e-300);
      if (ref == 0.0 && est.estimate == 0.0) sigma = 0.0;
      ++checks;
      if (sigma <= 4.0) ++ok;
      if (sigma > worst_sigma) {
        worst_sigma = sigma;
        worst_where = fmt("case %zu fwe%d", ci + 1, type);
      }
    }

    // Decision-time law: empirical frequencies of (stream, decision, step)
    // against the enumerated masses, for every cell of visible weight.
    std::vector<std::vector<std::array<std::int64_t, 2>>> hits(
        cs.K, std::vector<std::array<std::int64_t, 2>>(
                  cs.depth, std::array<std::int64_t, 2>{0, 0}));
    for (std::int64_t r = 0; r < R; ++r) {
      Rng rng(replication_seed(seed, 7000 + ci, static_cast<std::uint64_t>(r)));
      auto res = run_replication(cs.kind, cspan(models), cfg, cs.t, cs.prior,
                                 rng, 100000);
      for (int k = 0; k < cs.K; ++k) {
        int n = res.record.stop_time[k];
        int d = res.record.decision[k];
        if (n >= 1 && n <= cs.depth && (d == 0 || d == 1))
          ++hits[k][n - 1][d];
      }
    }
    for (int k = 0; k < cs.K; ++k) {
      for (int n = 1; n <= cs.depth; ++n) {
        for (int d = 0; d < 2; ++d) {
          double p = exact.stop_dist[k][d][n - 1];
          if (p < 1e-4) continue;
          double phat = static_cast<double>(hits[k][n - 1][d]) / R;
          double se = binom_se(std::max(p, phat), R);
          double sigma = std::abs(phat - p) / se;
          ++checks;
          if (sigma <= 4.0) ++ok;
          if (sigma > worst_sigma) {
            worst_sigma = sigma;
            worst_where = fmt("case %zu stream %d T=%d D=%d", ci + 1, k, n, d);
          }
        }
      }
    }
  }

  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  Outcome out;
  out.pass = ok == checks && secs < 60.0;
  out.detail = fmt("%d/%d checks over 6 enumerations; max residual %.2e; "
                   "worst %.2f sigma at %s; %.1fs",
                   ok, checks, worst_residual, worst_sigma,
                   worst_where.c_str(), secs);
  return out;
}

// ---------------------------------------------------------------- criterion 6
// Pathwise invariants on shared randomness, zero tolerance: with an
// unconstrained prior the staggered rule reproduces the parallel exits path
// by path; the staggered rule never finishes after the one-shot rule under
// the same thresholds; with an interval prior each stream decides no later
// than its lone exit test; the one-shot decision set always lands inside
// the prior band.

Outcome criterion6() {
  const std::uint64_t seed = 9006;
  const int reps = 1000;
  int viol_equiv = 0, viol_oneshot = 0, viol_single = 0, viol_card = 0;

  {  // Unconstrained prior: identical records.
    const int K = 5;
    auto models = homogeneous(K, 0.5);
    const std::vector<int> truth = {0, 2};
    SignalConfig cfg(cspan(truth), K);
    PriorBounds prior(0, K, K);
    Thresholds ta{3.2, 3.2, 1.0, 1.0};
    Thresholds ts{3.2, 3.2, 3.2, 3.2};
    for (int r = 0; r < reps; ++r) {
      std::uint64_t s = replication_seed(seed, 1, static_cast<std::uint64_t>(r));
      Rng r1(s), r2(s);
      auto a = run_replication(ProcedureKind::asynchronous, cspan(models), cfg,
                               ta, prior, r1, 100000);
      auto b = run_replication(ProcedureKind::sprt, cspan(models), cfg, ts,
                               prior, r2, 100000);
      if (a.record.stop_time != b.record.stop_time ||
          a.record.decision != b.record.decision || a.horizon_exhausted ||
          b.horizon_exhausted)
        ++viol_equiv;
    }
  }

  {  // Tight prior: staggered completion never trails the one-shot stop.
    const int K = 5;
    auto models = homogeneous(K, 0.5);
    const std::vector<int> truth = {0, 1};
    SignalConfig cfg(cspan(truth), K);
    PriorBounds prior(2, 2, K);
    Thresholds t{3.5, 3.5, 3.5, 3.5};
    for (int r = 0; r < reps; ++r) {
      std::uint64_t s = replication_seed(seed, 2, static_cast<std::uint64_t>(r));
      Rng r1(s), r2(s);
      auto a = run_replication(ProcedureKind::asynchronous, cspan(models), cfg,
                               t, prior, r1, 100000);
      auto b = run_replication(ProcedureKind::synchronous, cspan(models), cfg,
                               t, prior, r2, 100000);
      if (a.record.overall_stop > b.record.overall_stop) ++viol_oneshot;
      int ones = 0;
      for (auto d : b.record.decision) ones += d == 1;
      if (ones != 2) ++viol_card;
    }
  }

  {  // Interval prior: one-shot ordering, per-stream ordering, cardinality.
    const int K = 5;
    auto models = homogeneous(K, 0.5);
    const std::vector<int> truth = {0, 2};
    SignalConfig cfg(cspan(truth), K);
    PriorBounds prior(1, 3, K);
    Thresholds tband{3.0, 3.0, 4.6, 4.6};
    Thresholds tsprt{3.0, 3.0, 3.0, 3.0};
    for (int r = 0; r < reps; ++r) {
      std::uint64_t s = replication_seed(seed, 3, static_cast<std::uint64_t>(r));
      Rng r1(s), r2(s), r3(s);
      auto a = run_replication(ProcedureKind::asynchronous, cspan(models), cfg,
                               tband, prior, r1, 100000);
      auto o = run_replication(ProcedureKind::synchronous, cspan(models), cfg,
                               tband, prior, r2, 100000);
      auto p = run_replication(ProcedureKind::sprt, cspan(models), cfg, tsprt,
                               prior, r3, 100000);
      if (a.record.overall_stop > o.record.overall_stop) ++viol_oneshot;
      for (int k = 0; k < K; ++k)
        if (a.record.stop_time[k] > p.record.stop_time[k]) ++viol_single;
      int ones = 0;
      for (auto d : o.record.decision) ones += d == 1;
      if (ones < 1 || ones > 3) ++viol_card;
    }
  }

  Outcome out;
  int total = viol_equiv + viol_oneshot + viol_single + viol_card;
  out.pass = total == 0;
  out.detail = fmt("violations over 3000 shared paths: equivalence %d, "
                   "one-shot ordering %d, per-stream ordering %d, "
                   "cardinality %d", viol_equiv, viol_oneshot, viol_single,
                   viol_card);
  return out;
}

// ---------------------------------------------------------------- criterion 7
// Shape diagnostics at fixed thresholds on the homogeneous ten-stream
// problem. A signal stream under the staggered rule speeds up (weakly) as
// the tight prior grows; the one-shot rule is slowest when the prior splits
// the streams evenly. Both at two standard errors.

Outcome criterion7() {
  const int K = 10;
  auto models = homogeneous(K, 0.5);
  const std::uint64_t seed = 9007;
  std::uint64_t cell = 0;
  const Thresholds t{6.0, 6.0, 6.0, 6.0};
  const int reps = 6000;

  std::vector<double> amean(K + 1, 0.0), ase(K + 1, 0.0);
  std::vector<double> smean(K + 1, 0.0), sse(K + 1, 0.0);
  for (int m = 1; m <= 9; ++m) {
    PriorBounds prior(m, m, K);
    SignalConfig cfg = SignalConfig::first_n(m, K);
    SweepCellResult a = run_time_cell(ProcedureKind::asynchronous,
                                      cspan(models), cfg, t, prior, reps, seed,
                                      cell++);
    amean[m] = a.mean_time[0];
    ase[m] = a.se_time[0];
    SweepCellResult s = run_time_cell(ProcedureKind::synchronous, cspan(models),
                                      cfg, t, prior, reps, seed, cell++);
    smean[m] = s.mean_overall;
    sse[m] = s.se_overall;
  }

  int viol_mono = 0;
  for (int m = 1; m < 9; ++m) {
    double slack = 2.0 * std::sqrt(ase[m] * ase[m] + ase[m + 1] * ase[m + 1]);
    if (amean[m + 1] > amean[m] + slack) ++viol_mono;
  }

  int viol_peak = 0;
  for (int m = 1; m <= 9; ++m) {
    if (m == 5) continue;
    double slack = 2.0 * std::sqrt(sse[5] * sse[5] + sse[m] * sse[m]);
    if (smean[5] < smean[m] - slack) ++viol_peak;
  }
  double edge1 = 2.0 * std::sqrt(sse[5] * sse[5] + sse[1] * sse[1]);
  double edge9 = 2.0 * std::sqrt(sse[5] * sse[5] + sse[9] * sse[9]);
  bool peaked = smean[5] > smean[1] + edge1 && smean[5] > smean[9] + edge9;

  Outcome out;
  out.pass = viol_mono == 0 && viol_peak == 0 && peaked;
  out.detail = fmt("signal time %.2f -> %.2f over m=1..9 (%d increases); "
                   "one-shot time peaks at m=5: %.2f vs %.2f (m=1) and %.2f "
                   "(m=9), %d interior violations",
                   amean[1], amean[9], viol_mono, smean[5], smean[1], smean[9],
                   viol_peak);
  return out;
}

// ---------------------------------------------------------------- criterion 8
// Composite-interval streams. The one-step-delayed plug-in statistic has the
// exact likelihood-ratio martingale property under any in-class parameter,
// and the staggered rule at closed-form thresholds keeps the familywise
// false-positive rate at target across a parameter grid spanning both
// intervals.
//
// The martingale mean is estimated by sampling each observation from the
// defensive mixture (f_theta + f_theta_hat)/2 instead of f_theta alone. The
// estimator stays unbiased for E[exp{ell_star - ell(theta)}] while its
// per-step weight factor is capped at 2; under f_theta directly the mean is
// carried by exponentially rare runaway-weight paths and no affordable path
// count yields a meaningful standard error at the deepest checkpoint.

Outcome criterion8() {
  const std::uint64_t seed = 9008;
  std::vector<GaussianCompositeModel> one = {
      GaussianCompositeModel(-0.5, 0.0, 0.3, 1.0)};

  double worst_mart = 0.0;
  std::string mart_where = "none";
  int mart_checks = 0, mart_ok = 0;
  const std::array<int, 3> marks = {1, 5, 20};
  for (double theta : {0.6, -0.2}) {
    std::array<double, 3> sum{}, sumsq{};
    const std::int64_t paths = 2000000;
    for (std::int64_t p = 0; p < paths; ++p) {
      Rng rng(replication_seed(seed, theta > 0 ? 1 : 2,
                               static_cast<std::uint64_t>(p)));
      AdaptiveLlrState st(1);
      st.init(cspan(one));
      double lv = 0.0;
      int mi = 0;
      for (int n = 1; n <= 20; ++n) {
        double th_hat = st.theta_hat(0);
        double mu = rng.uniform() < 0.5 ? theta : th_hat;
        double x = mu + rng.normal();
        double d_true = one[0].delta_ll(x, theta);
        double d_hat = one[0].delta_ll(x, th_hat);
        double hi = std::max(d_true, d_hat);
        lv += d_hat - hi - std::log(0.5 * std::exp(d_true - hi) +
                                    0.5 * std::exp(d_hat - hi));
        st.advance(std::span<const double>(&x, 1), cspan(one));
        if (mi < 3 && n == marks[mi]) {
          double v = std::exp(lv);
          sum[mi] += v;
          sumsq[mi] += v * v;
          ++mi;
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      double mean = sum[i] / paths;
      double var = std::max(sumsq[i] / paths - mean * mean, 0.0);
      double se = std::sqrt(var / paths);
      double sigma = std::abs(mean - 1.0) / std::max(se, 1e-300);
      ++mart_checks;
      if (sigma <= 4.0) ++mart_ok;
      if (sigma > worst_mart) {
        worst_mart = sigma;
        mart_where = fmt("theta=%.1f n=%d", theta, marks[i]);
      }
    }
  }

  // False-positive control across the parameter grid.
  const int K = 3;
  std::vector<GaussianCompositeModel> models(
      static_cast<std::size_t>(K), GaussianCompositeModel(-0.5, 0.0, 0.3, 1.0));
  PriorBounds prior(1, 1, K);
  Thresholds t = analytic_thresholds(ProcedureKind::asynchronous, {0.1, 0.1},
                                     prior);
  double worst_alpha = 0.0, worst_allow = 1.0, min_power = 1.0;
  int grid_ok = 0;
  const int reps = 3000;
  for (int g = 0; g < 5; ++g) {
    double th_sig = 0.3 + g * 0.175;
    double th_noise = -0.5 + g * 0.125;
    std::vector<double> thetas = {th_sig, th_noise, th_noise};
    int hits = 0, detected = 0;
    for (int r = 0; r < reps; ++r) {
      Rng rng(replication_seed(seed, 10 + g, static_cast<std::uint64_t>(r)));
      auto res = run_composite_replication(ProcedureKind::asynchronous,
                                           cspan(models), cspan(thetas), t,
                                           prior, rng, 100000);
      if (res.record.decision[1] == 1 || res.record.decision[2] == 1) ++hits;
      if (res.record.decision[0] == 1) ++detected;
    }
    double alpha_hat = static_cast<double>(hits) / reps;
    double se = binom_se(alpha_hat, reps);
    if (alpha_hat <= 0.1 + 3.0 * se) ++grid_ok;
    if (alpha_hat >= worst_alpha) {
      worst_alpha = alpha_hat;
      worst_allow = 0.1 + 3.0 * se;
    }
    min_power = std::min(min_power, static_cast<double>(detected) / reps);
  }

  Outcome out;
  out.pass = mart_ok == mart_checks && grid_ok == 5;
  out.detail = fmt("martingale means within 4 sigma of 1 at %d/%d checkpoints "
                   "(worst %.2f sigma at %s); false-positive rate at %d/5 grid "
                   "points within allowance (max rate %.4f, cap %.3f, signal "
                   "power >= %.3f)",
                   mart_ok, mart_checks, worst_mart, mart_where.c_str(),
                   grid_ok, worst_alpha, worst_allow, min_power);
  return out;
}

// ---------------------------------------------------------------- criterion 9
// Generalized-error sandwiches. On every simulated batch with an informative
// prior band and familywise errors below one half, the per-comparison,
// false-discovery and positive false-discovery metrics of both types must
// sit between their structural multiples of the familywise rate, with a
// three-standard-error allowance.

Outcome criterion9() {
  const int K = 5;
  auto models = homogeneous(K, 0.5);
  const std::uint64_t seed = 9009;
  std::uint64_t cell = 0;
  const int reps = 2000;

  struct Batch {
    ProcedureKind kind;
    PriorBounds prior;
    int size;
  };
  std::vector<Batch> batches;
  for (ProcedureKind kind :
       {ProcedureKind::asynchronous, ProcedureKind::synchronous}) {
    for (int s : {1, 2, 3}) batches.push_back({kind, PriorBounds(1, 3, K), s});
    batches.push_back({kind, PriorBounds(2, 2, K), 2});
  }

  int checks = 0, ok = 0, fwe_ok = 0;
  std::string worst_where = "none";
  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const Batch& b = batches[bi];
    SignalConfig cfg = SignalConfig::first_n(b.size, K);
    Thresholds t = analytic_thresholds(b.kind, {0.1, 0.1}, b.prior);
    std::vector<DecisionRecord> recs;
    recs.reserve(reps);
    for (int r = 0; r < reps; ++r) {
      Rng rng(replication_seed(seed, cell, static_cast<std::uint64_t>(r)));
      auto res = run_replication(b.kind, cspan(models), cfg, t, b.prior, rng,
                                 100000);
      recs.push_back(std::move(res.record));
    }
    ++cell;

    bool in_scope = true;
    for (int type = 1; type <= 2; ++type) {
      auto fwe = empirical_error(cspan(recs), cfg,
                                 type == 1 ? ErrorMetric::fwe1
                                           : ErrorMetric::fwe2);
      if (fwe.value > 0.5) in_scope = false;
    }
    if (in_scope) ++fwe_ok;

    for (GemFamily family : {GemFamily::pce, GemFamily::fdr, GemFamily::pfdr}) {
      for (int type = 1; type <= 2; ++type) {
        SandwichCheck chk = gem_sandwich_check(cspan(recs), cfg, family,
                                               b.prior, type, 3.0);
        ++checks;
        if (chk.defined && chk.holds && in_scope) {
          ++ok;
        } else if (worst_where == "none") {
          worst_where = fmt("batch %zu (%s l=%d u=%d |A|=%d) family %d type %d",
                            bi + 1, kind_name(b.kind), b.prior.l, b.prior.u,
                            b.size, static_cast<int>(family), type);
        }
      }
    }
  }

  Outcome out;
  out.pass = ok == checks && fwe_ok == static_cast<int>(batches.size());
  out.detail = fmt("%d/%d sandwich checks hold on %zu batches", ok, checks,
                   batches.size());
  if (ok != checks) out.detail += "; first failure at " + worst_where;
  return out;
}

}  // namespace

int main() {
  using Fn = Outcome (*)();
  const std::array<Fn, 9> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = Clock::now();
    Outcome out;
    try {
      out = criteria[i]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = fmt("exception: %s", e.what());
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("criterion %zu: %s - %s (%.1fs)\n", i + 1,
                out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  std::printf("acceptance: %zu/9 criteria passed\n", criteria.size() - failed);
  return failed == 0 ? 0 : 1;
}
