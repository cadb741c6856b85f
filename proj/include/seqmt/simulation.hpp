#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "seqmt/calibration.hpp"
#include "seqmt/stream_models.hpp"
#include "seqmt/theory.hpp"

namespace seqmt {

// Single free parameter theta drives the whole threshold quadruple so that a
// one-dimensional sweep traces each procedure's error/delay trade-off curve.
// Stream-level exits use a = b = theta; gap exits absorb the class-size
// correction so the leading error terms stay matched across procedures.
inline Thresholds thresholds_from_free_param(ProcedureKind kind,
                                             const PriorBounds& prior,
                                             double theta) {
  if (!(theta > 0.0))
    throw std::invalid_argument("thresholds_from_free_param: theta must be > 0");
  if (kind == ProcedureKind::sprt || prior.l == prior.u)
    return {theta, theta, theta, theta};
  double c = theta + std::log(static_cast<double>(prior.K - prior.l));
  double d = theta + std::log(static_cast<double>(prior.u));
  return {theta, theta, c, d};
}

struct SweepCellResult {
  int grid_index = 0;
  int config_index = 0;
  double free_param = 0.0;
  Thresholds thresholds{};
  std::vector<int> signals;
  std::vector<double> mean_time;  // per stream
  std::vector<double> se_time;
  double mean_overall = 0.0;
  double se_overall = 0.0;
  double exhausted_fraction = 0.0;
  FweEstimate fwe1{0.0, 0.0};
  FweEstimate fwe2{0.0, 0.0};
};

// Monte Carlo stopping-time moments for one (thresholds, truth) cell. Per-rep
// results land in preallocated slots keyed by replication index and are
// reduced in that fixed order, so the output is identical for any thread
// count.
template <StreamModel M>
SweepCellResult run_time_cell(ProcedureKind kind, std::span<const M> models,
                              const SignalConfig& config, const Thresholds& t,
                              const PriorBounds& prior, int replications,
                              std::uint64_t master_seed, std::uint64_t cell_id,
                              int threads = 1, int horizon = 1000000) {
  if (replications <= 0)
    throw std::invalid_argument("run_time_cell: replications must be > 0");
  int K = static_cast<int>(models.size());
  int R = replications;
  std::vector<std::int32_t> times(static_cast<std::size_t>(R) * K);
  std::vector<std::int32_t> overall(R);
  std::vector<char> exhausted(R, 0);

  auto worker = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      Rng rng(replication_seed(master_seed, cell_id, static_cast<std::uint64_t>(r)));
      auto res = run_replication(kind, models, config, t, prior, rng, horizon);
      for (int k = 0; k < K; ++k)
        times[static_cast<std::size_t>(r) * K + k] = res.record.stop_time[k];
      overall[r] = res.record.overall_stop;
      exhausted[r] = res.horizon_exhausted ? 1 : 0;
    }
  };

  int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    worker(0, R);
  } else {
    std::vector<std::thread> pool;
    int chunk = (R + nthreads - 1) / nthreads;
    for (int w = 0; w < nthreads; ++w) {
      int lo = w * chunk, hi = std::min(R, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SweepCellResult out;
  out.thresholds = t;
  out.signals = config.signals();
  out.mean_time.assign(K, 0.0);
  out.se_time.assign(K, 0.0);
  std::vector<double> sum(K, 0.0), sumsq(K, 0.0);
  double osum = 0.0, osumsq = 0.0;
  int nex = 0;
  for (int r = 0; r < R; ++r) {
    for (int k = 0; k < K; ++k) {
      double v = times[static_cast<std::size_t>(r) * K + k];
      sum[k] += v;
      sumsq[k] += v * v;
    }
    double o = overall[r];
    osum += o;
    osumsq += o * o;
    nex += exhausted[r];
  }
  for (int k = 0; k < K; ++k) {
    out.mean_time[k] = sum[k] / R;
    double var = (sumsq[k] - sum[k] * sum[k] / R) / std::max(1, R - 1);
    out.se_time[k] = std::sqrt(std::max(0.0, var) / R);
  }
  out.mean_overall = osum / R;
  double ovar = (osumsq - osum * osum / R) / std::max(1, R - 1);
  out.se_overall = std::sqrt(std::max(0.0, ovar) / R);
  out.exhausted_fraction = static_cast<double>(nex) / R;
  return out;
}

template <StreamModel M>
struct SweepSpec {
  ProcedureKind kind = ProcedureKind::asynchronous;
  PriorBounds prior{0, 1, 1};
  std::vector<M> models;
  std::vector<std::vector<int>> signal_sets;
  std::vector<double> grid;  // free-parameter values
  int time_replications = 10000;
  int error_replications = 10000;
  bool estimate_errors = true;
  std::uint64_t master_seed = 1;
  int threads = 1;
  int horizon = 1000000;
};

// Full grid x truth sweep. Cell ids reserve the low byte for the estimator
// purpose (0 = stopping times, 1/2 = the two error types), the next twelve
// bits for the truth index, the rest for the grid index.
template <StreamModel M>
std::vector<SweepCellResult> run_sweep(const SweepSpec<M>& spec) {
  if (spec.grid.empty() || spec.signal_sets.empty())
    throw std::invalid_argument("run_sweep: empty grid or signal sets");
  if (static_cast<int>(spec.models.size()) != spec.prior.K)
    throw std::invalid_argument("run_sweep: model count must match K");
  std::span<const M> models(spec.models);
  std::vector<SweepCellResult> cells;
  cells.reserve(spec.grid.size() * spec.signal_sets.size());
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    Thresholds t = thresholds_from_free_param(spec.kind, spec.prior, spec.grid[g]);
    for (std::size_t ci = 0; ci < spec.signal_sets.size(); ++ci) {
      SignalConfig config(spec.signal_sets[ci], spec.prior.K);
      std::uint64_t base = (static_cast<std::uint64_t>(g) << 20) |
                           (static_cast<std::uint64_t>(ci) << 8);
      SweepCellResult cell = run_time_cell(
          spec.kind, models, config, t, spec.prior, spec.time_replications,
          spec.master_seed, base, spec.threads, spec.horizon);
      cell.grid_index = static_cast<int>(g);
      cell.config_index = static_cast<int>(ci);
      cell.free_param = spec.grid[g];
      if (spec.estimate_errors) {
        cell.fwe1 = fwe_estimate_auto(spec.kind, models, config, t, spec.prior,
                                      1, spec.error_replications,
                                      spec.master_seed, base | 1, spec.horizon);
        cell.fwe2 = fwe_estimate_auto(spec.kind, models, config, t, spec.prior,
                                      2, spec.error_replications,
                                      spec.master_seed, base | 2, spec.horizon);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

struct GridSummary {
  int grid_index = 0;
  double free_param = 0.0;
  Thresholds thresholds{};
  double alpha_hat = 0.0;  // worst type-I familywise error over the truths
  double beta_hat = 0.0;
  double se_alpha = 0.0;
  double se_beta = 0.0;
};

inline std::vector<GridSummary> summarize_by_grid(
    std::span<const SweepCellResult> cells) {
  std::vector<GridSummary> out;
  for (const auto& c : cells) {
    while (static_cast<int>(out.size()) <= c.grid_index) out.emplace_back();
    GridSummary& g = out[c.grid_index];
    g.grid_index = c.grid_index;
    g.free_param = c.free_param;
    g.thresholds = c.thresholds;
    if (c.fwe1.estimate > g.alpha_hat) {
      g.alpha_hat = c.fwe1.estimate;
      g.se_alpha = c.fwe1.std_error;
    }
    if (c.fwe2.estimate > g.beta_hat) {
      g.beta_hat = c.fwe2.estimate;
      g.se_beta = c.fwe2.std_error;
    }
  }
  return out;
}

// One plotted point of an error/delay curve: the truth's per-stream mean
// decision times joined with the grid point's worst-case error estimates over
// every truth sharing those thresholds.
struct CurvePoint {
  int grid_index = 0;
  int config_index = 0;
  double free_param = 0.0;
  std::vector<int> signals;
  std::vector<double> mean_time, se_time;
  double mean_overall = 0.0, se_overall = 0.0;
  double exhausted_fraction = 0.0;
  double alpha_hat = 0.0, alpha_se = 0.0;
  double beta_hat = 0.0, beta_se = 0.0;
  double log10_alpha = 0.0, log10_beta = 0.0;
};

inline std::vector<CurvePoint> make_curve_points(
    std::span<const SweepCellResult> cells) {
  auto grid = summarize_by_grid(cells);
  std::vector<CurvePoint> out;
  out.reserve(cells.size());
  for (const auto& c : cells) {
    const GridSummary& g = grid[c.grid_index];
    CurvePoint p;
    p.grid_index = c.grid_index;
    p.config_index = c.config_index;
    p.free_param = c.free_param;
    p.signals = c.signals;
    p.mean_time = c.mean_time;
    p.se_time = c.se_time;
    p.mean_overall = c.mean_overall;
    p.se_overall = c.se_overall;
    p.exhausted_fraction = c.exhausted_fraction;
    p.alpha_hat = g.alpha_hat;
    p.alpha_se = g.se_alpha;
    p.beta_hat = g.beta_hat;
    p.beta_se = g.se_beta;
    p.log10_alpha = std::log10(g.alpha_hat);
    p.log10_beta = std::log10(g.beta_hat);
    out.push_back(std::move(p));
  }
  return out;
}

// Piecewise-linear read-off of y at xq. Points need not be sorted. Returns
// nothing when xq falls outside the sampled range: no extrapolation.
inline std::optional<double> interpolate_curve(std::span<const double> x,
                                               std::span<const double> y,
                                               double xq) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  std::vector<int> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return x[a] < x[b]; });
  if (xq < x[idx.front()] || xq > x[idx.back()]) return std::nullopt;
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    double x0 = x[idx[i]], x1 = x[idx[i + 1]];
    if (xq < x0 || xq > x1) continue;
    if (x1 == x0) return 0.5 * (y[idx[i]] + y[idx[i + 1]]);
    double w = (xq - x0) / (x1 - x0);
    return (1.0 - w) * y[idx[i]] + w * y[idx[i + 1]];
  }
  return std::nullopt;
}

// Expected-delay ratio of two procedures at a common achieved error level,
// with each curve sampled as (log10 error, mean decision-completion time).
inline std::optional<double> efficiency_ratio(
    std::span<const double> log_err_num, std::span<const double> time_num,
    std::span<const double> log_err_den, std::span<const double> time_den,
    double log_err_query) {
  auto n = interpolate_curve(log_err_num, time_num, log_err_query);
  auto d = interpolate_curve(log_err_den, time_den, log_err_query);
  if (!n || !d || *d <= 0.0) return std::nullopt;
  return *n / *d;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

// Least-squares line through (x, y). Guards the asymptotic-regime contract:
// at least four samples covering three decades of the error scale (x is the
// magnitude of the log error, so one decade is ln 10).
inline SlopeFit fit_slope_line(std::span<const double> x,
                               std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("fit_slope_line: length mismatch");
  if (x.size() < 4)
    throw std::invalid_argument("fit_slope_line: need at least 4 points");
  auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (*mx - *mn < 3.0 * std::log(10.0) - 1e-9)
    throw std::invalid_argument("fit_slope_line: need a 3-decade span");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  SlopeFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0, ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += e * e;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// First-order growth rate of the expected decision time per nat of error
// exponent, for the stream's own stopping time (or the common one when the
// procedure decides everything at once). Error rates are coupled (alpha =
// beta), so one nat on either scale is the same unit.
inline double theory_slope_per_nat(ProcedureKind kind, int stream,
                                   const SignalConfig& config,
                                   const PriorBounds& prior,
                                   const KlVec<double>& kls) {
  ErrorTargets unit{std::exp(-1.0), std::exp(-1.0)};
  if (kind == ProcedureKind::sprt)
    return 1.0 / (config.is_signal(stream) ? kls.I[stream] : kls.J[stream]);
  if (kind == ProcedureKind::synchronous)
    return optimal_time_synchronous(config, prior, unit, kls);
  return optimal_time_first_order(stream, config, prior, unit, kls);
}

struct SlopeReport {
  SlopeFit fit;
  double theory_slope = 0.0;
  double rel_dev = 0.0;
};

// Fits mean decision time against |ln error| and compares the growth rate
// with its first-order prediction.
inline SlopeReport slope_diagnostics(std::span<const double> abs_log_error,
                                     std::span<const double> mean_time,
                                     ProcedureKind kind, int stream,
                                     const SignalConfig& config,
                                     const PriorBounds& prior,
                                     const KlVec<double>& kls) {
  SlopeReport rep;
  rep.fit = fit_slope_line(abs_log_error, mean_time);
  rep.theory_slope = theory_slope_per_nat(kind, stream, config, prior, kls);
  rep.rel_dev = std::abs(rep.fit.slope - rep.theory_slope) / rep.theory_slope;
  return rep;
}

struct ExactResult {
  double fwe1 = 0.0;
  double fwe2 = 0.0;
  double completed_mass = 0.0;  // paths with every stream decided by `depth`
  double residual_mass = 0.0;
  int depth = 0;
  // stop_dist[k][d][n-1] = P(stream k commits to decision d at step n)
  std::vector<std::array<std::vector<double>, 2>> stop_dist;
  // E[T_k; T_k <= depth] per stream
  std::vector<double> trunc_mean_time;
};

// Exhaustive law of a procedure on binary streams: walks every observation
// path up to `depth` steps, weighting branches by the truth's product
// probabilities. Error masses are credited when the first offending decision
// freezes, so they are exact up to the (reported) undecided residual.
inline ExactResult enumerate_exact(ProcedureKind kind,
                                   std::span<const BernoulliModel> models,
                                   const SignalConfig& config,
                                   const Thresholds& t, const PriorBounds& prior,
                                   int depth) {
  int K = static_cast<int>(models.size());
  if (depth <= 0) throw std::invalid_argument("enumerate_exact: depth must be > 0");
  if (std::pow(2.0, static_cast<double>(K) * depth) > 2e7)
    throw std::invalid_argument("enumerate_exact: path space too large");

  ExactResult res;
  res.depth = depth;
  res.stop_dist.resize(K);
  for (auto& per_stream : res.stop_dist)
    for (auto& per_decision : per_stream)
      per_decision.assign(depth, 0.0);

  std::vector<double> p_one(K);
  for (int k = 0; k < K; ++k)
    p_one[k] = config.is_signal(k) ? models[k].p1() : models[k].p0();

  struct PathState {
    LlrState state;
    std::vector<char> undecided;
    int remaining;
    bool fp_seen, fn_seen;
  };

  std::vector<double> obs(K);
  auto recurse = [&](auto&& self, const PathState& node, double mass) -> void {
    int n_next = node.state.time() + 1;
    for (unsigned bits = 0; bits < (1u << K); ++bits) {
      double m = mass;
      for (int k = 0; k < K; ++k) {
        bool one = (bits >> k) & 1u;
        obs[k] = models[k].llr_increment(one ? 1.0 : 0.0);
        m *= one ? p_one[k] : 1.0 - p_one[k];
      }
      if (m == 0.0) continue;
      PathState child = node;
      child.state.advance(std::span<const double>(obs));

      if (kind == ProcedureKind::synchronous) {
        if (auto dec = synchronous_fire(child.state, t, prior)) {
          for (int k = 0; k < K; ++k) {
            int d = (*dec)[k];
            res.stop_dist[k][d][n_next - 1] += m;
            if (d == 1 && !config.is_signal(k) && !child.fp_seen) {
              res.fwe1 += m;
              child.fp_seen = true;
            }
            if (d == 0 && config.is_signal(k) && !child.fn_seen) {
              res.fwe2 += m;
              child.fn_seen = true;
            }
          }
          child.remaining = 0;
        }
      } else {
        for (auto [k, d] :
             step_decisions(kind, child.state, t, prior, child.undecided)) {
          res.stop_dist[k][d][n_next - 1] += m;
          child.undecided[k] = 0;
          --child.remaining;
          if (d == 1 && !config.is_signal(k) && !child.fp_seen) {
            res.fwe1 += m;
            child.fp_seen = true;
          }
          if (d == 0 && config.is_signal(k) && !child.fn_seen) {
            res.fwe2 += m;
            child.fn_seen = true;
          }
        }
      }

      if (child.remaining == 0)
        res.completed_mass += m;
      else if (n_next == depth)
        res.residual_mass += m;
      else
        self(self, child, m);
    }
  };

  PathState root{LlrState(K), std::vector<char>(K, 1), K, false, false};
  recurse(recurse, root, 1.0);

  res.trunc_mean_time.assign(K, 0.0);
  for (int k = 0; k < K; ++k)
    for (int n = 1; n <= depth; ++n)
      res.trunc_mean_time[k] +=
          n * (res.stop_dist[k][0][n - 1] + res.stop_dist[k][1][n - 1]);
  return res;
}

}  // namespace seqmt
