// Command-line front end for the sequential multiple-testing library:
// threshold calibration, error/delay sweeps, efficiency tables, and the
// exact-enumeration oracle, with CSV/JSON output.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <boost/rational.hpp>
#include <json.hpp>

#include "seqmt/calibration.hpp"
#include "seqmt/config.hpp"
#include "seqmt/csvio.hpp"
#include "seqmt/error_metrics.hpp"
#include "seqmt/simulation.hpp"
#include "seqmt/theory.hpp"
#include "seqmt/version.hpp"

namespace {

using seqmt::RunConfig;
using Rat = boost::rational<long long>;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAcceptance = 3;

struct CommonOpts {
  std::string config_path;
  std::string recipe;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool allow_partial = false;
};

std::string resolve_out_dir(const CommonOpts& opts, const RunConfig& cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("SEQMT_OUT_DIR"); env && *env) return env;
  return ".";
}

std::vector<RunConfig> resolve_configs(const CommonOpts& opts) {
  if (!opts.config_path.empty() && !opts.recipe.empty())
    throw std::invalid_argument("give --config or --recipe, not both");
  std::vector<RunConfig> cfgs;
  if (!opts.recipe.empty()) {
    cfgs = seqmt::recipe_configs(opts.recipe,
                                 opts.seed_given ? opts.seed : 1);
  } else if (!opts.config_path.empty()) {
    cfgs.push_back(seqmt::load_run_config(opts.config_path));
  } else {
    throw std::invalid_argument("need --config PATH or --recipe NAME");
  }
  if (opts.seed_given)
    for (auto& c : cfgs) c.seed = opts.seed;
  return cfgs;
}

std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
               ? c
               : '_';
  return out.empty() ? std::string("experiment") : out;
}

std::string set_label(const std::vector<int>& signals) {
  if (signals.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(signals[i] + 1);
  }
  return out;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

nlohmann::json base_metadata(const RunConfig& cfg) {
  return {{"seed", cfg.seed},
          {"config_hash", cfg.config_hash},
          {"version", seqmt::kVersion},
          {"config", cfg.raw}};
}

void stamp_metadata(seqmt::CsvWriter& csv, const RunConfig& cfg) {
  csv.metadata("seed", std::to_string(cfg.seed));
  csv.metadata("config_hash", cfg.config_hash);
  csv.metadata("version", seqmt::kVersion);
}

// ---------------------------------------------------------------------------
// calibrate

template <seqmt::StreamModel M>
nlohmann::json calibrate_one(const RunConfig& cfg, seqmt::ProcedureKind kind,
                             std::span<const M> models) {
  nlohmann::json j;
  j["procedure"] = seqmt::procedure_name(kind);
  j["method"] = cfg.calibration.mode;
  if (cfg.calibration.mode == "analytic") {
    seqmt::Thresholds t =
        seqmt::analytic_thresholds(kind, *cfg.targets, cfg.prior);
    j["thresholds"] = {{"a", t.a}, {"b", t.b}, {"c", t.c}, {"d", t.d}};
  } else {
    std::vector<seqmt::SignalConfig> reps;
    if (!cfg.calibration.representatives.empty()) {
      for (const auto& s : cfg.calibration.representatives)
        reps.emplace_back(s, cfg.prior.K);
    } else {
      for (int s = cfg.prior.l; s <= cfg.prior.u; ++s)
        reps.push_back(seqmt::SignalConfig::first_n(s, cfg.prior.K));
    }
    auto result = seqmt::calibrate_monte_carlo(
        kind, models, cfg.prior, *cfg.targets,
        std::span<const seqmt::SignalConfig>(reps), cfg.error_replications,
        cfg.seed, cfg.calibration.tolerance, cfg.calibration.max_iterations);
    const seqmt::Thresholds& t = result.thresholds;
    j["thresholds"] = {{"a", t.a}, {"b", t.b}, {"c", t.c}, {"d", t.d}};
    j["iterations"] = result.iterations;
    j["offset"] = result.offset;
    j["achieved"] = nlohmann::json::array();
    for (const auto& est : result.achieved) {
      j["achieved"].push_back(
          {{"signals", set_label(est.config.signals())},
           {"fwe1", est.fwe1.estimate},
           {"fwe1_se", est.fwe1.std_error},
           {"fwe2", est.fwe2.estimate},
           {"fwe2_se", est.fwe2.std_error}});
    }
  }
  j["replications"] = cfg.error_replications;
  return j;
}

int cmd_calibrate(const CommonOpts& opts) {
  for (RunConfig& cfg : resolve_configs(opts)) {
    if (!cfg.targets)
      throw std::invalid_argument("calibrate needs a targets block (alpha, beta)");
    std::string dir = resolve_out_dir(opts, cfg);
    std::filesystem::create_directories(dir);
    nlohmann::json report = base_metadata(cfg);
    report["results"] = nlohmann::json::array();
    std::printf("%s: thresholds (alpha=%g, beta=%g, l=%d, u=%d, K=%d)\n",
                cfg.name.c_str(), cfg.targets->alpha, cfg.targets->beta,
                cfg.prior.l, cfg.prior.u, cfg.prior.K);
    std::printf("  %-6s %12s %12s %12s %12s\n", "proc", "a", "b", "c", "d");
    for (seqmt::ProcedureKind kind : cfg.procedures) {
      nlohmann::json one = std::visit(
          [&](const auto& models) {
            return calibrate_one(cfg, kind,
                                 std::span<const typename std::decay_t<
                                     decltype(models)>::value_type>(models));
          },
          cfg.models);
      const auto& t = one["thresholds"];
      std::printf("  %-6s %12.6f %12.6f %12.6f %12.6f\n",
                  seqmt::procedure_name(kind).c_str(), t["a"].get<double>(),
                  t["b"].get<double>(), t["c"].get<double>(),
                  t["d"].get<double>());
      report["results"].push_back(std::move(one));
    }
    std::string path =
        dir + "/" + sanitize_name(cfg.name) + "-calibration.json";
    write_json_file(path, report);
    std::printf("  wrote %s\n", path.c_str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

template <seqmt::StreamModel M>
std::vector<seqmt::CurvePoint> sweep_one(const RunConfig& cfg,
                                         seqmt::ProcedureKind kind,
                                         const std::vector<M>& models,
                                         int threads) {
  seqmt::SweepSpec<M> spec;
  spec.kind = kind;
  spec.prior = cfg.prior;
  spec.models = models;
  spec.signal_sets = cfg.signal_sets;
  spec.grid = cfg.grid;
  spec.time_replications = cfg.replications;
  spec.error_replications = cfg.error_replications;
  spec.estimate_errors = cfg.estimate_errors;
  spec.master_seed = cfg.seed;
  spec.threads = threads;
  spec.horizon = cfg.horizon;
  auto cells = seqmt::run_sweep(spec);
  return seqmt::make_curve_points(cells);
}

int cmd_sweep(const CommonOpts& opts) {
  bool partial = false;
  for (RunConfig& cfg : resolve_configs(opts)) {
    if (cfg.grid.empty())
      throw std::invalid_argument("sweep needs a nonempty grid");
    std::string dir = resolve_out_dir(opts, cfg);
    std::filesystem::create_directories(dir);
    for (seqmt::ProcedureKind kind : cfg.procedures) {
      auto points = std::visit(
          [&](const auto& models) {
            return sweep_one(cfg, kind, models, opts.threads);
          },
          cfg.models);
      std::string base = dir + "/" + sanitize_name(cfg.name) + "-sweep-" +
                         seqmt::procedure_name(kind);
      seqmt::CsvWriter csv(base + ".csv");
      stamp_metadata(csv, cfg);
      csv.metadata("procedure", seqmt::procedure_name(kind));
      int K = cfg.num_streams();
      std::vector<std::string> cols{"procedure", "config_id", "free_param"};
      for (int k = 1; k <= K; ++k) {
        cols.push_back("mean_time_" + std::to_string(k));
        cols.push_back("se_time_" + std::to_string(k));
      }
      for (const char* c :
           {"mean_overall", "se_overall", "alpha_hat", "alpha_se", "beta_hat",
            "beta_se", "log10_alpha", "log10_beta", "exhausted_fraction"})
        cols.push_back(c);
      csv.header(cols);
      for (const auto& p : points) {
        std::vector<std::string> row{seqmt::procedure_name(kind),
                                     set_label(p.signals),
                                     seqmt::format_g17(p.free_param)};
        for (int k = 0; k < K; ++k) {
          row.push_back(seqmt::format_g17(p.mean_time[k]));
          row.push_back(seqmt::format_g17(p.se_time[k]));
        }
        for (double v : {p.mean_overall, p.se_overall, p.alpha_hat, p.alpha_se,
                         p.beta_hat, p.beta_se, p.log10_alpha, p.log10_beta,
                         p.exhausted_fraction})
          row.push_back(seqmt::format_g17(v));
        csv.row(row);
        if (p.exhausted_fraction > 0.0) {
          partial = true;
          std::fprintf(stderr,
                       "warning: %s %s: %.3g of replications hit the horizon "
                       "at free_param %.6g\n",
                       cfg.name.c_str(), seqmt::procedure_name(kind).c_str(),
                       p.exhausted_fraction, p.free_param);
        }
      }
      csv.close();
      nlohmann::json meta = base_metadata(cfg);
      meta["procedure"] = seqmt::procedure_name(kind);
      meta["grid"] = cfg.grid;
      meta["threads_used"] = opts.threads;
      write_json_file(base + ".meta.json", meta);
      std::printf("wrote %s.csv (%zu points)\n", base.c_str(), points.size());
    }
  }
  if (partial && !opts.allow_partial) {
    std::fprintf(stderr,
                 "error: horizon exhaustion detected; rerun with a larger "
                 "horizon or --allow-partial\n");
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// are

std::optional<Rat> dyadic_rational(double x) {
  if (!std::isfinite(x)) return std::nullopt;
  long long den = 1;
  for (int i = 0; i < 40; ++i) {
    double scaled = x * static_cast<double>(den);
    if (scaled == std::floor(scaled) && std::abs(scaled) < 9e15)
      return Rat(static_cast<long long>(scaled), den);
    den <<= 1;
  }
  return std::nullopt;
}

std::string rat_str(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

template <class Q>
std::string are_cell(bool synchronous_table, int stream,
                     const seqmt::SignalConfig& config,
                     const seqmt::PriorBounds& prior,
                     const seqmt::KlVec<Q>& kls, const Q& r);

template <>
std::string are_cell<Rat>(bool synchronous_table, int stream,
                          const seqmt::SignalConfig& config,
                          const seqmt::PriorBounds& prior,
                          const seqmt::KlVec<Rat>& kls, const Rat& r) {
  Rat v = synchronous_table
              ? seqmt::are_synchronous(stream, config, prior, kls, r)
              : seqmt::are_decentralized(stream, config, prior, kls);
  return rat_str(v);
}

template <>
std::string are_cell<double>(bool synchronous_table, int stream,
                             const seqmt::SignalConfig& config,
                             const seqmt::PriorBounds& prior,
                             const seqmt::KlVec<double>& kls, const double& r) {
  double v = synchronous_table
                 ? seqmt::are_synchronous(stream, config, prior, kls, r)
                 : seqmt::are_decentralized(stream, config, prior, kls);
  return seqmt::format_g17(v);
}

template <class Q>
void write_are_table(const RunConfig& cfg, const std::string& dir,
                     bool synchronous_table, const seqmt::KlVec<Q>& kls,
                     const Q& r, const std::string& kl_i_meta,
                     const std::string& kl_j_meta, const std::string& r_meta) {
  std::string path = dir + "/" + sanitize_name(cfg.name) + "-are-" +
                     (synchronous_table ? "synchronous" : "decentralized") +
                     ".csv";
  seqmt::CsvWriter csv(path);
  stamp_metadata(csv, cfg);
  csv.metadata("table", synchronous_table ? "synchronous" : "decentralized");
  csv.metadata("l", std::to_string(cfg.prior.l));
  csv.metadata("u", std::to_string(cfg.prior.u));
  csv.metadata("r", r_meta);
  csv.metadata("kl_I", kl_i_meta);
  csv.metadata("kl_J", kl_j_meta);
  int K = cfg.prior.K;
  std::vector<std::string> cols{"config"};
  for (int k = 1; k <= K; ++k) cols.push_back("stream_" + std::to_string(k));
  csv.header(cols);
  for (const auto& set : cfg.signal_sets) {
    seqmt::SignalConfig config(set, K);
    std::vector<std::string> row{set_label(set)};
    for (int k = 0; k < K; ++k)
      row.push_back(are_cell<Q>(synchronous_table, k, config, cfg.prior, kls, r));
    csv.row(row);
  }
  csv.close();
  std::printf("wrote %s\n", path.c_str());
}

int cmd_are(const CommonOpts& opts) {
  for (RunConfig& cfg : resolve_configs(opts)) {
    std::string dir = resolve_out_dir(opts, cfg);
    std::filesystem::create_directories(dir);

    // Exact rational tables whenever every KL number is a dyadic rational
    // (Gaussian mean mu^2/2 with binary-fraction mu); double otherwise.
    seqmt::KlVec<double> kd = cfg.kl_numbers();
    seqmt::KlVec<Rat> kq;
    bool rational = true;
    for (std::size_t i = 0; i < kd.I.size(); ++i) {
      auto qi = dyadic_rational(kd.I[i]);
      auto qj = dyadic_rational(kd.J[i]);
      if (!qi || !qj) {
        rational = false;
        break;
      }
      kq.I.push_back(*qi);
      kq.J.push_back(*qj);
    }
    Rat r_rat(cfg.are.r_num, cfg.are.r_den);
    double r_dbl = static_cast<double>(cfg.are.r_num) / cfg.are.r_den;
    std::string r_meta = rat_str(r_rat);

    auto join = [&](const std::vector<double>& v, const std::vector<Rat>& q) {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += rational ? rat_str(q[i]) : seqmt::format_g17(v[i]);
      }
      return out;
    };
    std::string kl_i_meta = join(kd.I, kq.I);
    std::string kl_j_meta = join(kd.J, kq.J);

    bool want_dec = cfg.are.table != "synchronous";
    bool want_syn = cfg.are.table != "decentralized";
    if (rational) {
      if (want_dec)
        write_are_table<Rat>(cfg, dir, false, kq, r_rat, kl_i_meta, kl_j_meta,
                             r_meta);
      if (want_syn)
        write_are_table<Rat>(cfg, dir, true, kq, r_rat, kl_i_meta, kl_j_meta,
                             r_meta);
    } else {
      if (want_dec)
        write_are_table<double>(cfg, dir, false, kd, r_dbl, kl_i_meta,
                                kl_j_meta, r_meta);
      if (want_syn)
        write_are_table<double>(cfg, dir, true, kd, r_dbl, kl_i_meta,
                                kl_j_meta, r_meta);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleSummary {
  double max_sigma = 0.0;
  bool any_fail = false;
  bool residual_warning = false;
};

void oracle_compare(nlohmann::json& checks, OracleSummary& sum,
                    const std::string& what, double estimated, double se,
                    double exact, double residual) {
  // Exact values from a truncated enumeration undercount by at most the
  // residual mass, so the allowance is 4 sigma plus that defect.
  double gap = std::abs(estimated - exact);
  double slack = std::max(se, 1e-300);
  double sigma = std::max(0.0, gap - residual) / slack;
  bool ok = sigma <= 4.0;
  sum.max_sigma = std::max(sum.max_sigma, sigma);
  sum.any_fail = sum.any_fail || !ok;
  checks.push_back({{"check", what},
                    {"estimated", estimated},
                    {"std_error", se},
                    {"exact", exact},
                    {"sigma", sigma},
                    {"pass", ok}});
}

int cmd_oracle(const CommonOpts& opts) {
  OracleSummary sum;
  for (RunConfig& cfg : resolve_configs(opts)) {
    if (!cfg.is_bernoulli())
      throw std::invalid_argument("oracle needs bernoulli models");
    std::string dir = resolve_out_dir(opts, cfg);
    std::filesystem::create_directories(dir);
    std::span<const seqmt::BernoulliModel> models(cfg.bernoulli());

    nlohmann::json report = base_metadata(cfg);
    report["checks"] = nlohmann::json::array();

    for (seqmt::ProcedureKind kind : cfg.procedures) {
      seqmt::Thresholds t;
      if (cfg.targets) {
        t = seqmt::analytic_thresholds(kind, *cfg.targets, cfg.prior);
      } else if (!cfg.grid.empty()) {
        t = seqmt::thresholds_from_free_param(kind, cfg.prior, cfg.grid[0]);
      } else {
        throw std::invalid_argument("oracle needs targets or a grid value");
      }

      for (std::size_t ci = 0; ci < cfg.signal_sets.size(); ++ci) {
        seqmt::SignalConfig config(cfg.signal_sets[ci], cfg.prior.K);
        auto exact = seqmt::enumerate_exact(kind, models, config, t, cfg.prior,
                                            cfg.depth);
        std::string tag = cfg.name + "/" + seqmt::procedure_name(kind) + "/A=" +
                          set_label(cfg.signal_sets[ci]);
        if (exact.residual_mass >= 1e-3) {
          sum.residual_warning = true;
          std::fprintf(stderr,
                       "warning: %s: undecided mass %.3g at depth %d; "
                       "increase depth for a tighter oracle\n",
                       tag.c_str(), exact.residual_mass, cfg.depth);
        }

        // Plain MC batch for distribution cells and both error types.
        std::uint64_t cell_base = (static_cast<std::uint64_t>(ci) << 24) |
                                  (static_cast<std::uint64_t>(kind) << 20);
        int R = cfg.replications;
        std::vector<seqmt::DecisionRecord> records;
        records.reserve(R);
        for (int r = 0; r < R; ++r) {
          seqmt::Rng rng(seqmt::replication_seed(cfg.seed, cell_base, r));
          records.push_back(run_replication(kind, models, config, t, cfg.prior,
                                            rng, cfg.horizon)
                                .record);
        }
        // Under agreement the MC count is Binomial(R, p_exact), so the
        // sigma scale comes from the exact probability; the empirical
        // standard error vanishes when the count is zero.
        auto binom_se = [R](double p_exact, double p_hat) {
          double v = std::max(p_exact * (1 - p_exact), p_hat * (1 - p_hat));
          return std::sqrt(std::max(v, 1e-12) / R);
        };
        auto f1 = seqmt::empirical_error(records, config, seqmt::ErrorMetric::fwe1);
        auto f2 = seqmt::empirical_error(records, config, seqmt::ErrorMetric::fwe2);
        oracle_compare(report["checks"], sum, tag + "/fwe1-mc", f1.value,
                       binom_se(exact.fwe1, f1.value), exact.fwe1,
                       exact.residual_mass);
        oracle_compare(report["checks"], sum, tag + "/fwe2-mc", f2.value,
                       binom_se(exact.fwe2, f2.value), exact.fwe2,
                       exact.residual_mass);

        auto is1 = seqmt::is_fwe_estimate(kind, models, config, t, cfg.prior, 1,
                                          cfg.error_replications, cfg.seed,
                                          cell_base | 1, cfg.horizon);
        oracle_compare(report["checks"], sum, tag + "/fwe1-is", is1.estimate,
                       is1.std_error, exact.fwe1, exact.residual_mass);

        // Per-cell stopping law P(T_k = n, D_k = d), n within the horizon of
        // the enumeration, coarse cells only (prob >= 1e-4) to keep sigma
        // meaningful at the MC batch size.
        for (int k = 0; k < cfg.prior.K; ++k) {
          for (int d = 0; d < 2; ++d) {
            for (int n = 1; n <= cfg.depth; ++n) {
              double p = exact.stop_dist[k][d][n - 1];
              if (p < 1e-4) continue;
              int hits = 0;
              for (const auto& rec : records)
                if (rec.stop_time[k] == n && rec.decision[k] == d) ++hits;
              double phat = static_cast<double>(hits) / R;
              double se = binom_se(p, phat);
              char what[96];
              std::snprintf(what, sizeof what, "%s/P(T%d=%d,D=%d)",
                            tag.c_str(), k + 1, n, d);
              oracle_compare(report["checks"], sum, what, phat, se, p, 0.0);
            }
          }
        }
      }
    }

    report["max_sigma"] = sum.max_sigma;
    report["pass"] = !sum.any_fail;
    std::string path = dir + "/" + sanitize_name(cfg.name) + "-oracle.json";
    write_json_file(path, report);
    std::printf("%s: %zu checks, max sigma %.2f -> %s (report %s)\n",
                cfg.name.c_str(), report["checks"].size(), sum.max_sigma,
                sum.any_fail ? "FAIL" : "PASS", path.c_str());
  }
  return sum.any_fail ? kExitAcceptance : kExitOk;
}

int cmd_list_recipes() {
  for (const auto& r : seqmt::recipe_list())
    std::printf("%-14s %s\n", r.name.c_str(), r.summary.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential multiple testing over parallel data streams"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub, bool with_partial = false) {
    sub->add_option("--config", opts.config_path, "experiment config (JSON)");
    sub->add_option("--recipe", opts.recipe, "named preset (see list-recipes)");
    sub->add_option("--seed", opts.seed, "master seed override")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", opts.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", opts.out_dir, "output directory");
    if (with_partial)
      sub->add_flag("--allow-partial", opts.allow_partial,
                    "tolerate horizon-exhausted replications");
  };

  CLI::App* s_cal = app.add_subcommand("calibrate", "compute error-controlling thresholds");
  CLI::App* s_sweep = app.add_subcommand("sweep", "error/delay curves over a threshold grid");
  CLI::App* s_are = app.add_subcommand("are", "asymptotic relative efficiency tables");
  CLI::App* s_oracle = app.add_subcommand("oracle", "exact-enumeration cross-check (bernoulli)");
  app.add_subcommand("list-recipes", "list named experiment presets");
  add_common(s_cal);
  add_common(s_sweep, true);
  add_common(s_are);
  add_common(s_oracle);

  // CLI11 needs to see --seed was set explicitly.
  for (CLI::App* sub : {s_cal, s_sweep, s_are, s_oracle})
    sub->callback([&, sub] { opts.seed_given = sub->count("--seed") > 0; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (app.got_subcommand("calibrate")) return cmd_calibrate(opts);
    if (app.got_subcommand("sweep")) return cmd_sweep(opts);
    if (app.got_subcommand("are")) return cmd_are(opts);
    if (app.got_subcommand("oracle")) return cmd_oracle(opts);
    if (app.got_subcommand("list-recipes")) return cmd_list_recipes();
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
