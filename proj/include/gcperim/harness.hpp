#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gcperim/config.hpp"
#include "gcperim/constants.hpp"
#include "gcperim/diagnostics.hpp"
#include "gcperim/inference.hpp"
#include "gcperim/neighbor_graph.hpp"
#include "gcperim/nonlocal.hpp"
#include "gcperim/sampling.hpp"
#include "gcperim/stats.hpp"

// Monte Carlo experiment harness.  Each runner maps a config to a table of
// per-cell aggregates; cells are (n, eps) pairs, trials inside a cell are
// seeded via spawn_trial_seed(base, cell_ordinal * trials + t) and may run
// on any number of workers; results land in a preallocated slot per trial
// and aggregation walks them in index order with compensated summation, so
// the output bytes are a pure function of the config.

namespace gcperim {

using ordered_json = nlohmann::ordered_json;

struct RunResult {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> header;  // '# key=value' lines
  std::vector<std::string> columns;
  std::vector<std::vector<ordered_json>> rows;
  std::vector<std::string> trailing;  // '# payload' lines after the data
  std::vector<std::string> warnings;
  bool checks_ok = true;
  std::vector<std::string> check_failures;
};

namespace detail {

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_scalar(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt12(v.get<double>());
  return v.dump();
}

}  // namespace detail

inline void write_csv(const RunResult& r, std::ostream& os) {
  for (const auto& [k, v] : r.header) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    os << (i ? "," : "") << r.columns[i];
  os << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << detail::csv_scalar(row[i]);
    os << '\n';
  }
  for (const auto& t : r.trailing) os << "# " << t << '\n';
}

inline std::string to_csv_string(const RunResult& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

inline void write_json(const RunResult& r, std::ostream& os) {
  ordered_json j;
  j["experiment"] = r.experiment;
  ordered_json hdr = ordered_json::object();
  for (const auto& [k, v] : r.header) hdr[k] = v;
  j["header"] = hdr;
  j["columns"] = r.columns;
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json obj = ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[r.columns[i]] = row[i];
    rows.push_back(obj);
  }
  j["rows"] = rows;
  j["trailing"] = r.trailing;
  os << j.dump(2) << '\n';
}

template <class Fn>
void parallel_for_indexed(std::int64_t count, int threads, Fn&& fn) {
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers == 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

namespace detail {

struct TrialMeasure {
  double gper = 0.0;
  std::int64_t edges = 0;
};

inline TrialMeasure measure_trial(const Shape& shape, int d, std::int64_t n, double eps,
                                  std::uint64_t trial_seed) {
  LabeledCloud cloud = sample_labeled({n, d, trial_seed}, shape);
  TrialMeasure t;
  t.edges = cut_count_tube(cloud, shape, eps);
  t.gper = 2.0 * static_cast<double>(t.edges) /
           (static_cast<double>(n) * static_cast<double>(n - 1) * std::pow(eps, d + 1));
  return t;
}

struct CellFrame {
  std::int64_t n = 0;
  double eps = 0.0;
  RegimeClassification rc;
  std::vector<TrialMeasure> trials;
};

inline std::vector<CellFrame> run_cells(const ExperimentConfig& cfg, const Shape& shape,
                                        std::int64_t ordinal_base = 0) {
  std::vector<CellFrame> cells;
  for (std::int64_t n : cfg.n_values)
    for (double eps : cfg.eps_for(n)) {
      CellFrame c;
      c.n = n;
      c.eps = eps;
      c.rc = rate_f(n, eps, cfg.d);
      cells.push_back(std::move(c));
    }
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellFrame& cell = cells[ci];
    cell.trials.resize(cfg.trials);
    std::int64_t block = (ordinal_base + static_cast<std::int64_t>(ci)) * cfg.trials;
    parallel_for_indexed(cfg.trials, cfg.threads, [&](std::int64_t t) {
      cell.trials[t] =
          measure_trial(shape, cfg.d, cell.n, cell.eps, spawn_trial_seed(cfg.seed, block + t));
    });
  }
  return cells;
}

inline NonlocalBudget budget_from(const ExperimentConfig& cfg) {
  NonlocalBudget b;
  b.outer_samples = cfg.mc_outer;
  b.inner_samples = cfg.mc_inner;
  b.quad_tol = cfg.quad_tol;
  return b;
}

inline void standard_header(RunResult& r, const ExperimentConfig& cfg,
                            const std::string& experiment) {
  r.experiment = experiment;
  r.header.emplace_back("experiment", experiment);
  std::istringstream in(cfg.canonical());
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    r.header.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  r.header.emplace_back("alpha_d", fmt12(unit_ball_volume(cfg.d)));
  r.header.emplace_back("sigma_d", fmt12(surface_tension(cfg.d)));
  r.header.emplace_back("c_d", fmt12(variance_constant(cfg.d)));
  r.header.emplace_back("config_hash", cfg.hash_hex());
}

inline void fail_check(RunResult& r, std::string msg) {
  r.checks_ok = false;
  r.check_failures.push_back(std::move(msg));
}

inline std::string cell_tag(const CellFrame& c) {
  return "n=" + std::to_string(c.n) + " eps=" + fmt12(c.eps);
}

inline std::vector<double> gpers(const CellFrame& c) {
  std::vector<double> v(c.trials.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c.trials[i].gper;
  return v;
}

}  // namespace detail

// Mean graph perimeter per cell against the exact P_eps (unbiasedness law).
inline RunResult run_unbiasedness(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "unbiasedness");
  r.columns = {"n",     "eps",   "regime",        "trials", "mean_gper", "se_mean",
               "p_eps", "p_err", "zero_cut_frac", "seed",   "config_hash"};
  auto cells = detail::run_cells(cfg, shape);
  for (const auto& cell : cells) {
    NonlocalEstimate p = nonlocal_perimeter(shape, cell.eps, detail::budget_from(cfg),
                                            spawn_trial_seed(cfg.seed, std::int64_t{1} << 40));
    auto g = detail::gpers(cell);
    SampleMoments m = sample_moments(g);
    double se = standard_error(m);
    std::int64_t zero = 0;
    for (const auto& t : cell.trials) zero += t.edges == 0;
    double zf = static_cast<double>(zero) / static_cast<double>(cfg.trials);
    r.rows.push_back({cell.n, cell.eps, regime_name(cell.rc.regime), cfg.trials, m.mean, se,
                      p.value, p.error_bound, zf, cfg.seed, cfg.hash_hex()});
    double dev = std::fabs(m.mean - p.value);
    if (dev > 3.0 * se + p.error_bound)
      detail::fail_check(r, detail::cell_tag(cell) + ": |mean gper - P_eps| = " +
                                 detail::fmt12(dev) + " exceeds 3 SE = " +
                                 detail::fmt12(3.0 * se));
  }
  return r;
}

// Sample variance per cell; dense cells also report the ratio to the
// asymptotic 4 C_d Per / (n eps).  With >= 3 cells in one regime the log-log
// slope of std(gper) against f(n, eps) is fitted and checked against 1.
inline RunResult run_variance(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "variance");
  r.columns = {"n",          "eps",       "regime", "trials",       "var_gper", "std_gper",
               "f_value",    "theory_var", "var_ratio", "zero_cut_frac", "seed",
               "config_hash"};
  const double per = shape.exact_perimeter();
  const double cd = variance_constant(cfg.d);
  auto cells = detail::run_cells(cfg, shape);
  std::vector<double> lf_dense, ls_dense, lf_sparse, ls_sparse;
  for (const auto& cell : cells) {
    auto g = detail::gpers(cell);
    SampleMoments m = sample_moments(g);
    double sd = std::sqrt(m.variance);
    double theory = 4.0 * cd * per / (static_cast<double>(cell.n) * cell.eps);
    double ratio = theory > 0.0 ? m.variance / theory : 0.0;
    std::int64_t zero = 0;
    for (const auto& t : cell.trials) zero += t.edges == 0;
    r.rows.push_back({cell.n, cell.eps, regime_name(cell.rc.regime), cfg.trials, m.variance,
                      sd, cell.rc.f_value, theory, ratio,
                      static_cast<double>(zero) / static_cast<double>(cfg.trials), cfg.seed,
                      cfg.hash_hex()});
    if (sd > 0.0) {
      if (cell.rc.regime == Regime::dense) {
        lf_dense.push_back(std::log(cell.rc.f_value));
        ls_dense.push_back(std::log(sd));
        if (ratio < 0.85 || ratio > 1.15)
          detail::fail_check(r, detail::cell_tag(cell) + ": var ratio " +
                                     detail::fmt12(ratio) + " outside [0.85, 1.15]");
      } else if (cell.rc.regime == Regime::sparse) {
        lf_sparse.push_back(std::log(cell.rc.f_value));
        ls_sparse.push_back(std::log(sd));
      }
    }
  }
  auto fit_regime = [&](const char* name, const std::vector<double>& lf,
                        const std::vector<double>& ls) {
    if (lf.size() < 3) return;
    double slope = fit_line(lf, ls).slope;
    r.trailing.push_back(std::string(name) + "_slope=" + detail::fmt12(slope));
    if (std::fabs(slope - 1.0) > 0.25)
      detail::fail_check(r, std::string(name) + " std-vs-f slope " + detail::fmt12(slope) +
                                 " outside 1 +- 0.25");
  };
  fit_regime("dense", lf_dense, ls_dense);
  fit_regime("sparse", lf_sparse, ls_sparse);
  return r;
}

// Standardizes each trial with the exact P_eps and the CLT scale
// sqrt(n eps / (4 C_d Per)); reports KS distance to N(0,1) and skewness.
inline RunResult run_clt(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "clt");
  r.columns = {"n",       "eps",      "regime", "trials",     "ks_distance", "ks_crit",
               "skewness", "std_mean", "p_eps",  "zero_cut_frac", "seed",     "config_hash"};
  const double per = shape.exact_perimeter();
  const double cd = variance_constant(cfg.d);
  auto cells = detail::run_cells(cfg, shape);
  for (const auto& cell : cells) {
    NonlocalEstimate p = nonlocal_perimeter(shape, cell.eps, detail::budget_from(cfg),
                                            spawn_trial_seed(cfg.seed, std::int64_t{1} << 40));
    double scale =
        std::sqrt(static_cast<double>(cell.n) * cell.eps / (4.0 * cd * per));
    std::vector<double> z(cell.trials.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = scale * (cell.trials[i].gper - p.value);
    SampleMoments m = sample_moments(z);
    double ks = ks_distance_vs_normal(z);
    double ks_crit = 1.63 / std::sqrt(static_cast<double>(cfg.trials));
    std::int64_t zero = 0;
    for (const auto& t : cell.trials) zero += t.edges == 0;
    r.rows.push_back({cell.n, cell.eps, regime_name(cell.rc.regime), cfg.trials, ks, ks_crit,
                      m.skewness, m.mean, p.value,
                      static_cast<double>(zero) / static_cast<double>(cfg.trials), cfg.seed,
                      cfg.hash_hex()});
    if (ks >= ks_crit)
      detail::fail_check(r, detail::cell_tag(cell) + ": KS distance " + detail::fmt12(ks) +
                                 " >= critical " + detail::fmt12(ks_crit));
    double skew_band = std::max(0.2, 3.0 * std::sqrt(6.0 / static_cast<double>(cfg.trials)));
    if (std::fabs(m.skewness) >= skew_band)
      detail::fail_check(r, detail::cell_tag(cell) + ": |skewness| " +
                                 detail::fmt12(std::fabs(m.skewness)) + " >= " +
                                 detail::fmt12(skew_band));
  }
  return r;
}

// Empirical type I rate at the null boundary (Per = rho, cfg.shape) and
// type II rate under the alternative (cfg.alt_shape); the acceptance-rate
// decay exponent in n*eps is fitted across alternative cells when possible.
inline RunResult run_test_errors(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.rho) throw ConfigError("testerrors: rho is required");
  if (cfg.alt_shape_spec.empty()) throw ConfigError("testerrors: alt_shape is required");
  Shape null_shape = parse_shape(cfg.shape_spec, cfg.d);
  Shape alt_shape = parse_shape(cfg.alt_shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "testerrors");
  r.columns = {"scenario", "n",    "eps",        "regime",  "trials", "per_true",
               "rejection_rate", "mean_ln", "seed", "config_hash"};
  const double rho = *cfg.rho;
  double z_alpha = z_quantile(cfg.alpha);
  std::vector<double> alt_lnne, alt_laccept;
  const Shape* shapes[2] = {&null_shape, &alt_shape};
  const char* names[2] = {"null", "alt"};
  // scenarios get disjoint seed-ordinal blocks far above any real cell count
  const std::int64_t scenario_block = 100000;
  for (int s = 0; s < 2; ++s) {
    auto cells = detail::run_cells(cfg, *shapes[s], s * scenario_block);
    for (const auto& cell : cells) {
      std::int64_t rejected = 0;
      KahanSum ln_sum;
      for (const auto& t : cell.trials) {
        PerimeterEstimate est{t.gper, t.gper / surface_tension(cfg.d), cell.n, cell.eps,
                              cfg.d};
        double ln = test_statistic(est, rho);
        ln_sum.add(ln);
        if (ln > z_alpha) ++rejected;
      }
      double rate = static_cast<double>(rejected) / static_cast<double>(cfg.trials);
      r.rows.push_back({names[s], cell.n, cell.eps, regime_name(cell.rc.regime), cfg.trials,
                        shapes[s]->exact_perimeter(), rate,
                        ln_sum.value() / static_cast<double>(cfg.trials), cfg.seed,
                        cfg.hash_hex()});
      if (s == 0) {
        double bound = cfg.alpha + 2.0 * binomial_se(cfg.alpha, cfg.trials);
        if (rate > bound)
          detail::fail_check(r, "null " + detail::cell_tag(cell) + ": rejection rate " +
                                     detail::fmt12(rate) + " > alpha + 2 SE = " +
                                     detail::fmt12(bound));
      } else {
        double ne = static_cast<double>(cell.n) * cell.eps;
        if (ne >= 1000.0 && rate < 0.9)
          detail::fail_check(r, "alt " + detail::cell_tag(cell) + ": rejection rate " +
                                     detail::fmt12(rate) + " < 0.9 at n*eps = " +
                                     detail::fmt12(ne));
        double accept = 1.0 - rate;
        if (accept > 0.0) {
          alt_lnne.push_back(std::log(ne));
          alt_laccept.push_back(std::log(accept));
        }
      }
    }
  }
  if (alt_lnne.size() >= 2)
    r.trailing.push_back("type2_exponent=" +
                         detail::fmt12(fit_line(alt_lnne, alt_laccept).slope));
  return r;
}

// Zero-cut fractions and edge counts along an eps_n = c n^{-gamma} schedule,
// against the exact expectation E(e_n) = n(n-1) eps^{d+1} P_eps / 2.
inline RunResult run_sharpness(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "sharpness");
  r.columns = {"n",          "eps",           "regime",   "trials",
               "zero_cut_frac", "mean_gper",  "mean_edges", "predicted_edges",
               "se_edges",   "seed",          "config_hash"};
  auto cells = detail::run_cells(cfg, shape);
  double prev_zero = -1.0, prev_zero_se = 0.0;
  for (const auto& cell : cells) {
    NonlocalEstimate p = nonlocal_perimeter(shape, cell.eps, detail::budget_from(cfg),
                                            spawn_trial_seed(cfg.seed, std::int64_t{1} << 40));
    std::vector<double> edges(cell.trials.size());
    std::int64_t zero = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edges[i] = static_cast<double>(cell.trials[i].edges);
      zero += cell.trials[i].edges == 0;
    }
    SampleMoments me = sample_moments(edges);
    auto g = detail::gpers(cell);
    SampleMoments mg = sample_moments(g);
    double zf = static_cast<double>(zero) / static_cast<double>(cfg.trials);
    double predicted = 0.5 * static_cast<double>(cell.n) *
                       static_cast<double>(cell.n - 1) * std::pow(cell.eps, cfg.d + 1) *
                       p.value;
    double se = standard_error(me);
    r.rows.push_back({cell.n, cell.eps, regime_name(cell.rc.regime), cfg.trials, zf, mg.mean,
                      me.mean, predicted, se, cfg.seed, cfg.hash_hex()});
    // a Poisson-scale floor keeps the band meaningful when every trial saw
    // zero edges (the sample SE degenerates there)
    double band = 3.0 * std::max(se, std::sqrt(predicted / static_cast<double>(cfg.trials)));
    if (std::fabs(me.mean - predicted) > band)
      detail::fail_check(r, detail::cell_tag(cell) + ": mean edges " + detail::fmt12(me.mean) +
                                 " vs predicted " + detail::fmt12(predicted) +
                                 " beyond 3 SE = " + detail::fmt12(band));
    double zf_se = binomial_se(zf, cfg.trials);
    if (prev_zero >= 0.0 &&
        zf < prev_zero - 2.0 * std::sqrt(zf_se * zf_se + prev_zero_se * prev_zero_se))
      detail::fail_check(r, detail::cell_tag(cell) +
                                 ": zero-cut fraction decreased along the schedule");
    prev_zero = zf;
    prev_zero_se = zf_se;
  }
  return r;
}

// Empirical coverage of the asymptotic interval; width from the true
// perimeter (validation) or the plug-in estimate, per cfg.width_mode.
inline RunResult run_coverage(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "coverage");
  r.columns = {"n",        "eps",        "regime",       "trials", "width_mode",
               "coverage", "mean_width", "clamped_frac", "in_window", "seed",
               "config_hash"};
  const double per_true = shape.exact_perimeter();
  const bool plug_in = cfg.width_mode == "plug_in";
  auto cells = detail::run_cells(cfg, shape);
  for (const auto& cell : cells) {
    bool window = ci_window_ok(cell.n, cell.eps, cfg.d);
    if (!window)
      r.warnings.push_back(detail::cell_tag(cell) +
                           ": outside the guaranteed CI window (d in {2,3,4}, "
                           "n^{-1/d} < eps < n^{-1/5})");
    std::int64_t covered = 0, clamped = 0;
    KahanSum width_sum;
    for (const auto& t : cell.trials) {
      PerimeterEstimate est{t.gper, t.gper / surface_tension(cfg.d), cell.n, cell.eps,
                            cfg.d};
      double w = plug_in ? est.per_hat : per_true;
      if (!(w > 0.0)) continue;  // zero-cut trial in plug-in mode: empty interval
      ConfidenceInterval ci = confidence_interval(est, cfg.alpha, w);
      if (ci.a_minus <= per_true && per_true <= ci.a_plus) ++covered;
      if (ci.clamped) ++clamped;
      width_sum.add(ci.a_plus - ci.a_minus);
    }
    double coverage = static_cast<double>(covered) / static_cast<double>(cfg.trials);
    r.rows.push_back({cell.n, cell.eps, regime_name(cell.rc.regime), cfg.trials,
                      cfg.width_mode, coverage,
                      width_sum.value() / static_cast<double>(cfg.trials),
                      static_cast<double>(clamped) / static_cast<double>(cfg.trials),
                      window ? 1 : 0, cfg.seed, cfg.hash_hex()});
    double band = std::max(0.03, 3.0 * binomial_se(1.0 - cfg.alpha, cfg.trials));
    if (std::fabs(coverage - (1.0 - cfg.alpha)) > band)
      detail::fail_check(r, detail::cell_tag(cell) + ": coverage " + detail::fmt12(coverage) +
                                 " outside " + detail::fmt12(1.0 - cfg.alpha) + " +- " +
                                 detail::fmt12(band));
  }
  return r;
}

// Empirical central absolute moments E|GPer - mean|^p per cell and their
// ratio to f(n, eps)^p; the log-log trend of the ratio against n must be
// flat for the moment bound to be sharp in rate.
inline RunResult run_moments(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "moments");
  r.columns = {"p",      "n",    "eps",   "regime", "trials", "abs_moment",
               "f_pow_p", "ratio", "seed", "config_hash"};
  const int p = cfg.moment_p;
  auto cells = detail::run_cells(cfg, shape);
  std::vector<double> ln_n, ln_ratio;
  for (const auto& cell : cells) {
    auto g = detail::gpers(cell);
    SampleMoments m = sample_moments(g);
    KahanSum s;
    for (double v : g) s.add(std::pow(std::fabs(v - m.mean), p));
    double moment = s.value() / static_cast<double>(cfg.trials);
    double fp = std::pow(cell.rc.f_value, p);
    double ratio = moment / fp;
    r.rows.push_back({p, cell.n, cell.eps, regime_name(cell.rc.regime), cfg.trials, moment,
                      fp, ratio, cfg.seed, cfg.hash_hex()});
    if (ratio > 0.0) {
      ln_n.push_back(std::log(static_cast<double>(cell.n)));
      ln_ratio.push_back(std::log(ratio));
    }
  }
  if (ln_n.size() >= 3) {
    double slope = fit_line(ln_n, ln_ratio).slope;
    r.trailing.push_back("ratio_trend_slope=" + detail::fmt12(slope));
    if (std::fabs(slope) > 0.25)
      detail::fail_check(r, "moment ratio trend slope " + detail::fmt12(slope) +
                                 " outside 0 +- 0.25");
  }
  return r;
}

// Per-trial Hoeffding decomposition records for one cell.
inline RunResult run_decompose(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "decompose");
  r.columns = {"trial", "gper", "p_eps", "u1", "u2", "identity_residual", "trial_seed"};
  const std::int64_t n = cfg.n_values.front();
  const double eps = cfg.eps_for(n).front();
  NonlocalBudget budget = detail::budget_from(cfg);
  budget.quad_tol = std::min(budget.quad_tol, 1e-8);
  const double p_eps = nonlocal_perimeter(shape, eps, budget).value;
  std::vector<HoeffdingTerms> terms(cfg.trials);
  std::vector<std::uint64_t> seeds(cfg.trials);
  parallel_for_indexed(cfg.trials, cfg.threads, [&](std::int64_t t) {
    seeds[t] = spawn_trial_seed(cfg.seed, t);
    LabeledCloud cloud = sample_labeled({n, cfg.d, seeds[t]}, shape);
    terms[t] = decompose(cloud, shape, eps, p_eps);
  });
  for (std::int64_t t = 0; t < cfg.trials; ++t) {
    const HoeffdingTerms& h = terms[t];
    double residual = h.gper - h.p_eps - 2.0 * h.u1 - h.u2;
    r.rows.push_back({t, h.gper, h.p_eps, h.u1, h.u2, residual, seeds[t]});
    if (std::fabs(residual) > 1e-10 * std::max(1.0, std::fabs(h.gper)))
      detail::fail_check(r, "trial " + std::to_string(t) + ": identity residual " +
                                 detail::fmt12(residual));
  }
  return r;
}

// One-shot estimate row: per_hat, interval, and (with rho) test decision.
inline RunResult run_estimate(const ExperimentConfig& cfg) {
  cfg.validate();
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "estimate");
  r.columns = {"per_hat", "a_minus", "a_plus", "l_n", "decision"};
  const std::int64_t n = cfg.n_values.front();
  const double eps = cfg.eps_for(n).front();
  LabeledCloud cloud = sample_labeled({n, cfg.d, cfg.seed}, shape);
  CutResult cut;
  cut.n = n;
  cut.eps = eps;
  cut.edge_count = cut_count_tube(cloud, shape, eps);
  cut.gper = 2.0 * static_cast<double>(cut.edge_count) /
             (static_cast<double>(n) * static_cast<double>(n - 1) *
              std::pow(eps, cfg.d + 1));
  PerimeterEstimate est = make_estimate(cut, cfg.d);
  if (!ci_window_ok(n, eps, cfg.d))
    r.warnings.push_back("outside the guaranteed CI window (d in {2,3,4}, "
                         "n^{-1/d} < eps < n^{-1/5})");
  double w = cfg.width_mode == "true_per" ? shape.exact_perimeter() : est.per_hat;
  ordered_json a_minus = 0.0, a_plus = 0.0;
  if (w > 0.0) {
    ConfidenceInterval ci = confidence_interval(est, cfg.alpha, w);
    a_minus = ci.a_minus;
    a_plus = ci.a_plus;
  }
  ordered_json ln = "";
  ordered_json decision = "";
  if (cfg.rho) {
    TestDecision t = hypothesis_test(est, *cfg.rho, cfg.alpha);
    ln = t.l_n;
    decision = t.accept ? "accept" : "reject";
  }
  r.rows.push_back({est.per_hat, a_minus, a_plus, ln, decision});
  return r;
}

// Bias table (CSV contract: eps,p_eps,bias,abs_bias,error_bound plus the
// fitted slope on a trailing comment line).
inline RunResult run_bias(const ExperimentConfig& cfg) {
  cfg.validate(false);
  if (cfg.eps_rule != "list" || cfg.eps_values.empty())
    throw ConfigError("bias: an explicit eps list is required");
  Shape shape = parse_shape(cfg.shape_spec, cfg.d);
  RunResult r;
  detail::standard_header(r, cfg, "bias");
  r.columns = {"eps", "p_eps", "bias", "abs_bias", "error_bound"};
  BiasCurve curve = bias_curve(shape, cfg.eps_values, detail::budget_from(cfg), cfg.seed);
  for (const BiasRow& row : curve.rows)
    r.rows.push_back({row.eps, row.p_eps, row.bias, row.abs_bias, row.error_bound});
  r.trailing.push_back("slope=" + detail::fmt12(curve.slope));
  r.trailing.push_back("sigma_per=" + detail::fmt12(curve.sigma_per));
  return r;
}

}  // namespace gcperim
