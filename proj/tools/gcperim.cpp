// gcperim: perimeter estimation from labeled point clouds via rescaled graph
// cuts, plus the Monte Carlo experiment harness.  See README.md for the
// config-file format and per-subcommand output contracts.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "gcperim/config.hpp"
#include "gcperim/constants.hpp"
#include "gcperim/harness.hpp"

namespace {

using gcperim::ExperimentConfig;
using gcperim::RunResult;

struct CliState {
  ExperimentConfig cfg;
  std::string config_path;
  std::string n_list, eps_list;
  bool has_rho = false;
  double rho = 0.0;
};

void add_common_options(CLI::App* sub, CliState& st) {
  sub->add_option("--config", st.config_path, "flat key=value config file");
  sub->add_option("--shape", st.cfg.shape_spec,
                  "shape spec: 'ball cx cy [cz ...] r' | 'slab axis threshold' | "
                  "'box lo1..lod hi1..hid'");
  sub->add_option("--alt-shape", st.cfg.alt_shape_spec, "alternative-hypothesis shape");
  sub->add_option("--d", st.cfg.d, "dimension (>= 2)");
  sub->add_option("--n", st.n_list, "comma-separated sample counts");
  sub->add_option("--eps", st.eps_list, "comma-separated connection radii");
  sub->add_option("--eps-rule", st.cfg.eps_rule, "list | power | optimal");
  sub->add_option("--eps-c", st.cfg.eps_c, "power rule: eps = c * n^-gamma");
  sub->add_option("--eps-gamma", st.cfg.eps_gamma, "power rule exponent");
  sub->add_flag("--optimal-interior,!--optimal-touching", st.cfg.optimal_interior,
                "optimal rule branch (interior vs touching set)");
  sub->add_option("--trials", st.cfg.trials, "trials per cell");
  sub->add_option("--seed", st.cfg.seed, "base seed");
  sub->add_option("--alpha", st.cfg.alpha, "level in (0, 0.5)");
  sub->add_option("--rho", st.rho, "perimeter bound under test")->each([&st](const std::string&) {
    st.has_rho = true;
  });
  sub->add_option("--width-mode", st.cfg.width_mode, "true_per | plug_in");
  sub->add_option("--p", st.cfg.moment_p, "moment order (1, 2 or 3)");
  sub->add_option("--mc-outer", st.cfg.mc_outer, "Monte Carlo outer samples");
  sub->add_option("--mc-inner", st.cfg.mc_inner, "Monte Carlo inner (phi) samples");
  sub->add_option("--quad-tol", st.cfg.quad_tol, "exact-profile quadrature tolerance");
  sub->add_option("--out", st.cfg.out, "output path (default: stdout)");
  sub->add_flag("--json", st.cfg.json, "emit a JSON mirror of the output");
  sub->add_flag("--assert", st.cfg.assert_checks,
                "exit 3 if any acceptance-style check fails");
  sub->add_option("--threads", st.cfg.threads, "worker count (0 = hardware)");
}

// File values load first, explicit flags override.
ExperimentConfig finalize(CliState& st, CLI::App* sub) {
  ExperimentConfig cfg;
  if (!st.config_path.empty()) cfg.load_file(st.config_path);
  auto take = [&](const char* flag, auto member, auto value) {
    if (sub->count(flag) > 0) cfg.*member = value;
  };
  take("--shape", &ExperimentConfig::shape_spec, st.cfg.shape_spec);
  take("--alt-shape", &ExperimentConfig::alt_shape_spec, st.cfg.alt_shape_spec);
  take("--d", &ExperimentConfig::d, st.cfg.d);
  if (sub->count("--n") > 0) cfg.set("n", st.n_list);
  if (sub->count("--eps") > 0) cfg.set("eps", st.eps_list);
  take("--eps-rule", &ExperimentConfig::eps_rule, st.cfg.eps_rule);
  take("--eps-c", &ExperimentConfig::eps_c, st.cfg.eps_c);
  take("--eps-gamma", &ExperimentConfig::eps_gamma, st.cfg.eps_gamma);
  if (sub->count("--optimal-interior") > 0 || sub->count("--optimal-touching") > 0)
    cfg.optimal_interior = st.cfg.optimal_interior;
  take("--trials", &ExperimentConfig::trials, st.cfg.trials);
  take("--seed", &ExperimentConfig::seed, st.cfg.seed);
  take("--alpha", &ExperimentConfig::alpha, st.cfg.alpha);
  if (st.has_rho) cfg.rho = st.rho;
  take("--width-mode", &ExperimentConfig::width_mode, st.cfg.width_mode);
  take("--p", &ExperimentConfig::moment_p, st.cfg.moment_p);
  take("--mc-outer", &ExperimentConfig::mc_outer, st.cfg.mc_outer);
  take("--mc-inner", &ExperimentConfig::mc_inner, st.cfg.mc_inner);
  take("--quad-tol", &ExperimentConfig::quad_tol, st.cfg.quad_tol);
  take("--out", &ExperimentConfig::out, st.cfg.out);
  if (sub->count("--json") > 0) cfg.json = true;
  if (sub->count("--assert") > 0) cfg.assert_checks = true;
  take("--threads", &ExperimentConfig::threads, st.cfg.threads);
  return cfg;
}

int emit(const RunResult& result, const ExperimentConfig& cfg) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (!cfg.out.empty()) {
    std::ofstream os(cfg.out);
    if (!os) {
      std::cerr << "error: cannot write '" << cfg.out << "'\n";
      return 2;
    }
    gcperim::write_csv(result, os);
    if (cfg.json) {
      std::ofstream js(cfg.out + ".json");
      gcperim::write_json(result, js);
    }
  } else if (cfg.json) {
    gcperim::write_json(result, std::cout);
  } else {
    gcperim::write_csv(result, std::cout);
  }
  if (cfg.assert_checks && !result.checks_ok) {
    for (const auto& f : result.check_failures)
      std::cerr << "check failed: " << f << '\n';
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-cut perimeter estimation and verification harness"};
  app.require_subcommand(1);

  int constants_d = 2;
  CLI::App* c_constants =
      app.add_subcommand("constants", "print sigma_d, alpha_d, C_d for a dimension");
  c_constants->add_option("--d", constants_d, "dimension (>= 2)")->required();

  std::map<std::string, std::function<RunResult(const ExperimentConfig&)>> runners = {
      {"estimate", gcperim::run_estimate},
      {"bias", gcperim::run_bias},
      {"decompose", gcperim::run_decompose},
      {"unbiasedness", gcperim::run_unbiasedness},
      {"variance", gcperim::run_variance},
      {"clt", gcperim::run_clt},
      {"testerrors", gcperim::run_test_errors},
      {"sharpness", gcperim::run_sharpness},
      {"coverage", gcperim::run_coverage},
      {"moments", gcperim::run_moments},
  };
  std::map<std::string, const char*> blurbs = {
      {"estimate", "one-shot perimeter estimate, interval and test decision"},
      {"bias", "bias table of P_eps vs sigma_d*Per with fitted slope"},
      {"decompose", "per-trial Hoeffding decomposition records"},
      {"unbiasedness", "mean graph perimeter vs exact P_eps per cell"},
      {"variance", "variance per cell vs the asymptotic law and rate f(n,eps)"},
      {"clt", "KS and skewness of the standardized graph perimeter"},
      {"testerrors", "empirical type I / type II rates of the perimeter test"},
      {"sharpness", "zero-cut fractions along a shrinking-eps schedule"},
      {"coverage", "empirical confidence-interval coverage"},
      {"moments", "central absolute moments vs f(n,eps)^p"},
  };

  std::map<std::string, CliState> states;
  for (auto& [name, fn] : runners) {
    CLI::App* sub = app.add_subcommand(name, blurbs[name]);
    add_common_options(sub, states[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // contract: config/usage errors exit 2
  }

  try {
    if (c_constants->parsed()) {
      if (constants_d < 2) throw gcperim::ConfigError("d >= 2 required");
      std::printf("sigma_d=%.12g\n", gcperim::surface_tension(constants_d));
      std::printf("alpha_d=%.12g\n", gcperim::unit_ball_volume(constants_d));
      std::printf("c_d=%.12g\n", gcperim::variance_constant(constants_d));
      return 0;
    }
    for (auto& [name, fn] : runners) {
      CLI::App* sub = app.get_subcommand(name);
      if (!sub->parsed()) continue;
      ExperimentConfig cfg = finalize(states[name], sub);
      RunResult result = fn(cfg);
      return emit(result, cfg);
    }
  } catch (const gcperim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const gcperim::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
