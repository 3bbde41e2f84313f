#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gcperim/constants.hpp"
#include "gcperim/errors.hpp"
#include "gcperim/geometry.hpp"

// Experiment configuration shared by the CLI and the harness.  Config files
// are flat key=value text ('#' starts a comment); the same keys are exposed
// as CLI flags, which override file values.  The canonical serialization
// (and its FNV-1a hash, recorded in every output) covers exactly the fields
// that determine results; output path, format, and worker count are excluded.

namespace gcperim {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + ": bad number '" + s + "'");
  }
}

inline std::int64_t parse_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + ": bad integer '" + s + "'");
  }
}

}  // namespace detail

struct ExperimentConfig {
  std::string shape_spec;
  std::string alt_shape_spec;  // alternative-hypothesis shape (testerrors)
  int d = 2;
  std::vector<std::int64_t> n_values;
  std::string eps_rule = "list";  // list | power | optimal
  std::vector<double> eps_values;
  double eps_c = 1.0;
  double eps_gamma = 0.0;
  bool optimal_interior = true;
  std::int64_t trials = 100;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::optional<double> rho;
  std::string width_mode = "true_per";  // true_per | plug_in
  int moment_p = 2;
  std::int64_t mc_outer = 200000;
  std::int64_t mc_inner = 256;
  double quad_tol = 1e-8;

  // presentation / runtime; never hashed
  std::string out;
  bool json = false;
  bool assert_checks = false;
  int threads = 0;  // 0 = hardware concurrency

  void set(const std::string& key, const std::string& value) {
    if (key == "shape") shape_spec = value;
    else if (key == "alt_shape") alt_shape_spec = value;
    else if (key == "d") d = static_cast<int>(detail::parse_int(value, "d"));
    else if (key == "n") {
      n_values.clear();
      for (const auto& tok : detail::split_list(value, ','))
        n_values.push_back(detail::parse_int(tok, "n"));
    } else if (key == "eps") {
      eps_values.clear();
      for (const auto& tok : detail::split_list(value, ','))
        eps_values.push_back(detail::parse_double(tok, "eps"));
    } else if (key == "eps_rule") eps_rule = value;
    else if (key == "eps_c") eps_c = detail::parse_double(value, "eps_c");
    else if (key == "eps_gamma") eps_gamma = detail::parse_double(value, "eps_gamma");
    else if (key == "optimal_interior") optimal_interior = detail::parse_int(value, "optimal_interior") != 0;
    else if (key == "trials") trials = detail::parse_int(value, "trials");
    else if (key == "seed") seed = static_cast<std::uint64_t>(detail::parse_int(value, "seed"));
    else if (key == "alpha") alpha = detail::parse_double(value, "alpha");
    else if (key == "rho") rho = detail::parse_double(value, "rho");
    else if (key == "width_mode") width_mode = value;
    else if (key == "p") moment_p = static_cast<int>(detail::parse_int(value, "p"));
    else if (key == "mc_outer") mc_outer = detail::parse_int(value, "mc_outer");
    else if (key == "mc_inner") mc_inner = detail::parse_int(value, "mc_inner");
    else if (key == "quad_tol") quad_tol = detail::parse_double(value, "quad_tol");
    else if (key == "out") out = value;
    else if (key == "threads") threads = static_cast<int>(detail::parse_int(value, "threads"));
    else throw ConfigError("unknown config key '" + key + "'");
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      auto last = line.find_last_not_of(" \t\r");
      line = line.substr(first, last - first + 1);
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      trim(key);
      trim(value);
      set(key, value);
    }
  }

  // needs_cells=false is for table-style runs (bias) that take no n schedule.
  void validate(bool needs_cells = true) const {
    if (d < 2) throw ConfigError("d >= 2 required");
    if (shape_spec.empty()) throw ConfigError("shape is required");
    parse_shape(shape_spec, d);
    if (!alt_shape_spec.empty()) parse_shape(alt_shape_spec, d);
    if (needs_cells) {
      if (n_values.empty()) throw ConfigError("at least one n is required");
      for (std::int64_t n : n_values)
        if (n < 2) throw ConfigError("every n must be >= 2");
      if (trials < 1) throw ConfigError("trials >= 1 required");
    }
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha in (0, 0.5) required");
    if (rho && !(*rho > 0.0)) throw ConfigError("rho > 0 required");
    if (eps_rule == "list") {
      if (eps_values.empty()) throw ConfigError("eps list is required for eps_rule=list");
      for (double e : eps_values)
        if (!(e > 0.0)) throw ConfigError("every eps must be > 0");
    } else if (eps_rule == "power") {
      if (!(eps_gamma > 0.0)) throw ConfigError("eps_gamma > 0 required for eps_rule=power");
      if (!(eps_c > 0.0)) throw ConfigError("eps_c > 0 required for eps_rule=power");
    } else if (eps_rule != "optimal") {
      throw ConfigError("eps_rule must be one of list|power|optimal");
    }
    if (width_mode != "true_per" && width_mode != "plug_in")
      throw ConfigError("width_mode must be true_per or plug_in");
    if (moment_p < 1 || moment_p > 3) throw ConfigError("p must be 1, 2 or 3");
    if (mc_outer < 1 || mc_inner < 1) throw ConfigError("mc budgets must be >= 1");
    if (!(quad_tol > 0.0)) throw ConfigError("quad_tol > 0 required");
  }

  std::vector<double> eps_for(std::int64_t n) const {
    if (eps_rule == "list") return eps_values;
    if (eps_rule == "power")
      return {eps_c * std::pow(static_cast<double>(n), -eps_gamma)};
    return {optimal_epsilon(n, d, optimal_interior)};
  }

  std::string canonical() const {
    std::ostringstream os;
    os << "shape=" << shape_spec << '\n';
    os << "alt_shape=" << alt_shape_spec << '\n';
    os << "d=" << d << '\n';
    os << "n=";
    for (std::size_t i = 0; i < n_values.size(); ++i)
      os << (i ? "," : "") << n_values[i];
    os << '\n';
    os << "eps_rule=" << eps_rule << '\n';
    os << "eps=";
    for (std::size_t i = 0; i < eps_values.size(); ++i)
      os << (i ? "," : "") << detail::fmt_double(eps_values[i]);
    os << '\n';
    os << "eps_c=" << detail::fmt_double(eps_c) << '\n';
    os << "eps_gamma=" << detail::fmt_double(eps_gamma) << '\n';
    os << "optimal_interior=" << (optimal_interior ? 1 : 0) << '\n';
    os << "trials=" << trials << '\n';
    os << "seed=" << seed << '\n';
    os << "alpha=" << detail::fmt_double(alpha) << '\n';
    os << "rho=" << (rho ? detail::fmt_double(*rho) : std::string()) << '\n';
    os << "width_mode=" << width_mode << '\n';
    os << "p=" << moment_p << '\n';
    os << "mc_outer=" << mc_outer << '\n';
    os << "mc_inner=" << mc_inner << '\n';
    os << "quad_tol=" << detail::fmt_double(quad_tol) << '\n';
    return os.str();
  }

  std::string hash_hex() const {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

}  // namespace gcperim
