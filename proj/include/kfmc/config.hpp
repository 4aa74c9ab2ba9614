#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kfmc/error.hpp"
#include "kfmc/optimizer.hpp"
#include "kfmc/oracle.hpp"
#include "kfmc/sampler.hpp"

namespace kfmc {

enum class GridUnits { reduced, absolute };

struct OracleSettings {
  double density = 0.2;
  std::vector<double> gammas{0.0, 0.5};
  bool include_star = true;  // also check at gamma* of `density` when known
  std::size_t n2_sweeps = 20000000;
  std::size_t n2_block_size = 100000;
  std::size_t points_per_axis = 48;
  std::size_t n3_steps = 6000000;
  std::size_t n3_block_size = 20000;
  double sigmas = 3.0;
};

struct ExperimentConfig {
  std::vector<std::size_t> n_electrons{50};
  std::vector<double> densities{1.0, 0.2, 0.04};
  // Coupling of pairs not involving the reference electron; unset means gamma.
  std::optional<double> pair_coupling;
  std::vector<double> gamma_grid;  // empty selects default_gamma_grid
  GridUnits grid_units = GridUnits::reduced;
  bool refine = true;
  RefineOptions refine_options;
  ChainConfig chain;
  std::map<double, double> gamma_star;  // density -> gamma*, used by estimate
  std::string output_dir = "kfmc-out";
  std::size_t threads = 1;
  OracleSettings oracle;

  // section.key -> raw value, after overrides; threads and output are excluded.
  std::map<std::string, std::string> canonical;

  std::vector<double> grid_for(double density) const {
    if (gamma_grid.empty()) return default_gamma_grid(density);
    std::vector<double> g = gamma_grid;
    if (grid_units == GridUnits::reduced)
      for (double& v : g) v /= reduced_coupling_scale(density);
    return g;
  }
};

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  std::string text;
  for (const auto& [k, v] : cfg.canonical) text += k + "=" + v + "\n";
  return hex64(fnv1a(text));
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParseError("expected a number, got '" + s + "'", line);
  return v;
}

inline std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] != '-') v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParseError("expected a non-negative integer, got '" + s + "'", line);
  return v;
}

inline bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ParseError("expected true/false, got '" + s + "'", line);
}

inline std::vector<double> parse_doubles(const std::string& s, std::size_t line) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item, line));
  return out;
}

}  // namespace detail

// Sectioned key = value text. '#' and ';' start comments; lists are comma separated.
inline ExperimentConfig parse_config(std::istream& in) {
  using namespace detail;
  ExperimentConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    if (!seen.emplace(full, lineno).second) throw ParseError("duplicate key '" + full + "'", lineno);

    auto require_list = [&](auto&& list) {
      if (list.empty()) throw ParseError("'" + full + "' must be a non-empty list", lineno);
    };
    if (full == "system.n_electrons") {
      cfg.n_electrons.clear();
      for (const auto& item : split_list(value)) cfg.n_electrons.push_back(parse_uint(item, lineno));
      require_list(cfg.n_electrons);
      for (auto n : cfg.n_electrons)
        if (n < 2) throw ParseError("n_electrons entries must be >= 2", lineno);
    } else if (full == "system.densities") {
      cfg.densities = parse_doubles(value, lineno);
      require_list(cfg.densities);
      for (double d : cfg.densities)
        if (!(d > 0.0)) throw ParseError("densities must be positive", lineno);
    } else if (full == "system.pair_coupling") {
      cfg.pair_coupling = parse_double(value, lineno);
      if (!(*cfg.pair_coupling >= 0.0)) throw ParseError("pair_coupling must be >= 0", lineno);
    } else if (full == "gamma.grid") {
      cfg.gamma_grid = parse_doubles(value, lineno);
      require_list(cfg.gamma_grid);
      if (cfg.gamma_grid.size() < 3) throw ParseError("gamma grid needs at least 3 values", lineno);
      for (std::size_t i = 0; i < cfg.gamma_grid.size(); ++i) {
        if (!(cfg.gamma_grid[i] >= 0.0)) throw ParseError("gamma grid values must be >= 0", lineno);
        if (i > 0 && !(cfg.gamma_grid[i] > cfg.gamma_grid[i - 1]))
          throw ParseError("gamma grid must be strictly increasing", lineno);
      }
    } else if (full == "gamma.units") {
      if (value == "reduced") cfg.grid_units = GridUnits::reduced;
      else if (value == "absolute") cfg.grid_units = GridUnits::absolute;
      else throw ParseError("gamma.units must be 'reduced' or 'absolute'", lineno);
    } else if (full == "refine.enabled") {
      cfg.refine = parse_bool(value, lineno);
    } else if (full == "refine.tolerance") {
      cfg.refine_options.tolerance = parse_double(value, lineno);
    } else if (full == "refine.probe_budget") {
      cfg.refine_options.probe_budget = parse_uint(value, lineno);
    } else if (full == "chain.seed") {
      cfg.chain.seed = parse_uint(value, lineno);
    } else if (full == "chain.burnin_sweeps") {
      cfg.chain.n_sweeps_burnin = parse_uint(value, lineno);
    } else if (full == "chain.measure_sweeps") {
      cfg.chain.n_sweeps_measure = parse_uint(value, lineno);
      if (cfg.chain.n_sweeps_measure < 1) throw ParseError("measure_sweeps must be >= 1", lineno);
    } else if (full == "chain.max_displacement") {
      cfg.chain.max_displacement = parse_double(value, lineno);
    } else if (full == "chain.target_acceptance") {
      cfg.chain.target_acceptance = parse_double(value, lineno);
      if (!(cfg.chain.target_acceptance > 0 && cfg.chain.target_acceptance < 1))
        throw ParseError("target_acceptance must lie in (0, 1)", lineno);
    } else if (full == "chain.tune_interval") {
      cfg.chain.tune_interval = parse_uint(value, lineno);
      if (cfg.chain.tune_interval < 1) throw ParseError("tune_interval must be >= 1", lineno);
    } else if (full == "chain.block_size") {
      cfg.chain.block_size = parse_uint(value, lineno);
      if (cfg.chain.block_size < 1) throw ParseError("block_size must be >= 1", lineno);
    } else if (full == "estimate.gamma_star") {
      for (const auto& item : split_list(value)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ParseError("gamma_star entries are rho:gamma", lineno);
        cfg.gamma_star[parse_double(trim(item.substr(0, colon)), lineno)] =
            parse_double(trim(item.substr(colon + 1)), lineno);
      }
    } else if (full == "output.dir") {
      cfg.output_dir = value;
    } else if (full == "output.threads") {
      cfg.threads = parse_uint(value, lineno);
    } else if (full == "oracle.density") {
      cfg.oracle.density = parse_double(value, lineno);
    } else if (full == "oracle.gammas") {
      cfg.oracle.gammas = parse_doubles(value, lineno);
    } else if (full == "oracle.include_star") {
      cfg.oracle.include_star = parse_bool(value, lineno);
    } else if (full == "oracle.n2_sweeps") {
      cfg.oracle.n2_sweeps = parse_uint(value, lineno);
    } else if (full == "oracle.n2_block_size") {
      cfg.oracle.n2_block_size = parse_uint(value, lineno);
    } else if (full == "oracle.points_per_axis") {
      cfg.oracle.points_per_axis = parse_uint(value, lineno);
      if (cfg.oracle.points_per_axis < 8) throw ParseError("points_per_axis must be >= 8", lineno);
    } else if (full == "oracle.n3_steps") {
      cfg.oracle.n3_steps = parse_uint(value, lineno);
    } else if (full == "oracle.n3_block_size") {
      cfg.oracle.n3_block_size = parse_uint(value, lineno);
    } else if (full == "oracle.sigmas") {
      cfg.oracle.sigmas = parse_double(value, lineno);
    } else {
      throw ParseError("unknown key '" + full + "'", lineno);
    }
    if (section != "output") cfg.canonical[full] = value;
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  return parse_config(in);
}

inline void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.chain.seed = seed;
  cfg.canonical["chain.seed"] = std::to_string(seed);
}

}  // namespace kfmc
