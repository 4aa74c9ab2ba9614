#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kfmc/error.hpp"
#include "kfmc/estimator.hpp"
#include "kfmc/fitter.hpp"
#include "kfmc/kinetic.hpp"
#include "kfmc/optimizer.hpp"

namespace kfmc {

// 17 significant digits: round-trips every double.
inline std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;

  std::string comment() const { return "# kfmc " + command + " config_hash=" + config_hash + " seed=" + std::to_string(seed); }
  nlohmann::json json() const { return {{"command", command}, {"config_hash", config_hash}, {"seed", seed}}; }
};

inline const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::grid: return "grid";
    case PointKind::probe: return "probe";
    case PointKind::star: return "star";
  }
  return "grid";
}

inline const char* to_string(Weighting w) { return w == Weighting::weighted ? "weighted" : "unweighted"; }

// ---- Estimate records ----

inline const char* kEstimateHeader = "N,rho,gamma,i_hat,i_err,c_hat,c_err,gamma_hat,m_samples,seed";

inline std::string estimate_csv_row(const Estimate& e) {
  return std::to_string(e.n_electrons) + "," + full(e.density) + "," + full(e.gamma) + "," + full(e.i_hat) + "," +
         full(e.i_err) + "," + full(e.c_hat) + "," + full(e.c_err) + "," + full(e.gamma_hat) + "," +
         std::to_string(e.m_samples) + "," + std::to_string(e.seed);
}

inline nlohmann::json to_json(const Estimate& e) {
  return {{"N", e.n_electrons}, {"rho", e.density},     {"gamma", e.gamma},         {"i_hat", e.i_hat},
          {"i_err", e.i_err},   {"c_hat", e.c_hat},     {"c_err", e.c_err},         {"gamma_hat", e.gamma_hat},
          {"gamma_hat_err", e.gamma_hat_err}, {"m_samples", e.m_samples}, {"seed", e.seed}};
}

// ---- gamma scan table ----

inline void write_scan_csv(std::ostream& out, const GammaScan& scan, const Provenance& prov) {
  out << prov.comment() << '\n';
  out << "gamma,gamma_hat,err,i_hat,i_err,c_hat,c_err\n";
  for (const auto& p : scan.points) {
    const auto& e = p.estimate;
    out << full(p.gamma) << ',' << full(e.gamma_hat) << ',' << full(e.gamma_hat_err) << ',' << full(e.i_hat) << ','
        << full(e.i_err) << ',' << full(e.c_hat) << ',' << full(e.c_err) << '\n';
  }
}

inline nlohmann::json scan_summary_entry(const GammaScan& scan, std::size_t n, double rho) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : scan.points) {
    auto j = to_json(p.estimate);
    j["kind"] = to_string(p.kind);
    points.push_back(j);
  }
  return {{"N", n},
          {"rho", rho},
          {"gamma_star", scan.gamma_star},
          {"gamma_hat_min", scan.gamma_hat_min},
          {"gamma_hat_min_err", scan.gamma_hat_min_err},
          {"i_at_star", scan.i_at_star},
          {"i_at_star_err", scan.i_at_star_err},
          {"interior", scan.interior},
          {"refined", scan.refined},
          {"noise_limited", scan.noise_limited},
          {"probes", scan.probes},
          {"bracket", {scan.bracket_lo, scan.bracket_hi}},
          {"points", points}};
}

// ---- CSV reading ----

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double csv_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw ParseError("bad numeric field '" + s + "'", line);
  return v;
}

}  // namespace detail

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::vector<std::string> comments;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("missing column '" + name + "'", 0);
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    auto cells = detail::split_csv(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()),
                       lineno);
    t.rows.push_back(std::move(cells));
    t.row_lines.push_back(lineno);
  }
  if (t.header.empty()) throw ParseError("empty CSV input", lineno);
  return t;
}

// Parses "key=value" tokens out of a provenance comment line.
inline std::map<std::string, std::string> provenance_fields(const CsvTable& t) {
  std::map<std::string, std::string> out;
  for (const auto& c : t.comments) {
    std::istringstream in(c);
    std::string tok;
    while (in >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  return out;
}

// ---- density scan ----

inline const char* kDensityScanHeader = "rho,n_electrons,gamma_star,i_at_star,i_err";

inline void write_density_scan_csv(std::ostream& out, const DensityScan& scan, const Provenance& prov) {
  out << prov.comment() << '\n' << kDensityScanHeader << '\n';
  for (const auto& r : scan.rows)
    out << full(r.density) << ',' << r.n_electrons << ',' << full(r.gamma_star) << ',' << full(r.i_at_star) << ','
        << full(r.i_err) << '\n';
}

inline nlohmann::json to_json(const DensityScan& scan) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : scan.rows)
    rows.push_back({{"rho", r.density},
                    {"n_electrons", r.n_electrons},
                    {"gamma_star", r.gamma_star},
                    {"i_at_star", r.i_at_star},
                    {"i_err", r.i_err}});
  return rows;
}

inline DensityScan read_density_scan_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t c_rho = t.column("rho"), c_n = t.column("n_electrons"), c_g = t.column("gamma_star"),
                    c_i = t.column("i_at_star"), c_e = t.column("i_err");
  DensityScan scan;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = t.row_lines[r];
    DensityRow d;
    d.density = detail::csv_double(row[c_rho], line);
    const double n = detail::csv_double(row[c_n], line);
    if (!(n >= 2) || n != static_cast<double>(static_cast<std::size_t>(n)))
      throw ParseError("n_electrons must be an integer >= 2", line);
    d.n_electrons = static_cast<std::size_t>(n);
    d.gamma_star = detail::csv_double(row[c_g], line);
    d.i_at_star = detail::csv_double(row[c_i], line);
    d.i_err = detail::csv_double(row[c_e], line);
    if (!(d.density > 0.0)) throw ParseError("rho must be positive", line);
    if (d.i_err < 0.0) throw ParseError("i_err must be non-negative", line);
    scan.rows.push_back(d);
  }
  return scan;
}

// ---- fit ----

inline nlohmann::json to_json(const FitResult& f) {
  return {{"a", f.a},
          {"b", f.b},
          {"a_err", f.a_err},
          {"b_err", f.b_err},
          {"chi2_per_dof", f.chi2_per_dof},
          {"weighting", to_string(f.weighting)},
          {"n_points", f.n_points},
          {"rho_min", f.rho_min},
          {"rho_max", f.rho_max},
          {"warnings", f.warnings}};
}

inline FitResult fit_from_json(const nlohmann::json& j) {
  FitResult f;
  try {
    f.a = j.at("a").get<double>();
    f.b = j.at("b").get<double>();
    f.a_err = j.value("a_err", 0.0);
    f.b_err = j.value("b_err", 0.0);
    f.chi2_per_dof = j.value("chi2_per_dof", 0.0);
    f.weighting = j.value("weighting", std::string("weighted")) == "unweighted" ? Weighting::unweighted
                                                                               : Weighting::weighted;
    f.n_points = j.value("n_points", std::size_t{0});
    f.rho_min = j.value("rho_min", 0.0);
    f.rho_max = j.value("rho_max", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("fit file: ") + e.what(), 0);
  }
  return f;
}

// A fit file holds the primary result at the top level; an optional
// "unweighted" member carries the alternative fit.
inline FitResult read_fit(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("fit file: ") + e.what(), 0);
  }
  if (j.contains("fit")) return fit_from_json(j.at("fit"));
  return fit_from_json(j);
}

inline nlohmann::json to_json(const KineticBreakdown& k) {
  return {{"total", k.total},
          {"weizsacker", k.weizsacker},
          {"local", k.local},
          {"floored_points", k.floored_points},
          {"extrapolated_points", k.extrapolated_points}};
}

// JSON text with a trailing newline.
inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace kfmc
