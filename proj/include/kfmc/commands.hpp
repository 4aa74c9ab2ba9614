#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kfmc/config.hpp"
#include "kfmc/estimator.hpp"
#include "kfmc/fitter.hpp"
#include "kfmc/io.hpp"
#include "kfmc/kinetic.hpp"
#include "kfmc/optimizer.hpp"
#include "kfmc/oracle.hpp"
#include "kfmc/parallel.hpp"

namespace kfmc {

// Experiment drivers shared by the command-line tool and the acceptance suite.
// Every file written carries the config hash and base seed.

inline std::string density_tag(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rho);
  return buf;
}

inline std::string scan_file_name(std::size_t n, double rho) {
  return "scan_N" + std::to_string(n) + "_rho" + density_tag(rho) + ".csv";
}

// Stream index for a named chain family at (N, rho); independent of list order.
inline std::uint64_t chain_stream(const std::string& family, std::size_t n, double rho) {
  return fnv1a(family + ":" + std::to_string(n) + ":" + full(rho));
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create output directory '" + dir + "'");
}

struct ScanRecord {
  std::size_t n_electrons = 0;
  double density = 0.0;
  GammaScan scan;
  std::string file;
};

inline std::vector<ScanRecord> cmd_scan_gamma(const ExperimentConfig& cfg, std::ostream& log) {
  ensure_dir(cfg.output_dir);
  const Provenance prov{"scan-gamma", config_hash(cfg), cfg.chain.seed};
  std::vector<ScanRecord> records;
  nlohmann::json summary = nlohmann::json::array();
  for (std::size_t n : cfg.n_electrons) {
    for (double rho : cfg.densities) {
      const GasParams base = make_gas_params(n, rho, 0.0, cfg.pair_coupling);
      ChainConfig chain = cfg.chain;
      chain.seed = derive_seed(cfg.chain.seed, chain_stream("scan", n, rho));
      GammaScan scan = scan_gamma(base, cfg.grid_for(rho), chain, cfg.threads);
      if (!scan.interior) {
        log << "warning: N=" << n << " rho=" << rho << ": minimum at grid edge or not resolved (gamma="
            << scan.gamma_star << ")\n";
      } else if (cfg.refine) {
        scan = refine_gamma(std::move(scan), base, chain, cfg.refine_options);
      }
      ScanRecord rec{n, rho, scan, (std::filesystem::path(cfg.output_dir) / scan_file_name(n, rho)).string()};
      std::ostringstream csv;
      write_scan_csv(csv, scan, prov);
      write_text(rec.file, csv.str());
      summary.push_back(scan_summary_entry(scan, n, rho));
      log << "N=" << n << " rho=" << rho << " gamma*=" << scan.gamma_star << " I=" << scan.i_at_star << " +- "
          << scan.i_at_star_err << (scan.interior ? " interior" : " edge")
          << (scan.noise_limited ? " noise-limited" : "") << '\n';
      records.push_back(std::move(rec));
    }
  }
  nlohmann::json doc = {{"provenance", prov.json()}, {"scans", summary}};
  write_text((std::filesystem::path(cfg.output_dir) / "scan_summary.json").string(), dump(doc));
  return records;
}

namespace detail {

inline bool same_density(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

// gamma* for (N, rho): config entries first, then the scan summary (same N
// preferred, otherwise the closest N at the same density).
inline std::optional<double> lookup_gamma_star(const ExperimentConfig& cfg, std::size_t n, double rho) {
  for (const auto& [r, g] : cfg.gamma_star)
    if (same_density(r, rho)) return g;
  const auto path = std::filesystem::path(cfg.output_dir) / "scan_summary.json";
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("scan_summary.json: " + std::string(e.what()), 0);
  }
  std::optional<double> best;
  std::size_t best_gap = static_cast<std::size_t>(-1);
  for (const auto& s : doc.at("scans")) {
    if (!same_density(s.at("rho").get<double>(), rho)) continue;
    const auto sn = s.at("N").get<std::size_t>();
    const std::size_t gap = sn > n ? sn - n : n - sn;
    if (gap < best_gap) {
      best_gap = gap;
      best = s.at("gamma_star").get<double>();
    }
  }
  return best;
}

}  // namespace detail

struct EstimateRun {
  DensityScan scan;
  std::vector<Estimate> estimates;
};

inline EstimateRun cmd_estimate(const ExperimentConfig& cfg, std::ostream& log) {
  struct Job {
    std::size_t n;
    double rho;
    double gamma;
  };
  std::vector<Job> jobs;
  for (std::size_t n : cfg.n_electrons) {
    for (double rho : cfg.densities) {
      const auto g = detail::lookup_gamma_star(cfg, n, rho);
      if (!g)
        throw Error("no gamma* for N=" + std::to_string(n) + " rho=" + density_tag(rho) +
                    "; run scan-gamma first or set [estimate] gamma_star");
      jobs.push_back({n, rho, *g});
    }
  }
  ensure_dir(cfg.output_dir);
  std::function<Estimate(std::size_t)> run = [&](std::size_t i) {
    const Job& j = jobs[i];
    ChainConfig chain = cfg.chain;
    chain.seed = derive_seed(cfg.chain.seed, chain_stream("estimate", j.n, j.rho));
    return estimate(make_gas_params(j.n, j.rho, j.gamma, cfg.pair_coupling), chain);
  };
  EstimateRun out;
  out.estimates = parallel_map<Estimate>(jobs.size(), cfg.threads, run);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Estimate& e = out.estimates[i];
    out.scan.rows.push_back({jobs[i].rho, jobs[i].n, jobs[i].gamma, e.i_hat, e.i_err});
    log << "N=" << jobs[i].n << " rho=" << jobs[i].rho << " gamma*=" << jobs[i].gamma << " I=" << e.i_hat << " +- "
        << e.i_err << '\n';
  }
  const Provenance prov{"estimate", config_hash(cfg), cfg.chain.seed};
  const auto dir = std::filesystem::path(cfg.output_dir);
  std::ostringstream csv;
  write_density_scan_csv(csv, out.scan, prov);
  write_text((dir / "density_scan.csv").string(), csv.str());
  std::ostringstream est;
  est << prov.comment() << '\n' << kEstimateHeader << '\n';
  for (const auto& e : out.estimates) est << estimate_csv_row(e) << '\n';
  write_text((dir / "estimates.csv").string(), est.str());
  nlohmann::json records = nlohmann::json::array();
  for (const auto& e : out.estimates) records.push_back(to_json(e));
  write_text((dir / "density_scan.json").string(),
             dump({{"provenance", prov.json()}, {"rows", to_json(out.scan)}, {"estimates", records}}));
  return out;
}

struct FitReport {
  FitResult weighted;
  FitResult unweighted;
};

inline FitReport cmd_fit(const std::string& scan_path, const std::string& out_dir, std::ostream& log) {
  std::ifstream in(scan_path, std::ios::binary);
  if (!in) throw Error("cannot open density scan '" + scan_path + "'");
  std::stringstream raw;
  raw << in.rdbuf();
  std::istringstream parse_in(raw.str());
  const CsvTable table = read_csv(parse_in);
  std::istringstream rows_in(raw.str());
  const DensityScan scan = read_density_scan_csv(rows_in);
  const auto fields = provenance_fields(table);

  FitReport rep{fit_log(scan, Weighting::weighted), fit_log(scan, Weighting::unweighted)};
  for (const auto& r : scan.rows)
    if (r.density < kFitDomainLo * (1 - 1e-12) || r.density > kFitDomainHi * (1 + 1e-12)) {
      log << "warning: density " << r.density << " lies outside the fit window [0.04, 1.0]\n";
      break;
    }
  nlohmann::json prov = {{"command", "fit"},
                         {"input_hash", hex64(fnv1a(raw.str()))},
                         {"config_hash", fields.count("config_hash") ? fields.at("config_hash") : ""},
                         {"seed", fields.count("seed") ? fields.at("seed") : ""}};
  ensure_dir(out_dir);
  write_text((std::filesystem::path(out_dir) / "fit.json").string(),
             dump({{"provenance", prov}, {"fit", to_json(rep.weighted)}, {"unweighted", to_json(rep.unweighted)}}));
  log << "I(rho) = A + B ln(rho): A=" << full(rep.weighted.a) << " +- " << rep.weighted.a_err
      << "  B=" << full(rep.weighted.b) << " +- " << rep.weighted.b_err
      << "  chi2/dof=" << rep.weighted.chi2_per_dof << " (" << to_string(rep.weighted.weighting) << ")\n";
  if (rep.weighted.weighting == Weighting::weighted)
    log << "unweighted: A=" << full(rep.unweighted.a) << " +- " << rep.unweighted.a_err
        << "  B=" << full(rep.unweighted.b) << " +- " << rep.unweighted.b_err << '\n';
  return rep;
}

inline KineticBreakdown cmd_kinetic(const std::string& field_path, const std::string& fit_path,
                                    const std::string& out_dir, std::ostream& log) {
  std::ifstream fin(field_path);
  if (!fin) throw Error("cannot open density field '" + field_path + "'");
  const DensityField field = read_density_field(fin);
  std::ifstream jin(fit_path);
  if (!jin) throw Error("cannot open fit file '" + fit_path + "'");
  const FitResult fit = read_fit(jin);
  const KineticBreakdown k = kinetic_functional(field, fit);
  if (k.extrapolated_points > 0)
    log << "warning: " << k.extrapolated_points << " grid points lie outside the fitted density range\n";
  std::ifstream f2(field_path, std::ios::binary), j2(fit_path, std::ios::binary);
  std::stringstream a, b;
  a << f2.rdbuf();
  b << j2.rdbuf();
  nlohmann::json prov = {{"command", "kinetic"},
                         {"field_hash", hex64(fnv1a(a.str()))},
                         {"fit_hash", hex64(fnv1a(b.str()))}};
  ensure_dir(out_dir);
  write_text((std::filesystem::path(out_dir) / "kinetic.json").string(),
             dump({{"provenance", prov}, {"kinetic", to_json(k)}, {"volume", field.volume()}}));
  log << "K = " << full(k.total) << "  (weizsacker " << full(k.weizsacker) << ", local " << full(k.local) << ")\n";
  return k;
}

struct OracleCase {
  std::string name;      // "n2-quadrature" or "n3-reference"
  std::string quantity;  // "I" or "C"
  double gamma = 0.0;
  double oracle = 0.0;
  double oracle_err = 0.0;
  double mc = 0.0;
  double mc_err = 0.0;
  double combined_sigma = 0.0;
  bool pass = false;
};

struct OracleReport {
  std::vector<OracleCase> cases;
  bool all_pass() const {
    for (const auto& c : cases)
      if (!c.pass) return false;
    return !cases.empty();
  }
};

namespace detail {

inline OracleCase compare(std::string name, std::string quantity, double gamma, double oracle, double oracle_err,
                          double mc, double mc_err, double sigmas) {
  OracleCase c{std::move(name), std::move(quantity), gamma, oracle, oracle_err, mc, mc_err, 0.0, false};
  c.combined_sigma = std::sqrt(oracle_err * oracle_err + mc_err * mc_err);
  c.pass = std::abs(oracle - mc) <= sigmas * c.combined_sigma || oracle == mc;
  return c;
}

}  // namespace detail

inline OracleReport cmd_oracle(const ExperimentConfig& cfg, std::ostream& log) {
  const OracleSettings& o = cfg.oracle;
  std::vector<double> gammas = o.gammas;
  if (o.include_star) {
    if (auto g = detail::lookup_gamma_star(cfg, 50, o.density)) gammas.push_back(*g);
    else log << "note: no gamma* known for rho=" << o.density << "; checking listed gammas only\n";
  }
  if (gammas.empty()) throw Error("oracle-check: no gamma values to check");

  std::function<std::vector<OracleCase>(std::size_t)> job = [&](std::size_t t) {
    const double g = gammas[t / 2];
    std::vector<OracleCase> out;
    if (t % 2 == 0) {
      const GasParams p = make_gas_params(2, o.density, g, cfg.pair_coupling);
      QuadratureSpec q;
      q.points_per_axis = o.points_per_axis;
      const QuadratureResult quad = quadrature_n2(p, q);
      ChainConfig c = cfg.chain;
      c.seed = derive_seed(cfg.chain.seed, chain_stream("oracle-n2", 2, g));
      c.n_sweeps_measure = o.n2_sweeps;
      c.block_size = o.n2_block_size;
      const Estimate e = estimate(p, c);
      out.push_back(detail::compare("n2-quadrature", "I", g, quad.i_exact, quad.i_error, e.i_hat, e.i_err, o.sigmas));
      out.push_back(detail::compare("n2-quadrature", "C", g, quad.c_exact,
                                    std::hypot(quad.c_error, quad.exclusion_bias_c), e.c_hat, e.c_err, o.sigmas));
    } else {
      const GasParams p = make_gas_params(3, o.density, g, cfg.pair_coupling);
      ChainConfig c = cfg.chain;
      c.seed = derive_seed(cfg.chain.seed, chain_stream("oracle-n3", 3, g));
      c.n_sweeps_measure = o.n3_steps / 3;
      c.block_size = o.n3_block_size;
      const Estimate e = estimate(p, c);
      ReferenceChainConfig rc;
      rc.seed = derive_seed(cfg.chain.seed, chain_stream("oracle-n3-ref", 3, g));
      rc.measure_steps = o.n3_steps;
      rc.block_size = o.n3_block_size;
      const ReferenceResult ref = exhaustive_mc_n3(p, rc);
      out.push_back(detail::compare("n3-reference", "I", g, ref.i_ref, ref.i_err, e.i_hat, e.i_err, o.sigmas));
      out.push_back(detail::compare("n3-reference", "C", g, ref.c_ref, ref.c_err, e.c_hat, e.c_err, o.sigmas));
    }
    return out;
  };
  const auto parts = parallel_map<std::vector<OracleCase>>(2 * gammas.size(), cfg.threads, job);
  OracleReport rep;
  for (const auto& p : parts) rep.cases.insert(rep.cases.end(), p.begin(), p.end());

  const Provenance prov{"oracle-check", config_hash(cfg), cfg.chain.seed};
  std::ostringstream csv;
  csv << prov.comment() << '\n' << "case,quantity,gamma,oracle,oracle_err,mc,mc_err,combined_sigma,pass\n";
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : rep.cases) {
    csv << c.name << ',' << c.quantity << ',' << full(c.gamma) << ',' << full(c.oracle) << ',' << full(c.oracle_err)
        << ',' << full(c.mc) << ',' << full(c.mc_err) << ',' << full(c.combined_sigma) << ','
        << (c.pass ? "pass" : "fail") << '\n';
    cases.push_back({{"case", c.name},
                     {"quantity", c.quantity},
                     {"gamma", c.gamma},
                     {"oracle", c.oracle},
                     {"oracle_err", c.oracle_err},
                     {"mc", c.mc},
                     {"mc_err", c.mc_err},
                     {"combined_sigma", c.combined_sigma},
                     {"pass", c.pass}});
    log << c.name << ' ' << c.quantity << " gamma=" << c.gamma << " oracle=" << c.oracle << " mc=" << c.mc
        << " sigma=" << c.combined_sigma << (c.pass ? " pass" : " FAIL") << '\n';
  }
  ensure_dir(cfg.output_dir);
  const auto dir = std::filesystem::path(cfg.output_dir);
  write_text((dir / "oracle_report.csv").string(), csv.str());
  write_text((dir / "oracle_report.json").string(),
             dump({{"provenance", prov.json()}, {"cases", cases}, {"all_pass", rep.all_pass()}}));
  return rep;
}

}  // namespace kfmc
