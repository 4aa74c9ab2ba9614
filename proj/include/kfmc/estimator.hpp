#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kfmc/error.hpp"
#include "kfmc/model.hpp"
#include "kfmc/sampler.hpp"

namespace kfmc {

// Running sums and fixed-size block means of the Fisher and Coulomb summands.
struct ChainStats {
  explicit ChainStats(std::size_t block_size = 1000) : block_size(block_size) {
    if (block_size < 1) throw InvalidParameter("block_size must be >= 1");
  }

  std::uint64_t m_samples = 0;
  double sum_fisher = 0.0;
  double sum_coulomb = 0.0;
  std::size_t block_size;
  std::vector<double> block_fisher;
  std::vector<double> block_coulomb;
  // Current partial block.
  double partial_fisher = 0.0;
  double partial_coulomb = 0.0;
  std::size_t partial_count = 0;

  std::size_t completed_blocks() const { return block_fisher.size(); }
};

inline void accumulate(ChainStats& stats, double fisher, double coulomb) {
  if (!std::isfinite(fisher) || !std::isfinite(coulomb))
    throw Error("accumulate: non-finite estimator summand");
  ++stats.m_samples;
  stats.sum_fisher += fisher;
  stats.sum_coulomb += coulomb;
  stats.partial_fisher += fisher;
  stats.partial_coulomb += coulomb;
  if (++stats.partial_count == stats.block_size) {
    const double inv = 1.0 / static_cast<double>(stats.block_size);
    stats.block_fisher.push_back(stats.partial_fisher * inv);
    stats.block_coulomb.push_back(stats.partial_coulomb * inv);
    stats.partial_fisher = stats.partial_coulomb = 0.0;
    stats.partial_count = 0;
  }
}

// Combines two chains at identical parameters. Partial blocks are not joined;
// their samples still count towards the means.
inline ChainStats merge(const ChainStats& a, const ChainStats& b) {
  if (a.block_size != b.block_size) throw InvalidParameter("merge: block sizes differ");
  ChainStats out = a;
  out.m_samples += b.m_samples;
  out.sum_fisher += b.sum_fisher;
  out.sum_coulomb += b.sum_coulomb;
  out.block_fisher.insert(out.block_fisher.end(), b.block_fisher.begin(), b.block_fisher.end());
  out.block_coulomb.insert(out.block_coulomb.end(), b.block_coulomb.begin(), b.block_coulomb.end());
  out.partial_fisher += b.partial_fisher;
  out.partial_coulomb += b.partial_coulomb;
  out.partial_count += b.partial_count;
  return out;
}

struct Estimate {
  std::size_t n_electrons = 0;
  double density = 0.0;
  double gamma = 0.0;
  double i_hat = 0.0;
  double i_err = 0.0;
  double c_hat = 0.0;
  double c_err = 0.0;
  double gamma_hat = 0.0;      // N (I + C)
  double gamma_hat_err = 0.0;  // N times the block error of I + C
  std::uint64_t m_samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double block_standard_error(std::span<const double> blocks) {
  const auto [lo, hi] = std::minmax_element(blocks.begin(), blocks.end());
  if (*lo == *hi) return 0.0;
  const auto k = static_cast<double>(blocks.size());
  double mean = 0.0;
  for (double b : blocks) mean += b;
  mean /= k;
  double ss = 0.0;
  for (double b : blocks) ss += (b - mean) * (b - mean);
  return std::sqrt(ss / (k - 1.0) / k);
}

}  // namespace detail

inline Estimate finalize(const ChainStats& stats, const GasParams& params, std::uint64_t seed = 0) {
  if (stats.completed_blocks() < 2) throw InsufficientData("finalize: need at least 2 complete blocks");
  const auto m = static_cast<double>(stats.m_samples);
  const auto n = static_cast<double>(params.n_electrons);
  std::vector<double> combined(stats.completed_blocks());
  for (std::size_t b = 0; b < combined.size(); ++b) combined[b] = stats.block_fisher[b] + stats.block_coulomb[b];

  Estimate e;
  e.n_electrons = params.n_electrons;
  e.density = params.density;
  e.gamma = params.gamma;
  e.i_hat = stats.sum_fisher / m;
  e.c_hat = stats.sum_coulomb / m;
  e.i_err = detail::block_standard_error(stats.block_fisher);
  e.c_err = detail::block_standard_error(stats.block_coulomb);
  e.gamma_hat = n * (e.i_hat + e.c_hat);
  e.gamma_hat_err = n * detail::block_standard_error(combined);
  e.m_samples = stats.m_samples;
  e.seed = seed;
  return e;
}

struct ChainResult {
  Estimate estimate;
  ChainStats stats;
  double acceptance = 0.0;  // over the measurement phase
  double max_displacement = 0.0;
};

// Burn-in, then one estimator sample per Metropolis step. Rejected moves
// repeat the previous configuration's summands.
inline ChainResult run_chain(const GasParams& params, const ChainConfig& cfg) {
  ChainState state = make_chain(params, cfg);
  equilibrate(state, params, cfg);
  ChainStats stats(cfg.block_size);
  const std::uint64_t acc0 = state.accepted_moves();
  const std::uint64_t att0 = state.attempted_moves();
  for (std::size_t sweep = 0; sweep < cfg.n_sweeps_measure; ++sweep) {
    for (std::size_t s = 0; s < params.n_electrons; ++s) {
      state.metropolis_step(params);
      accumulate(stats, state.fisher(params), state.coulomb());
    }
    state.refresh(params);
  }
  ChainResult out{finalize(stats, params, cfg.seed), stats, 0.0, state.max_displacement()};
  out.acceptance = static_cast<double>(state.accepted_moves() - acc0) /
                   static_cast<double>(state.attempted_moves() - att0);
  return out;
}

inline Estimate estimate(const GasParams& params, const ChainConfig& cfg) { return run_chain(params, cfg).estimate; }

}  // namespace kfmc
