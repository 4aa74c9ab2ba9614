#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "kfmc/error.hpp"
#include "kfmc/geometry.hpp"
#include "kfmc/model.hpp"
#include "kfmc/rng.hpp"

namespace kfmc {

struct ChainConfig {
  std::uint64_t seed = 1;
  std::size_t n_sweeps_burnin = 2000;
  std::size_t n_sweeps_measure = 20000;
  // Initial trial displacement half-width (bohr). Non-positive selects L/10.
  double max_displacement = 0.0;
  double target_acceptance = 0.5;
  std::size_t tune_interval = 50;
  // Estimator samples per block for error bars.
  std::size_t block_size = 1000;
};

inline constexpr double kMinDisplacement = 1e-4;

inline double initial_displacement(const ChainConfig& cfg, const Box& box) {
  return cfg.max_displacement > 0.0 ? cfg.max_displacement : 0.1 * box.length;
}

inline void validate(const ChainConfig& cfg, const Box& box) {
  if (cfg.n_sweeps_measure < 1) throw InvalidParameter("n_sweeps_measure must be >= 1");
  const double delta = initial_displacement(cfg, box);
  if (!(delta < box.half())) throw InvalidParameter("max_displacement must be below L/2");
  if (!(cfg.target_acceptance > 0.0 && cfg.target_acceptance < 1.0))
    throw InvalidParameter("target_acceptance must lie in (0, 1)");
  if (cfg.tune_interval < 1) throw InvalidParameter("tune_interval must be >= 1");
  if (cfg.block_size < 1) throw InvalidParameter("block_size must be >= 1");
}

inline Configuration init_configuration(const GasParams& params, std::uint64_t seed) {
  Rng rng(seed);
  Configuration config;
  config.positions.reserve(params.n_electrons);
  const double length = params.box.length;
  while (config.size() < params.n_electrons) {
    const Vec3 trial = wrap({rng.uniform(0.0, length), rng.uniform(0.0, length), rng.uniform(0.0, length)},
                            params.box);
    const bool clash = std::any_of(config.positions.begin(), config.positions.end(), [&](const Vec3& p) {
      return image_distance(p, trial, params.box) < kHardCore;
    });
    if (!clash) config.positions.push_back(trial);
  }
  return config;
}

// Markov chain state. Caches inverse pair distances, their total and the
// central gradient so a step costs O(N).
class ChainState {
 public:
  ChainState(Configuration config, const GasParams& params, std::uint64_t seed, double max_displacement)
      : config_(std::move(config)), rng_(derive_seed(seed, 0x5eed)), delta_(max_displacement) {
    if (config_.size() != params.n_electrons)
      throw InvalidParameter("configuration size does not match n_electrons");
    const std::size_t n = config_.size();
    inv_dist_.assign(n * n, 0.0);
    scratch_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = image_distance(config_[i], config_[j], params.box);
        if (d < kHardCore) throw Singularity("initial configuration has coincident electrons");
        inv_dist_[i * n + j] = inv_dist_[j * n + i] = 1.0 / d;
      }
    }
    refresh(params);
  }

  const Configuration& config() const { return config_; }
  std::uint64_t accepted_moves() const { return accepted_; }
  std::uint64_t attempted_moves() const { return attempted_; }
  double max_displacement() const { return delta_; }
  void set_max_displacement(double delta) { delta_ = delta; }
  const Rng& rng() const { return rng_; }

  // Acceptance counters since the last tuning reset.
  std::uint64_t window_accepted() const { return window_accepted_; }
  std::uint64_t window_attempted() const { return window_attempted_; }
  void reset_window() { window_accepted_ = window_attempted_ = 0; }

  double fisher(const GasParams& params) const {
    if (params.gamma == 0.0) return 0.0;
    return params.gamma * params.gamma / 8.0 * norm2(gradient_);
  }
  double coulomb() const { return inv_sum_ / static_cast<double>(config_.size()); }

  // Recomputes the running totals from the cached pair table and positions.
  void refresh(const GasParams& params) {
    const std::size_t n = config_.size();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sum += inv_dist_[i * n + j];
    inv_sum_ = sum;
    gradient_ = central_gradient(config_, params);
  }

  // Log acceptance ratio for a trial move using the cached distances. Fills
  // the scratch row with the trial inverse distances.
  double trial_log_ratio(std::size_t moved, const Vec3& trial, const GasParams& params) {
    const std::size_t n = config_.size();
    const double rho2 = params.density_sq();
    double central = 0.0;
    double others = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == moved) {
        scratch_[i] = 0.0;
        continue;
      }
      const double d = image_distance(config_[i], trial, params.box);
      if (d < kHardCore) return -std::numeric_limits<double>::infinity();
      const double inv = 1.0 / d;
      scratch_[i] = inv;
      const double delta = inv - inv_dist_[moved * n + i];
      if (i == 0 || moved == 0) central += delta;
      else others += delta;
    }
    double out = 0.0;
    if (params.gamma != 0.0) out -= params.gamma * rho2 * central;
    if (params.beta() != 0.0) out -= params.beta() * rho2 * others;
    return out;
  }

  bool metropolis_step(const GasParams& params) {
    const std::size_t n = config_.size();
    const std::size_t k = rng_.index(n);
    const Vec3 old = config_[k];
    const Vec3 trial = wrap({old.x + rng_.uniform(-delta_, delta_), old.y + rng_.uniform(-delta_, delta_),
                             old.z + rng_.uniform(-delta_, delta_)},
                            params.box);
    ++attempted_;
    ++window_attempted_;
    const double log_ratio = trial_log_ratio(k, trial, params);
    bool accept = false;
    if (log_ratio >= 0.0) accept = true;
    else if (log_ratio > -std::numeric_limits<double>::infinity()) accept = rng_.uniform() < std::exp(log_ratio);
    if (!accept) return false;

    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      inv_sum_ += scratch_[i] - inv_dist_[k * n + i];
      inv_dist_[k * n + i] = inv_dist_[i * n + k] = scratch_[i];
    }
    config_[k] = trial;
    if (k == 0) {
      gradient_ = central_gradient(config_, params);
    } else {
      gradient_ += pair_energy_gradient(config_[0], trial, params);
      gradient_ -= pair_energy_gradient(config_[0], old, params);
    }
    ++accepted_;
    ++window_accepted_;
    return true;
  }

 private:
  Configuration config_;
  Rng rng_;
  double delta_;
  std::uint64_t accepted_ = 0;
  std::uint64_t attempted_ = 0;
  std::uint64_t window_accepted_ = 0;
  std::uint64_t window_attempted_ = 0;
  std::vector<double> inv_dist_;
  std::vector<double> scratch_;
  double inv_sum_ = 0.0;
  Vec3 gradient_;
};

inline bool metropolis_step(ChainState& state, const GasParams& params) { return state.metropolis_step(params); }

// N Metropolis steps, then a resync of the cached totals.
inline void run_sweep(ChainState& state, const GasParams& params) {
  for (std::size_t s = 0; s < params.n_electrons; ++s) state.metropolis_step(params);
  state.refresh(params);
}

// Trial width after one tuning round: x1.1 above target acceptance, x0.9
// below, clamped to [kMinDisplacement, L/2].
inline double tuned_displacement(double delta, double acceptance, double target, const Box& box) {
  if (acceptance > target) delta *= 1.1;
  else if (acceptance < target) delta *= 0.9;
  return std::clamp(delta, kMinDisplacement, box.half());
}

// Applies tuned_displacement using the acceptance seen since the last call.
inline double tune_step_size(ChainState& state, const ChainConfig& cfg, const Box& box) {
  if (state.window_attempted() > 0) {
    const double rate = static_cast<double>(state.window_accepted()) / static_cast<double>(state.window_attempted());
    state.set_max_displacement(tuned_displacement(state.max_displacement(), rate, cfg.target_acceptance, box));
  }
  state.reset_window();
  return state.max_displacement();
}

inline ChainState make_chain(const GasParams& params, const ChainConfig& cfg) {
  validate(cfg, params.box);
  return ChainState(init_configuration(params, derive_seed(cfg.seed, 0xc0f1)), params, cfg.seed,
                    initial_displacement(cfg, params.box));
}

// Burn-in with step-size tuning every cfg.tune_interval sweeps; tuning stops afterwards.
inline void equilibrate(ChainState& state, const GasParams& params, const ChainConfig& cfg) {
  for (std::size_t sweep = 1; sweep <= cfg.n_sweeps_burnin; ++sweep) {
    run_sweep(state, params);
    if (sweep % cfg.tune_interval == 0) tune_step_size(state, cfg, params.box);
  }
  state.reset_window();
}

}  // namespace kfmc
