// Copyright 2026 The pathweaver Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PATHWEAVER_GIRSANOV_HPP
#define PATHWEAVER_GIRSANOV_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pathweaver/bridge.hpp"
#include "pathweaver/diffusion.hpp"
#include "pathweaver/drift.hpp"
#include "pathweaver/errors.hpp"
#include "pathweaver/numeric.hpp"
#include "pathweaver/observations.hpp"
#include "pathweaver/parallel.hpp"
#include "pathweaver/path_ensemble.hpp"
#include "pathweaver/time_grid.hpp"

namespace pathweaver {

/// Per-sample pieces of the stochastic action S = alpha - beta/2:
/// alpha is the left-point Ito sum of f^T (sigma sigma^T)^{-1} dY and beta
/// the quadratic time sum of f^T (sigma sigma^T)^{-1} f dt. beta is a
/// weighted squared norm, hence never negative.
struct ActionBreakdown {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> action;
};

/// Log-probability estimate with importance-sampling diagnostics.
/// log_p == log_base + log_mean_weight always.
struct LogProbEstimate {
  double log_p = 0.0;
  double log_base = 0.0;         ///< driftless reference density at the pins
  double log_mean_weight = 0.0;  ///< logmeanexp of the per-sample actions
  double std_err_log = 0.0;      ///< delta-method standard error of log_p
  double ess = 0.0;              ///< effective sample size in (0, K]
  int sample_count = 0;
};

namespace detail {

constexpr std::size_t kEvalChunkRows = 4096;

/// Batched drift evaluation over every (sample, node) of the ensemble.
/// Fixed-size row chunks keep the output bit-identical at any worker count.
inline void eval_drift_over_ensemble(const PathEnsemble& paths, const DriftField& f,
                                     std::vector<double>& drift_values, int workers) {
  const TimeGrid& grid = paths.grid();
  const std::size_t n_nodes = grid.node_count();
  const std::size_t d = static_cast<std::size_t>(paths.dim());
  const std::size_t rows =
      static_cast<std::size_t>(paths.sample_count()) * n_nodes;
  drift_values.resize(rows * d);
  const auto values = paths.values();
  parallel_chunks(rows, kEvalChunkRows, workers,
                  [&](std::size_t begin, std::size_t end) {
                    std::vector<double> times(end - begin);
                    for (std::size_t r = begin; r < end; ++r) {
                      times[r - begin] = grid.node(r % n_nodes);
                    }
                    f.eval_batch(values.subspan(begin * d, (end - begin) * d), times,
                                 std::span<double>(drift_values)
                                     .subspan(begin * d, (end - begin) * d));
                  });
}

inline ActionBreakdown action_from_drift_values(const PathEnsemble& paths,
                                                std::span<const double> drift_values,
                                                const DiffusionSchedule& diffusion,
                                                int workers) {
  const TimeGrid& grid = paths.grid();
  const std::size_t n_nodes = grid.node_count();
  const int d = paths.dim();
  const int n_samples = paths.sample_count();

  ActionBreakdown out;
  out.alpha.assign(static_cast<std::size_t>(n_samples), 0.0);
  out.beta.assign(static_cast<std::size_t>(n_samples), 0.0);
  out.action.assign(static_cast<std::size_t>(n_samples), 0.0);

  parallel_chunks(
      static_cast<std::size_t>(n_samples), 1, workers,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          const std::size_t base = k * n_nodes * static_cast<std::size_t>(d);
          double alpha = 0.0;
          double beta = 0.0;
          for (std::size_t j = 0; j + 1 < n_nodes; ++j) {
            const std::size_t interval = grid.interval_of_step(j);
            const double dt = grid.step_dt(j);
            const std::size_t row = base + j * static_cast<std::size_t>(d);
            for (int i = 0; i < d; ++i) {
              const double fv = drift_values[row + static_cast<std::size_t>(i)];
              if (!std::isfinite(fv)) {
                throw EstimationError("non-finite drift value",
                                      static_cast<long>(k), static_cast<long>(j));
              }
              const double inv_s2 = 1.0 / diffusion.sigma2(interval, i);
              const double dy =
                  paths.values()[row + static_cast<std::size_t>(d + i)] -
                  paths.values()[row + static_cast<std::size_t>(i)];
              alpha += fv * inv_s2 * dy;
              beta += fv * inv_s2 * fv * dt;
            }
          }
          const std::size_t last_row =
              base + (n_nodes - 1) * static_cast<std::size_t>(d);
          for (int i = 0; i < d; ++i) {
            if (!std::isfinite(drift_values[last_row + static_cast<std::size_t>(i)])) {
              throw EstimationError("non-finite drift value", static_cast<long>(k),
                                    static_cast<long>(n_nodes - 1));
            }
          }
          out.alpha[k] = alpha;
          out.beta[k] = beta;
          out.action[k] = alpha - 0.5 * beta;
        }
      });
  return out;
}

}  // namespace detail

/// Stochastic action of every sample in the ensemble. Drift values for all
/// (sample, node) pairs are produced by batched evaluation before any sum.
inline ActionBreakdown action(const PathEnsemble& paths, const DriftField& f,
                              const DiffusionSchedule& diffusion, int workers = 0) {
  if (paths.sample_count() == 0) {
    throw std::invalid_argument("action: empty ensemble");
  }
  if (f.dim() != paths.dim() || diffusion.dim() != paths.dim()) {
    throw std::invalid_argument("action: dimension mismatch");
  }
  diffusion.check_intervals(paths.grid().interval_count());
  std::vector<double> drift_values;
  detail::eval_drift_over_ensemble(paths, f, drift_values, workers);
  return detail::action_from_drift_values(paths, drift_values, diffusion, workers);
}

namespace detail {

inline LogProbEstimate estimate_from_actions(const ObservationSet& obs,
                                             const DiffusionSchedule& diffusion,
                                             std::span<const double> actions,
                                             std::span<double> weights_out = {}) {
  const WeightStats stats = weight_stats(actions, weights_out);
  if (!std::isfinite(stats.log_mean_weight)) {
    throw EstimationError("all importance weights vanished");
  }
  LogProbEstimate est;
  est.log_base = log_base_density(obs, diffusion);
  est.log_mean_weight = stats.log_mean_weight;
  est.std_err_log = stats.std_err_log;
  est.ess = stats.ess;
  est.sample_count = static_cast<int>(actions.size());
  est.log_p = est.log_base + est.log_mean_weight;
  return est;
}

}  // namespace detail

/// Path-integral importance-sampling estimate of log p(x_{2:N} | x_1) under
/// dX = f dt + sigma dW. Bridges are sampled through the observations, the
/// action is computed in one batched drift evaluation, and the average runs
/// in the log domain. Deterministic given (inputs, seed) at any worker count.
inline LogProbEstimate log_prob(const ObservationSet& obs, const DriftField& f,
                                const DiffusionSchedule& diffusion, int sample_count,
                                double dt_target, std::uint64_t seed,
                                int workers = 0) {
  if (sample_count < 1) throw std::invalid_argument("log_prob: need K >= 1");
  const TimeGrid grid = build_grid(obs, dt_target);
  const PathEnsemble paths =
      sample_bridge_ensemble(obs, grid, diffusion, sample_count, seed, workers);
  const ActionBreakdown breakdown = action(paths, f, diffusion, workers);
  return detail::estimate_from_actions(obs, diffusion, breakdown.action);
}

/// log_prob plus the gradient of the estimate with respect to the drift
/// parameters. The estimator's own gradient is the softmax-weighted sum of
/// per-sample action gradients; since the bridge paths do not depend on the
/// drift parameters, it assembles as one batched pullback with per-node
/// cotangents w_k (sigma sigma^T)^{-1} (dY - f dt).
inline std::pair<LogProbEstimate, std::vector<double>> log_prob_grad(
    const ObservationSet& obs, const DriftField& f,
    const DiffusionSchedule& diffusion, int sample_count, double dt_target,
    std::uint64_t seed, int workers = 0) {
  if (sample_count < 1) throw std::invalid_argument("log_prob_grad: need K >= 1");
  const TimeGrid grid = build_grid(obs, dt_target);
  const PathEnsemble paths =
      sample_bridge_ensemble(obs, grid, diffusion, sample_count, seed, workers);

  std::vector<double> drift_values;
  detail::eval_drift_over_ensemble(paths, f, drift_values, workers);
  const ActionBreakdown breakdown =
      detail::action_from_drift_values(paths, drift_values, diffusion, workers);

  std::vector<double> weights(static_cast<std::size_t>(sample_count));
  const LogProbEstimate est =
      detail::estimate_from_actions(obs, diffusion, breakdown.action, weights);

  const std::size_t n_nodes = grid.node_count();
  const std::size_t d = static_cast<std::size_t>(obs.dim());
  const std::size_t rows = static_cast<std::size_t>(sample_count) * n_nodes;

  // Reuse the drift-value buffer as the cotangent buffer.
  std::vector<double> cotangents = std::move(drift_values);
  const auto values = paths.values();
  parallel_chunks(
      static_cast<std::size_t>(sample_count), 1, workers,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          const double w = weights[k];
          const std::size_t base = k * n_nodes * d;
          for (std::size_t j = 0; j + 1 < n_nodes; ++j) {
            const std::size_t interval = grid.interval_of_step(j);
            const double dt = grid.step_dt(j);
            const std::size_t row = base + j * d;
            for (std::size_t i = 0; i < d; ++i) {
              const double inv_s2 =
                  1.0 / diffusion.sigma2(interval, static_cast<int>(i));
              const double dy = values[row + d + i] - values[row + i];
              cotangents[row + i] =
                  w * inv_s2 * (dy - cotangents[row + i] * dt);
            }
          }
          for (std::size_t i = 0; i < d; ++i) {
            cotangents[base + (n_nodes - 1) * d + i] = 0.0;
          }
        }
      });

  std::vector<double> times(rows);
  for (std::size_t r = 0; r < rows; ++r) times[r] = grid.node(r % n_nodes);
  std::vector<double> grad(static_cast<std::size_t>(f.param_count()), 0.0);
  f.pullback(values, times, cotangents, grad);
  return {est, std::move(grad)};
}

/// Replaces observations by pseudo-observations drawn from the additive
/// Gaussian noise model, x~_n ~ N(x_n, diag(noise_std)^2), via the counter
/// RNG. With the conjugate proposal the importance weight p/q is a constant;
/// for q equal to the noise model it is exactly 1, so the returned log-weight
/// is 0. Averaging log_prob over draws marginalizes the noise.
inline std::pair<ObservationSet, double> marginalize_observation_noise(
    const ObservationSet& obs, std::span<const double> noise_std,
    std::uint64_t seed, std::uint32_t draw_index = 0) {
  if (noise_std.size() != static_cast<std::size_t>(obs.dim()) &&
      noise_std.size() != 1) {
    throw std::invalid_argument(
        "marginalize_observation_noise: noise_std must be scalar or per-dim");
  }
  for (const double s : noise_std) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument(
          "marginalize_observation_noise: noise_std must be non-negative");
    }
  }
  std::vector<double> times(obs.times().begin(), obs.times().end());
  std::vector<double> values(obs.values().begin(), obs.values().end());
  const std::size_t d = static_cast<std::size_t>(obs.dim());
  for (std::size_t n = 0; n < obs.size(); ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      const double s = noise_std[noise_std.size() == 1 ? 0 : i];
      const double z = normal_draw(RngKey{seed, draw_index,
                                          static_cast<std::uint32_t>(n),
                                          static_cast<std::uint32_t>(i),
                                          RngRole::observation_noise});
      values[n * d + i] += s * z;
    }
  }
  return {ObservationSet(std::move(times), std::move(values), obs.dim()), 0.0};
}

}  // namespace pathweaver

#endif  // PATHWEAVER_GIRSANOV_HPP
