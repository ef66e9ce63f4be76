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

#ifndef PATHWEAVER_INTEGRATOR_HPP
#define PATHWEAVER_INTEGRATOR_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pathweaver/diffusion.hpp"
#include "pathweaver/drift.hpp"
#include "pathweaver/errors.hpp"
#include "pathweaver/girsanov.hpp"
#include "pathweaver/numeric.hpp"
#include "pathweaver/observations.hpp"
#include "pathweaver/parallel.hpp"
#include "pathweaver/path_ensemble.hpp"
#include "pathweaver/rng.hpp"
#include "pathweaver/time_grid.hpp"

namespace pathweaver {

/// Euler-Maruyama simulation of K independent trajectories from x0:
///   X_{j+1} = X_j + f(X_j, t_j) dt_j + sigma(t_j) sqrt(dt_j) z_{k,j}.
/// Time marches sequentially; within a step the drift is evaluated in one
/// batch across trajectories. Throws DivergenceError at the first non-finite
/// state.
inline PathEnsemble euler_maruyama(const DriftField& f,
                                   const DiffusionSchedule& diffusion,
                                   std::span<const double> x0, const TimeGrid& grid,
                                   int sample_count, std::uint64_t seed,
                                   int workers = 0) {
  const int d = f.dim();
  if (static_cast<int>(x0.size()) != d || diffusion.dim() != d) {
    throw std::invalid_argument("euler_maruyama: dimension mismatch");
  }
  diffusion.check_intervals(grid.interval_count());
  PathEnsemble ensemble(grid, sample_count, d, seed, RngRole::integrator_noise);
  const std::size_t n_nodes = grid.node_count();
  const std::size_t dd = static_cast<std::size_t>(d);
  const std::size_t stride = n_nodes * dd;
  auto values = ensemble.values();

  for (int k = 0; k < sample_count; ++k) {
    for (int i = 0; i < d; ++i) {
      values[static_cast<std::size_t>(k) * stride + static_cast<std::size_t>(i)] =
          x0[static_cast<std::size_t>(i)];
    }
  }

  // Trajectory rows are gathered into a contiguous K x d block per step so
  // the drift sees one batch; chunking over rows keeps workers usable for
  // wide ensembles without touching the sequential time loop.
  std::vector<double> state(static_cast<std::size_t>(sample_count) * dd);
  std::vector<double> drift_values(state.size());
  std::vector<double> times(static_cast<std::size_t>(sample_count));
  for (int k = 0; k < sample_count; ++k) {
    for (int i = 0; i < d; ++i) {
      state[static_cast<std::size_t>(k) * dd + static_cast<std::size_t>(i)] =
          x0[static_cast<std::size_t>(i)];
    }
  }

  const std::size_t row_chunk = 256;
  for (std::size_t j = 0; j + 1 < n_nodes; ++j) {
    const double t_j = grid.node(j);
    const double dt = grid.step_dt(j);
    const std::size_t interval = grid.interval_of_step(j);
    std::fill(times.begin(), times.end(), t_j);
    parallel_chunks(static_cast<std::size_t>(sample_count), row_chunk, workers,
                    [&](std::size_t begin, std::size_t end) {
                      f.eval_batch(
                          std::span<const double>(state).subspan(begin * dd,
                                                                 (end - begin) * dd),
                          std::span<const double>(times).subspan(begin, end - begin),
                          std::span<double>(drift_values)
                              .subspan(begin * dd, (end - begin) * dd));
                    });
    for (int k = 0; k < sample_count; ++k) {
      const std::size_t row = static_cast<std::size_t>(k) * dd;
      for (int i = 0; i < d; ++i) {
        const double scale = std::sqrt(diffusion.sigma2(interval, i) * dt);
        const double z = normal_draw(RngKey{seed, static_cast<std::uint32_t>(k),
                                            static_cast<std::uint32_t>(j),
                                            static_cast<std::uint32_t>(i),
                                            RngRole::integrator_noise});
        const double next = state[row + static_cast<std::size_t>(i)] +
                            drift_values[row + static_cast<std::size_t>(i)] * dt +
                            scale * z;
        if (!std::isfinite(next)) {
          throw DivergenceError("euler_maruyama: trajectory diverged",
                                static_cast<long>(j + 1), k);
        }
        state[row + static_cast<std::size_t>(i)] = next;
        values[static_cast<std::size_t>(k) * stride + (j + 1) * dd +
               static_cast<std::size_t>(i)] = next;
      }
    }
  }
  return ensemble;
}

namespace detail {

inline double mse_from_ensemble(const PathEnsemble& ensemble,
                                const ObservationSet& obs) {
  const TimeGrid& grid = ensemble.grid();
  const int d = obs.dim();
  const int k_count = ensemble.sample_count();
  const std::size_t n_obs = obs.size();
  double acc = 0.0;
  for (int k = 0; k < k_count; ++k) {
    for (std::size_t n = 1; n < n_obs; ++n) {
      const std::size_t g = grid.obs_node(n);
      const auto x = obs.value(n);
      for (int i = 0; i < d; ++i) {
        const double diff = ensemble.value(k, g, i) - x[i];
        acc += diff * diff;
      }
    }
  }
  return acc / (static_cast<double>(k_count) * static_cast<double>(n_obs - 1));
}

}  // namespace detail

/// Trajectory mean-squared error of integrated sample paths against the
/// observations: trajectories start pinned at the first observation, and the
/// mean runs over samples and the remaining observations.
inline double mse_loss(const DriftField& f, const DiffusionSchedule& diffusion,
                       const ObservationSet& obs, int sample_count, double dt_target,
                       std::uint64_t seed, int workers = 0) {
  if (sample_count < 1) throw std::invalid_argument("mse_loss: need K >= 1");
  const TimeGrid grid = build_grid(obs, dt_target);
  const PathEnsemble ensemble =
      euler_maruyama(f, diffusion, obs.value(0), grid, sample_count, seed, workers);
  return detail::mse_from_ensemble(ensemble, obs);
}

/// mse_loss plus its exact reverse-mode parameter gradient with the noise
/// held fixed (reparameterized): backpropagation through the unrolled
/// rollout. States for every step are stored (memory O(T K d)); layer
/// activations are recomputed during the backward sweep.
inline std::pair<double, std::vector<double>> mse_grad(
    const DriftField& f, const DiffusionSchedule& diffusion,
    const ObservationSet& obs, int sample_count, double dt_target,
    std::uint64_t seed, int workers = 0) {
  if (sample_count < 1) throw std::invalid_argument("mse_grad: need K >= 1");
  const TimeGrid grid = build_grid(obs, dt_target);
  const PathEnsemble ensemble =
      euler_maruyama(f, diffusion, obs.value(0), grid, sample_count, seed, workers);
  const double loss = detail::mse_from_ensemble(ensemble, obs);

  const std::size_t n_nodes = grid.node_count();
  const std::size_t dd = static_cast<std::size_t>(obs.dim());
  const std::size_t k_count = static_cast<std::size_t>(sample_count);
  const double norm = 2.0 / (static_cast<double>(k_count) *
                             static_cast<double>(obs.size() - 1));

  std::vector<long> node_obs(n_nodes, -1);
  for (std::size_t n = 0; n < obs.size(); ++n) {
    node_obs[grid.obs_node(n)] = static_cast<long>(n);
  }

  // Adjoint sweep. lambda holds dL/dX_{j+1} entering step j; each step needs
  // the state Jacobian VJP and the parameter pullback of f at X_j, fused to
  // share the recomputed forward pass.
  std::vector<double> lambda(k_count * dd, 0.0);
  std::vector<double> scaled(k_count * dd);
  std::vector<double> ivjp(k_count * dd);
  std::vector<double> state_rows(k_count * dd);
  std::vector<double> times(k_count);
  std::vector<double> grad(static_cast<std::size_t>(f.param_count()), 0.0);

  auto add_obs_term = [&](std::size_t node) {
    const long n = node_obs[node];
    if (n <= 0) return;  // first observation is the pinned start
    const auto x = obs.value(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t i = 0; i < dd; ++i) {
        lambda[k * dd + i] +=
            norm * (ensemble.value(static_cast<int>(k), node, static_cast<int>(i)) -
                    x[i]);
      }
    }
  };

  add_obs_term(n_nodes - 1);
  for (std::size_t j = n_nodes - 1; j-- > 0;) {
    const double dt = grid.step_dt(j);
    const double t_j = grid.node(j);
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t i = 0; i < dd; ++i) {
        state_rows[k * dd + i] =
            ensemble.value(static_cast<int>(k), j, static_cast<int>(i));
        scaled[k * dd + i] = dt * lambda[k * dd + i];
      }
      times[k] = t_j;
    }
    f.vjp(state_rows, times, scaled, ivjp, grad);
    for (std::size_t idx = 0; idx < lambda.size(); ++idx) lambda[idx] += ivjp[idx];
    add_obs_term(j);
  }
  return {loss, std::move(grad)};
}

/// Which loss a gradient-variance probe differentiates.
enum class ProbeMethod { kIntegratorMse, kPathIntegral };

/// Per-parameter variance of gradient estimates over independent estimator
/// seeds, on a synthetic two-observation dataset with the given gap. The
/// dataset (standard normal values at times 0 and gap) is fixed by the seed;
/// only the estimator noise varies across repeats. Losses match the training
/// objectives: MSE for the integrator and -(1/N) log p-hat for the
/// path-integral estimator. explicit_seeds overrides the per-repeat seed
/// derivation when given.
inline std::vector<double> gradient_variance_probe(
    const DriftField& f, const DiffusionSchedule& diffusion, double obs_gap,
    ProbeMethod method, int repeats, std::uint64_t seed, int sample_count,
    double dt_target, std::span<const std::uint64_t> explicit_seeds = {},
    int workers = 0) {
  if (repeats < 2) throw std::invalid_argument("gradient_variance_probe: repeats >= 2");
  if (!(obs_gap > 0.0)) {
    throw std::invalid_argument("gradient_variance_probe: gap must be positive");
  }
  if (!explicit_seeds.empty() &&
      explicit_seeds.size() != static_cast<std::size_t>(repeats)) {
    throw std::invalid_argument("gradient_variance_probe: seed list size mismatch");
  }
  const int d = f.dim();
  std::vector<double> times = {0.0, obs_gap};
  std::vector<double> values(2 * static_cast<std::size_t>(d));
  for (std::uint32_t n = 0; n < 2; ++n) {
    for (int i = 0; i < d; ++i) {
      values[n * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] =
          normal_draw(RngKey{seed, n, 0, static_cast<std::uint32_t>(i),
                             RngRole::dataset});
    }
  }
  const ObservationSet obs(std::move(times), std::move(values), d);

  const std::size_t p = static_cast<std::size_t>(f.param_count());
  std::vector<std::vector<double>> grads;
  grads.reserve(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t run_seed =
        explicit_seeds.empty()
            ? derive_seed(seed, 0x9A0BE000u + static_cast<std::uint64_t>(r))
            : explicit_seeds[static_cast<std::size_t>(r)];
    if (method == ProbeMethod::kIntegratorMse) {
      grads.push_back(
          mse_grad(f, diffusion, obs, sample_count, dt_target, run_seed, workers)
              .second);
    } else {
      auto [est, grad] =
          log_prob_grad(obs, f, diffusion, sample_count, dt_target, run_seed, workers);
      (void)est;
      const double scale = -1.0 / static_cast<double>(obs.size());
      for (double& g : grad) g *= scale;
      grads.push_back(std::move(grad));
    }
  }

  std::vector<double> variance(p, 0.0);
  std::vector<double> column(static_cast<std::size_t>(repeats));
  for (std::size_t i = 0; i < p; ++i) {
    for (int r = 0; r < repeats; ++r) {
      column[static_cast<std::size_t>(r)] = grads[static_cast<std::size_t>(r)][i];
    }
    variance[i] = sample_variance(column);
  }
  return variance;
}

}  // namespace pathweaver

#endif  // PATHWEAVER_INTEGRATOR_HPP
