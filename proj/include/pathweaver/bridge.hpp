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

#ifndef PATHWEAVER_BRIDGE_HPP
#define PATHWEAVER_BRIDGE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pathweaver/diffusion.hpp"
#include "pathweaver/errors.hpp"
#include "pathweaver/numeric.hpp"
#include "pathweaver/observations.hpp"
#include "pathweaver/parallel.hpp"
#include "pathweaver/path_ensemble.hpp"
#include "pathweaver/rng.hpp"
#include "pathweaver/time_grid.hpp"

namespace pathweaver {

/// Covariance kernel k(s, t) of a Gauss-Markov process. Must be symmetric
/// and positive semi-definite.
using KernelFn = std::function<double(double, double)>;

/// Kernel of Brownian motion started at time 0: k(s,t) = sigma^2 min(s,t).
inline KernelFn brownian_kernel(double sigma) {
  return [sigma](double s, double t) { return sigma * sigma * std::min(s, t); };
}

/// Samples an unconditional driftless path (dY = sigma(t) dW, Y_0 = 0) on the
/// grid by cumulative summation of independent normal increments. Increment
/// variance over step j is the exact integral of sigma^2 over the step.
inline std::vector<double> sample_brownian(const TimeGrid& grid,
                                           const DiffusionSchedule& diffusion,
                                           std::uint64_t seed, int k) {
  diffusion.check_intervals(grid.interval_count());
  const int d = diffusion.dim();
  const std::size_t nodes = grid.node_count();
  std::vector<double> path(nodes * static_cast<std::size_t>(d), 0.0);
  for (std::size_t j = 0; j + 1 < nodes; ++j) {
    const double dt = grid.step_dt(j);
    const std::size_t interval = grid.interval_of_step(j);
    for (int i = 0; i < d; ++i) {
      const double scale = std::sqrt(diffusion.sigma2(interval, i) * dt);
      const double z = normal_draw(RngKey{seed, static_cast<std::uint32_t>(k),
                                          static_cast<std::uint32_t>(j),
                                          static_cast<std::uint32_t>(i),
                                          RngRole::bridge_increment});
      path[(j + 1) * d + i] = path[j * d + i] + scale * z;
    }
  }
  return path;
}

/// Conditions a sampled Gauss-Markov path on values at its first and last
/// node via the explicit two-endpoint formula
///
///   Y~_t = Y_t + c0(t) (y0 - Y_{t0}) + c1(t) (yT - Y_T),
///
/// with coefficients read off the 2x2 endpoint Gram matrix of the kernel.
/// A pinned start (k(t0,t0) == 0, e.g. Brownian motion from time 0) is the
/// degenerate-but-well-posed case: the path is shifted to y0 and corrected
/// on the right endpoint only, which for the Brownian kernel reduces to
/// Y_t + (t/T)(yT - Y_T). Any other singular Gram matrix is an error.
///
/// times has one entry per node; path is row-major node x dim and the same
/// scalar kernel applies to every dimension. Endpoints land on y0 / yT
/// exactly.
inline std::vector<double> condition_two_point(std::span<const double> times,
                                               std::span<const double> path, int dim,
                                               const KernelFn& kernel,
                                               std::span<const double> y0,
                                               std::span<const double> yT) {
  const std::size_t nodes = times.size();
  if (nodes < 2) throw std::invalid_argument("condition_two_point: need >= 2 nodes");
  if (path.size() != nodes * static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("condition_two_point: path shape mismatch");
  }
  const double t0 = times.front();
  const double tT = times.back();
  const double g00 = kernel(t0, t0);
  const double g01 = kernel(t0, tT);
  const double g11 = kernel(tT, tT);
  const double det = g00 * g11 - g01 * g01;

  std::vector<double> out(path.begin(), path.end());
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t last = nodes - 1;

  if (g00 == 0.0) {
    // Start pinned by the kernel itself: Var(Y_{t0}) = 0.
    if (!(g11 > 0.0)) {
      throw DegenerateBridgeError("condition_two_point: k(T,T) must be positive");
    }
    for (std::size_t j = 0; j < nodes; ++j) {
      const double c1 = kernel(times[j], tT) / g11;
      for (std::size_t i = 0; i < d; ++i) {
        const double shifted = path[j * d + i] + (y0[i] - path[0 * d + i]);
        const double end_shifted = path[last * d + i] + (y0[i] - path[0 * d + i]);
        out[j * d + i] = shifted + c1 * (yT[i] - end_shifted);
      }
    }
  } else {
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw DegenerateBridgeError("condition_two_point: singular endpoint Gram matrix");
    }
    for (std::size_t j = 0; j < nodes; ++j) {
      const double k0 = kernel(times[j], t0);
      const double k1 = kernel(times[j], tT);
      const double c0 = (k0 * g11 - k1 * g01) / det;
      const double c1 = (k1 * g00 - k0 * g01) / det;
      for (std::size_t i = 0; i < d; ++i) {
        out[j * d + i] = path[j * d + i] + c0 * (y0[i] - path[0 * d + i]) +
                         c1 * (yT[i] - path[last * d + i]);
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    out[0 * d + i] = y0[i];
    out[last * d + i] = yT[i];
  }
  return out;
}

namespace detail {

/// Fills one sample of a bridge ensemble. Inside each inter-observation
/// interval: sample the driftless path from 0 by cumulative summation, then
/// correct linearly toward both endpoints (node-wise, hence parallel over
/// time). Interpolation coefficients are j/m so the pins are exact.
inline void fill_bridge_sample(PathEnsemble& ensemble, const ObservationSet& obs,
                               const DiffusionSchedule& diffusion,
                               std::uint64_t seed, int k,
                               std::vector<double>& scratch) {
  const TimeGrid& grid = ensemble.grid();
  const int d = obs.dim();
  auto sample = ensemble.sample(k);

  for (std::size_t n = 0; n + 1 < obs.size(); ++n) {
    const std::size_t first_node = grid.obs_node(n);
    const std::size_t m = grid.steps_in_interval(n);
    const double dt = grid.interval_dt(n);
    const auto ya = obs.value(n);
    const auto yb = obs.value(n + 1);

    // Unconditional increments, cumulatively summed from 0.
    scratch.assign((m + 1) * static_cast<std::size_t>(d), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t global_step = first_node + j;
      for (int i = 0; i < d; ++i) {
        const double scale = std::sqrt(diffusion.sigma2(n, i) * dt);
        const double z = normal_draw(
            RngKey{seed, static_cast<std::uint32_t>(k),
                   static_cast<std::uint32_t>(global_step),
                   static_cast<std::uint32_t>(i), RngRole::bridge_increment});
        scratch[(j + 1) * d + i] = scratch[j * d + i] + scale * z;
      }
    }

    for (int i = 0; i < d; ++i) {
      sample[first_node * d + i] = ya[i];
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t j = 1; j < m; ++j) {
      const double c = static_cast<double>(j) * inv_m;
      for (int i = 0; i < d; ++i) {
        const double w = scratch[j * d + i];
        const double w_end = scratch[m * d + i];
        sample[(first_node + j) * d + i] =
            ya[i] + w + c * (yb[i] - ya[i] - w_end);
      }
    }
    for (int i = 0; i < d; ++i) {
      sample[(first_node + m) * d + i] = yb[i];
    }
  }
}

}  // namespace detail

/// Samples K bridge trajectories passing exactly through every observation.
/// Segments between consecutive observations are mutually independent given
/// the endpoints; output is bit-identical for a fixed seed at any worker
/// count.
inline PathEnsemble sample_bridge_ensemble(const ObservationSet& obs,
                                           const TimeGrid& grid,
                                           const DiffusionSchedule& diffusion,
                                           int sample_count, std::uint64_t seed,
                                           int workers = 0) {
  if (obs.size() < 2) {
    throw std::invalid_argument("sample_bridge_ensemble: need >= 2 observations");
  }
  if (diffusion.dim() != obs.dim()) {
    throw std::invalid_argument("sample_bridge_ensemble: diffusion dim mismatch");
  }
  diffusion.check_intervals(obs.size() - 1);
  if (grid.observation_count() != obs.size()) {
    throw std::invalid_argument("sample_bridge_ensemble: grid does not match obs");
  }
  PathEnsemble ensemble(grid, sample_count, obs.dim(), seed,
                        RngRole::bridge_increment);
  parallel_chunks(static_cast<std::size_t>(sample_count), 1, workers,
                  [&](std::size_t begin, std::size_t end) {
                    std::vector<double> scratch;
                    for (std::size_t k = begin; k < end; ++k) {
                      detail::fill_bridge_sample(ensemble, obs, diffusion, seed,
                                                 static_cast<int>(k), scratch);
                    }
                  });
  return ensemble;
}

/// Log density of the driftless process at the observations, conditional on
/// the first one:
///
///   log p_Y(x_{2:N} | x_1) = sum_n log N(x_{n+1}; x_n, Sigma_n),
///
/// with Sigma_n the diagonal integral of sigma sigma^T over [t_n, t_{n+1}].
/// The first observation carries no density of its own (the process has no
/// modeled initial distribution).
inline double log_base_density(const ObservationSet& obs,
                               const DiffusionSchedule& diffusion) {
  if (obs.size() < 2) {
    throw std::invalid_argument("log_base_density: need >= 2 observations");
  }
  if (diffusion.dim() != obs.dim()) {
    throw std::invalid_argument("log_base_density: diffusion dim mismatch");
  }
  diffusion.check_intervals(obs.size() - 1);
  double log_p = 0.0;
  for (std::size_t n = 0; n + 1 < obs.size(); ++n) {
    const double gap = obs.time(n + 1) - obs.time(n);
    const auto a = obs.value(n);
    const auto b = obs.value(n + 1);
    for (int i = 0; i < obs.dim(); ++i) {
      log_p += gaussian_log_density(b[i], a[i], diffusion.sigma2(n, i) * gap);
    }
  }
  return log_p;
}

}  // namespace pathweaver

#endif  // PATHWEAVER_BRIDGE_HPP
