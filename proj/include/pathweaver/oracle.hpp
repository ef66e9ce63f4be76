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

#ifndef PATHWEAVER_ORACLE_HPP
#define PATHWEAVER_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pathweaver/drift.hpp"
#include "pathweaver/errors.hpp"
#include "pathweaver/integrator.hpp"
#include "pathweaver/numeric.hpp"
#include "pathweaver/observations.hpp"
#include "pathweaver/rng.hpp"
#include "pathweaver/time_grid.hpp"

namespace pathweaver {

/// Exact log density of observations under dX = -theta X dt + sigma dW,
/// conditional on the first observation, dimensions independent:
///   sum_n log N(x_{n+1}; x_n e^{-theta D_n}, sigma^2 (1 - e^{-2 theta D_n}) / (2 theta)).
inline double ou_log_prob(double theta, double sigma, const ObservationSet& obs) {
  if (!(theta > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("ou_log_prob: theta and sigma must be positive");
  }
  if (obs.size() < 2) {
    throw std::invalid_argument("ou_log_prob: need >= 2 observations");
  }
  double log_p = 0.0;
  for (std::size_t n = 0; n + 1 < obs.size(); ++n) {
    const double gap = obs.time(n + 1) - obs.time(n);
    const double decay = std::exp(-theta * gap);
    const double var = sigma * sigma * (1.0 - decay * decay) / (2.0 * theta);
    const auto a = obs.value(n);
    const auto b = obs.value(n + 1);
    for (int i = 0; i < obs.dim(); ++i) {
      log_p += gaussian_log_density(b[i], a[i] * decay, var);
    }
  }
  return log_p;
}

struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

/// Lorenz-63 vector field (sigma (x2-x1), x1 (rho-x3) - x2, x1 x2 - beta x3).
inline void lorenz_field(std::span<const double> x, const LorenzParams& p,
                         std::span<double> out) {
  out[0] = p.sigma * (x[1] - x[0]);
  out[1] = x[0] * (p.rho - x[2]) - x[1];
  out[2] = x[0] * x[1] - p.beta * x[2];
}

/// Van der Pol field (x2, mu (1 - x1^2) x2 - x1).
inline void vdp_field(std::span<const double> x, double mu, std::span<double> out) {
  out[0] = x[1];
  out[1] = mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
}

/// Lorenz field as a DriftField with its analytic Jacobian.
inline AnalyticDrift lorenz_drift(const LorenzParams& p = {}) {
  return AnalyticDrift(
      3,
      [p](std::span<const double> x, double, std::span<double> out) {
        lorenz_field(x, p, out);
      },
      [p](std::span<const double> x, double, std::span<double> jac) {
        jac[0] = -p.sigma;
        jac[1] = p.sigma;
        jac[2] = 0.0;
        jac[3] = p.rho - x[2];
        jac[4] = -1.0;
        jac[5] = -x[0];
        jac[6] = x[1];
        jac[7] = x[0];
        jac[8] = -p.beta;
      });
}

inline AnalyticDrift vdp_drift(double mu) {
  return AnalyticDrift(
      2,
      [mu](std::span<const double> x, double, std::span<double> out) {
        vdp_field(x, mu, out);
      },
      [mu](std::span<const double> x, double, std::span<double> jac) {
        jac[0] = 0.0;
        jac[1] = 1.0;
        jac[2] = -2.0 * mu * x[0] * x[1] - 1.0;
        jac[3] = mu * (1.0 - x[0] * x[0]);
      });
}

/// Draws or fixes trajectory initial values for synthetic data generation.
using X0Sampler =
    std::function<void(std::uint64_t seed, int path, std::span<double> out)>;

inline X0Sampler standard_normal_x0() {
  return [](std::uint64_t seed, int path, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = normal_draw(RngKey{seed, static_cast<std::uint32_t>(path), 0,
                                  static_cast<std::uint32_t>(i),
                                  RngRole::initial_state});
    }
  };
}

inline X0Sampler fixed_x0(std::vector<double> x0) {
  return [x0 = std::move(x0)](std::uint64_t, int, std::span<double> out) {
    std::copy(x0.begin(), x0.end(), out.begin());
  };
}

/// Simulates independent trajectories on a fine Euler-Maruyama grid and
/// subsamples them at n_obs equally spaced observation times over
/// [0, horizon]. No observation noise is added.
inline std::vector<ObservationSet> generate_sde_data(
    const DriftField& field, const DiffusionSchedule& diffusion, int n_paths,
    int n_obs, double horizon, const X0Sampler& x0_sampler, std::uint64_t seed,
    double dt_fine) {
  if (n_paths < 1 || n_obs < 2) {
    throw std::invalid_argument("generate_sde_data: need n_paths >= 1, n_obs >= 2");
  }
  if (!(dt_fine > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("generate_sde_data: horizon and dt_fine must be positive");
  }
  const int d = field.dim();
  std::vector<double> obs_times(static_cast<std::size_t>(n_obs));
  for (int n = 0; n < n_obs; ++n) {
    obs_times[static_cast<std::size_t>(n)] =
        horizon * static_cast<double>(n) / static_cast<double>(n_obs - 1);
  }
  // Grid carrier: observation times as pins, fine steps in between.
  const ObservationSet pins(obs_times,
                            std::vector<double>(obs_times.size() *
                                                static_cast<std::size_t>(d)),
                            d);
  const TimeGrid grid = build_grid(pins, dt_fine);

  std::vector<ObservationSet> datasets;
  datasets.reserve(static_cast<std::size_t>(n_paths));
  std::vector<double> x0(static_cast<std::size_t>(d));
  for (int path = 0; path < n_paths; ++path) {
    x0_sampler(seed, path, x0);
    const std::uint64_t path_seed =
        derive_seed(seed, 0xDA7A0000u + static_cast<std::uint64_t>(path));
    const PathEnsemble ens = euler_maruyama(field, diffusion, x0, grid, 1, path_seed);
    std::vector<double> values(static_cast<std::size_t>(n_obs) *
                               static_cast<std::size_t>(d));
    for (int n = 0; n < n_obs; ++n) {
      const std::size_t g = grid.obs_node(static_cast<std::size_t>(n));
      for (int i = 0; i < d; ++i) {
        values[static_cast<std::size_t>(n) * static_cast<std::size_t>(d) +
               static_cast<std::size_t>(i)] = ens.value(0, g, i);
      }
    }
    datasets.emplace_back(obs_times, std::move(values), d);
  }
  return datasets;
}

/// Squared drift mismatch at the given points, normalized by the mean-square
/// magnitude of the reference field there:
///   sum_n |f(x_n) - f_ref(x_n)|^2 / sum_n |f_ref(x_n)|^2.
inline double err_metric(const DriftField& f_learned, const DriftField& f_true,
                         std::span<const double> points) {
  const std::size_t d = static_cast<std::size_t>(f_true.dim());
  if (f_learned.dim() != f_true.dim()) {
    throw std::invalid_argument("err_metric: dimension mismatch");
  }
  if (points.empty() || points.size() % d != 0) {
    throw std::invalid_argument("err_metric: points must be a nonempty M x d block");
  }
  const std::size_t m = points.size() / d;
  std::vector<double> f_hat(d);
  std::vector<double> f_ref(d);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const auto x = points.subspan(r * d, d);
    f_learned.eval(x, 0.0, f_hat);
    f_true.eval(x, 0.0, f_ref);
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = f_hat[i] - f_ref[i];
      num += diff * diff;
      den += f_ref[i] * f_ref[i];
    }
  }
  if (den == 0.0) {
    throw UndefinedMetricError("err_metric: reference field vanishes at all points");
  }
  return num / den;
}

}  // namespace pathweaver

#endif  // PATHWEAVER_ORACLE_HPP
