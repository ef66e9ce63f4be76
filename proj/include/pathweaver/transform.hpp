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

#ifndef PATHWEAVER_TRANSFORM_HPP
#define PATHWEAVER_TRANSFORM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "pathweaver/errors.hpp"
#include "pathweaver/girsanov.hpp"

namespace pathweaver {

/// Invertible state map T(x, t) carrying a state-dependent diffusion into
/// constant-diffusion space. Implementations provide the forward map, its
/// inverse, the forward Jacobian dT/dx and (for time-dependent maps) the
/// time partial of the inverse. Maps may expose trainable parameters via
/// param_pullback / logdet_param_grad.
class InvertibleMap {
 public:
  virtual ~InvertibleMap() = default;

  virtual int dim() const = 0;
  virtual void forward(std::span<const double> x, double t,
                       std::span<double> y) const = 0;
  virtual void inverse(std::span<const double> y, double t,
                       std::span<double> x) const = 0;
  /// Row-major dim x dim Jacobian dT/dx at (x, t).
  virtual void jacobian(std::span<const double> x, double t,
                        std::span<double> out) const = 0;
  /// dT^{-1}/dt at (y, t); zero for time-independent maps.
  virtual void time_partial_inverse(std::span<const double> y, double t,
                                    std::span<double> out) const {
    (void)y;
    (void)t;
    for (double& v : out) v = 0.0;
  }
  /// Piecewise-linear maps have an almost-everywhere-zero second derivative;
  /// declaring it skips the finite-difference correction term.
  virtual bool piecewise_linear() const { return false; }

  virtual int param_count() const { return 0; }
  /// Accumulates d<cotangent, T(x, t)>/d(phi) into grad.
  virtual void param_pullback(std::span<const double> x, double t,
                              std::span<const double> cotangent,
                              std::span<double> grad) const {
    (void)x;
    (void)t;
    (void)cotangent;
    (void)grad;
    if (param_count() > 0) {
      throw std::logic_error("InvertibleMap: param_pullback not implemented");
    }
  }
  /// Accumulates d(log |det dT/dx|)/d(phi) into grad.
  virtual void logdet_param_grad(std::span<const double> x, double t,
                                 std::span<double> grad) const {
    (void)x;
    (void)t;
    (void)grad;
    if (param_count() > 0) {
      throw std::logic_error("InvertibleMap: logdet_param_grad not implemented");
    }
  }
};

class IdentityMap final : public InvertibleMap {
 public:
  explicit IdentityMap(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  void forward(std::span<const double> x, double, std::span<double> y) const override {
    std::copy(x.begin(), x.end(), y.begin());
  }
  void inverse(std::span<const double> y, double, std::span<double> x) const override {
    std::copy(y.begin(), y.end(), x.begin());
  }
  void jacobian(std::span<const double>, double, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
    for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i) * dim_ + i] = 1.0;
  }
  bool piecewise_linear() const override { return true; }

 private:
  int dim_;
};

/// T(x) = a * x with the scale as one trainable parameter.
class ScalarScaleMap final : public InvertibleMap {
 public:
  ScalarScaleMap(double scale, int dim) : scale_(scale), dim_(dim) {
    if (scale_ == 0.0 || !std::isfinite(scale_)) {
      throw std::invalid_argument("ScalarScaleMap: scale must be nonzero");
    }
  }
  int dim() const override { return dim_; }
  double scale() const { return scale_; }
  void set_scale(double s) { scale_ = s; }

  void forward(std::span<const double> x, double, std::span<double> y) const override {
    for (int i = 0; i < dim_; ++i) y[i] = scale_ * x[i];
  }
  void inverse(std::span<const double> y, double, std::span<double> x) const override {
    for (int i = 0; i < dim_; ++i) x[i] = y[i] / scale_;
  }
  void jacobian(std::span<const double>, double, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
    for (int i = 0; i < dim_; ++i) {
      out[static_cast<std::size_t>(i) * dim_ + i] = scale_;
    }
  }
  bool piecewise_linear() const override { return true; }
  int param_count() const override { return 1; }
  void param_pullback(std::span<const double> x, double,
                      std::span<const double> cotangent,
                      std::span<double> grad) const override {
    double acc = 0.0;
    for (int i = 0; i < dim_; ++i) acc += cotangent[i] * x[i];
    grad[0] += acc;
  }
  void logdet_param_grad(std::span<const double>, double,
                         std::span<double> grad) const override {
    grad[0] += static_cast<double>(dim_) / scale_;
  }

 private:
  double scale_;
  int dim_;
};

/// Componentwise T(x) = log(x) on the positive orthant; inverse exp.
class ComponentwiseLogMap final : public InvertibleMap {
 public:
  explicit ComponentwiseLogMap(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  void forward(std::span<const double> x, double, std::span<double> y) const override {
    for (int i = 0; i < dim_; ++i) {
      if (!(x[i] > 0.0)) {
        throw std::invalid_argument("ComponentwiseLogMap: state must be positive");
      }
      y[i] = std::log(x[i]);
    }
  }
  void inverse(std::span<const double> y, double, std::span<double> x) const override {
    for (int i = 0; i < dim_; ++i) x[i] = std::exp(y[i]);
  }
  void jacobian(std::span<const double> x, double, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
    for (int i = 0; i < dim_; ++i) {
      out[static_cast<std::size_t>(i) * dim_ + i] = 1.0 / x[i];
    }
  }

 private:
  int dim_;
};

/// Fixed linear map T(x) = A x.
class LinearMap final : public InvertibleMap {
 public:
  /// a is row-major dim x dim.
  LinearMap(std::vector<double> a, int dim) : a_(std::move(a)), dim_(dim) {
    if (a_.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim)) {
      throw std::invalid_argument("LinearMap: matrix shape mismatch");
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        m(a_.data(), dim, dim);
    lu_.compute(m);
    if (std::abs(lu_.determinant()) < 1e-12) {
      throw std::invalid_argument("LinearMap: matrix is singular");
    }
  }
  int dim() const override { return dim_; }
  void forward(std::span<const double> x, double, std::span<double> y) const override {
    for (int i = 0; i < dim_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < dim_; ++j) {
        acc += a_[static_cast<std::size_t>(i) * dim_ + j] * x[j];
      }
      y[i] = acc;
    }
  }
  void inverse(std::span<const double> y, double, std::span<double> x) const override {
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), dim_);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), dim_);
    xv = lu_.solve(yv);
  }
  void jacobian(std::span<const double>, double, std::span<double> out) const override {
    std::copy(a_.begin(), a_.end(), out.begin());
  }
  bool piecewise_linear() const override { return true; }

 private:
  std::vector<double> a_;
  int dim_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

namespace detail {

/// log |det dT/dx| at (x, t); the absolute value keeps orientation-reversing
/// maps valid density transforms.
inline double log_abs_det_jacobian(const InvertibleMap& map,
                                   std::span<const double> x, double t) {
  const int d = map.dim();
  std::vector<double> jac(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
  map.jacobian(x, t, jac);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      m(jac.data(), d, d);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double det = lu.determinant();
  if (det == 0.0 || !std::isfinite(det)) {
    throw SingularJacobianError("transform: singular Jacobian at an observation");
  }
  return std::log(std::abs(det));
}

/// Observations pushed through the map plus the log|det| total over
/// observations 2..N (the density is conditional on the first).
inline std::pair<ObservationSet, double> transform_observations(
    const ObservationSet& obs, const InvertibleMap& map) {
  if (map.dim() != obs.dim()) {
    throw std::invalid_argument("transform: map dimension mismatch");
  }
  const std::size_t d = static_cast<std::size_t>(obs.dim());
  std::vector<double> times(obs.times().begin(), obs.times().end());
  std::vector<double> values(obs.size() * d);
  double log_det_sum = 0.0;
  for (std::size_t n = 0; n < obs.size(); ++n) {
    map.forward(obs.value(n), obs.time(n),
                std::span<double>(values).subspan(n * d, d));
    if (n >= 1) {
      log_det_sum += log_abs_det_jacobian(map, obs.value(n), obs.time(n));
    }
  }
  return {ObservationSet(std::move(times), std::move(values), obs.dim()),
          log_det_sum};
}

}  // namespace detail

/// Transformed-state estimate: observations are mapped through T, bridges are
/// sampled in the constant-diffusion space, the action uses the transformed
/// drift, and the change-of-variables determinant joins the base density.
/// With the identity map this is bit-identical to log_prob at equal seeds.
inline LogProbEstimate transformed_log_prob(const ObservationSet& obs,
                                            const DriftField& f_tilde,
                                            const DiffusionSchedule& diffusion,
                                            const InvertibleMap& map,
                                            int sample_count, double dt_target,
                                            std::uint64_t seed, int workers = 0) {
  if (sample_count < 1) throw std::invalid_argument("transformed_log_prob: need K >= 1");
  auto [mapped_obs, log_det_sum] = detail::transform_observations(obs, map);
  const TimeGrid grid = build_grid(mapped_obs, dt_target);
  const PathEnsemble paths = sample_bridge_ensemble(mapped_obs, grid, diffusion,
                                                    sample_count, seed, workers);
  const ActionBreakdown breakdown = action(paths, f_tilde, diffusion, workers);
  const WeightStats stats = weight_stats(breakdown.action);
  if (!std::isfinite(stats.log_mean_weight)) {
    throw EstimationError("all importance weights vanished");
  }
  LogProbEstimate est;
  est.log_base = log_base_density(mapped_obs, diffusion) + log_det_sum;
  est.log_mean_weight = stats.log_mean_weight;
  est.std_err_log = stats.std_err_log;
  est.ess = stats.ess;
  est.sample_count = sample_count;
  est.log_p = est.log_base + est.log_mean_weight;
  return est;
}

/// transformed_log_prob together with gradients with respect to the
/// transformed drift's parameters and the map's parameters.
///
/// The bridge noise is map-independent; only the pinned endpoints move with
/// the map, so d(bridge node)/d(phi) interpolates the endpoint sensitivities
/// with the same coefficients used to pin the bridge. That reduces the whole
/// pathwise gradient to per-observation cotangents pushed through the map's
/// parameter pullback (the reparameterized gradient through the sampling
/// step).
inline std::tuple<LogProbEstimate, std::vector<double>, std::vector<double>>
transformed_log_prob_grad(const ObservationSet& obs, const DriftField& f_tilde,
                          const DiffusionSchedule& diffusion,
                          const InvertibleMap& map, int sample_count,
                          double dt_target, std::uint64_t seed, int workers = 0) {
  if (sample_count < 1) {
    throw std::invalid_argument("transformed_log_prob_grad: need K >= 1");
  }
  auto [mapped_obs, log_det_sum] = detail::transform_observations(obs, map);
  const TimeGrid grid = build_grid(mapped_obs, dt_target);
  const PathEnsemble paths = sample_bridge_ensemble(mapped_obs, grid, diffusion,
                                                    sample_count, seed, workers);

  std::vector<double> drift_values;
  detail::eval_drift_over_ensemble(paths, f_tilde, drift_values, workers);
  const ActionBreakdown breakdown =
      detail::action_from_drift_values(paths, drift_values, diffusion, workers);

  std::vector<double> weights(static_cast<std::size_t>(sample_count));
  const WeightStats stats = weight_stats(breakdown.action, weights);
  if (!std::isfinite(stats.log_mean_weight)) {
    throw EstimationError("all importance weights vanished");
  }
  LogProbEstimate est;
  est.log_base = log_base_density(mapped_obs, diffusion) + log_det_sum;
  est.log_mean_weight = stats.log_mean_weight;
  est.std_err_log = stats.std_err_log;
  est.ess = stats.ess;
  est.sample_count = sample_count;
  est.log_p = est.log_base + est.log_mean_weight;

  const std::size_t n_nodes = grid.node_count();
  const std::size_t d = static_cast<std::size_t>(obs.dim());
  const std::size_t rows = static_cast<std::size_t>(sample_count) * n_nodes;
  const auto values = paths.values();

  // Weighted action cotangents with respect to the drift values, and the
  // weighted increment coefficients u = w_k sigma^-2 f (zero at the last
  // node) needed for the path sensitivity.
  std::vector<double> cotangents(rows * d);
  std::vector<double> u(rows * d);
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
              const double fv = drift_values[row + i];
              const double dy = values[row + d + i] - values[row + i];
              cotangents[row + i] = w * inv_s2 * (dy - fv * dt);
              u[row + i] = w * inv_s2 * fv;
            }
          }
          for (std::size_t i = 0; i < d; ++i) {
            cotangents[base + (n_nodes - 1) * d + i] = 0.0;
            u[base + (n_nodes - 1) * d + i] = 0.0;
          }
        }
      });

  std::vector<double> times(rows);
  for (std::size_t r = 0; r < rows; ++r) times[r] = grid.node(r % n_nodes);

  // One fused pass: drift-parameter pullback plus the state VJP needed for
  // the map gradient.
  std::vector<double> drift_grad(static_cast<std::size_t>(f_tilde.param_count()), 0.0);
  std::vector<double> state_vjp(rows * d);
  f_tilde.vjp(values, times, cotangents, state_vjp, drift_grad);

  // Node cotangents e = state_vjp + (u_{j-1} - u_j), summed over samples,
  // then distributed onto the two pinning observations of each node. Every
  // node is visited once: local index j in [0, m) of its interval, plus the
  // final node with full weight on the last observation.
  const std::size_t n_obs = mapped_obs.size();
  std::vector<double> obs_cotangent(n_obs * d, 0.0);
  for (std::size_t k = 0; k < static_cast<std::size_t>(sample_count); ++k) {
    const std::size_t base = k * n_nodes * d;
    std::size_t node = 0;
    for (std::size_t n = 0; n + 1 < n_obs; ++n) {
      const std::size_t m = grid.steps_in_interval(n);
      const double inv_m = 1.0 / static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t g = node + j;
        const double c = static_cast<double>(j) * inv_m;
        for (std::size_t i = 0; i < d; ++i) {
          const double u_prev = g == 0 ? 0.0 : u[base + (g - 1) * d + i];
          const double e = state_vjp[base + g * d + i] + u_prev - u[base + g * d + i];
          obs_cotangent[n * d + i] += (1.0 - c) * e;
          obs_cotangent[(n + 1) * d + i] += c * e;
        }
      }
      node += m;
    }
    const std::size_t g_last = n_nodes - 1;
    for (std::size_t i = 0; i < d; ++i) {
      const double e = state_vjp[base + g_last * d + i] + u[base + (g_last - 1) * d + i] -
                       u[base + g_last * d + i];
      obs_cotangent[(n_obs - 1) * d + i] += e;
    }
  }

  // Base-density sensitivity to the mapped observations.
  for (std::size_t n = 0; n + 1 < n_obs; ++n) {
    const double gap = mapped_obs.time(n + 1) - mapped_obs.time(n);
    const auto a = mapped_obs.value(n);
    const auto b = mapped_obs.value(n + 1);
    for (std::size_t i = 0; i < d; ++i) {
      const double var = diffusion.sigma2(n, static_cast<int>(i)) * gap;
      const double score = (b[i] - a[i]) / var;
      obs_cotangent[n * d + i] += score;
      obs_cotangent[(n + 1) * d + i] -= score;
    }
  }

  std::vector<double> map_grad(static_cast<std::size_t>(map.param_count()), 0.0);
  for (std::size_t n = 0; n < n_obs; ++n) {
    map.param_pullback(obs.value(n), obs.time(n),
                       std::span<const double>(obs_cotangent).subspan(n * d, d),
                       map_grad);
    if (n >= 1) map.logdet_param_grad(obs.value(n), obs.time(n), map_grad);
  }
  return {est, std::move(drift_grad), std::move(map_grad)};
}

/// Carries the transformed-space SDE dY = f~ dt + sigma dW back to the
/// original space: the drift picks up the inverse-map time partial, the
/// pushed-back drift and the Ito second-derivative correction; the diffusion
/// is (dT/dx)^{-1} sigma. The correction is evaluated by central differences
/// of inverse-Jacobian-vector products and is skipped for maps that declare
/// themselves piecewise linear.
inline std::pair<std::vector<double>, std::vector<double>> reconstruct_sde(
    const DriftField& f_tilde, const DiffusionSchedule& diffusion,
    const InvertibleMap& map, std::span<const double> x, double t) {
  const int d = map.dim();
  if (f_tilde.dim() != d || diffusion.dim() != d) {
    throw std::invalid_argument("reconstruct_sde: dimension mismatch");
  }
  if (!diffusion.is_constant_in_time()) {
    throw std::invalid_argument(
        "reconstruct_sde: requires a time-constant diffusion schedule");
  }
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const std::size_t dd = static_cast<std::size_t>(d);

  std::vector<double> y(dd);
  map.forward(x, t, y);
  std::vector<double> jac(dd * dd);
  map.jacobian(x, t, jac);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::Map<const RowMat>(jac.data(), d, d));
  if (std::abs(lu.determinant()) < std::numeric_limits<double>::min()) {
    throw SingularJacobianError("reconstruct_sde: singular Jacobian");
  }

  std::vector<double> f_t(dd);
  f_tilde.eval(y, t, f_t);
  Eigen::VectorXd f_vec = lu.solve(Eigen::Map<const Eigen::VectorXd>(f_t.data(), d));

  std::vector<double> time_term(dd);
  map.time_partial_inverse(y, t, time_term);
  for (int i = 0; i < d; ++i) f_vec[i] += time_term[static_cast<std::size_t>(i)];

  if (!map.piecewise_linear()) {
    // 1/2 sum_j sigma_j^2 d^2 T^{-1} / dy_j^2 by central differences of
    // J^{-1} e_j; the diagonal form matches the diagonal diffusion.
    const double eps_cbrt = std::cbrt(std::numeric_limits<double>::epsilon());
    std::vector<double> y_shift(dd);
    std::vector<double> x_shift(dd);
    std::vector<double> jac_shift(dd * dd);
    for (int j = 0; j < d; ++j) {
      const double h = eps_cbrt * std::max(1.0, std::abs(y[static_cast<std::size_t>(j)]));
      Eigen::VectorXd w_plus(d), w_minus(d);
      for (const int sign : {+1, -1}) {
        std::copy(y.begin(), y.end(), y_shift.begin());
        y_shift[static_cast<std::size_t>(j)] += sign * h;
        map.inverse(y_shift, t, x_shift);
        map.jacobian(x_shift, t, jac_shift);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu_shift(
            Eigen::Map<const RowMat>(jac_shift.data(), d, d));
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
        e[j] = 1.0;
        (sign > 0 ? w_plus : w_minus) = lu_shift.solve(e);
      }
      const double s2 = diffusion.sigma2(0, j);
      f_vec += (0.5 * s2 / (2.0 * h)) * (w_plus - w_minus);
    }
  }

  std::vector<double> f_out(dd);
  for (int i = 0; i < d; ++i) f_out[static_cast<std::size_t>(i)] = f_vec[i];

  RowMat g = lu.inverse();
  for (int j = 0; j < d; ++j) g.col(j) *= diffusion.sigma(0, j);
  std::vector<double> g_out(dd * dd);
  Eigen::Map<RowMat>(g_out.data(), d, d) = g;
  return {std::move(f_out), std::move(g_out)};
}

}  // namespace pathweaver

#endif  // PATHWEAVER_TRANSFORM_HPP
