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

#ifndef PATHWEAVER_DRIFT_HPP
#define PATHWEAVER_DRIFT_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pathweaver {

/// Evaluable, differentiable vector field f(x, t).
///
/// eval_batch is pure vectorization: row i of the batched output equals
/// eval on row i. pullback accumulates the parameter gradient of
/// sum_rows <cotangent_row, f(x_row, t_row)>. input_jvp / input_vjp expose
/// the state Jacobian for fields that support it (needed by the integrator
/// backward pass and the state-transform machinery).
class DriftField {
 public:
  virtual ~DriftField() = default;

  virtual int dim() const = 0;
  virtual int param_count() const { return 0; }

  virtual void eval(std::span<const double> x, double t,
                    std::span<double> out) const = 0;

  /// X is row-major M x dim, t has M entries, out is row-major M x dim.
  virtual void eval_batch(std::span<const double> X, std::span<const double> t,
                          std::span<double> out) const {
    const std::size_t d = static_cast<std::size_t>(dim());
    for (std::size_t r = 0; r < t.size(); ++r) {
      eval(X.subspan(r * d, d), t[r], out.subspan(r * d, d));
    }
  }

  /// Accumulates d(sum_r <c_r, f(x_r, t_r)>)/d(theta) into grad.
  virtual void pullback(std::span<const double> X, std::span<const double> t,
                        std::span<const double> cotangents,
                        std::span<double> grad) const {
    (void)X;
    (void)t;
    (void)cotangents;
    (void)grad;
    if (param_count() > 0) {
      throw std::logic_error("DriftField: pullback not implemented");
    }
  }

  /// J_f(x, t) * tangent.
  virtual void input_jvp(std::span<const double> x, double t,
                         std::span<const double> tangent,
                         std::span<double> out) const {
    (void)x;
    (void)t;
    (void)tangent;
    (void)out;
    throw std::logic_error("DriftField: input_jvp not implemented");
  }

  /// Row r of out is cotangent_r^T J_f(x_r, t_r).
  virtual void input_vjp(std::span<const double> X, std::span<const double> t,
                         std::span<const double> cotangents,
                         std::span<double> out) const {
    (void)X;
    (void)t;
    (void)cotangents;
    (void)out;
    throw std::logic_error("DriftField: input_vjp not implemented");
  }

  /// Fused input VJP + parameter pullback sharing one forward pass.
  /// input_vjp_out may be empty (parameter gradient only) and grad may be
  /// empty (input VJP only).
  virtual void vjp(std::span<const double> X, std::span<const double> t,
                   std::span<const double> cotangents,
                   std::span<double> input_vjp_out,
                   std::span<double> grad) const {
    if (!input_vjp_out.empty()) input_vjp(X, t, cotangents, input_vjp_out);
    if (!grad.empty()) pullback(X, t, cotangents, grad);
  }
};

/// f(x, t) = 0.
class ZeroDrift final : public DriftField {
 public:
  explicit ZeroDrift(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  void eval(std::span<const double>, double, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }
  void input_jvp(std::span<const double>, double, std::span<const double>,
                 std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }
  void input_vjp(std::span<const double>, std::span<const double>,
                 std::span<const double>, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }

 private:
  int dim_;
};

/// f(x, t) = c with the constant as the trainable parameter vector.
class ConstantDrift final : public DriftField {
 public:
  explicit ConstantDrift(std::vector<double> c) : c_(std::move(c)) {}
  int dim() const override { return static_cast<int>(c_.size()); }
  int param_count() const override { return static_cast<int>(c_.size()); }
  std::span<double> params() { return c_; }
  std::span<const double> params() const { return c_; }

  void eval(std::span<const double>, double, std::span<double> out) const override {
    for (std::size_t i = 0; i < c_.size(); ++i) out[i] = c_[i];
  }
  void pullback(std::span<const double>, std::span<const double> t,
                std::span<const double> cotangents,
                std::span<double> grad) const override {
    const std::size_t d = c_.size();
    for (std::size_t r = 0; r < t.size(); ++r) {
      for (std::size_t i = 0; i < d; ++i) grad[i] += cotangents[r * d + i];
    }
  }
  void input_jvp(std::span<const double>, double, std::span<const double>,
                 std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }
  void input_vjp(std::span<const double>, std::span<const double>,
                 std::span<const double>, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }

 private:
  std::vector<double> c_;
};

/// f(x, t) = -rate * x (Ornstein-Uhlenbeck pull toward the origin).
class OuDrift final : public DriftField {
 public:
  OuDrift(double rate, int dim) : rate_(rate), dim_(dim) {}
  int dim() const override { return dim_; }
  void eval(std::span<const double> x, double, std::span<double> out) const override {
    for (int i = 0; i < dim_; ++i) out[i] = -rate_ * x[i];
  }
  void input_jvp(std::span<const double>, double, std::span<const double> tangent,
                 std::span<double> out) const override {
    for (int i = 0; i < dim_; ++i) out[i] = -rate_ * tangent[i];
  }
  void input_vjp(std::span<const double>, std::span<const double> t,
                 std::span<const double> cotangents,
                 std::span<double> out) const override {
    const std::size_t d = static_cast<std::size_t>(dim_);
    for (std::size_t r = 0; r < t.size(); ++r) {
      for (std::size_t i = 0; i < d; ++i) {
        out[r * d + i] = -rate_ * cotangents[r * d + i];
      }
    }
  }

 private:
  double rate_;
  int dim_;
};

/// Wraps a plain function as a parameterless drift field. An optional
/// Jacobian callback enables input_jvp/input_vjp.
class AnalyticDrift final : public DriftField {
 public:
  using EvalFn = std::function<void(std::span<const double>, double, std::span<double>)>;
  /// Jacobian writes row-major dim x dim into its output span.
  using JacobianFn =
      std::function<void(std::span<const double>, double, std::span<double>)>;

  AnalyticDrift(int dim, EvalFn eval, JacobianFn jacobian = nullptr)
      : dim_(dim), eval_(std::move(eval)), jacobian_(std::move(jacobian)) {}

  int dim() const override { return dim_; }
  void eval(std::span<const double> x, double t, std::span<double> out) const override {
    eval_(x, t, out);
  }
  void input_jvp(std::span<const double> x, double t,
                 std::span<const double> tangent,
                 std::span<double> out) const override {
    require_jacobian();
    const std::size_t d = static_cast<std::size_t>(dim_);
    std::vector<double> jac(d * d);
    jacobian_(x, t, jac);
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += jac[i * d + j] * tangent[j];
      out[i] = acc;
    }
  }
  void input_vjp(std::span<const double> X, std::span<const double> t,
                 std::span<const double> cotangents,
                 std::span<double> out) const override {
    require_jacobian();
    const std::size_t d = static_cast<std::size_t>(dim_);
    std::vector<double> jac(d * d);
    for (std::size_t r = 0; r < t.size(); ++r) {
      jacobian_(X.subspan(r * d, d), t[r], jac);
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          acc += cotangents[r * d + i] * jac[i * d + j];
        }
        out[r * d + j] = acc;
      }
    }
  }

 private:
  void require_jacobian() const {
    if (!jacobian_) {
      throw std::logic_error("AnalyticDrift: no Jacobian callback provided");
    }
  }

  int dim_;
  EvalFn eval_;
  JacobianFn jacobian_;
};

}  // namespace pathweaver

#endif  // PATHWEAVER_DRIFT_HPP
