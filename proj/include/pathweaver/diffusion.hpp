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

#ifndef PATHWEAVER_DIFFUSION_HPP
#define PATHWEAVER_DIFFUSION_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pathweaver {

/// Diagonal, state-independent diffusion coefficient sigma(t).
///
/// Three shapes: one scalar for all dimensions, one value per dimension, or
/// one value per dimension per inter-observation interval (piecewise constant
/// in time, with pieces aligned to the observation intervals so integrals of
/// sigma^2 over grid steps are exact). All entries must be strictly positive,
/// which keeps sigma sigma^T invertible.
class DiffusionSchedule {
 public:
  enum class Kind { kScalarConstant, kDiagonalConstant, kDiagonalPiecewise };

  static DiffusionSchedule scalar_constant(double sigma, int dim) {
    check_dim(dim);
    check_positive(sigma);
    DiffusionSchedule out;
    out.kind_ = Kind::kScalarConstant;
    out.dim_ = dim;
    out.values_ = {sigma};
    return out;
  }

  static DiffusionSchedule diagonal_constant(std::vector<double> sigma) {
    check_dim(static_cast<int>(sigma.size()));
    for (const double s : sigma) check_positive(s);
    DiffusionSchedule out;
    out.kind_ = Kind::kDiagonalConstant;
    out.dim_ = static_cast<int>(sigma.size());
    out.values_ = std::move(sigma);
    return out;
  }

  /// values is row-major n_intervals x dim.
  static DiffusionSchedule diagonal_piecewise(std::vector<double> values,
                                              std::size_t n_intervals, int dim) {
    check_dim(dim);
    if (n_intervals == 0 ||
        values.size() != n_intervals * static_cast<std::size_t>(dim)) {
      throw std::invalid_argument("DiffusionSchedule: piecewise shape mismatch");
    }
    for (const double s : values) check_positive(s);
    DiffusionSchedule out;
    out.kind_ = Kind::kDiagonalPiecewise;
    out.dim_ = dim;
    out.n_intervals_ = n_intervals;
    out.values_ = std::move(values);
    return out;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_constant_in_time() const { return kind_ != Kind::kDiagonalPiecewise; }

  /// sigma for dimension i on inter-observation interval n.
  double sigma(std::size_t interval, int i) const {
    switch (kind_) {
      case Kind::kScalarConstant:
        return values_[0];
      case Kind::kDiagonalConstant:
        return values_[static_cast<std::size_t>(i)];
      case Kind::kDiagonalPiecewise:
        return values_[interval * static_cast<std::size_t>(dim_) +
                       static_cast<std::size_t>(i)];
    }
    return values_[0];
  }

  double sigma2(std::size_t interval, int i) const {
    const double s = sigma(interval, i);
    return s * s;
  }

  /// Validates piecewise schedules against the number of inter-observation
  /// intervals they are used with.
  void check_intervals(std::size_t n_intervals) const {
    if (kind_ == Kind::kDiagonalPiecewise && n_intervals_ != n_intervals) {
      throw std::invalid_argument(
          "DiffusionSchedule: piecewise schedule does not match interval count");
    }
  }

 private:
  static void check_dim(int dim) {
    if (dim <= 0) throw std::invalid_argument("DiffusionSchedule: dim must be positive");
  }
  static void check_positive(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("DiffusionSchedule: entries must be strictly positive");
    }
  }

  Kind kind_ = Kind::kScalarConstant;
  int dim_ = 0;
  std::size_t n_intervals_ = 0;
  std::vector<double> values_;
};

}  // namespace pathweaver

#endif  // PATHWEAVER_DIFFUSION_HPP
