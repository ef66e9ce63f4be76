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

#ifndef PATHWEAVER_OBSERVATIONS_HPP
#define PATHWEAVER_OBSERVATIONS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pathweaver {

/// Ordered (t_n, x_n) pairs in d dimensions. Immutable after construction.
///
/// Times must be strictly increasing. A repeated time is collapsed to a
/// single observation when its value row is identical, and rejected
/// otherwise (two different values at one instant have no density).
class ObservationSet {
 public:
  /// values is row-major N x dim.
  ObservationSet(std::vector<double> times, std::vector<double> values, int dim)
      : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("ObservationSet: dim must be positive");
    if (times.size() * static_cast<std::size_t>(dim) != values.size()) {
      throw std::invalid_argument("ObservationSet: values size does not match times x dim");
    }
    times_.reserve(times.size());
    values_.reserve(values.size());
    for (std::size_t n = 0; n < times.size(); ++n) {
      if (!std::isfinite(times[n])) {
        throw std::invalid_argument("ObservationSet: non-finite time");
      }
      if (!times_.empty()) {
        if (times[n] < times_.back()) {
          throw std::invalid_argument("ObservationSet: times must be increasing");
        }
        if (times[n] == times_.back()) {
          const std::size_t prev = times_.size() - 1;
          for (int i = 0; i < dim; ++i) {
            if (values[n * dim + i] != values_[prev * dim + i]) {
              throw std::invalid_argument(
                  "ObservationSet: duplicate time " + std::to_string(times[n]) +
                  " with conflicting values");
            }
          }
          continue;  // identical duplicate row, collapse
        }
      }
      times_.push_back(times[n]);
      for (int i = 0; i < dim; ++i) values_.push_back(values[n * dim + i]);
    }
    if (times_.empty()) throw std::invalid_argument("ObservationSet: empty");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return times_.size(); }

  double time(std::size_t n) const { return times_[n]; }
  std::span<const double> times() const { return times_; }

  /// Row n as a span of dim values.
  std::span<const double> value(std::size_t n) const {
    return {values_.data() + n * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> values() const { return values_; }

 private:
  int dim_;
  std::vector<double> times_;
  std::vector<double> values_;  // row-major N x dim
};

}  // namespace pathweaver

#endif  // PATHWEAVER_OBSERVATIONS_HPP
