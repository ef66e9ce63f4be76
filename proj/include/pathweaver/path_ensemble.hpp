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

#ifndef PATHWEAVER_PATH_ENSEMBLE_HPP
#define PATHWEAVER_PATH_ENSEMBLE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pathweaver/rng.hpp"
#include "pathweaver/time_grid.hpp"

namespace pathweaver {

/// K sampled trajectories over a TimeGrid, stored value-major
/// (sample, node, dimension) for batched drift evaluation.
class PathEnsemble {
 public:
  PathEnsemble(TimeGrid grid, int sample_count, int dim, std::uint64_t seed,
               RngRole role)
      : grid_(std::move(grid)),
        dim_(dim),
        sample_count_(sample_count),
        values_(static_cast<std::size_t>(sample_count) * grid_.node_count() *
                static_cast<std::size_t>(dim)) {
    sample_seeds_.reserve(static_cast<std::size_t>(sample_count));
    for (int k = 0; k < sample_count; ++k) {
      sample_seeds_.push_back(
          RngKey{seed, static_cast<std::uint32_t>(k), 0, 0, role});
    }
  }

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  int sample_count() const { return sample_count_; }
  std::size_t node_count() const { return grid_.node_count(); }

  /// Counter-RNG key stubs, one per sample.
  std::span<const RngKey> sample_seeds() const { return sample_seeds_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Contiguous node_count x dim block of sample k.
  std::span<double> sample(int k) {
    const std::size_t stride = node_count() * static_cast<std::size_t>(dim_);
    return {values_.data() + static_cast<std::size_t>(k) * stride, stride};
  }
  std::span<const double> sample(int k) const {
    const std::size_t stride = node_count() * static_cast<std::size_t>(dim_);
    return {values_.data() + static_cast<std::size_t>(k) * stride, stride};
  }

  double value(int k, std::size_t node, int i) const {
    return values_[index(k, node, i)];
  }
  double& value(int k, std::size_t node, int i) { return values_[index(k, node, i)]; }

  std::size_t index(int k, std::size_t node, int i) const {
    return (static_cast<std::size_t>(k) * node_count() + node) *
               static_cast<std::size_t>(dim_) +
           static_cast<std::size_t>(i);
  }

 private:
  TimeGrid grid_;
  int dim_;
  int sample_count_;
  std::vector<double> values_;
  std::vector<RngKey> sample_seeds_;
};

}  // namespace pathweaver

#endif  // PATHWEAVER_PATH_ENSEMBLE_HPP
