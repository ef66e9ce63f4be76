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

#ifndef PATHWEAVER_TIME_GRID_HPP
#define PATHWEAVER_TIME_GRID_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pathweaver/observations.hpp"

namespace pathweaver {

/// Partition of an observation window into integration steps.
///
/// Each inter-observation interval [t_n, t_{n+1}] is subdivided uniformly
/// into m_n = ceil((t_{n+1}-t_n)/dt_target) steps, so every observation time
/// is a grid node exactly (no rounding drift at the pins). Interior nodes are
/// t_n + j * (t_{n+1}-t_n)/m_n; boundary nodes are the observation times
/// themselves, bit for bit.
class TimeGrid {
 public:
  std::size_t node_count() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  double node(std::size_t j) const { return nodes_[j]; }

  std::size_t observation_count() const { return obs_node_.size(); }
  /// Grid node index holding observation n.
  std::size_t obs_node(std::size_t n) const { return obs_node_[n]; }

  std::size_t interval_count() const { return interval_dt_.size(); }
  /// Uniform step size inside inter-observation interval n.
  double interval_dt(std::size_t n) const { return interval_dt_[n]; }
  /// Number of steps inside inter-observation interval n.
  std::size_t steps_in_interval(std::size_t n) const { return interval_steps_[n]; }

  /// Inter-observation interval containing grid step j (the step from node j
  /// to node j+1).
  std::size_t interval_of_step(std::size_t j) const { return step_interval_[j]; }
  /// Step size of grid step j.
  double step_dt(std::size_t j) const { return interval_dt_[step_interval_[j]]; }

 private:
  friend TimeGrid build_grid(const ObservationSet& obs, double dt_target);

  std::vector<double> nodes_;
  std::vector<std::size_t> obs_node_;
  std::vector<double> interval_dt_;
  std::vector<std::size_t> interval_steps_;
  std::vector<std::uint32_t> step_interval_;  // size node_count()-1
};

/// Builds the integration grid covering all observation times.
inline TimeGrid build_grid(const ObservationSet& obs, double dt_target) {
  if (!(dt_target > 0.0)) {
    throw std::invalid_argument("build_grid: dt_target must be positive");
  }
  if (obs.size() < 2) {
    throw std::invalid_argument("build_grid: need at least two observations");
  }
  TimeGrid grid;
  const std::size_t n_obs = obs.size();
  grid.obs_node_.reserve(n_obs);
  grid.interval_dt_.reserve(n_obs - 1);
  grid.interval_steps_.reserve(n_obs - 1);

  grid.nodes_.push_back(obs.time(0));
  grid.obs_node_.push_back(0);
  for (std::size_t n = 0; n + 1 < n_obs; ++n) {
    const double t0 = obs.time(n);
    const double t1 = obs.time(n + 1);
    const double gap = t1 - t0;
    const std::size_t m =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(gap / dt_target)));
    const double dt = gap / static_cast<double>(m);
    for (std::size_t j = 1; j < m; ++j) {
      grid.nodes_.push_back(t0 + static_cast<double>(j) * dt);
    }
    grid.nodes_.push_back(t1);  // observation time, exact
    grid.obs_node_.push_back(grid.nodes_.size() - 1);
    grid.interval_dt_.push_back(dt);
    grid.interval_steps_.push_back(m);
    grid.step_interval_.insert(grid.step_interval_.end(), m,
                               static_cast<std::uint32_t>(n));
  }
  return grid;
}

}  // namespace pathweaver

#endif  // PATHWEAVER_TIME_GRID_HPP
