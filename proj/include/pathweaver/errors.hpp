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

#ifndef PATHWEAVER_ERRORS_HPP
#define PATHWEAVER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pathweaver {

/// A probability estimate could not be produced (non-finite drift values,
/// degenerate importance weights). Carries the offending sample and grid
/// node when known (-1 otherwise).
class EstimationError : public std::runtime_error {
 public:
  EstimationError(const std::string& what, long sample = -1, long node = -1)
      : std::runtime_error(what), sample_(sample), node_(node) {}
  long sample() const { return sample_; }
  long node() const { return node_; }

 private:
  long sample_;
  long node_;
};

/// An integrated trajectory left the representable range. Carries the step
/// index at which the state first became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step, long sample = -1)
      : std::runtime_error(what), step_(step), sample_(sample) {}
  long step() const { return step_; }
  long sample() const { return sample_; }

 private:
  long step_;
  long sample_;
};

/// The two-endpoint Gram matrix of a bridge is singular.
class DegenerateBridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A change-of-variables Jacobian is singular where a density is needed.
class SingularJacobianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A normalized metric has a zero denominator.
class UndefinedMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration file parse failure, with the 1-based offending line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace pathweaver

#endif  // PATHWEAVER_ERRORS_HPP
