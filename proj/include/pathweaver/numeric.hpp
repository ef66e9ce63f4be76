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

#ifndef PATHWEAVER_NUMERIC_HPP
#define PATHWEAVER_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace pathweaver {

/// log(sum_i exp(v_i)) with max subtraction.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (const double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

/// log((1/K) sum_i exp(v_i)). For an all-zero vector this is exactly 0:
/// the shifted exponentials are exactly 1, their sum is the integer K, and
/// log(K/K) = log(1) = 0.
inline double log_mean_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (const double x : v) sum += std::exp(x - m);
  return m + std::log(sum / static_cast<double>(v.size()));
}

/// Summary of a vector of per-sample log-weights.
struct WeightStats {
  double log_mean_weight = 0.0;  ///< logmeanexp of the inputs
  double std_err_log = 0.0;      ///< delta-method standard error of log-mean
  double ess = 0.0;              ///< effective sample size in (0, K]
};

/// Computes logmeanexp, its delta-method standard error and the effective
/// sample size of log-weights. If weights_out is non-empty it receives the
/// self-normalized weights (softmax of the inputs).
inline WeightStats weight_stats(std::span<const double> log_weights,
                                std::span<double> weights_out = {}) {
  WeightStats out;
  const std::size_t k = log_weights.size();
  if (k == 0) {
    out.log_mean_weight = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(m)) {
    out.log_mean_weight = m;
    out.ess = 0.0;
    return out;
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const double s : log_weights) {
    const double u = std::exp(s - m);
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / static_cast<double>(k);
  out.log_mean_weight = m + std::log(mean);
  out.ess = (sum * sum) / sum_sq;
  if (k > 1) {
    double var = 0.0;
    for (const double s : log_weights) {
      const double d = std::exp(s - m) - mean;
      var += d * d;
    }
    var /= static_cast<double>(k - 1);
    out.std_err_log = std::sqrt(var / static_cast<double>(k)) / mean;
  }
  if (!weights_out.empty()) {
    for (std::size_t i = 0; i < k; ++i) {
      weights_out[i] = std::exp(log_weights[i] - m) / sum;
    }
  }
  return out;
}

/// Unbiased sample variance (denominator n-1); 0 for n < 2.
inline double sample_variance(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (const double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(n - 1);
}

inline double sample_mean(std::span<const double> v) {
  double mean = 0.0;
  for (const double x : v) mean += x;
  return v.empty() ? 0.0 : mean / static_cast<double>(v.size());
}

/// Gaussian log density log N(x; mean, var).
inline double gaussian_log_density(double x, double mean, double var) {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - d * d / (2.0 * var);
}

}  // namespace pathweaver

#endif  // PATHWEAVER_NUMERIC_HPP
