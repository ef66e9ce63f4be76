#ifndef PATHWEAVER_TEST_HELPERS_HPP
#define PATHWEAVER_TEST_HELPERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "pathweaver/numeric.hpp"

namespace pwtest {

/// Dense multivariate-normal log density via LDLT; the brute-force reference
/// for increment/base-density checks.
inline double dense_gaussian_log_density(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& mean,
                                         const Eigen::MatrixXd& cov) {
  const Eigen::Index n = x.size();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd diff = x - mean;
  const double quad = diff.dot(ldlt.solve(diff));
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(ldlt.vectorD()[i]);
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  return -0.5 * (static_cast<double>(n) * kLog2Pi + log_det + quad);
}

/// Conditional mean and covariance of the "rest" indices of a joint Gaussian
/// given the "given" indices pinned at y.
struct ConditionalGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline ConditionalGaussian condition_gaussian(const Eigen::VectorXd& mean,
                                              const Eigen::MatrixXd& cov,
                                              const std::vector<int>& given,
                                              const Eigen::VectorXd& y) {
  const Eigen::Index n = mean.size();
  std::vector<int> rest;
  for (int i = 0; i < n; ++i) {
    bool is_given = false;
    for (const int g : given) is_given = is_given || g == i;
    if (!is_given) rest.push_back(i);
  }
  const auto take = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            cov(rows[r], cols[c]);
      }
    }
    return out;
  };
  const Eigen::MatrixXd k_rr = take(rest, rest);
  const Eigen::MatrixXd k_rg = take(rest, given);
  const Eigen::MatrixXd k_gg = take(given, given);
  Eigen::VectorXd mu_r(rest.size());
  Eigen::VectorXd mu_g(given.size());
  for (std::size_t i = 0; i < rest.size(); ++i) mu_r[static_cast<Eigen::Index>(i)] = mean[rest[i]];
  for (std::size_t i = 0; i < given.size(); ++i) mu_g[static_cast<Eigen::Index>(i)] = mean[given[i]];

  const Eigen::MatrixXd gain = k_rg * k_gg.inverse();
  ConditionalGaussian out;
  out.mean = mu_r + gain * (y - mu_g);
  out.cov = k_rr - gain * k_rg.transpose();
  return out;
}

inline double mean_of(std::span<const double> v) {
  return pathweaver::sample_mean(v);
}

inline double variance_of(std::span<const double> v) {
  return pathweaver::sample_variance(v);
}

}  // namespace pwtest

#endif  // PATHWEAVER_TEST_HELPERS_HPP
