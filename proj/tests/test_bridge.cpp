#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "pathweaver/bridge.hpp"
#include "test_helpers.hpp"

using namespace pathweaver;

namespace {

ObservationSet two_point_obs(double t0, double y0, double t1, double y1) {
  return ObservationSet({t0, t1}, {y0, y1}, 1);
}

}  // namespace

TEST_CASE("brownian path starts at zero; single step is the raw draw") {
  const ObservationSet obs = two_point_obs(0.0, 0.0, 1.0, 0.0);
  const TimeGrid grid = build_grid(obs, 1.0);  // one step
  const auto sigma = DiffusionSchedule::scalar_constant(1.0, 1);
  const std::uint64_t seed = 31;
  const auto path = sample_brownian(grid, sigma, seed, 4);
  REQUIRE(path.size() == 2);
  CHECK(path[0] == 0.0);
  const double z = normal_draw(RngKey{seed, 4, 0, 0, RngRole::bridge_increment});
  CHECK(path[1] == z);  // sqrt(1*1) * z exactly
}

TEST_CASE("tiny diffusion keeps the path within 1e-6") {
  const ObservationSet obs = two_point_obs(0.0, 0.0, 1.0, 0.0);
  const TimeGrid grid = build_grid(obs, 0.01);
  const auto sigma = DiffusionSchedule::scalar_constant(1e-8, 1);
  for (int k = 0; k < 100; ++k) {
    const auto path = sample_brownian(grid, sigma, 77, k);
    for (const double v : path) REQUIRE(std::abs(v) <= 1e-6);
  }
}

TEST_CASE("terminal variance matches sigma^2 * horizon") {
  const ObservationSet obs = two_point_obs(0.0, 0.0, 1.0, 0.0);
  const TimeGrid grid = build_grid(obs, 0.05);
  const auto sigma = DiffusionSchedule::scalar_constant(2.0, 1);
  const int n = 100'000;
  std::vector<double> endpoints(n);
  for (int k = 0; k < n; ++k) {
    const auto path = sample_brownian(grid, sigma, 5150, k);
    endpoints[static_cast<std::size_t>(k)] = path.back();
  }
  const double var = pwtest::variance_of(endpoints);
  CHECK(std::abs(var - 4.0) < 0.06);
}

TEST_CASE("min-kernel conditioning reduces to the t/T formula") {
  const ObservationSet obs = two_point_obs(0.0, 0.0, 1.0, 0.0);
  const TimeGrid grid = build_grid(obs, 0.1);
  const auto sigma = DiffusionSchedule::scalar_constant(1.3, 1);
  const auto path = sample_brownian(grid, sigma, 99, 0);
  const std::vector<double> y0 = {0.0};
  const std::vector<double> yT = {2.0};
  const auto bridged =
      condition_two_point(grid.nodes(), path, 1, brownian_kernel(1.3), y0, yT);
  const double horizon = grid.nodes().back();
  for (std::size_t j = 0; j < grid.node_count(); ++j) {
    const double expected =
        path[j] + grid.node(j) / horizon * (yT[0] - path.back());
    CHECK(std::abs(bridged[j] - expected) <= 1e-12);
  }
  CHECK(bridged.front() == 0.0);
  CHECK(bridged.back() == 2.0);
}

TEST_CASE("conditioning on the path's own endpoints is the identity") {
  const std::vector<double> times = {0.5, 0.75, 1.0, 1.5};
  const std::vector<double> path = {0.1, -0.4, 0.9, 0.3};
  // Offset kernel: nondegenerate at every node.
  const KernelFn kernel = [](double s, double t) { return 1.0 + std::min(s, t); };
  const std::vector<double> y0 = {path.front()};
  const std::vector<double> yT = {path.back()};
  const auto out = condition_two_point(times, path, 1, kernel, y0, yT);
  for (std::size_t j = 0; j < times.size(); ++j) CHECK(out[j] == path[j]);
}

TEST_CASE("singular endpoint Gram matrix raises the degenerate-bridge error") {
  const std::vector<double> times = {0.0, 0.5, 1.0};
  const std::vector<double> path = {0.0, 0.0, 0.0};
  // Constant kernel: perfectly correlated endpoints, det == 0, k(t0,t0) != 0.
  const KernelFn constant_kernel = [](double, double) { return 1.0; };
  CHECK_THROWS_AS(condition_two_point(times, path, 1, constant_kernel,
                                      std::vector<double>{0.0},
                                      std::vector<double>{1.0}),
                  DegenerateBridgeError);
}

TEST_CASE("three-node conditioning matches the dense Gaussian oracle") {
  // Proper realizations of a Gauss-Markov process with kernel 1 + min(s,t):
  // Y_t = Z + W_t with Z ~ N(0,1) independent of the Brownian W.
  const std::vector<double> times = {0.0, 0.4, 1.0};
  const KernelFn kernel = [](double s, double t) { return 1.0 + std::min(s, t); };
  const std::vector<double> y0 = {0.3};
  const std::vector<double> yT = {1.2};

  const ObservationSet carrier = two_point_obs(0.0, 0.0, 1.0, 0.0);
  std::vector<double> grid_times = {0.0, 0.4, 1.0};
  const int n = 100'000;
  std::vector<double> mids(n);
  const std::uint64_t seed = 2024;
  for (int k = 0; k < n; ++k) {
    const double z =
        normal_draw(RngKey{seed, static_cast<std::uint32_t>(k), 1000, 0,
                           RngRole::dataset});
    const double w1 = normal_draw(RngKey{seed, static_cast<std::uint32_t>(k), 0, 0,
                                         RngRole::dataset}) *
                      std::sqrt(0.4);
    const double w2 = normal_draw(RngKey{seed, static_cast<std::uint32_t>(k), 1, 0,
                                         RngRole::dataset}) *
                      std::sqrt(0.6);
    const std::vector<double> path = {z, z + w1, z + w1 + w2};
    const auto bridged = condition_two_point(grid_times, path, 1, kernel, y0, yT);
    mids[static_cast<std::size_t>(k)] = bridged[1];
  }

  Eigen::MatrixXd cov(3, 3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) cov(a, b) = kernel(grid_times[a], grid_times[b]);
  }
  Eigen::VectorXd y(2);
  y << y0[0], yT[0];
  const auto cond = pwtest::condition_gaussian(Eigen::VectorXd::Zero(3), cov,
                                               {0, 2}, y);
  const double se_mean = std::sqrt(cond.cov(0, 0) / n);
  const double se_var = cond.cov(0, 0) * std::sqrt(2.0 / (n - 1));
  CHECK(std::abs(pwtest::mean_of(mids) - cond.mean[0]) < 3.0 * se_mean);
  CHECK(std::abs(pwtest::variance_of(mids) - cond.cov(0, 0)) < 3.0 * se_var);
}

TEST_CASE("bridge ensembles pass exactly through every observation") {
  const ObservationSet obs({0.0, 0.7, 1.3, 2.0},
                           {0.1, -0.2, 1.5, 0.4, -0.9, 2.2, 0.0, 0.05}, 2);
  const TimeGrid grid = build_grid(obs, 0.13);
  const auto sigma = DiffusionSchedule::scalar_constant(0.8, 2);
  const auto ensemble = sample_bridge_ensemble(obs, grid, sigma, 3, 5, 0);
  for (int k = 0; k < 3; ++k) {
    for (std::size_t n = 0; n < obs.size(); ++n) {
      const std::size_t g = grid.obs_node(n);
      for (int i = 0; i < 2; ++i) {
        REQUIRE(ensemble.value(k, g, i) == obs.value(n)[i]);
      }
    }
  }
}

TEST_CASE("bridge midpoint variance is t(T-t)/T") {
  const ObservationSet obs = two_point_obs(0.0, 0.0, 1.0, 0.0);
  const TimeGrid grid = build_grid(obs, 0.25);
  const auto sigma = DiffusionSchedule::scalar_constant(1.0, 1);
  const int n = 100'000;
  const auto ensemble = sample_bridge_ensemble(obs, grid, sigma, n, 616, 0);
  std::vector<double> mids(n);
  for (int k = 0; k < n; ++k) mids[static_cast<std::size_t>(k)] = ensemble.value(k, 2, 0);
  const double expected = 0.5 * (1.0 - 0.5) / 1.0;
  const double se_var = expected * std::sqrt(2.0 / (n - 1));
  CHECK(std::abs(pwtest::variance_of(mids) - expected) < 3.0 * se_var);
}

TEST_CASE("bridge ensemble mean interpolates the observations linearly") {
  const ObservationSet obs({0.0, 1.0, 1.8}, {0.0, 2.0, -1.0}, 1);
  const TimeGrid grid = build_grid(obs, 0.2);
  const auto sigma = DiffusionSchedule::scalar_constant(1.0, 1);
  const int n = 100'000;
  const auto ensemble = sample_bridge_ensemble(obs, grid, sigma, n, 909, 0);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < grid.node_count(); ++j) {
    for (int k = 0; k < n; ++k) column[static_cast<std::size_t>(k)] = ensemble.value(k, j, 0);
    // Piecewise-linear interpolation of the pins at node time.
    const double t = grid.node(j);
    double expected = 0.0;
    for (std::size_t seg = 0; seg + 1 < obs.size(); ++seg) {
      if (t >= obs.time(seg) && t <= obs.time(seg + 1)) {
        const double c = (t - obs.time(seg)) / (obs.time(seg + 1) - obs.time(seg));
        expected = obs.value(seg)[0] + c * (obs.value(seg + 1)[0] - obs.value(seg)[0]);
        break;
      }
    }
    const double sd = std::sqrt(std::max(pwtest::variance_of(column), 1e-30));
    CHECK(std::abs(pwtest::mean_of(column) - expected) <=
          3.0 * sd / std::sqrt(static_cast<double>(n)) + 1e-12);
  }
}

TEST_CASE("interval-wise bridging matches global conditioning (Markov property)") {
  // Ensemble through three pins vs the dense conditional law of Brownian
  // motion given those pins, checked at an interior node of each interval.
  const ObservationSet obs({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}, 1);
  const TimeGrid grid = build_grid(obs, 0.5);
  const auto sigma = DiffusionSchedule::scalar_constant(1.0, 1);
  const int n = 100'000;
  const auto ensemble = sample_bridge_ensemble(obs, grid, sigma, n, 4242, 0);

  // Joint covariance of BM at (0.5, 1.0, 1.5, 2.0) pinned at start 0; the
  // value at time 0 is the sure start so it drops out of the joint.
  const std::vector<double> joint_times = {0.5, 1.0, 1.5, 2.0};
  Eigen::MatrixXd cov(4, 4);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      cov(a, b) = std::min(joint_times[static_cast<std::size_t>(a)],
                           joint_times[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::VectorXd pins(2);
  pins << 1.0, 0.0;  // values at times 1.0 and 2.0
  const auto cond =
      pwtest::condition_gaussian(Eigen::VectorXd::Zero(4), cov, {1, 3}, pins);

  // Interior nodes at 0.5 and 1.5 are grid nodes 1 and 3.
  for (const auto [node, idx] : {std::pair<std::size_t, int>{1, 0}, {3, 1}}) {
    std::vector<double> vals(n);
    for (int k = 0; k < n; ++k) vals[static_cast<std::size_t>(k)] = ensemble.value(k, node, 0);
    const double var_expected = cond.cov(idx, idx);
    const double se_mean = std::sqrt(var_expected / n);
    const double se_var = var_expected * std::sqrt(2.0 / (n - 1));
    CHECK(std::abs(pwtest::mean_of(vals) - cond.mean[idx]) < 3.0 * se_mean);
    CHECK(std::abs(pwtest::variance_of(vals) - var_expected) < 3.0 * se_var);
  }
}

TEST_CASE("bridge ensembles are bit-identical across worker counts") {
  const ObservationSet obs({0.0, 0.9, 2.0, 3.1}, {0.0, 1.0, -0.5, 0.2}, 1);
  const TimeGrid grid = build_grid(obs, 0.05);
  const auto sigma = DiffusionSchedule::scalar_constant(1.0, 1);
  const auto base = sample_bridge_ensemble(obs, grid, sigma, 33, 11, 1);
  for (const int workers : {2, 4}) {
    const auto other = sample_bridge_ensemble(obs, grid, sigma, 33, 11, workers);
    REQUIRE(other.values().size() == base.values().size());
    REQUIRE(std::memcmp(other.values().data(), base.values().data(),
                        base.values().size() * sizeof(double)) == 0);
  }
}

TEST_CASE("piecewise diffusion schedules scale each interval's increments") {
  const ObservationSet obs({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, 1);
  const TimeGrid grid = build_grid(obs, 0.5);
  const auto sigma = DiffusionSchedule::diagonal_piecewise({0.5, 2.0}, 2, 1);
  const int n = 50'000;
  const auto ensemble = sample_bridge_ensemble(obs, grid, sigma, n, 77, 0);
  // Midpoint variance of a pinned bridge over [t0,t1] is sigma^2 * gap / 4.
  std::vector<double> first(n), second(n);
  for (int k = 0; k < n; ++k) {
    first[static_cast<std::size_t>(k)] = ensemble.value(k, 1, 0);
    second[static_cast<std::size_t>(k)] = ensemble.value(k, 3, 0);
  }
  const double v1 = 0.25 * 0.25;
  const double v2 = 4.0 * 0.25;
  CHECK(std::abs(pwtest::variance_of(first) - v1) < 3.0 * v1 * std::sqrt(2.0 / n));
  CHECK(std::abs(pwtest::variance_of(second) - v2) < 3.0 * v2 * std::sqrt(2.0 / n));
}

TEST_CASE("log_base_density closed-form examples") {
  const auto sigma1 = DiffusionSchedule::scalar_constant(1.0, 1);
  const double lp1 = log_base_density(two_point_obs(0.0, 0.0, 1.0, 0.0), sigma1);
  CHECK(lp1 == Catch::Approx(-0.9189385332046727).epsilon(1e-12));

  const auto sigma2 = DiffusionSchedule::scalar_constant(2.0, 1);
  const double lp2 = log_base_density(two_point_obs(0.0, 0.0, 4.0, 2.0), sigma2);
  // log N(2; 0, 16) = -log(32 pi)/2 - 4/32
  const double expected = -0.5 * std::log(32.0 * std::numbers::pi) - 0.125;
  CHECK(lp2 == Catch::Approx(expected).epsilon(1e-12));
  CHECK(lp2 == Catch::Approx(-2.4302328943245635).epsilon(1e-10));
}

TEST_CASE("log_base_density equals the dense Gaussian oracle on small sets") {
  const std::uint64_t seed = 31337;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n_obs = 3 + static_cast<std::size_t>(trial % 4);
    std::vector<double> times;
    std::vector<double> values;
    double t = 0.25 * trial;
    for (std::size_t n = 0; n < n_obs; ++n) {
      times.push_back(t);
      values.push_back(normal_draw(RngKey{seed, static_cast<std::uint32_t>(trial),
                                          static_cast<std::uint32_t>(n), 0,
                                          RngRole::dataset}));
      t += 0.3 + 0.2 * static_cast<double>(n % 3);
    }
    const ObservationSet obs(times, values, 1);
    const double s = 0.7 + 0.3 * trial;
    const auto sigma = DiffusionSchedule::scalar_constant(s, 1);

    // Brownian motion from (t_1, x_1): mean x_1, Cov = s^2 (min(t_a,t_b)-t_1).
    const Eigen::Index m = static_cast<Eigen::Index>(n_obs) - 1;
    Eigen::MatrixXd cov(m, m);
    Eigen::VectorXd mean(m);
    Eigen::VectorXd x(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      mean[a] = values[0];
      x[a] = values[static_cast<std::size_t>(a) + 1];
      for (Eigen::Index b = 0; b < m; ++b) {
        cov(a, b) = s * s *
                    (std::min(times[static_cast<std::size_t>(a) + 1],
                              times[static_cast<std::size_t>(b) + 1]) -
                     times[0]);
      }
    }
    const double oracle = pwtest::dense_gaussian_log_density(x, mean, cov);
    CHECK(std::abs(log_base_density(obs, sigma) - oracle) <= 1e-10);
  }
}
