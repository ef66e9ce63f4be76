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

#ifndef PATHWEAVER_NN_HPP
#define PATHWEAVER_NN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathweaver/drift.hpp"
#include "pathweaver/rng.hpp"

namespace pathweaver {

/// Fully connected ReLU network shape. layer_sizes includes the input width;
/// for drift use the last size is the state dimension and the first is the
/// state dimension plus one when time_input is set (time concatenated to the
/// state). Default is an autonomous field (no time input).
struct MlpSpec {
  std::vector<int> layer_sizes;
  bool time_input = false;
  std::uint64_t init_seed = 0;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }

  int param_count() const {
    int count = 0;
    for (int l = 0; l < layer_count(); ++l) {
      count += layer_sizes[l + 1] * layer_sizes[l] + layer_sizes[l + 1];
    }
    return count;
  }

  void validate() const {
    if (layer_sizes.size() < 2) {
      throw std::invalid_argument("MlpSpec: need at least input and output sizes");
    }
    for (const int s : layer_sizes) {
      if (s <= 0) throw std::invalid_argument("MlpSpec: layer sizes must be positive");
    }
  }
};

/// He-uniform weights (U[-sqrt(6/fan_in), +sqrt(6/fan_in)]), zero biases.
/// Deterministic function of the init seed via the counter RNG.
inline std::vector<double> init_mlp_params(const MlpSpec& spec) {
  spec.validate();
  std::vector<double> params(static_cast<std::size_t>(spec.param_count()));
  std::size_t offset = 0;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    const std::size_t n_weights =
        static_cast<std::size_t>(fan_out) * static_cast<std::size_t>(fan_in);
    for (std::size_t j = 0; j < n_weights; ++j) {
      const double u = uniform_draw(RngKey{spec.init_seed,
                                           static_cast<std::uint32_t>(l),
                                           static_cast<std::uint32_t>(j), 0,
                                           RngRole::parameter_init});
      params[offset + j] = (2.0 * u - 1.0) * limit;
    }
    offset += n_weights;
    for (int j = 0; j < fan_out; ++j) params[offset + static_cast<std::size_t>(j)] = 0.0;
    offset += static_cast<std::size_t>(fan_out);
  }
  return params;
}

/// Multilayer perceptron drift field with exact reverse-mode parameter
/// pullback, input VJP and forward-mode input JVP. ReLU' at 0 is 0.
class MlpDrift final : public DriftField {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstMap = Eigen::Map<const RowMat>;
  using MutableMap = Eigen::Map<RowMat>;

 public:
  explicit MlpDrift(MlpSpec spec)
      : MlpDrift(std::move(spec), {}) {
    params_ = init_mlp_params(spec_);
  }

  MlpDrift(MlpSpec spec, std::vector<double> params)
      : spec_(std::move(spec)), params_(std::move(params)) {
    spec_.validate();
    const int d = spec_.output_size();
    const int expected_in = spec_.time_input ? d + 1 : d;
    if (spec_.input_size() != expected_in) {
      throw std::invalid_argument("MlpDrift: input size must match state dimension");
    }
    if (!params_.empty() &&
        params_.size() != static_cast<std::size_t>(spec_.param_count())) {
      throw std::invalid_argument("MlpDrift: parameter vector size mismatch");
    }
    layer_offsets_.resize(static_cast<std::size_t>(spec_.layer_count()));
    std::size_t offset = 0;
    for (int l = 0; l < spec_.layer_count(); ++l) {
      layer_offsets_[static_cast<std::size_t>(l)] = offset;
      offset += static_cast<std::size_t>(spec_.layer_sizes[l + 1]) *
                    static_cast<std::size_t>(spec_.layer_sizes[l]) +
                static_cast<std::size_t>(spec_.layer_sizes[l + 1]);
    }
  }

  const MlpSpec& spec() const { return spec_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  void set_params(std::span<const double> p) {
    if (p.size() != params_.size()) {
      throw std::invalid_argument("MlpDrift: parameter vector size mismatch");
    }
    std::copy(p.begin(), p.end(), params_.begin());
  }

  int dim() const override { return spec_.output_size(); }
  int param_count() const override { return spec_.param_count(); }

  void eval(std::span<const double> x, double t, std::span<double> out) const override {
    eval_batch(x, std::span<const double>(&t, 1), out);
  }

  void eval_batch(std::span<const double> X, std::span<const double> t,
                  std::span<double> out) const override {
    const Eigen::Index m = static_cast<Eigen::Index>(t.size());
    RowMat a = input_matrix(X, t);
    for (int l = 0; l < spec_.layer_count(); ++l) {
      RowMat z = (a * weight(l).transpose()).rowwise() + bias(l);
      if (l + 1 < spec_.layer_count()) {
        a = z.cwiseMax(0.0);
      } else {
        a = std::move(z);
      }
    }
    MutableMap(out.data(), m, dim()) = a;
  }

  void pullback(std::span<const double> X, std::span<const double> t,
                std::span<const double> cotangents,
                std::span<double> grad) const override {
    backward(X, t, cotangents, {}, grad);
  }

  void input_vjp(std::span<const double> X, std::span<const double> t,
                 std::span<const double> cotangents,
                 std::span<double> out) const override {
    backward(X, t, cotangents, out, {});
  }

  void vjp(std::span<const double> X, std::span<const double> t,
           std::span<const double> cotangents, std::span<double> input_vjp_out,
           std::span<double> grad) const override {
    backward(X, t, cotangents, input_vjp_out, grad);
  }

  void input_jvp(std::span<const double> x, double t,
                 std::span<const double> tangent,
                 std::span<double> out) const override {
    const int layers = spec_.layer_count();
    Eigen::VectorXd a(spec_.input_size());
    Eigen::VectorXd v(spec_.input_size());
    for (int i = 0; i < dim(); ++i) {
      a[i] = x[static_cast<std::size_t>(i)];
      v[i] = tangent[static_cast<std::size_t>(i)];
    }
    if (spec_.time_input) {
      a[dim()] = t;
      v[dim()] = 0.0;  // tangent is with respect to the state only
    }
    for (int l = 0; l < layers; ++l) {
      Eigen::VectorXd z = weight(l) * a + bias(l).transpose();
      Eigen::VectorXd vz = weight(l) * v;
      if (l + 1 < layers) {
        a = z.cwiseMax(0.0);
        v = vz.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
      } else {
        a = std::move(z);
        v = std::move(vz);
      }
    }
    for (int i = 0; i < dim(); ++i) out[static_cast<std::size_t>(i)] = v[i];
  }

 private:
  Eigen::Map<const RowMat> weight(int l) const {
    return {params_.data() + layer_offsets_[static_cast<std::size_t>(l)],
            spec_.layer_sizes[l + 1], spec_.layer_sizes[l]};
  }
  Eigen::Map<const Eigen::RowVectorXd> bias(int l) const {
    const std::size_t w_size = static_cast<std::size_t>(spec_.layer_sizes[l + 1]) *
                               static_cast<std::size_t>(spec_.layer_sizes[l]);
    return {params_.data() + layer_offsets_[static_cast<std::size_t>(l)] + w_size,
            spec_.layer_sizes[l + 1]};
  }

  RowMat input_matrix(std::span<const double> X, std::span<const double> t) const {
    const Eigen::Index m = static_cast<Eigen::Index>(t.size());
    if (!spec_.time_input) {
      return ConstMap(X.data(), m, dim());
    }
    RowMat a(m, dim() + 1);
    a.leftCols(dim()) = ConstMap(X.data(), m, dim());
    for (Eigen::Index r = 0; r < m; ++r) a(r, dim()) = t[static_cast<std::size_t>(r)];
    return a;
  }

  // Shared reverse pass: recomputes the forward activations, then pushes the
  // cotangent rows back through the layers. Parameter gradients accumulate
  // into grad; the input VJP (state part only) lands in input_vjp_out.
  void backward(std::span<const double> X, std::span<const double> t,
                std::span<const double> cotangents, std::span<double> input_vjp_out,
                std::span<double> grad) const {
    const Eigen::Index m = static_cast<Eigen::Index>(t.size());
    const int layers = spec_.layer_count();
    std::vector<RowMat> acts;  // acts[l] is the input to layer l
    acts.reserve(static_cast<std::size_t>(layers));
    acts.push_back(input_matrix(X, t));
    for (int l = 0; l + 1 < layers; ++l) {
      acts.push_back(((acts.back() * weight(l).transpose()).rowwise() + bias(l))
                         .cwiseMax(0.0));
    }

    RowMat delta = ConstMap(cotangents.data(), m, dim());
    for (int l = layers - 1; l >= 0; --l) {
      if (!grad.empty()) {
        const std::size_t off = layer_offsets_[static_cast<std::size_t>(l)];
        const std::size_t w_size = static_cast<std::size_t>(spec_.layer_sizes[l + 1]) *
                                   static_cast<std::size_t>(spec_.layer_sizes[l]);
        MutableMap g_w(grad.data() + off, spec_.layer_sizes[l + 1], spec_.layer_sizes[l]);
        Eigen::Map<Eigen::RowVectorXd> g_b(grad.data() + off + w_size,
                                           spec_.layer_sizes[l + 1]);
        g_w.noalias() += delta.transpose() * acts[static_cast<std::size_t>(l)];
        g_b += delta.colwise().sum();
      }
      if (l == 0 && input_vjp_out.empty()) break;
      RowMat prev = delta * weight(l);
      if (l > 0) {
        // acts[l] is post-ReLU; positive entries mark active units.
        delta = prev.cwiseProduct(
            (acts[static_cast<std::size_t>(l)].array() > 0.0).cast<double>().matrix());
      } else {
        MutableMap(input_vjp_out.data(), m, dim()) = prev.leftCols(dim());
      }
    }
  }

  MlpSpec spec_;
  std::vector<double> params_;
  std::vector<std::size_t> layer_offsets_;
};

/// Adam optimizer state; moments are allocated on first use.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

/// One Adam update with bias correction, in place. A non-finite gradient
/// rejects the step: parameters and state are left untouched and false is
/// returned so the caller can log and continue.
inline bool adam_step(AdamState& state, std::span<double> params,
                      std::span<const double> grad) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  for (const double g : grad) {
    if (!std::isfinite(g)) return false;
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  } else if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state shape mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double m_corr = 1.0 - std::pow(state.beta1, t);
  const double v_corr = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / m_corr;
    const double v_hat = state.v[i] / v_corr;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
  return true;
}

// Checkpoint byte layout (little-endian):
//   [0,8)    magic "PWMLP001"
//   [8,12)   u32 layer count L (number of size entries is L+1)
//   [12,16)  u32 time_input flag
//   [16,24)  u64 init seed
//   [24,32)  u64 optimizer step count
//   [32,..)  u32 layer_sizes[L+1]
//   then     f64 params[param_count]
inline void save_checkpoint(const std::string& path, const MlpSpec& spec,
                            std::span<const double> params, std::uint64_t step) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  const char magic[8] = {'P', 'W', 'M', 'L', 'P', '0', '0', '1'};
  os.write(magic, 8);
  const std::uint32_t layers = static_cast<std::uint32_t>(spec.layer_count());
  const std::uint32_t time_input = spec.time_input ? 1u : 0u;
  os.write(reinterpret_cast<const char*>(&layers), 4);
  os.write(reinterpret_cast<const char*>(&time_input), 4);
  os.write(reinterpret_cast<const char*>(&spec.init_seed), 8);
  os.write(reinterpret_cast<const char*>(&step), 8);
  for (const int s : spec.layer_sizes) {
    const std::uint32_t v = static_cast<std::uint32_t>(s);
    os.write(reinterpret_cast<const char*>(&v), 4);
  }
  os.write(reinterpret_cast<const char*>(params.data()),
           static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed: " + path);
}

struct Checkpoint {
  MlpSpec spec;
  std::vector<double> params;
  std::uint64_t step = 0;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "PWMLP001", 8) != 0) {
    throw std::runtime_error("bad checkpoint magic: " + path);
  }
  std::uint32_t layers = 0;
  std::uint32_t time_input = 0;
  Checkpoint out;
  is.read(reinterpret_cast<char*>(&layers), 4);
  is.read(reinterpret_cast<char*>(&time_input), 4);
  is.read(reinterpret_cast<char*>(&out.spec.init_seed), 8);
  is.read(reinterpret_cast<char*>(&out.step), 8);
  out.spec.time_input = time_input != 0;
  out.spec.layer_sizes.resize(layers + 1);
  for (std::uint32_t l = 0; l <= layers; ++l) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    out.spec.layer_sizes[l] = static_cast<int>(v);
  }
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  out.spec.validate();
  out.params.resize(static_cast<std::size_t>(out.spec.param_count()));
  is.read(reinterpret_cast<char*>(out.params.data()),
          static_cast<std::streamsize>(out.params.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  return out;
}

}  // namespace pathweaver

#endif  // PATHWEAVER_NN_HPP
