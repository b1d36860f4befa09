// Copyright 2026-present the prk project
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
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prk/common.hpp"
#include "prk/rng.hpp"

namespace prk {

struct AffineLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  //!< row-major, out x in
  std::vector<double> bias;    //!< out

  double& w(std::size_t r, std::size_t c) { return weight[r * in + c]; }
  double w(std::size_t r, std::size_t c) const { return weight[r * in + c]; }
};

//! Per-layer parameter gradients plus the gradient w.r.t. the input.
struct HeadGradients {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;
  std::vector<double> input;
};

//! Forward-pass intermediates needed by backward().
struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;  //!< affine outputs per layer
  std::vector<std::vector<double>> act;  //!< after the nonlinearity
};

/*! Three affine layers with rectifiers between them; the last layer is
 * left unbounded because targets are raw embedding values. Maps a
 * knowledge-embedding input to a phrase embedding.
 */
class PhraseHead {
 public:
  static constexpr std::size_t kLayers = 3;

  PhraseHead(std::size_t input_dim, std::size_t hidden1, std::size_t hidden2,
             std::size_t output_dim) {
    ensure(input_dim > 0 && hidden1 > 0 && hidden2 > 0 && output_dim > 0,
           "phrase head: all widths must be positive");
    std::size_t dims[kLayers + 1] = {input_dim, hidden1, hidden2, output_dim};
    for (std::size_t l = 0; l < kLayers; ++l) {
      AffineLayer layer;
      layer.in = dims[l];
      layer.out = dims[l + 1];
      layer.weight.assign(layer.out * layer.in, 0.0);
      layer.bias.assign(layer.out, 0.0);
      layers_[l] = std::move(layer);
    }
  }

  //! Zero biases, weights ~ N(0, 2/fan_in); the usual rectifier scaling.
  static PhraseHead he_init(std::size_t input_dim, std::size_t hidden1,
                            std::size_t hidden2, std::size_t output_dim,
                            Rng& rng) {
    PhraseHead head(input_dim, hidden1, hidden2, output_dim);
    for (AffineLayer& layer : head.layers_) {
      double scale = std::sqrt(2.0 / static_cast<double>(layer.in));
      for (double& w : layer.weight) {
        w = scale * rng.normal();
      }
    }
    return head;
  }

  std::size_t input_dim() const { return layers_[0].in; }
  std::size_t output_dim() const { return layers_[kLayers - 1].out; }

  AffineLayer& layer(std::size_t i) { return layers_.at(i); }
  const AffineLayer& layer(std::size_t i) const { return layers_.at(i); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const AffineLayer& l : layers_) {
      n += l.weight.size() + l.bias.size();
    }
    return n;
  }

  bool finite() const {
    for (const AffineLayer& l : layers_) {
      for (double w : l.weight) {
        if (!std::isfinite(w)) return false;
      }
      for (double b : l.bias) {
        if (!std::isfinite(b)) return false;
      }
    }
    return true;
  }

  std::vector<double> forward(std::span<const double> x) const {
    ForwardCache cache;
    return forward(x, cache);
  }

  std::vector<double> forward(std::span<const double> x,
                              ForwardCache& cache) const {
    ensure(x.size() == input_dim(), "phrase head: input dimension mismatch");
    cache.input.assign(x.begin(), x.end());
    cache.pre.assign(kLayers, {});
    cache.act.assign(kLayers, {});
    std::vector<double> cur = cache.input;
    for (std::size_t l = 0; l < kLayers; ++l) {
      const AffineLayer& layer = layers_[l];
      std::vector<double> z(layer.out);
      for (std::size_t r = 0; r < layer.out; ++r) {
        double acc = layer.bias[r];
        const double* row = layer.weight.data() + r * layer.in;
        for (std::size_t c = 0; c < layer.in; ++c) {
          acc += row[c] * cur[c];
        }
        ensure(std::isfinite(acc), "phrase head: non-finite activation at "
                                   "layer " + std::to_string(l));
        z[r] = acc;
      }
      cache.pre[l] = z;
      if (l + 1 < kLayers) {
        for (double& v : z) {
          v = v > 0.0 ? v : 0.0;
        }
      }
      cache.act[l] = z;
      cur = std::move(z);
    }
    return cur;
  }

  /*! Backpropagate `grad_output` (dL/dy) through the cached forward pass.
   * The rectifier uses subgradient 0 at exactly zero.
   */
  HeadGradients backward(const ForwardCache& cache,
                         std::span<const double> grad_output) const {
    ensure(cache.pre.size() == kLayers && cache.act.size() == kLayers,
           "phrase head: cache does not match a forward pass");
    ensure(grad_output.size() == output_dim(),
           "phrase head: output gradient dimension mismatch");
    HeadGradients grads;
    grads.weight.resize(kLayers);
    grads.bias.resize(kLayers);
    std::vector<double> delta(grad_output.begin(), grad_output.end());
    for (std::size_t li = kLayers; li-- > 0;) {
      const AffineLayer& layer = layers_[li];
      const std::vector<double>& below =
          li == 0 ? cache.input : cache.act[li - 1];
      ensure(below.size() == layer.in && delta.size() == layer.out,
             "phrase head: cache dimension mismatch at layer " +
                 std::to_string(li));
      grads.weight[li].assign(layer.out * layer.in, 0.0);
      grads.bias[li] = delta;
      for (std::size_t r = 0; r < layer.out; ++r) {
        double* grow = grads.weight[li].data() + r * layer.in;
        for (std::size_t c = 0; c < layer.in; ++c) {
          grow[c] = delta[r] * below[c];
        }
      }
      std::vector<double> prev(layer.in, 0.0);
      for (std::size_t r = 0; r < layer.out; ++r) {
        const double* row = layer.weight.data() + r * layer.in;
        for (std::size_t c = 0; c < layer.in; ++c) {
          prev[c] += row[c] * delta[r];
        }
      }
      if (li > 0) {
        for (std::size_t c = 0; c < layer.in; ++c) {
          if (cache.pre[li - 1][c] <= 0.0) {
            prev[c] = 0.0;
          }
        }
      }
      delta = std::move(prev);
    }
    grads.input = std::move(delta);
    return grads;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["input_dim"] = input_dim();
    j["layers"] = nlohmann::ordered_json::array();
    for (const AffineLayer& l : layers_) {
      nlohmann::ordered_json lj;
      lj["in"] = l.in;
      lj["out"] = l.out;
      lj["weight"] = l.weight;
      lj["bias"] = l.bias;
      j["layers"].push_back(std::move(lj));
    }
    return j;
  }

  static PhraseHead from_json(const nlohmann::json& j) {
    ensure(j.contains("layers") && j["layers"].is_array() &&
               j["layers"].size() == kLayers,
           "phrase head: expected exactly 3 layers in serialized form");
    std::size_t dims[kLayers + 1] = {};
    dims[0] = j.at("input_dim").get<std::size_t>();
    for (std::size_t l = 0; l < kLayers; ++l) {
      dims[l + 1] = j["layers"][l].at("out").get<std::size_t>();
    }
    PhraseHead head(dims[0], dims[1], dims[2], dims[3]);
    for (std::size_t l = 0; l < kLayers; ++l) {
      const auto& lj = j["layers"][l];
      AffineLayer& layer = head.layers_[l];
      ensure(lj.at("in").get<std::size_t>() == layer.in,
             "phrase head: serialized layer widths disagree");
      layer.weight = lj.at("weight").get<std::vector<double>>();
      layer.bias = lj.at("bias").get<std::vector<double>>();
      ensure(layer.weight.size() == layer.out * layer.in &&
                 layer.bias.size() == layer.out,
             "phrase head: serialized parameter count mismatch");
    }
    ensure(head.finite(), "phrase head: non-finite serialized parameters");
    return head;
  }

 private:
  std::array<AffineLayer, kLayers> layers_;
};

//! Accumulate `g` into `acc`, resizing empty slots on first use.
inline void accumulate_gradients(HeadGradients& acc, const HeadGradients& g) {
  if (acc.weight.empty()) {
    acc = g;
    return;
  }
  ensure(acc.weight.size() == g.weight.size(),
         "accumulate_gradients: layer count mismatch");
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    ensure(acc.weight[l].size() == g.weight[l].size() &&
               acc.bias[l].size() == g.bias[l].size(),
           "accumulate_gradients: shape mismatch");
    for (std::size_t i = 0; i < g.weight[l].size(); ++i) {
      acc.weight[l][i] += g.weight[l][i];
    }
    for (std::size_t i = 0; i < g.bias[l].size(); ++i) {
      acc.bias[l][i] += g.bias[l][i];
    }
  }
}

inline void scale_gradients(HeadGradients& grads, double s) {
  for (auto& w : grads.weight) {
    for (double& v : w) v *= s;
  }
  for (auto& b : grads.bias) {
    for (double& v : b) v *= s;
  }
  for (double& v : grads.input) v *= s;
}

enum class OptimizerKind { sgd, adam };

inline OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw Error("optimizer: unknown kind '" + name + "'");
}

/*! Plain SGD or Adam with bias correction. Moment buffers are laid out
 * per layer and sized on the first step.
 */
class Optimizer {
 public:
  explicit Optimizer(OptimizerKind kind, double learning_rate)
      : kind_(kind), lr_(learning_rate) {
    ensure(std::isfinite(lr_) && lr_ > 0.0,
           "optimizer: learning rate must be positive");
  }

  void step(PhraseHead& head, const HeadGradients& grads) {
    ensure(grads.weight.size() == PhraseHead::kLayers,
           "optimizer: gradient layer count mismatch");
    if (kind_ == OptimizerKind::adam && m_w_.empty()) {
      init_state(head);
    }
    ++t_;
    for (std::size_t l = 0; l < PhraseHead::kLayers; ++l) {
      AffineLayer& layer = head.layer(l);
      if (kind_ == OptimizerKind::sgd) {
        apply_sgd(layer.weight, grads.weight[l]);
        apply_sgd(layer.bias, grads.bias[l]);
      } else {
        apply_adam(layer.weight, grads.weight[l], m_w_[l], v_w_[l]);
        apply_adam(layer.bias, grads.bias[l], m_b_[l], v_b_[l]);
      }
    }
  }

 private:
  void init_state(const PhraseHead& head) {
    m_w_.resize(PhraseHead::kLayers);
    v_w_.resize(PhraseHead::kLayers);
    m_b_.resize(PhraseHead::kLayers);
    v_b_.resize(PhraseHead::kLayers);
    for (std::size_t l = 0; l < PhraseHead::kLayers; ++l) {
      const AffineLayer& layer = head.layer(l);
      m_w_[l].assign(layer.weight.size(), 0.0);
      v_w_[l].assign(layer.weight.size(), 0.0);
      m_b_[l].assign(layer.bias.size(), 0.0);
      v_b_[l].assign(layer.bias.size(), 0.0);
    }
  }

  void apply_sgd(std::vector<double>& param, const std::vector<double>& g) {
    ensure(param.size() == g.size(), "optimizer: shape mismatch");
    for (std::size_t i = 0; i < param.size(); ++i) {
      param[i] -= lr_ * g[i];
    }
  }

  void apply_adam(std::vector<double>& param, const std::vector<double>& g,
                  std::vector<double>& m, std::vector<double>& v) {
    ensure(param.size() == g.size(), "optimizer: shape mismatch");
    double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      param[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
    }
  }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_w_, v_w_, m_b_, v_b_;
};

}  // namespace prk
