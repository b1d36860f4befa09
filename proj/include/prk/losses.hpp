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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "prk/common.hpp"
#include "prk/phrase.hpp"

namespace prk {

enum class Distilling { L1, MSE, KL, Cosine };
enum class DistanceMetric { euclidean, cosine_distance };
enum class Mining { batch_all };

inline Distilling distilling_from_name(const std::string& name) {
  if (name == "l1") return Distilling::L1;
  if (name == "mse") return Distilling::MSE;
  if (name == "kl") return Distilling::KL;
  if (name == "cosine") return Distilling::Cosine;
  throw Error("distilling: unknown variant '" + name + "'");
}

inline std::string distilling_name(Distilling variant) {
  switch (variant) {
    case Distilling::L1: return "l1";
    case Distilling::MSE: return "mse";
    case Distilling::KL: return "kl";
    case Distilling::Cosine: return "cosine";
  }
  throw Error("distilling: invalid variant");
}

inline DistanceMetric distance_from_name(const std::string& name) {
  if (name == "euclidean") return DistanceMetric::euclidean;
  if (name == "cosine") return DistanceMetric::cosine_distance;
  throw Error("distance: unknown metric '" + name + "'");
}

inline std::string distance_name(DistanceMetric metric) {
  return metric == DistanceMetric::euclidean ? "euclidean" : "cosine";
}

//! Weights of the phrase-branch loss stack. Defaults are the operating
//! point used in experiments: alpha 0.1, beta 10, margin 0.5, L1.
struct LossConfig {
  double alpha = 0.1;
  double beta = 10.0;
  double margin = 0.5;
  Distilling distilling = Distilling::L1;
  DistanceMetric distance = DistanceMetric::euclidean;
  Mining mining = Mining::batch_all;

  void validate() const {
    ensure(std::isfinite(alpha) && alpha >= 0.0,
           "loss config: alpha must be finite and >= 0");
    ensure(std::isfinite(beta) && beta >= 0.0,
           "loss config: beta must be finite and >= 0");
    ensure(std::isfinite(margin) && margin >= 0.0,
           "loss config: margin must be finite and >= 0");
  }
};

//! Predictions with their regression targets and class-cluster ids.
//! class_ids define which elements count as positives of one another.
struct LabeledBatch {
  std::vector<PhraseEmbedding> predictions;
  std::vector<PhraseEmbedding> targets;
  std::vector<int> class_ids;

  void validate() const {
    ensure(predictions.size() == targets.size() &&
               predictions.size() == class_ids.size(),
           "batch: predictions/targets/class_ids must have equal length");
  }
};

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // d value / d pred
};

namespace detail {

inline std::vector<double> softmax(const std::vector<double>& x) {
  double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> e(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(x[i] - mx);
    sum += e[i];
  }
  for (double& v : e) {
    v /= sum;
  }
  return e;
}

}  // namespace detail

/*! Distilling loss pulling a prediction toward its ground-truth embedding.
 *
 *   L1     mean_i |p_i - t_i|          (gradient 0 at p_i == t_i)
 *   MSE    mean_i (p_i - t_i)^2
 *   Cosine 1 - cos(p, t)
 *   KL     KL(softmax(t) || softmax(p)); both operands are mapped to the
 *          probability simplex first, since raw embeddings contain
 *          negative components.
 */
inline LossValue distilling_loss(const PhraseEmbedding& pred,
                                 const PhraseEmbedding& target,
                                 Distilling variant) {
  ensure(pred.size() == target.size() && !pred.empty(),
         "distilling_loss: dimension mismatch");
  const std::size_t n = pred.size();
  LossValue out;
  out.grad.assign(n, 0.0);
  switch (variant) {
    case Distilling::L1: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = pred[i] - target[i];
        acc += std::fabs(d);
        out.grad[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) /
                      static_cast<double>(n);
      }
      out.value = acc / static_cast<double>(n);
      break;
    }
    case Distilling::MSE: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = pred[i] - target[i];
        acc += d * d;
        out.grad[i] = 2.0 * d / static_cast<double>(n);
      }
      out.value = acc / static_cast<double>(n);
      break;
    }
    case Distilling::Cosine: {
      double dot = 0.0, np = 0.0, nt = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dot += pred[i] * target[i];
        np += pred[i] * pred[i];
        nt += target[i] * target[i];
      }
      ensure(np > 0.0 && nt > 0.0, "distilling_loss: zero-norm input");
      double denom = std::sqrt(np) * std::sqrt(nt);
      double cosv = dot / denom;
      out.value = 1.0 - cosv;
      for (std::size_t i = 0; i < n; ++i) {
        out.grad[i] = cosv * pred[i] / np - target[i] / denom;
      }
      break;
    }
    case Distilling::KL: {
      std::vector<double> q = detail::softmax(target);
      std::vector<double> s = detail::softmax(pred);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (q[i] > 0.0) {
          acc += q[i] * (std::log(q[i]) - std::log(s[i]));
        }
        out.grad[i] = s[i] - q[i];
      }
      out.value = std::max(acc, 0.0);  // clamp away negative roundoff
      break;
    }
  }
  return out;
}

struct TripletResult {
  double value = 0.0;
  std::size_t triplet_count = 0;    // valid (A,P,N) triplets in the batch
  std::size_t violating_count = 0;  // triplets with a positive hinge
  std::vector<std::vector<double>> grads;
};

namespace detail {

struct PairwiseDistances {
  std::vector<double> d;  // b x b
  std::size_t b;
  double at(std::size_t i, std::size_t j) const { return d[i * b + j]; }
};

inline PairwiseDistances pairwise_distances(
    const std::vector<PhraseEmbedding>& x, DistanceMetric metric) {
  PairwiseDistances out;
  out.b = x.size();
  out.d.assign(out.b * out.b, 0.0);
  for (std::size_t i = 0; i < out.b; ++i) {
    for (std::size_t j = i + 1; j < out.b; ++j) {
      double dij = 0.0;
      if (metric == DistanceMetric::euclidean) {
        double acc = 0.0;
        for (std::size_t k = 0; k < x[i].size(); ++k) {
          double d = x[i][k] - x[j][k];
          acc += d * d;
        }
        dij = std::sqrt(acc);
      } else {
        dij = 1.0 - cosine_similarity(std::span<const double>(x[i]),
                                      std::span<const double>(x[j]));
      }
      out.d[i * out.b + j] = dij;
      out.d[j * out.b + i] = dij;
    }
  }
  return out;
}

//! Accumulate scale * d d(x_i, x_j) / d x_into, where into is i or j.
inline void accumulate_distance_grad(const std::vector<PhraseEmbedding>& x,
                                     std::size_t i, std::size_t j,
                                     std::size_t into, double dist,
                                     double scale, DistanceMetric metric,
                                     std::vector<double>& grad) {
  const PhraseEmbedding& a = x[i];
  const PhraseEmbedding& b = x[j];
  if (metric == DistanceMetric::euclidean) {
    if (dist <= 0.0) {
      return;  // subgradient 0 at coincident points
    }
    double sign = (into == i) ? 1.0 : -1.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      grad[k] += scale * sign * (a[k] - b[k]) / dist;
    }
  } else {
    // d (1 - cos(a,b)) / d a = cos * a/|a|^2 - b/(|a||b|)
    const PhraseEmbedding& self = (into == i) ? a : b;
    const PhraseEmbedding& other = (into == i) ? b : a;
    double dot = 0.0, ns = 0.0, no = 0.0;
    for (std::size_t k = 0; k < self.size(); ++k) {
      dot += self[k] * other[k];
      ns += self[k] * self[k];
      no += other[k] * other[k];
    }
    double denom = std::sqrt(ns) * std::sqrt(no);
    double cosv = dot / denom;
    for (std::size_t k = 0; k < self.size(); ++k) {
      grad[k] += scale * (cosv * self[k] / ns - other[k] / denom);
    }
  }
}

}  // namespace detail

/*! Margin triplet loss with batch-all mining.
 *
 * Every ordered triplet (A, P, N) with class(A) == class(P), A != P and
 * class(A) != class(N) contributes max(d(A,P) - d(A,N) + m, 0); anchors,
 * positives and negatives are all predictions. The value is the mean over
 * violating triplets (hinge > 0), zero when none violate. A batch with no
 * valid triplet yields value 0 and triplet_count 0, not an error.
 */
inline TripletResult triplet_loss(const std::vector<PhraseEmbedding>& preds,
                                  const std::vector<int>& class_ids,
                                  double margin,
                                  DistanceMetric metric =
                                      DistanceMetric::euclidean) {
  ensure(preds.size() == class_ids.size(),
         "triplet_loss: predictions/class_ids length mismatch");
  ensure(std::isfinite(margin) && margin >= 0.0,
         "triplet_loss: margin must be finite and >= 0");
  const std::size_t b = preds.size();
  TripletResult out;
  out.grads.assign(b, {});
  for (std::size_t i = 0; i < b; ++i) {
    ensure(preds[i].size() == preds[0].size(),
           "triplet_loss: ragged batch");
    out.grads[i].assign(preds[i].size(), 0.0);
  }
  if (b < 3) {
    // cannot form any (A,P,N)
    return out;
  }

  detail::PairwiseDistances dist = detail::pairwise_distances(preds, metric);

  struct Violation {
    std::size_t a, p, n;
  };
  std::vector<Violation> violations;
  double sum = 0.0;
  for (std::size_t a = 0; a < b; ++a) {
    for (std::size_t p = 0; p < b; ++p) {
      if (p == a || class_ids[p] != class_ids[a]) {
        continue;
      }
      for (std::size_t n = 0; n < b; ++n) {
        if (class_ids[n] == class_ids[a]) {
          continue;
        }
        ++out.triplet_count;
        double hinge = dist.at(a, p) - dist.at(a, n) + margin;
        if (hinge > 0.0) {
          sum += hinge;
          violations.push_back({a, p, n});
        }
      }
    }
  }
  if (violations.empty()) {
    return out;
  }
  out.violating_count = violations.size();
  out.value = sum / static_cast<double>(violations.size());

  double inv = 1.0 / static_cast<double>(violations.size());
  for (const Violation& v : violations) {
    // + d(A,P) term
    detail::accumulate_distance_grad(preds, v.a, v.p, v.a, dist.at(v.a, v.p),
                                     inv, metric, out.grads[v.a]);
    detail::accumulate_distance_grad(preds, v.a, v.p, v.p, dist.at(v.a, v.p),
                                     inv, metric, out.grads[v.p]);
    // - d(A,N) term
    detail::accumulate_distance_grad(preds, v.a, v.n, v.a, dist.at(v.a, v.n),
                                     -inv, metric, out.grads[v.a]);
    detail::accumulate_distance_grad(preds, v.a, v.n, v.n, dist.at(v.a, v.n),
                                     -inv, metric, out.grads[v.n]);
  }
  return out;
}

inline TripletResult triplet_loss(const LabeledBatch& batch, double margin,
                                  DistanceMetric metric =
                                      DistanceMetric::euclidean) {
  batch.validate();
  return triplet_loss(batch.predictions, batch.class_ids, margin, metric);
}

//! Combined phrase loss: mean distilling term plus beta times the batch
//! triplet term. Gradients add linearly.
struct PhraseLossResult {
  double value = 0.0;
  double distilling_value = 0.0;  // already averaged over the batch
  double triplet_value = 0.0;
  std::size_t violating_count = 0;
  std::size_t triplet_count = 0;
  std::vector<std::vector<double>> grads;
};

inline PhraseLossResult phrase_loss(const LabeledBatch& batch,
                                    const LossConfig& config) {
  batch.validate();
  config.validate();
  ensure(!batch.predictions.empty(), "phrase_loss: empty batch");
  const std::size_t b = batch.predictions.size();
  PhraseLossResult out;
  out.grads.assign(b, {});

  double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    LossValue lv = distilling_loss(batch.predictions[i], batch.targets[i],
                                   config.distilling);
    out.distilling_value += lv.value * inv_b;
    out.grads[i].assign(lv.grad.size(), 0.0);
    for (std::size_t k = 0; k < lv.grad.size(); ++k) {
      out.grads[i][k] = lv.grad[k] * inv_b;
    }
  }

  TripletResult tr = triplet_loss(batch.predictions, batch.class_ids,
                                  config.margin, config.distance);
  out.triplet_value = tr.value;
  out.violating_count = tr.violating_count;
  out.triplet_count = tr.triplet_count;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t k = 0; k < out.grads[i].size(); ++k) {
      out.grads[i][k] += config.beta * tr.grads[i][k];
    }
  }
  out.value = out.distilling_value + config.beta * out.triplet_value;
  return out;
}

//! Total training objective: hoi + alpha * phrase. The hoi term is an
//! externally supplied scalar.
inline double total_loss(double hoi_loss, double phrase, double alpha) {
  ensure(std::isfinite(hoi_loss), "total_loss: non-finite hoi loss");
  ensure(std::isfinite(phrase), "total_loss: non-finite phrase loss");
  ensure(std::isfinite(alpha) && alpha >= 0.0,
         "total_loss: alpha must be finite and >= 0");
  return hoi_loss + alpha * phrase;
}

}  // namespace prk
