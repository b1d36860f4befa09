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

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "prk/common.hpp"
#include "prk/losses.hpp"
#include "prk/rng.hpp"

namespace prk {

/*! Central finite differences: g_i = (f(x + h e_i) - f(x - h e_i)) / 2h.
 * The differencing never touches analytic gradient code, so it serves as
 * an independent oracle for it.
 */
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + h;
    double fp = f(x);
    x[i] = orig - h;
    double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

//! Guarded per-component relative error, maximized over components.
inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric) {
  ensure(analytic.size() == numeric.size(),
         "max_relative_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]),
                             1.0});
    worst = std::max(worst, std::fabs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

enum class GradCheckTarget { l1, mse, kl, cosine, triplet, phrase };

inline GradCheckTarget gradcheck_target_from_name(const std::string& name) {
  if (name == "l1") return GradCheckTarget::l1;
  if (name == "mse") return GradCheckTarget::mse;
  if (name == "kl") return GradCheckTarget::kl;
  if (name == "cosine") return GradCheckTarget::cosine;
  if (name == "triplet") return GradCheckTarget::triplet;
  if (name == "phrase") return GradCheckTarget::phrase;
  throw Error("gradcheck: unknown loss '" + name + "'");
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t trials = 0;
  bool pass = false;
};

namespace detail {

inline std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) {
    x = rng.normal();
  }
  return v;
}

//! Random batch with >= 2 classes so valid triplets exist.
inline LabeledBatch random_batch(Rng& rng, std::size_t b, std::size_t dim) {
  LabeledBatch batch;
  for (std::size_t i = 0; i < b; ++i) {
    batch.predictions.push_back(random_vec(dim, rng));
    batch.targets.push_back(random_vec(dim, rng));
    batch.class_ids.push_back(static_cast<int>(i % 3));
  }
  return batch;
}

inline std::vector<double> flatten(const std::vector<PhraseEmbedding>& vs) {
  std::vector<double> flat;
  for (const auto& v : vs) {
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return flat;
}

inline std::vector<PhraseEmbedding> unflatten(const std::vector<double>& flat,
                                              std::size_t b, std::size_t dim) {
  std::vector<PhraseEmbedding> vs(b);
  for (std::size_t i = 0; i < b; ++i) {
    vs[i].assign(flat.begin() + static_cast<std::ptrdiff_t>(i * dim),
                 flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
  }
  return vs;
}

//! Pick a margin that parks one triplet's hinge near (not at) zero, so
//! checks also cover the hinge neighborhood.
inline double near_hinge_margin(const std::vector<PhraseEmbedding>& preds,
                                const std::vector<int>& ids,
                                DistanceMetric metric, Rng& rng) {
  PairwiseDistances dist = pairwise_distances(preds, metric);
  std::vector<double> gaps;
  const std::size_t b = preds.size();
  for (std::size_t a = 0; a < b; ++a) {
    for (std::size_t p = 0; p < b; ++p) {
      if (p == a || ids[p] != ids[a]) continue;
      for (std::size_t n = 0; n < b; ++n) {
        if (ids[n] == ids[a]) continue;
        gaps.push_back(dist.at(a, n) - dist.at(a, p));
      }
    }
  }
  if (gaps.empty()) {
    return 0.5;
  }
  double gap = gaps[rng.index(gaps.size())];
  // hinge argument for that triplet becomes exactly +-1e-3
  double m = gap + (rng.uniform() < 0.5 ? 1e-3 : -1e-3);
  return m > 0.0 ? m : 0.5;
}

}  // namespace detail

/*! Run `trials` randomized finite-difference checks of one loss's
 * analytic gradient. Both distilling variants and the batch losses are
 * checked with respect to the (flattened) predictions.
 */
inline GradCheckReport run_gradcheck(GradCheckTarget target,
                                     std::size_t trials, std::uint64_t seed,
                                     double tolerance = 1e-5,
                                     double h = 1e-6) {
  Rng rng = Rng::stream(seed, "gradcheck");
  GradCheckReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t dim = 2 + rng.index(5);
    if (target == GradCheckTarget::l1 || target == GradCheckTarget::mse ||
        target == GradCheckTarget::kl || target == GradCheckTarget::cosine) {
      Distilling variant = Distilling::L1;
      if (target == GradCheckTarget::mse) variant = Distilling::MSE;
      if (target == GradCheckTarget::kl) variant = Distilling::KL;
      if (target == GradCheckTarget::cosine) variant = Distilling::Cosine;
      std::vector<double> pred = detail::random_vec(dim, rng);
      std::vector<double> targetv = detail::random_vec(dim, rng);
      LossValue lv = distilling_loss(pred, targetv, variant);
      auto f = [&](const std::vector<double>& x) {
        return distilling_loss(x, targetv, variant).value;
      };
      std::vector<double> num = finite_difference(f, pred, h);
      report.max_rel_error =
          std::max(report.max_rel_error, max_relative_error(lv.grad, num));
    } else {
      std::size_t b = 5 + rng.index(4);
      LabeledBatch batch = detail::random_batch(rng, b, dim);
      LossConfig config;
      config.distance = (t % 2 == 0) ? DistanceMetric::euclidean
                                     : DistanceMetric::cosine_distance;
      config.margin = detail::near_hinge_margin(batch.predictions,
                                                batch.class_ids,
                                                config.distance, rng);
      std::vector<double> flat = detail::flatten(batch.predictions);
      std::vector<double> analytic;
      std::function<double(const std::vector<double>&)> f;
      if (target == GradCheckTarget::triplet) {
        TripletResult tr = triplet_loss(batch.predictions, batch.class_ids,
                                        config.margin, config.distance);
        analytic = detail::flatten(tr.grads);
        f = [&](const std::vector<double>& x) {
          return triplet_loss(detail::unflatten(x, b, dim), batch.class_ids,
                              config.margin, config.distance)
              .value;
        };
      } else {
        PhraseLossResult pl = phrase_loss(batch, config);
        analytic = detail::flatten(pl.grads);
        f = [&](const std::vector<double>& x) {
          LabeledBatch probe = batch;
          probe.predictions = detail::unflatten(x, b, dim);
          return phrase_loss(probe, config).value;
        };
      }
      std::vector<double> num = finite_difference(f, flat, h);
      report.max_rel_error =
          std::max(report.max_rel_error, max_relative_error(analytic, num));
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace prk
