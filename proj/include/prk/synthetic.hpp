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
#include <cstdint>
#include <string>
#include <vector>

#include "prk/common.hpp"
#include "prk/embedding_store.hpp"
#include "prk/phrase.hpp"
#include "prk/rng.hpp"

namespace prk {

namespace detail {

struct FixtureMember {
  const char* token;
  double sim;  //!< designed cosine against the family head
};

struct FixtureFamily {
  const char* head;
  std::vector<FixtureMember> members;
};

/*! Families give each head its own coordinate axis and place members at
 * sim * head_axis + sqrt(1 - sim^2) * own_axis, so head-member cosines
 * equal `sim` by construction and cross-family cosines are exactly zero.
 * Members below t_sim = 0.7 exist to exercise threshold filtering.
 */
inline const std::vector<FixtureFamily>& fixture_families() {
  static const std::vector<FixtureFamily> families = {
      {"kiss", {{"kisses", 0.81}, {"smooch", 0.76}, {"kissing", 0.71}}},
      {"ride", {{"rides", 0.85}, {"riding", 0.78}, {"mount", 0.66}}},
      {"hold", {{"holds", 0.83}, {"grasp", 0.74}, {"grip", 0.68}}},
      {"feed", {{"feeds", 0.82}, {"feeding", 0.77}}},
      {"watch", {{"watches", 0.84}, {"observe", 0.72}}},
      {"wash", {{"washes", 0.80}, {"clean", 0.69}}},
      {"horse",
       {{"horses", 0.85},
        {"racehorse", 0.80},
        {"stallion", 0.75},
        {"steed", 0.72}}},
      {"dog", {{"dogs", 0.86}, {"puppy", 0.79}}},
      {"bicycle", {{"bicycles", 0.84}, {"bike", 0.81}}},
      {"apple", {{"apples", 0.83}, {"pear", 0.68}}},
      {"cup", {{"cups", 0.82}, {"mug", 0.73}}},
      {"human", {{"person", 0.90}}},
      {"sit", {{"sits", 0.80}}},
  };
  return families;
}

inline const std::vector<const char*>& fixture_singles() {
  static const std::vector<const char*> singles = {
      "at", "dining", "table", "wine", "glass", "sip", "toast"};
  return singles;
}

}  // namespace detail

//! Canonical fixture token order; the index of a token is its axis.
inline std::vector<std::string> fixture_tokens() {
  std::vector<std::string> tokens;
  for (const auto& family : detail::fixture_families()) {
    tokens.emplace_back(family.head);
    for (const auto& member : family.members) {
      tokens.emplace_back(member.token);
    }
  }
  for (const char* single : detail::fixture_singles()) {
    tokens.emplace_back(single);
  }
  return tokens;
}

/*! Small vocabulary with exact, hand-computable cosine structure. Heads
 * are one-hot; members share the head axis with known weight.
 */
inline EmbeddingStore fixture_vocabulary() {
  std::vector<std::string> tokens = fixture_tokens();
  const std::size_t dim = tokens.size();
  auto axis_of = [&](const std::string& token) {
    auto it = std::find(tokens.begin(), tokens.end(), token);
    ensure(it != tokens.end(), "fixture: unknown token '" + token + "'");
    return static_cast<std::size_t>(it - tokens.begin());
  };
  std::vector<WordVector> entries;
  entries.reserve(dim);
  for (const auto& family : detail::fixture_families()) {
    WordVector head;
    head.token = family.head;
    head.vector.assign(dim, 0.0f);
    head.vector[axis_of(family.head)] = 1.0f;
    entries.push_back(std::move(head));
    for (const auto& member : family.members) {
      WordVector wv;
      wv.token = member.token;
      wv.vector.assign(dim, 0.0f);
      wv.vector[axis_of(family.head)] = static_cast<float>(member.sim);
      wv.vector[axis_of(member.token)] =
          static_cast<float>(std::sqrt(1.0 - member.sim * member.sim));
      entries.push_back(std::move(wv));
    }
  }
  for (const char* single : detail::fixture_singles()) {
    WordVector wv;
    wv.token = single;
    wv.vector.assign(dim, 0.0f);
    wv.vector[axis_of(single)] = 1.0f;
    entries.push_back(std::move(wv));
  }
  return EmbeddingStore(dim, std::move(entries));
}

inline const std::vector<std::string>& fixture_verbs() {
  static const std::vector<std::string> verbs = {"kiss", "ride",  "hold",
                                                 "feed", "watch", "wash"};
  return verbs;
}

inline const std::vector<std::string>& fixture_objects() {
  static const std::vector<std::string> objects = {"horse", "dog", "bicycle",
                                                   "apple", "cup"};
  return objects;
}

//! The 30 phrase classes: verb-major cross of fixture verbs and objects.
inline std::vector<RelationalPhrase> fixture_phrases() {
  std::vector<RelationalPhrase> phrases;
  for (const std::string& verb : fixture_verbs()) {
    for (const std::string& object : fixture_objects()) {
      phrases.push_back(triplet_to_phrase("human", verb, object));
    }
  }
  return phrases;
}

/*! Same tokens as the fixture vocabulary but unit Gaussian directions,
 * for the random-target ablation.
 */
inline EmbeddingStore random_vocabulary(std::uint64_t seed) {
  std::vector<std::string> tokens = fixture_tokens();
  const std::size_t dim = tokens.size();
  Rng rng = Rng::stream(seed, "random-vocab");
  std::vector<WordVector> entries;
  entries.reserve(tokens.size());
  for (const std::string& token : tokens) {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
    double norm = std::sqrt(norm2);
    ensure(norm > 0.0, "random vocabulary: degenerate draw");
    WordVector wv;
    wv.token = token;
    wv.vector.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      wv.vector[i] = static_cast<float>(v[i] / norm);
    }
    entries.push_back(std::move(wv));
  }
  return EmbeddingStore(dim, std::move(entries));
}

enum class TargetMode { word2vec, random };

inline TargetMode target_mode_from_name(const std::string& name) {
  if (name == "word2vec") return TargetMode::word2vec;
  if (name == "random") return TargetMode::random;
  throw Error("target mode: unknown '" + name + "'");
}

inline std::string target_mode_name(TargetMode mode) {
  return mode == TargetMode::word2vec ? "word2vec" : "random";
}

struct SyntheticConfig {
  std::size_t num_classes = 30;
  std::size_t train_samples = 5000;
  std::size_t eval_per_class = 20;
  std::size_t input_dim = 256;
  double noise_sigma = 0.1;
  double zipf_exponent = 1.2;
  std::size_t rare_threshold = 100;  //!< classes with fewer train samples

  void validate() const {
    ensure(num_classes >= 2, "synthetic: need at least 2 classes");
    ensure(train_samples >= num_classes,
           "synthetic: need at least one sample per class");
    ensure(eval_per_class > 0, "synthetic: eval_per_class must be positive");
    ensure(input_dim > 0, "synthetic: input_dim must be positive");
    ensure(std::isfinite(noise_sigma) && noise_sigma >= 0.0,
           "synthetic: noise sigma must be finite and >= 0");
    ensure(std::isfinite(zipf_exponent) && zipf_exponent >= 0.0,
           "synthetic: zipf exponent must be finite and >= 0");
  }
};

struct SyntheticSample {
  std::vector<double> features;
  int class_id = 0;
};

struct SyntheticDataset {
  SyntheticConfig config;
  std::vector<std::vector<double>> prototypes;  //!< per class
  std::vector<std::size_t> class_counts;        //!< train samples per class
  std::vector<bool> rare;                       //!< per class
  std::vector<SyntheticSample> train;
  std::vector<SyntheticSample> eval;

  std::size_t rare_class_count() const {
    return static_cast<std::size_t>(
        std::count(rare.begin(), rare.end(), true));
  }
};

/*! Long-tailed class frequencies: weights (i+1)^-exponent, floored at one
 * sample per class, remainder given to (or taken from) the head classes.
 * The counts always sum to `total` exactly.
 */
inline std::vector<std::size_t> zipf_counts(std::size_t total,
                                            std::size_t classes,
                                            double exponent) {
  ensure(classes > 0 && total >= classes,
         "zipf_counts: need total >= classes >= 1");
  std::vector<double> weights(classes);
  double sum = 0.0;
  for (std::size_t i = 0; i < classes; ++i) {
    weights[i] = std::pow(static_cast<double>(i + 1), -exponent);
    sum += weights[i];
  }
  std::vector<std::size_t> counts(classes);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < classes; ++i) {
    double raw = static_cast<double>(total) * weights[i] / sum;
    counts[i] = std::max<std::size_t>(1, static_cast<std::size_t>(raw));
    assigned += counts[i];
  }
  while (assigned < total) {
    ++counts[0];
    ++assigned;
  }
  while (assigned > total) {
    auto it = std::max_element(counts.begin(), counts.end());
    ensure(*it > 1, "zipf_counts: cannot satisfy one-per-class floor");
    --*it;
    --assigned;
  }
  return counts;
}

/*! Gaussian class prototypes plus per-sample Gaussian noise. Train draws
 * follow the Zipf counts; eval draws are balanced per class. Generation
 * order is fixed (class-major), so a seed pins the dataset bit-exactly.
 */
inline SyntheticDataset make_synthetic_dataset(const SyntheticConfig& config,
                                               std::uint64_t seed) {
  config.validate();
  SyntheticDataset ds;
  ds.config = config;
  Rng proto_rng = Rng::stream(seed, "dataset-prototypes");
  Rng noise_rng = Rng::stream(seed, "dataset-noise");
  Rng eval_rng = Rng::stream(seed, "dataset-eval");

  ds.prototypes.resize(config.num_classes);
  for (auto& proto : ds.prototypes) {
    proto.resize(config.input_dim);
    for (double& x : proto) {
      x = proto_rng.normal();
    }
  }
  ds.class_counts =
      zipf_counts(config.train_samples, config.num_classes,
                  config.zipf_exponent);
  ds.rare.resize(config.num_classes);
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    ds.rare[c] = ds.class_counts[c] < config.rare_threshold;
  }

  auto draw = [&](std::size_t c, Rng& rng) {
    SyntheticSample s;
    s.class_id = static_cast<int>(c);
    s.features = ds.prototypes[c];
    for (double& x : s.features) {
      x += config.noise_sigma * rng.normal();
    }
    return s;
  };
  ds.train.reserve(config.train_samples);
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    for (std::size_t i = 0; i < ds.class_counts[c]; ++i) {
      ds.train.push_back(draw(c, noise_rng));
    }
  }
  ds.eval.reserve(config.num_classes * config.eval_per_class);
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    for (std::size_t i = 0; i < config.eval_per_class; ++i) {
      ds.eval.push_back(draw(c, eval_rng));
    }
  }
  return ds;
}

}  // namespace prk
