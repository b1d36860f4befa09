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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prk/common.hpp"
#include "prk/composition.hpp"
#include "prk/losses.hpp"
#include "prk/lut.hpp"
#include "prk/mlp.hpp"
#include "prk/neighborhood.hpp"
#include "prk/phrase.hpp"
#include "prk/rng.hpp"
#include "prk/synthetic.hpp"

namespace prk {

struct TrainConfig {
  SyntheticConfig data;
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  std::uint64_t seed = 7;
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 64;
  LossConfig loss;
  bool composition = false;
  CompositionConfig compose;
  NeighborhoodConfig neighborhood;
  TargetMode targets = TargetMode::word2vec;
  bool surrogate = true;       //!< detection-branch stand-in on/off
  double surrogate_lr = 1e-2;  //!< plain SGD rate for the stand-in

  void validate() const {
    data.validate();
    loss.validate();
    compose.validate();
    ensure(std::isfinite(learning_rate) && learning_rate > 0.0,
           "train config: learning rate must be positive");
    ensure(batch_size > 0, "train config: batch size must be positive");
    ensure(epochs > 0, "train config: epochs must be positive");
    ensure(hidden1 > 0 && hidden2 > 0,
           "train config: hidden widths must be positive");
    ensure(std::isfinite(surrogate_lr) && surrogate_lr > 0.0,
           "train config: surrogate learning rate must be positive");
  }
};

namespace detail {

inline bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw Error("config: '" + key + "' expects on/off, got '" + value + "'");
}

inline double parse_real(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    ensure(pos == value.size() && std::isfinite(v), "trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error("config: '" + key + "' expects a real number, got '" + value +
                "'");
  }
}

inline std::uint64_t parse_count(const std::string& value,
                                 const std::string& key) {
  try {
    ensure(value.find('-') == std::string::npos, "sign");
    std::size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    ensure(pos == value.size(), "trailing characters");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw Error("config: '" + key + "' expects a non-negative integer, got '" +
                value + "'");
  }
}

}  // namespace detail

//! Apply one key=value setting; unknown keys are errors.
inline void apply_config_entry(TrainConfig& config, const std::string& key,
                               const std::string& value) {
  using detail::parse_bool;
  using detail::parse_count;
  using detail::parse_real;
  if (key == "optimizer") {
    config.optimizer = optimizer_from_name(value);
  } else if (key == "lr") {
    config.learning_rate = parse_real(value, key);
  } else if (key == "batch") {
    config.batch_size = static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "epochs") {
    config.epochs = static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "seed") {
    config.seed = parse_count(value, key);
  } else if (key == "hidden1") {
    config.hidden1 = static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "hidden2") {
    config.hidden2 = static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "alpha") {
    config.loss.alpha = parse_real(value, key);
  } else if (key == "beta") {
    config.loss.beta = parse_real(value, key);
  } else if (key == "margin") {
    config.loss.margin = parse_real(value, key);
  } else if (key == "distilling") {
    config.loss.distilling = distilling_from_name(value);
  } else if (key == "distance") {
    config.loss.distance = distance_from_name(value);
  } else if (key == "composition") {
    config.composition = parse_bool(value, key);
  } else if (key == "pv") {
    config.compose.p_v = parse_real(value, key);
  } else if (key == "po") {
    config.compose.p_o = parse_real(value, key);
  } else if (key == "weighting") {
    config.compose.weighting = weighting_from_name(value);
  } else if (key == "k") {
    config.neighborhood.k = static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "tsim") {
    config.neighborhood.t_sim = parse_real(value, key);
  } else if (key == "targets") {
    config.targets = target_mode_from_name(value);
  } else if (key == "surrogate") {
    config.surrogate = parse_bool(value, key);
  } else if (key == "surrogate_lr") {
    config.surrogate_lr = parse_real(value, key);
  } else if (key == "classes") {
    config.data.num_classes = static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "samples") {
    config.data.train_samples =
        static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "eval_per_class") {
    config.data.eval_per_class =
        static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "input_dim") {
    config.data.input_dim = static_cast<std::size_t>(parse_count(value, key));
  } else if (key == "sigma") {
    config.data.noise_sigma = parse_real(value, key);
  } else if (key == "zipf") {
    config.data.zipf_exponent = parse_real(value, key);
  } else if (key == "rare_threshold") {
    config.data.rare_threshold =
        static_cast<std::size_t>(parse_count(value, key));
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

/*! key=value lines, one per line; '#' starts a comment; blank lines are
 * skipped. Later lines override earlier ones.
 */
inline TrainConfig parse_train_config(std::istream& in,
                                      TrainConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!line.empty() && is_space(line.back())) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && is_space(line[start])) ++start;
    line.erase(0, start);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    ensure(eq != std::string::npos && eq > 0,
           "config: line " + std::to_string(lineno) +
               " is not key=value: '" + line + "'");
    apply_config_entry(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

inline nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["optimizer"] = c.optimizer == OptimizerKind::adam ? "adam" : "sgd";
  j["lr"] = c.learning_rate;
  j["batch"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["hidden1"] = c.hidden1;
  j["hidden2"] = c.hidden2;
  j["alpha"] = c.loss.alpha;
  j["beta"] = c.loss.beta;
  j["margin"] = c.loss.margin;
  j["distilling"] = distilling_name(c.loss.distilling);
  j["distance"] = distance_name(c.loss.distance);
  j["composition"] = c.composition;
  j["pv"] = c.compose.p_v;
  j["po"] = c.compose.p_o;
  j["weighting"] = weighting_name(c.compose.weighting);
  j["k"] = c.neighborhood.k;
  j["tsim"] = c.neighborhood.t_sim;
  j["targets"] = target_mode_name(c.targets);
  j["surrogate"] = c.surrogate;
  j["surrogate_lr"] = c.surrogate_lr;
  j["classes"] = c.data.num_classes;
  j["samples"] = c.data.train_samples;
  j["eval_per_class"] = c.data.eval_per_class;
  j["input_dim"] = c.data.input_dim;
  j["sigma"] = c.data.noise_sigma;
  j["zipf"] = c.data.zipf_exponent;
  j["rare_threshold"] = c.data.rare_threshold;
  return j;
}

//! Everything train() consumes besides the head and the knobs.
struct TrainSetup {
  SyntheticDataset dataset;
  EmbeddingStore store;
  std::vector<RelationalPhrase> phrases;  //!< per class
  NeighborhoodMap neighborhoods;
  LookUpTable lut;
};

/*! Instantiate dataset, target store, neighborhoods and LUT from one
 * config. The class list is a prefix of the fixture phrase grid.
 */
inline TrainSetup make_train_setup(const TrainConfig& config) {
  config.validate();
  std::vector<RelationalPhrase> all = fixture_phrases();
  ensure(config.data.num_classes <= all.size(),
         "train: the fixture grid provides at most " +
             std::to_string(all.size()) + " classes");
  std::vector<RelationalPhrase> phrases(
      all.begin(), all.begin() + static_cast<std::ptrdiff_t>(
                                     config.data.num_classes));
  EmbeddingStore store = config.targets == TargetMode::word2vec
                             ? fixture_vocabulary()
                             : random_vocabulary(config.seed);
  std::vector<std::string> queries;
  for (const RelationalPhrase& p : phrases) {
    if (std::find(queries.begin(), queries.end(), p.verb) == queries.end()) {
      queries.push_back(p.verb);
    }
    if (std::find(queries.begin(), queries.end(), p.object) ==
        queries.end()) {
      queries.push_back(p.object);
    }
  }
  NeighborhoodMap neighborhoods =
      build_neighborhoods(store, queries, config.neighborhood);
  LookUpTable lut = build_lut(store, phrases);
  return TrainSetup{make_synthetic_dataset(config.data, config.seed),
                    std::move(store), std::move(phrases),
                    std::move(neighborhoods), std::move(lut)};
}

struct Metrics {
  double top1 = 0.0;
  double top5 = 0.0;
  double rare_top1 = 0.0;
  double rare_top5 = 0.0;
  double nonrare_top1 = 0.0;
  double nonrare_top5 = 0.0;
  std::size_t total = 0;
  std::size_t rare_total = 0;
  std::size_t nonrare_total = 0;
  std::vector<double> per_class_top1;
};

//! LUT-retrieval accuracy of the head over a sample split.
inline Metrics evaluate(const PhraseHead& head,
                        const std::vector<SyntheticSample>& split,
                        const std::vector<bool>& rare, const LookUpTable& lut,
                        const std::vector<RelationalPhrase>& phrases) {
  ensure(!split.empty(), "evaluate: empty split");
  ensure(rare.size() == phrases.size(),
         "evaluate: rare flags and phrases must align");
  Metrics m;
  std::vector<std::size_t> class_hits(phrases.size(), 0);
  std::vector<std::size_t> class_total(phrases.size(), 0);
  std::size_t hits1 = 0, hits5 = 0, rare1 = 0, rare5 = 0;
  for (const SyntheticSample& sample : split) {
    std::size_t c = static_cast<std::size_t>(sample.class_id);
    ensure(c < phrases.size(), "evaluate: class id out of range");
    std::vector<double> pred = head.forward(sample.features);
    std::vector<LookUpTable::Match> matches = lut.query(pred, 5);
    bool top1 = matches.front().phrase == phrases[c];
    bool top5 = std::any_of(matches.begin(), matches.end(),
                            [&](const LookUpTable::Match& match) {
                              return match.phrase == phrases[c];
                            });
    ++class_total[c];
    if (top1) {
      ++hits1;
      ++class_hits[c];
    }
    if (top5) ++hits5;
    if (rare[c]) {
      ++m.rare_total;
      if (top1) ++rare1;
      if (top5) ++rare5;
    }
  }
  m.total = split.size();
  m.nonrare_total = m.total - m.rare_total;
  auto ratio = [](std::size_t n, std::size_t d) {
    return d == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(d);
  };
  m.top1 = ratio(hits1, m.total);
  m.top5 = ratio(hits5, m.total);
  m.rare_top1 = ratio(rare1, m.rare_total);
  m.rare_top5 = ratio(rare5, m.rare_total);
  m.nonrare_top1 = ratio(hits1 - rare1, m.nonrare_total);
  m.nonrare_top5 = ratio(hits5 - rare5, m.nonrare_total);
  m.per_class_top1.resize(phrases.size());
  for (std::size_t c = 0; c < phrases.size(); ++c) {
    m.per_class_top1[c] = ratio(class_hits[c], class_total[c]);
  }
  return m;
}

struct EmbeddingStats {
  double mean_intra_class_distance = 0.0;
  double min_inter_centroid_distance = 0.0;
};

//! Spread statistics of predicted embeddings over a split.
inline EmbeddingStats embedding_stats(
    const PhraseHead& head, const std::vector<SyntheticSample>& split,
    std::size_t num_classes) {
  ensure(!split.empty(), "embedding_stats: empty split");
  const std::size_t dim = head.output_dim();
  std::vector<std::vector<double>> preds;
  preds.reserve(split.size());
  std::vector<std::vector<double>> centroids(num_classes,
                                             std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(num_classes, 0);
  for (const SyntheticSample& sample : split) {
    std::size_t c = static_cast<std::size_t>(sample.class_id);
    ensure(c < num_classes, "embedding_stats: class id out of range");
    preds.push_back(head.forward(sample.features));
    for (std::size_t i = 0; i < dim; ++i) {
      centroids[c][i] += preds.back()[i];
    }
    ++counts[c];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    ensure(counts[c] > 0, "embedding_stats: class " + std::to_string(c) +
                              " has no samples in the split");
    for (double& v : centroids[c]) {
      v /= static_cast<double>(counts[c]);
    }
  }
  auto dist = [dim](const std::vector<double>& a,
                    const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double d = a[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  EmbeddingStats stats;
  double intra = 0.0;
  for (std::size_t s = 0; s < split.size(); ++s) {
    std::size_t c = static_cast<std::size_t>(split[s].class_id);
    intra += dist(preds[s], centroids[c]);
  }
  stats.mean_intra_class_distance = intra / static_cast<double>(split.size());
  double min_inter = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < num_classes; ++a) {
    for (std::size_t b = a + 1; b < num_classes; ++b) {
      min_inter = std::min(min_inter, dist(centroids[a], centroids[b]));
    }
  }
  stats.min_inter_centroid_distance = min_inter;
  return stats;
}

/*! Detection-branch stand-in: a linear softmax classifier over the same
 * inputs, trained alongside the head with plain SGD. Its cross-entropy
 * is the opaque scalar coupled through alpha; parameters are disjoint
 * from the head, so the phrase branch is unaffected by it.
 */
class LinearSurrogate {
 public:
  LinearSurrogate(std::size_t input_dim, std::size_t classes)
      : classes_(classes) {
    ensure(input_dim > 0 && classes > 1, "surrogate: bad dimensions");
    layer_.in = input_dim;
    layer_.out = classes;
    layer_.weight.assign(classes * input_dim, 0.0);
    layer_.bias.assign(classes, 0.0);
  }

  //! One SGD step on the batch; returns the mean cross-entropy.
  double train_step(const std::vector<const SyntheticSample*>& batch,
                    double lr) {
    ensure(!batch.empty(), "surrogate: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> grad_w(layer_.weight.size(), 0.0);
    std::vector<double> grad_b(layer_.bias.size(), 0.0);
    double loss = 0.0;
    for (const SyntheticSample* sample : batch) {
      std::size_t c = static_cast<std::size_t>(sample->class_id);
      ensure(c < classes_, "surrogate: class id out of range");
      std::vector<double> logits(classes_);
      for (std::size_t r = 0; r < classes_; ++r) {
        double acc = layer_.bias[r];
        const double* row = layer_.weight.data() + r * layer_.in;
        for (std::size_t i = 0; i < layer_.in; ++i) {
          acc += row[i] * sample->features[i];
        }
        logits[r] = acc;
      }
      std::vector<double> p = detail::softmax(logits);
      loss -= std::log(std::max(p[c], 1e-300));
      for (std::size_t r = 0; r < classes_; ++r) {
        double g = (p[r] - (r == c ? 1.0 : 0.0)) * inv_b;
        grad_b[r] += g;
        double* grow = grad_w.data() + r * layer_.in;
        for (std::size_t i = 0; i < layer_.in; ++i) {
          grow[i] += g * sample->features[i];
        }
      }
    }
    loss *= inv_b;
    for (std::size_t i = 0; i < layer_.weight.size(); ++i) {
      layer_.weight[i] -= lr * grad_w[i];
    }
    for (std::size_t i = 0; i < layer_.bias.size(); ++i) {
      layer_.bias[i] -= lr * grad_b[i];
    }
    return loss;
  }

 private:
  std::size_t classes_;
  AffineLayer layer_;
};

struct EpochStats {
  std::size_t epoch = 0;  //!< 1-based
  double total = 0.0;
  double phrase = 0.0;
  double distilling = 0.0;
  double triplet = 0.0;
  double hoi = 0.0;
};

//! Streaming fingerprints of what the loop actually consumed. With
//! composition toggled at a fixed seed, only `targets` may change.
struct TrainDigests {
  std::uint64_t inputs = 0xcbf29ce484222325ULL;
  std::uint64_t class_ids = 0xcbf29ce484222325ULL;
  std::uint64_t targets = 0xcbf29ce484222325ULL;
};

struct TrainingReport {
  std::vector<EpochStats> curve;
  Metrics metrics;
  EmbeddingStats stats;
  TrainDigests digests;
  nlohmann::ordered_json config;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

}  // namespace detail

inline nlohmann::ordered_json metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["top1"] = m.top1;
  j["top5"] = m.top5;
  j["rare"] = {{"top1", m.rare_top1},
               {"top5", m.rare_top5},
               {"count", m.rare_total}};
  j["nonrare"] = {{"top1", m.nonrare_top1},
                  {"top5", m.nonrare_top5},
                  {"count", m.nonrare_total}};
  j["count"] = m.total;
  j["per_class_top1"] = m.per_class_top1;
  return j;
}

inline nlohmann::ordered_json report_to_json(const TrainingReport& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config;
  j["curve"] = nlohmann::ordered_json::array();
  for (const EpochStats& e : report.curve) {
    j["curve"].push_back({{"epoch", e.epoch},
                          {"total", e.total},
                          {"phrase", e.phrase},
                          {"distilling", e.distilling},
                          {"triplet", e.triplet},
                          {"hoi", e.hoi}});
  }
  j["metrics"] = metrics_to_json(report.metrics);
  j["embedding_stats"] = {
      {"mean_intra_class_distance", report.stats.mean_intra_class_distance},
      {"min_inter_centroid_distance",
       report.stats.min_inter_centroid_distance}};
  j["digests"] = {{"inputs", detail::hex64(report.digests.inputs)},
                  {"class_ids", detail::hex64(report.digests.class_ids)},
                  {"targets", detail::hex64(report.digests.targets)}};
  return j;
}

inline void write_loss_curve_csv(std::ostream& out,
                                 const std::vector<EpochStats>& curve) {
  out << "epoch,total,phrase,distilling,triplet,hoi\n";
  char buf[32];
  auto cell = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const EpochStats& e : curve) {
    out << e.epoch << ',' << cell(e.total) << ',' << cell(e.phrase) << ','
        << cell(e.distilling) << ',' << cell(e.triplet) << ','
        << cell(e.hoi) << '\n';
  }
}

/*! Single-threaded deterministic training loop. Shuffling, composition
 * and initialization draw from independent named streams of the config
 * seed, so toggling composition cannot shift batch order or data.
 */
inline TrainingReport train(PhraseHead& head, const TrainSetup& setup,
                            const TrainConfig& config) {
  config.validate();
  const SyntheticDataset& ds = setup.dataset;
  const std::size_t classes = setup.phrases.size();
  ensure(ds.config.num_classes == classes,
         "train: dataset and phrase list disagree on class count");
  ensure(head.input_dim() == ds.config.input_dim,
         "train: head input width does not match dataset");
  ensure(head.output_dim() == setup.lut.dimension(),
         "train: head output width does not match the LUT");

  std::vector<PhraseEmbedding> base_targets;
  base_targets.reserve(classes);
  for (const RelationalPhrase& phrase : setup.phrases) {
    base_targets.push_back(encode_phrase(setup.store, phrase));
    ensure(base_targets.back().size() == head.output_dim(),
           "train: target dimension mismatch");
  }

  Optimizer optimizer(config.optimizer, config.learning_rate);
  LinearSurrogate surrogate(ds.config.input_dim, classes);
  Rng shuffle_rng = Rng::stream(config.seed, "train-shuffle");
  Rng compose_rng = Rng::stream(config.seed, "train-composition");

  TrainingReport report;
  report.config = config_to_json(config);
  TrainDigests& digests = report.digests;

  std::vector<std::size_t> order(ds.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochStats stats;
    stats.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      std::size_t stop = std::min(order.size(), start + config.batch_size);
      LabeledBatch batch;
      std::vector<ForwardCache> caches(stop - start);
      std::vector<const SyntheticSample*> raw;
      for (std::size_t i = start; i < stop; ++i) {
        const SyntheticSample& sample = ds.train[order[i]];
        raw.push_back(&sample);
        try {
          batch.predictions.push_back(
              head.forward(sample.features, caches[i - start]));
        } catch (const Error& e) {
          throw Error("training diverged at epoch " + std::to_string(epoch) +
                      ": " + e.what());
        }
        std::size_t c = static_cast<std::size_t>(sample.class_id);
        if (config.composition) {
          RelationalPhrase composed = compose(
              setup.phrases[c], setup.neighborhoods, config.compose,
              compose_rng);
          batch.targets.push_back(encode_phrase(setup.store, composed));
        } else {
          batch.targets.push_back(base_targets[c]);
        }
        batch.class_ids.push_back(sample.class_id);
        digests.inputs = fnv1a64_bytes(
            sample.features.data(), sample.features.size() * sizeof(double),
            digests.inputs);
        digests.class_ids = fnv1a64_bytes(
            &sample.class_id, sizeof sample.class_id, digests.class_ids);
        digests.targets = fnv1a64_bytes(
            batch.targets.back().data(),
            batch.targets.back().size() * sizeof(double), digests.targets);
      }

      PhraseLossResult phrase = phrase_loss(batch, config.loss);
      ensure(std::isfinite(phrase.value),
             "training diverged at epoch " + std::to_string(epoch) +
                 ": non-finite phrase loss");
      HeadGradients grads;
      for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
        accumulate_gradients(grads,
                             head.backward(caches[i], phrase.grads[i]));
      }
      optimizer.step(head, grads);

      double hoi = 0.0;
      if (config.surrogate) {
        hoi = surrogate.train_step(raw, config.surrogate_lr);
      }
      double total = total_loss(hoi, phrase.value, config.loss.alpha);
      stats.total += total;
      stats.phrase += phrase.value;
      stats.distilling += phrase.distilling_value;
      stats.triplet += phrase.triplet_value;
      stats.hoi += hoi;
      ++batches;
    }
    ensure(batches > 0, "train: empty training split");
    stats.total /= static_cast<double>(batches);
    stats.phrase /= static_cast<double>(batches);
    stats.distilling /= static_cast<double>(batches);
    stats.triplet /= static_cast<double>(batches);
    stats.hoi /= static_cast<double>(batches);
    report.curve.push_back(stats);
  }

  ensure(head.finite(), "train: non-finite parameters after training");
  report.metrics =
      evaluate(head, ds.eval, ds.rare, setup.lut, setup.phrases);
  report.stats = embedding_stats(head, ds.eval, classes);
  return report;
}

//! Convenience wrapper: build setup and a freshly initialized head.
inline TrainingReport run_training(const TrainConfig& config,
                                   PhraseHead* trained = nullptr) {
  TrainSetup setup = make_train_setup(config);
  Rng init_rng = Rng::stream(config.seed, "train-init");
  PhraseHead head =
      PhraseHead::he_init(config.data.input_dim, config.hidden1,
                          config.hidden2, setup.lut.dimension(), init_rng);
  // A full-scale readout starts with far more output variance than the
  // sparse targets carry; the distilling term then shrinks everything and
  // prunes the rectifier pathway before it can specialize. Starting the
  // readout at zero sidesteps that collapse.
  AffineLayer& readout = head.layer(PhraseHead::kLayers - 1);
  readout.weight.assign(readout.weight.size(), 0.0);
  TrainingReport report = train(head, setup, config);
  if (trained != nullptr) {
    *trained = std::move(head);
  }
  return report;
}

}  // namespace prk
