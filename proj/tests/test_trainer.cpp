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

#include <numeric>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "prk/repro.hpp"
#include "prk/trainer.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using prk::PhraseHead;
using prk::SyntheticConfig;
using prk::SyntheticDataset;
using prk::TrainConfig;
using prk::TrainingReport;

namespace {

//! Small, fast configuration used across the training tests.
TrainConfig small_config() {
  TrainConfig config;
  config.data.num_classes = 4;
  config.data.train_samples = 200;
  config.data.eval_per_class = 5;
  config.data.input_dim = 12;
  config.data.rare_threshold = 30;
  config.hidden1 = 24;
  config.hidden2 = 24;
  config.epochs = 5;
  config.batch_size = 32;
  config.seed = 11;
  config.loss.beta = 0.0;
  return config;
}

}  // namespace

TEST_CASE("zipf counts honor total, floor and head bias", "[trainer]") {
  std::vector<std::size_t> c = prk::zipf_counts(1000, 10, 1.2);
  CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == 1000);
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    CHECK(c[i] >= c[i + 1]);
  }
  for (std::size_t n : c) {
    CHECK(n >= 1);
  }
  // hand-traced small case: raw floors {5,2,1}, remainder 2 to the head
  CHECK(prk::zipf_counts(10, 3, 1.0) == std::vector<std::size_t>{7, 2, 1});
  // flat exponent splits evenly
  CHECK(prk::zipf_counts(9, 3, 0.0) == std::vector<std::size_t>{3, 3, 3});
  CHECK_THROWS_AS(prk::zipf_counts(2, 3, 1.0), prk::Error);
}

TEST_CASE("synthetic dataset has the configured shape", "[trainer]") {
  SyntheticConfig config;
  config.num_classes = 5;
  config.train_samples = 120;
  config.eval_per_class = 7;
  config.input_dim = 9;
  config.rare_threshold = 20;
  SyntheticDataset ds = prk::make_synthetic_dataset(config, 3);

  CHECK(ds.train.size() == 120);
  CHECK(ds.eval.size() == 35);
  CHECK(ds.prototypes.size() == 5);
  CHECK(std::accumulate(ds.class_counts.begin(), ds.class_counts.end(),
                        std::size_t{0}) == 120);
  for (const auto& s : ds.train) {
    CHECK(s.features.size() == 9);
    CHECK(s.class_id >= 0);
    CHECK(s.class_id < 5);
  }
  std::vector<std::size_t> eval_counts(5, 0);
  for (const auto& s : ds.eval) {
    ++eval_counts[static_cast<std::size_t>(s.class_id)];
  }
  CHECK(eval_counts == std::vector<std::size_t>(5, 7));
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(ds.rare[c] == (ds.class_counts[c] < config.rare_threshold));
  }
  CHECK(ds.rare_class_count() >= 1);  // zipf tail under a threshold of 20
}

TEST_CASE("synthetic dataset is reproducible per seed", "[trainer]") {
  SyntheticConfig config;
  config.num_classes = 3;
  config.train_samples = 40;
  config.eval_per_class = 4;
  config.input_dim = 6;
  SyntheticDataset a = prk::make_synthetic_dataset(config, 5);
  SyntheticDataset b = prk::make_synthetic_dataset(config, 5);
  SyntheticDataset c = prk::make_synthetic_dataset(config, 6);

  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].features == b.train[i].features);
    CHECK(a.train[i].class_id == b.train[i].class_id);
  }
  CHECK(a.prototypes == b.prototypes);
  CHECK(a.prototypes != c.prototypes);
}

TEST_CASE("config files parse with comments and overrides", "[trainer]") {
  std::stringstream in(
      "# comment line\n"
      "lr=0.01\n"
      "epochs=3\n"
      "  beta=2.5  # trailing comment\n"
      "composition=on\n"
      "distilling=mse\n"
      "optimizer=sgd\n"
      "lr=0.02\n");
  TrainConfig config = prk::parse_train_config(in);
  CHECK(config.learning_rate == 0.02);  // later line wins
  CHECK(config.epochs == 3);
  CHECK(config.loss.beta == 2.5);
  CHECK(config.composition);
  CHECK(config.loss.distilling == prk::Distilling::MSE);
  CHECK(config.optimizer == prk::OptimizerKind::sgd);

  nlohmann::ordered_json j = prk::config_to_json(config);
  CHECK(j["lr"] == 0.02);
  CHECK(j["distilling"] == "mse");
  CHECK(j["composition"] == true);
}

TEST_CASE("config rejects unknown keys and bad values", "[trainer]") {
  TrainConfig config;
  CHECK_THROWS_WITH(prk::apply_config_entry(config, "learning_rate", "0.1"),
                    ContainsSubstring("unknown key"));
  CHECK_THROWS_AS(prk::apply_config_entry(config, "lr", "fast"), prk::Error);
  CHECK_THROWS_AS(prk::apply_config_entry(config, "epochs", "-3"),
                  prk::Error);
  CHECK_THROWS_AS(prk::apply_config_entry(config, "composition", "maybe"),
                  prk::Error);
  std::stringstream in("no equals sign here\n");
  CHECK_THROWS_WITH(prk::parse_train_config(in),
                    ContainsSubstring("line 1"));
}

TEST_CASE("train setup takes a prefix of the phrase grid", "[trainer]") {
  TrainConfig config = small_config();
  prk::TrainSetup setup = prk::make_train_setup(config);
  REQUIRE(setup.phrases.size() == 4);
  CHECK(setup.phrases[0].text() == "human kiss horse");
  CHECK(setup.phrases[1].text() == "human kiss dog");
  CHECK(setup.phrases[2].text() == "human kiss bicycle");
  CHECK(setup.phrases[3].text() == "human kiss apple");
  CHECK(setup.lut.size() == 4);
  CHECK(setup.lut.dimension() == 3 * setup.store.dimension());
  CHECK(setup.dataset.train.size() == 200);

  config.data.num_classes = 31;
  CHECK_THROWS_WITH(prk::make_train_setup(config),
                    ContainsSubstring("at most"));
}

TEST_CASE("evaluate scores a head that memorizes one class", "[trainer]") {
  TrainConfig config = small_config();
  prk::TrainSetup setup = prk::make_train_setup(config);
  PhraseHead head(config.data.input_dim, 4, 4, setup.lut.dimension());
  prk::PhraseEmbedding target =
      prk::encode_phrase(setup.store, setup.phrases[3]);
  head.layer(2).bias.assign(target.begin(), target.end());

  prk::Metrics m = prk::evaluate(head, setup.dataset.eval, setup.dataset.rare,
                                 setup.lut, setup.phrases);
  REQUIRE(m.per_class_top1.size() == 4);
  CHECK(m.per_class_top1[3] == 1.0);
  CHECK(m.per_class_top1[0] == 0.0);
  CHECK(m.per_class_top1[1] == 0.0);
  CHECK(m.per_class_top1[2] == 0.0);
  CHECK(m.top1 == 0.25);  // balanced eval split, one class always right
  CHECK(m.top5 == 1.0);   // only 4 entries, top-5 covers the table
  CHECK(m.total == 20);
  CHECK(m.rare_total + m.nonrare_total == m.total);
}

TEST_CASE("embedding stats match a hand-solved split", "[trainer]") {
  PhraseHead head(1, 1, 1, 1);
  head.layer(0).w(0, 0) = 1.0;
  head.layer(1).w(0, 0) = 1.0;
  head.layer(2).w(0, 0) = 1.0;
  std::vector<prk::SyntheticSample> split = {
      {{1.0}, 0}, {{3.0}, 0}, {{5.0}, 1}};
  prk::EmbeddingStats stats = prk::embedding_stats(head, split, 2);
  // preds 1,3,5; centroids 2 and 5; intra (1+1+0)/3; inter |2-5|
  CHECK(stats.mean_intra_class_distance == 2.0 / 3.0);
  CHECK(stats.min_inter_centroid_distance == 3.0);
}

TEST_CASE("an untrained head retrieves at chance level", "[trainer]") {
  prk::EmbeddingStore store = prk::fixture_vocabulary();
  std::vector<prk::RelationalPhrase> phrases = prk::fixture_phrases();
  prk::LookUpTable lut = prk::build_lut(store, phrases);
  SyntheticConfig config;
  config.num_classes = 30;
  config.train_samples = 60;
  config.eval_per_class = 10;
  config.input_dim = 8;

  double mean_top1 = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticDataset ds = prk::make_synthetic_dataset(config, seed);
    prk::Rng rng = prk::Rng::stream(seed, "test");
    PhraseHead head = PhraseHead::he_init(8, 16, 16, lut.dimension(), rng);
    prk::Metrics m = prk::evaluate(head, ds.eval, ds.rare, lut, phrases);
    mean_top1 += m.top1 / 10.0;
  }
  // 1/30 with a generous band; an untrained ReLU head has some retrieval
  // bias, so the band is wide. Failure means degenerate retrieval.
  CHECK(mean_top1 > 0.002);
  CHECK(mean_top1 < 0.15);
}

TEST_CASE("a small training run learns and fills the report", "[trainer]") {
  TrainConfig config = small_config();
  PhraseHead trained(1, 1, 1, 1);
  TrainingReport report = prk::run_training(config, &trained);

  REQUIRE(report.curve.size() == config.epochs);
  for (std::size_t e = 0; e < report.curve.size(); ++e) {
    CHECK(report.curve[e].epoch == e + 1);
    CHECK(std::isfinite(report.curve[e].total));
    CHECK(std::isfinite(report.curve[e].phrase));
    // the triplet term is recorded even at beta 0 but contributes nothing
    CHECK(report.curve[e].phrase == report.curve[e].distilling);
  }
  CHECK(report.curve.back().distilling < report.curve.front().distilling);
  CHECK(report.metrics.total == 20);
  CHECK(report.metrics.top1 >= 0.0);
  CHECK(report.metrics.top1 <= 1.0);
  CHECK(report.metrics.per_class_top1.size() == 4);
  CHECK(trained.input_dim() == config.data.input_dim);
  CHECK(trained.finite());
  CHECK(report.config["seed"] == 11);

  nlohmann::ordered_json j = prk::report_to_json(report);
  CHECK(j["curve"].size() == config.epochs);
  CHECK(j["digests"]["inputs"].get<std::string>().size() == 16);
}

TEST_CASE("training is bit-reproducible for a fixed seed", "[trainer]") {
  TrainConfig config = small_config();
  config.epochs = 3;
  PhraseHead head_a(1, 1, 1, 1), head_b(1, 1, 1, 1);
  TrainingReport a = prk::run_training(config, &head_a);
  TrainingReport b = prk::run_training(config, &head_b);

  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t e = 0; e < a.curve.size(); ++e) {
    CHECK(a.curve[e].total == b.curve[e].total);
    CHECK(a.curve[e].phrase == b.curve[e].phrase);
    CHECK(a.curve[e].distilling == b.curve[e].distilling);
    CHECK(a.curve[e].hoi == b.curve[e].hoi);
  }
  CHECK(a.digests.inputs == b.digests.inputs);
  CHECK(a.digests.class_ids == b.digests.class_ids);
  CHECK(a.digests.targets == b.digests.targets);
  CHECK(a.metrics.top1 == b.metrics.top1);
  CHECK(head_a.to_json().dump() == head_b.to_json().dump());

  config.seed = 12;
  TrainingReport c = prk::run_training(config);
  CHECK(a.curve.front().phrase != c.curve.front().phrase);
}

TEST_CASE("composition changes targets but not inputs or order",
          "[trainer]") {
  TrainConfig config = small_config();
  config.epochs = 2;
  TrainingReport off = prk::run_training(config);

  config.composition = true;  // pv 0.8, po 0.2 defaults
  TrainingReport on = prk::run_training(config);
  CHECK(on.digests.inputs == off.digests.inputs);
  CHECK(on.digests.class_ids == off.digests.class_ids);
  CHECK(on.digests.targets != off.digests.targets);

  // degenerate composition reproduces the canonical targets
  config.compose.p_v = 0.0;
  config.compose.p_o = 0.0;
  TrainingReport identity = prk::run_training(config);
  CHECK(identity.digests.targets == off.digests.targets);
}

TEST_CASE("alpha only scales the reported total", "[trainer]") {
  TrainConfig config = small_config();
  config.epochs = 2;
  PhraseHead head_a(1, 1, 1, 1), head_b(1, 1, 1, 1);
  config.loss.alpha = 0.1;
  TrainingReport a = prk::run_training(config, &head_a);
  config.loss.alpha = 0.9;
  TrainingReport b = prk::run_training(config, &head_b);

  CHECK(head_a.to_json().dump() == head_b.to_json().dump());
  for (std::size_t e = 0; e < a.curve.size(); ++e) {
    CHECK(a.curve[e].phrase == b.curve[e].phrase);
    CHECK(a.curve[e].total != b.curve[e].total);
  }
}

TEST_CASE("the surrogate branch never touches the phrase head", "[trainer]") {
  TrainConfig config = small_config();
  config.epochs = 2;
  PhraseHead with(1, 1, 1, 1), without(1, 1, 1, 1);
  TrainingReport on = prk::run_training(config, &with);
  config.surrogate = false;
  TrainingReport off = prk::run_training(config, &without);

  CHECK(with.to_json().dump() == without.to_json().dump());
  CHECK(on.curve.front().hoi > 0.0);
  CHECK(off.curve.front().hoi == 0.0);
  for (std::size_t e = 0; e < on.curve.size(); ++e) {
    CHECK(on.curve[e].phrase == off.curve[e].phrase);
  }
}

TEST_CASE("with the surrogate off the total is alpha times phrase",
          "[trainer]") {
  TrainConfig config = small_config();
  config.epochs = 2;
  config.surrogate = false;
  config.loss.alpha = 1.0;  // keeps the per-batch addition exact
  TrainingReport report = prk::run_training(config);
  for (const prk::EpochStats& e : report.curve) {
    CHECK(e.total == e.phrase);
    CHECK(e.hoi == 0.0);
  }
}

TEST_CASE("loss curve csv lists one row per epoch", "[trainer]") {
  TrainConfig config = small_config();
  config.epochs = 3;
  TrainingReport report = prk::run_training(config);
  std::stringstream out;
  prk::write_loss_curve_csv(out, report.curve);
  std::string csv = out.str();
  CHECK(csv.rfind("epoch,total,phrase,distilling,triplet,hoi\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  std::string row1 = csv.substr(csv.find('\n') + 1);
  row1.erase(row1.find('\n'));
  double total = std::stod(row1.substr(row1.find(',') + 1));
  CHECK(total == report.curve[0].total);
}

TEST_CASE("an exploding configuration reports divergence", "[trainer]") {
  TrainConfig config = small_config();
  config.optimizer = prk::OptimizerKind::sgd;
  config.learning_rate = 1e12;
  config.loss.distilling = prk::Distilling::MSE;
  config.epochs = 10;
  config.surrogate = false;
  CHECK_THROWS_WITH(prk::run_training(config), ContainsSubstring("diverged"));
}

TEST_CASE("train validates the head against the setup", "[trainer]") {
  TrainConfig config = small_config();
  prk::TrainSetup setup = prk::make_train_setup(config);
  PhraseHead wrong_in(config.data.input_dim + 1, 8, 8,
                      setup.lut.dimension());
  CHECK_THROWS_WITH(prk::train(wrong_in, setup, config),
                    ContainsSubstring("input width"));
  PhraseHead wrong_out(config.data.input_dim, 8, 8, 7);
  CHECK_THROWS_WITH(prk::train(wrong_out, setup, config),
                    ContainsSubstring("output width"));
}

TEST_CASE("repro bundles the four pinned runs", "[trainer][repro]") {
  // smallest possible smoke of the repro config builder (full runs are
  // exercised by the acceptance suite and the cli)
  TrainConfig config = prk::repro_base_config(7);
  CHECK(config.seed == 7);
  CHECK(config.data.num_classes == 30);
  CHECK(config.loss.beta == 0.0);
  CHECK_FALSE(config.composition);
  config.validate();
}
