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

#include <cstdint>

#include <nlohmann/json.hpp>

#include "prk/trainer.hpp"

namespace prk {

/*! Reduced-scale training configuration shared by the repro runs: small
 * enough to finish in seconds, large enough for every ablation
 * direction to be visible.
 */
inline TrainConfig repro_base_config(std::uint64_t seed) {
  TrainConfig config;
  config.seed = seed;
  config.data.num_classes = 30;
  config.data.train_samples = 1500;
  config.data.eval_per_class = 10;
  config.data.input_dim = 64;
  config.data.noise_sigma = 0.1;
  config.data.zipf_exponent = 1.2;
  config.data.rare_threshold = 40;
  config.epochs = 12;
  config.batch_size = 64;
  config.learning_rate = 1e-3;
  config.hidden1 = 64;
  config.hidden2 = 64;
  config.loss.beta = 0.0;
  config.composition = false;
  config.surrogate = true;
  return config;
}

/*! Four deterministic runs on the bundled fixtures:
 *   l1_only        - distilling regression alone (the baseline)
 *   triplet        - adds the margin term (beta 10, m 0.5)
 *   composition    - stochastic target composition on (pv .8, po .2)
 *   random_targets - random word directions instead of structured ones
 * plus the paired comparisons each ablation exists to show.
 */
inline nlohmann::ordered_json run_repro(std::uint64_t seed) {
  TrainConfig base = repro_base_config(seed);

  TrainConfig triplet = base;
  triplet.loss.beta = 10.0;
  triplet.loss.margin = 0.5;

  TrainConfig composition = base;
  composition.composition = true;
  composition.compose.p_v = 0.8;
  composition.compose.p_o = 0.2;

  TrainConfig random_targets = base;
  random_targets.targets = TargetMode::random;

  TrainingReport r_base = run_training(base);
  TrainingReport r_triplet = run_training(triplet);
  TrainingReport r_composition = run_training(composition);
  TrainingReport r_random = run_training(random_targets);

  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["runs"] = nlohmann::ordered_json::object();
  j["runs"]["l1_only"] = report_to_json(r_base);
  j["runs"]["triplet"] = report_to_json(r_triplet);
  j["runs"]["composition"] = report_to_json(r_composition);
  j["runs"]["random_targets"] = report_to_json(r_random);
  j["comparisons"] = {
      {"min_inter_centroid_distance",
       {{"beta0", r_base.stats.min_inter_centroid_distance},
        {"beta10", r_triplet.stats.min_inter_centroid_distance}}},
      {"rare_top1",
       {{"composition_off", r_base.metrics.rare_top1},
        {"composition_on", r_composition.metrics.rare_top1}}},
      {"top1_by_target_mode",
       {{"word2vec", r_base.metrics.top1},
        {"random", r_random.metrics.top1}}}};
  return j;
}

}  // namespace prk
