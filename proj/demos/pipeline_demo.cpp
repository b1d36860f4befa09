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
//
// Walks the full pipeline on the built-in fixture vocabulary: neighborhoods,
// label composition, phrase encoding, retrieval, and a short training run.

#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "prk/composition.hpp"
#include "prk/lut.hpp"
#include "prk/neighborhood.hpp"
#include "prk/phrase.hpp"
#include "prk/synthetic.hpp"
#include "prk/trainer.hpp"

int main() {
  std::cout << std::fixed << std::setprecision(3);

  prk::EmbeddingStore store = prk::fixture_vocabulary();
  std::cout << "vocabulary: " << store.size() << " words, dimension "
            << store.dimension() << "\n\n";

  std::vector<std::string> queries = prk::fixture_verbs();
  for (const std::string& object : prk::fixture_objects()) {
    queries.push_back(object);
  }
  prk::NeighborhoodMap map = prk::build_neighborhoods(store, queries, {});
  std::cout << "semantic neighborhoods (top-k cosine above the threshold):\n";
  for (const std::string& word : {std::string("kiss"), std::string("horse")}) {
    std::cout << "  " << word << ":";
    for (const prk::Neighbor& n : map.at(word).neighbors) {
      std::cout << ' ' << n.token << '(' << n.similarity << ')';
    }
    std::cout << '\n';
  }

  prk::RelationalPhrase phrase =
      prk::triplet_to_phrase("human", "kiss", "horse");
  prk::CompositionConfig compose_config;
  prk::CompositionSupport sup = prk::support(phrase, map);
  std::cout << "\ncomposing labels for '" << phrase.text() << "' (p_v="
            << compose_config.p_v << ", p_o=" << compose_config.p_o
            << ", support " << sup.size << "):\n";
  prk::Rng rng = prk::Rng::stream(7, "pipeline-demo");
  std::map<std::string, std::size_t> counts;
  for (int i = 0; i < 1000; ++i) {
    ++counts[prk::compose(phrase, map, compose_config, rng).text()];
  }
  std::size_t shown = 0;
  for (const auto& [text, count] : counts) {
    if (count >= 40) {
      std::cout << "  " << std::setw(4) << count << "  " << text << '\n';
      ++shown;
    }
  }
  std::cout << "  (" << counts.size() - shown << " rarer variants omitted)\n";

  std::vector<prk::RelationalPhrase> phrases = prk::fixture_phrases();
  prk::LookUpTable lut = prk::build_lut(store, phrases);
  std::cout << "\nclose-set table: " << lut.size()
            << " phrases, embedding dimension " << lut.dimension() << '\n';

  prk::PhraseEmbedding probe = prk::encode_phrase(
      store, prk::triplet_to_phrase("human", "kisses", "horses"));
  std::cout << "query 'human kisses horses' ->\n";
  for (const prk::LookUpTable::Match& m : lut.query(probe, 3)) {
    std::cout << "  " << m.rank << ". " << m.phrase.text()
              << "  (confidence " << m.similarity << ")\n";
  }

  prk::TrainConfig config;
  config.data.num_classes = 6;
  config.data.train_samples = 300;
  config.data.eval_per_class = 5;
  config.data.input_dim = 16;
  config.hidden1 = 32;
  config.hidden2 = 32;
  config.epochs = 20;
  config.batch_size = 32;
  config.loss.beta = 0.0;
  config.seed = 7;
  std::cout << "\ntraining a small phrase head (" << config.data.num_classes
            << " classes, " << config.data.train_samples << " samples, "
            << config.epochs << " epochs)...\n";
  prk::PhraseHead head(1, 1, 1, 1);
  prk::TrainingReport report = prk::run_training(config, &head);
  std::cout << "  distilling loss " << report.curve.front().distilling
            << " -> " << report.curve.back().distilling << '\n'
            << "  eval top-1 " << report.metrics.top1 << ", top-5 "
            << report.metrics.top5 << '\n';
  return 0;
}
