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

#include <map>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "prk/composition.hpp"
#include "prk/neighborhood.hpp"
#include "prk/synthetic.hpp"

using prk::CompositionConfig;
using prk::NeighborhoodConfig;
using prk::NeighborhoodMap;
using prk::RelationalPhrase;

namespace {

NeighborhoodMap fixture_map(const std::vector<std::string>& queries) {
  prk::EmbeddingStore store = prk::fixture_vocabulary();
  return prk::build_neighborhoods(store, queries, NeighborhoodConfig{10, 0.7});
}

double chi_square(const std::vector<std::size_t>& observed, double expected) {
  double chi = 0.0;
  for (std::size_t o : observed) {
    double d = static_cast<double>(o) - expected;
    chi += d * d / expected;
  }
  return chi;
}

}  // namespace

TEST_CASE("support of the kiss/horse fixture enumerates 20 phrases",
          "[composition]") {
  NeighborhoodMap map = fixture_map({"kiss", "horse"});
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "horse");
  prk::CompositionSupport sup = prk::support(phrase, map);

  CHECK(sup.size == 20);  // (3 verb neighbors + 1) * (4 object neighbors + 1)
  REQUIRE(sup.variants.size() == 20);

  // brute-force oracle: cross product assembled by hand
  std::set<RelationalPhrase> oracle;
  std::vector<std::string> verbs = {"kiss", "kisses", "smooch", "kissing"};
  std::vector<std::string> objects = {"horse", "horses", "racehorse",
                                      "stallion", "steed"};
  for (const std::string& v : verbs) {
    for (const std::string& o : objects) {
      oracle.insert(RelationalPhrase{"human", v, o});
    }
  }
  CHECK(sup.variants == oracle);
}

TEST_CASE("every sampled phrase lies inside the support", "[composition]") {
  NeighborhoodMap map = fixture_map({"kiss", "horse"});
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "horse");
  prk::CompositionSupport sup = prk::support(phrase, map);
  CompositionConfig config;  // pv .8, po .2
  prk::Rng rng(123);
  for (int i = 0; i < 2000; ++i) {
    RelationalPhrase sample = prk::compose(phrase, map, config, rng);
    CHECK(sample.human == "human");
    REQUIRE(sup.variants.count(sample) == 1);
  }
}

TEST_CASE("replacement rates and neighbor choice match the model",
          "[composition]") {
  // 1e5 draws at pv=0.8/po=0.2: empirical slot-replacement rates within
  // +-0.01, and uniform neighbor choice not rejected by chi-square at
  // alpha = 0.01 (dof 2 -> 9.2103..., dof 3 -> 11.3449...).
  NeighborhoodMap map = fixture_map({"kiss", "horse"});
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "horse");
  CompositionConfig config;
  config.p_v = 0.8;
  config.p_o = 0.2;
  prk::Rng rng(20260817);

  const std::size_t n = 100000;
  std::size_t verb_replaced = 0, object_replaced = 0;
  std::map<std::string, std::size_t> verb_counts, object_counts;
  for (std::size_t i = 0; i < n; ++i) {
    RelationalPhrase s = prk::compose(phrase, map, config, rng);
    if (s.verb != "kiss") {
      ++verb_replaced;
      ++verb_counts[s.verb];
    }
    if (s.object != "horse") {
      ++object_replaced;
      ++object_counts[s.object];
    }
  }
  double verb_rate = static_cast<double>(verb_replaced) / n;
  double object_rate = static_cast<double>(object_replaced) / n;
  CHECK_THAT(verb_rate, Catch::Matchers::WithinAbs(0.8, 0.01));
  CHECK_THAT(object_rate, Catch::Matchers::WithinAbs(0.2, 0.01));

  REQUIRE(verb_counts.size() == 3);
  std::vector<std::size_t> vc;
  for (const auto& [token, count] : verb_counts) vc.push_back(count);
  CHECK(chi_square(vc, static_cast<double>(verb_replaced) / 3.0) <
        9.2103403719761801);

  REQUIRE(object_counts.size() == 4);
  std::vector<std::size_t> oc;
  for (const auto& [token, count] : object_counts) oc.push_back(count);
  CHECK(chi_square(oc, static_cast<double>(object_replaced) / 4.0) <
        11.344866730144373);
}

TEST_CASE("similarity weighting draws in proportion to similarity",
          "[composition]") {
  NeighborhoodMap map;
  prk::NeighborhoodSet set;
  set.query = "kiss";
  set.neighbors = {{"often", 0.8}, {"seldom", 0.4}};  // 2/3 vs 1/3
  map["kiss"] = set;
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "wine");
  CompositionConfig config;
  config.p_v = 1.0;
  config.p_o = 0.0;
  config.weighting = prk::Weighting::similarity;
  prk::Rng rng(99);
  const std::size_t n = 100000;
  std::size_t often = 0;
  for (std::size_t i = 0; i < n; ++i) {
    RelationalPhrase s = prk::compose(phrase, map, config, rng);
    if (s.verb == "often") ++often;
  }
  CHECK_THAT(static_cast<double>(often) / n,
             Catch::Matchers::WithinAbs(2.0 / 3.0, 0.01));
}

TEST_CASE("slots without neighborhoods are kept", "[composition]") {
  NeighborhoodMap map = fixture_map({"kiss"});  // no entry for "wine"
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "wine");
  CompositionConfig config;
  config.p_v = 1.0;
  config.p_o = 1.0;
  prk::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    RelationalPhrase s = prk::compose(phrase, map, config, rng);
    CHECK(s.object == "wine");
    CHECK(s.verb != "kiss");  // pv = 1 and the verb set is non-empty
  }
  prk::CompositionSupport sup = prk::support(phrase, map);
  CHECK(sup.size == 4);  // (3+1) * (0+1)
}

TEST_CASE("zero probabilities keep the phrase unchanged", "[composition]") {
  NeighborhoodMap map = fixture_map({"kiss", "horse"});
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "horse");
  CompositionConfig config;
  config.p_v = 0.0;
  config.p_o = 0.0;
  prk::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    CHECK(prk::compose(phrase, map, config, rng) == phrase);
  }
}

TEST_CASE("bernoulli draws are consumed even for missing sets",
          "[composition]") {
  // With po = 0 the object slot never picks a neighbor, so the presence
  // or absence of an object neighborhood must not shift the verb stream.
  NeighborhoodMap with_object = fixture_map({"kiss", "horse"});
  NeighborhoodMap verb_only = fixture_map({"kiss"});
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "horse");
  CompositionConfig config;
  config.p_v = 0.5;
  config.p_o = 0.0;
  prk::Rng rng_a(77), rng_b(77);
  for (int i = 0; i < 500; ++i) {
    RelationalPhrase a = prk::compose(phrase, with_object, config, rng_a);
    RelationalPhrase b = prk::compose(phrase, verb_only, config, rng_b);
    CHECK(a.verb == b.verb);
  }
}

TEST_CASE("composition is deterministic under a fixed seed", "[composition]") {
  NeighborhoodMap map = fixture_map({"kiss", "horse"});
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "horse");
  CompositionConfig config;
  auto run = [&](std::uint64_t seed) {
    prk::Rng rng = prk::Rng::stream(seed, "test");
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i) {
      texts.push_back(prk::compose(phrase, map, config, rng).text());
    }
    return texts;
  };
  CHECK(run(1) == run(1));
  CHECK(run(1) != run(2));
}

TEST_CASE("composition config validates probabilities", "[composition]") {
  CompositionConfig config;
  config.p_v = 1.5;
  NeighborhoodMap map;
  RelationalPhrase phrase = prk::triplet_to_phrase("human", "kiss", "horse");
  prk::Rng rng(1);
  CHECK_THROWS_AS(prk::compose(phrase, map, config, rng), prk::Error);
}
