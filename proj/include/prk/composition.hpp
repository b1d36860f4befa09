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
#include <set>
#include <string>
#include <vector>

#include "prk/common.hpp"
#include "prk/neighborhood.hpp"
#include "prk/phrase.hpp"
#include "prk/rng.hpp"

namespace prk {

enum class Weighting { uniform, similarity };

inline Weighting weighting_from_name(const std::string& name) {
  if (name == "uniform") return Weighting::uniform;
  if (name == "similarity") return Weighting::similarity;
  throw Error("weighting: unknown scheme '" + name + "'");
}

inline std::string weighting_name(Weighting weighting) {
  return weighting == Weighting::uniform ? "uniform" : "similarity";
}

struct CompositionConfig {
  double p_v = 0.8;   // verb replacement probability
  double p_o = 0.2;   // object replacement probability
  Weighting weighting = Weighting::uniform;
  std::uint64_t seed = 0;

  void validate() const {
    ensure(p_v >= 0.0 && p_v <= 1.0, "composition: p_v must be in [0,1]");
    ensure(p_o >= 0.0 && p_o <= 1.0, "composition: p_o must be in [0,1]");
  }
};

//! Exact enumeration of every phrase compose() can emit.
struct CompositionSupport {
  RelationalPhrase phrase;
  std::set<RelationalPhrase> variants;
  std::size_t size = 0;
};

namespace detail {

inline const NeighborhoodSet* find_set(const NeighborhoodMap& map,
                                       const std::string& token) {
  auto it = map.find(token);
  if (it == map.end() || it->second.neighbors.empty()) {
    return nullptr;
  }
  return &it->second;
}

inline const std::string& pick_neighbor(const NeighborhoodSet& set,
                                        Weighting weighting, Rng& rng) {
  if (weighting == Weighting::uniform) {
    return set.neighbors[rng.index(set.neighbors.size())].token;
  }
  double total = 0.0;
  for (const Neighbor& n : set.neighbors) {
    ensure(n.similarity > 0.0,
           "composition: similarity weighting needs positive similarities");
    total += n.similarity;
  }
  double u = rng.uniform() * total;
  double acc = 0.0;
  for (const Neighbor& n : set.neighbors) {
    acc += n.similarity;
    if (u < acc) {
      return n.token;
    }
  }
  return set.neighbors.back().token;
}

}  // namespace detail

/*! Draw one composed phrase.
 *
 * With probability p_v the verb is replaced by a draw from its
 * neighborhood set, else kept; independently the object is replaced with
 * probability p_o. A slot without a neighborhood entry is never replaced
 * (the Bernoulli draw is still consumed, so sequences stay aligned across
 * configurations). The human slot never changes.
 */
inline RelationalPhrase compose(const RelationalPhrase& phrase,
                                const NeighborhoodMap& neighborhoods,
                                const CompositionConfig& config, Rng& rng) {
  config.validate();
  RelationalPhrase out = phrase;
  const NeighborhoodSet* verb_set =
      detail::find_set(neighborhoods, phrase.verb);
  const NeighborhoodSet* object_set =
      detail::find_set(neighborhoods, phrase.object);

  bool replace_verb = rng.uniform() < config.p_v;
  if (replace_verb && verb_set != nullptr) {
    out.verb = detail::pick_neighbor(*verb_set, config.weighting, rng);
  }
  bool replace_object = rng.uniform() < config.p_o;
  if (replace_object && object_set != nullptr) {
    out.object = detail::pick_neighbor(*object_set, config.weighting, rng);
  }
  return out;
}

//! Reachable variants: ({verb} ∪ N_verb) × ({object} ∪ N_object), human
//! slot fixed. Size is (|N_verb|+1) * (|N_object|+1).
inline CompositionSupport support(const RelationalPhrase& phrase,
                                  const NeighborhoodMap& neighborhoods) {
  std::vector<std::string> verbs{phrase.verb};
  std::vector<std::string> objects{phrase.object};
  if (const NeighborhoodSet* s = detail::find_set(neighborhoods, phrase.verb)) {
    for (const Neighbor& n : s->neighbors) {
      verbs.push_back(n.token);
    }
  }
  if (const NeighborhoodSet* s =
          detail::find_set(neighborhoods, phrase.object)) {
    for (const Neighbor& n : s->neighbors) {
      objects.push_back(n.token);
    }
  }
  CompositionSupport sup;
  sup.phrase = phrase;
  for (const std::string& v : verbs) {
    for (const std::string& o : objects) {
      sup.variants.insert(RelationalPhrase{phrase.human, v, o});
    }
  }
  sup.size = sup.variants.size();
  return sup;
}

}  // namespace prk
