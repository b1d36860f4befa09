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

#include <compare>
#include <string>
#include <vector>

#include <json.hpp>

#include "prk/common.hpp"
#include "prk/embedding_store.hpp"

namespace prk {

/*! Ordered (human, verb, object) token triple.
 *
 * Slots are kept verbatim as three separate fields; the canonical text
 * form joins them with single spaces. Multiword slots ("dining table")
 * stay one slot, so translation back to an HOI triplet never re-parses
 * the joined text.
 */
struct RelationalPhrase {
  std::string human;
  std::string verb;
  std::string object;

  std::string text() const { return human + " " + verb + " " + object; }

  auto operator<=>(const RelationalPhrase&) const = default;
};

//! Phrase embedding: 3*D values in human-verb-object slot order.
using PhraseEmbedding = std::vector<double>;

//! Lowercases the three tokens and builds the phrase. Empty tokens throw.
inline RelationalPhrase triplet_to_phrase(std::string_view human,
                                          std::string_view verb,
                                          std::string_view object) {
  ensure(!human.empty(), "triplet_to_phrase: empty human token");
  ensure(!verb.empty(), "triplet_to_phrase: empty verb token");
  ensure(!object.empty(), "triplet_to_phrase: empty object token");
  return RelationalPhrase{to_lower(human), to_lower(verb), to_lower(object)};
}

//! Inverse direction: phrase fields to an annotation-style HOI triplet.
//! The human slot maps to the constant "human"; multiword slots get their
//! spaces replaced by underscores, field by field.
inline RelationalPhrase to_hoi_instance(const RelationalPhrase& phrase) {
  auto underscored = [](const std::string& s) {
    std::string out = s;
    for (char& c : out) {
      if (c == ' ') {
        c = '_';
      }
    }
    return out;
  };
  return RelationalPhrase{"human", underscored(phrase.verb),
                          underscored(phrase.object)};
}

//! Interface over phrase-embedding generation strategies.
class PhraseEncoder {
 public:
  virtual ~PhraseEncoder() = default;
  virtual PhraseEmbedding encode(const RelationalPhrase& phrase) const = 0;
  virtual std::size_t dimension() const = 0;
};

/*! Concatenation encoder: lookup each slot and join the three word
 * vectors in human-verb-object order. Compound slots fall back to the
 * mean of their parts.
 */
class ConcatPhraseEncoder : public PhraseEncoder {
 public:
  explicit ConcatPhraseEncoder(const EmbeddingStore& store) : store_(store) {}

  PhraseEmbedding encode(const RelationalPhrase& phrase) const override {
    PhraseEmbedding out;
    out.reserve(dimension());
    for (const std::string* slot :
         {&phrase.human, &phrase.verb, &phrase.object}) {
      auto v = store_.lookup(*slot, OovPolicy::mean_of_parts);
      out.insert(out.end(), v->begin(), v->end());
    }
    return out;
  }

  std::size_t dimension() const override { return 3 * store_.dimension(); }

 private:
  const EmbeddingStore& store_;
};

inline PhraseEmbedding encode_phrase(const EmbeddingStore& store,
                                     const RelationalPhrase& phrase) {
  return ConcatPhraseEncoder(store).encode(phrase);
}

//! One HOI instance as annotated: {human, verb, object} strings.
struct HoiAnnotation {
  std::string human;
  std::string verb;
  std::string object;
};

//! human_token overrides the annotated human spelling so every phrase
//! shares one human slot; pass "" to keep the annotation verbatim.
inline RelationalPhrase annotation_to_phrase(
    const HoiAnnotation& ann, const std::string& human_token = "human") {
  return triplet_to_phrase(human_token.empty() ? ann.human : human_token,
                           ann.verb, ann.object);
}

/*! Parse annotation JSON: an array of {human, verb, object} records,
 * or an array of such arrays (one per image); nested arrays are
 * flattened in order.
 */
inline std::vector<HoiAnnotation> parse_annotations(const nlohmann::json& j) {
  ensure(j.is_array(), "annotations: top-level JSON must be an array");
  std::vector<HoiAnnotation> out;
  auto parse_record = [&out](const nlohmann::json& rec) {
    ensure(rec.is_object() && rec.contains("human") && rec.contains("verb") &&
               rec.contains("object"),
           "annotations: record must have human/verb/object fields");
    out.push_back(HoiAnnotation{rec.at("human").get<std::string>(),
                                rec.at("verb").get<std::string>(),
                                rec.at("object").get<std::string>()});
  };
  for (const auto& item : j) {
    if (item.is_array()) {
      for (const auto& rec : item) {
        parse_record(rec);
      }
    } else {
      parse_record(item);
    }
  }
  return out;
}

inline std::vector<HoiAnnotation> load_annotations(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("annotations: JSON parse failure: ") + e.what());
  }
  return parse_annotations(j);
}

}  // namespace prk
