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
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "prk/common.hpp"
#include "prk/embedding_store.hpp"
#include "prk/phrase.hpp"

namespace prk {

/*! Close-set retrieval table: every known phrase keyed by its embedding.
 * Queries score a candidate representation against all entries by cosine
 * similarity and return the best phrase.
 */
class LookUpTable {
 public:
  struct Entry {
    RelationalPhrase phrase;
    std::vector<float> embedding;
  };

  struct Match {
    RelationalPhrase phrase;
    double similarity = 0.0;
    std::size_t rank = 0;  //!< 0-based position in the score ordering
  };

  LookUpTable() = default;

  LookUpTable(std::size_t dimension, std::vector<Entry> entries)
      : dimension_(dimension), entries_(std::move(entries)) {
    ensure(dimension_ > 0, "lut: dimension must be positive");
    for (const Entry& e : entries_) {
      ensure(e.embedding.size() == dimension_,
             "lut: entry dimension mismatch for '" + e.phrase.text() + "'");
    }
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  bool contains(const RelationalPhrase& phrase) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.phrase == phrase; });
  }

  /*! Rank all entries against `query` and return the top `k`. Ordering is
   * similarity descending with phrase text ascending as the tie-break, so
   * results are stable across runs and platforms.
   */
  std::vector<Match> query(std::span<const double> query_vec,
                           std::size_t k = 1) const {
    ensure(!entries_.empty(), "lut: query against empty table");
    ensure(query_vec.size() == dimension_, "lut: query dimension mismatch");
    ensure(k > 0, "lut: k must be positive");
    std::vector<Match> matches;
    matches.reserve(entries_.size());
    for (const Entry& e : entries_) {
      std::vector<double> ev(e.embedding.begin(), e.embedding.end());
      Match m;
      m.phrase = e.phrase;
      m.similarity = cosine_similarity(query_vec, ev);
      matches.push_back(std::move(m));
    }
    std::sort(matches.begin(), matches.end(),
              [](const Match& a, const Match& b) {
                if (a.similarity != b.similarity) {
                  return a.similarity > b.similarity;
                }
                return a.phrase.text() < b.phrase.text();
              });
    if (matches.size() > k) {
      matches.resize(k);
    }
    for (std::size_t i = 0; i < matches.size(); ++i) {
      matches[i].rank = i;
    }
    return matches;
  }

  Match best(std::span<const double> query_vec) const {
    return query(query_vec, 1).front();
  }

 private:
  std::size_t dimension_ = 0;
  std::vector<Entry> entries_;
};

/*! Encode every phrase through the store and collect the table. Duplicate
 * phrases collapse to one entry; the phrase list order is preserved for
 * first occurrences.
 */
inline LookUpTable build_lut(const EmbeddingStore& store,
                             const std::vector<RelationalPhrase>& phrases) {
  ensure(!phrases.empty(), "build_lut: no phrases");
  std::vector<LookUpTable::Entry> entries;
  entries.reserve(phrases.size());
  for (const RelationalPhrase& phrase : phrases) {
    bool seen = std::any_of(
        entries.begin(), entries.end(),
        [&](const LookUpTable::Entry& e) { return e.phrase == phrase; });
    if (seen) continue;
    PhraseEmbedding emb = encode_phrase(store, phrase);
    LookUpTable::Entry entry;
    entry.phrase = phrase;
    entry.embedding.assign(emb.begin(), emb.end());
    entries.push_back(std::move(entry));
  }
  std::size_t dim = entries.front().embedding.size();
  return LookUpTable(dim, std::move(entries));
}

namespace detail {

inline void check_lut_field(const std::string& field) {
  ensure(field.find('\t') == std::string::npos &&
             field.find('\n') == std::string::npos &&
             field.find('\r') == std::string::npos,
         "lut: phrase field contains reserved characters: '" + field + "'");
}

}  // namespace detail

/*! Table file layout: "<count> <dim>\n" then per entry the three phrase
 * fields joined by tabs, a newline, and `dim` little-endian float32
 * values. Fields may contain spaces (compound words), hence tabs.
 */
inline void save_lut(std::ostream& out, const LookUpTable& lut) {
  ensure(lut.size() > 0, "save_lut: empty table");
  out << lut.size() << ' ' << lut.dimension() << '\n';
  for (const LookUpTable::Entry& e : lut.entries()) {
    detail::check_lut_field(e.phrase.human);
    detail::check_lut_field(e.phrase.verb);
    detail::check_lut_field(e.phrase.object);
    out << e.phrase.human << '\t' << e.phrase.verb << '\t' << e.phrase.object
        << '\n';
    out.write(reinterpret_cast<const char*>(e.embedding.data()),
              static_cast<std::streamsize>(e.embedding.size() *
                                           sizeof(float)));
  }
  ensure(out.good(), "save_lut: write failed");
}

inline LookUpTable load_lut(std::istream& in) {
  std::string header;
  ensure(static_cast<bool>(std::getline(in, header)),
         "load_lut: missing header");
  auto [count, dim] = detail::parse_header(header);
  std::vector<LookUpTable::Entry> entries;
  entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string line;
    ensure(static_cast<bool>(std::getline(in, line)),
           "load_lut: truncated at entry " + std::to_string(i));
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                             : line.find('\t', t1 + 1);
    ensure(t1 != std::string::npos && t2 != std::string::npos,
           "load_lut: malformed phrase line: '" + line + "'");
    LookUpTable::Entry entry;
    entry.phrase.human = line.substr(0, t1);
    entry.phrase.verb = line.substr(t1 + 1, t2 - t1 - 1);
    entry.phrase.object = line.substr(t2 + 1);
    ensure(!entry.phrase.human.empty() && !entry.phrase.verb.empty() &&
               !entry.phrase.object.empty(),
           "load_lut: empty phrase field in '" + line + "'");
    entry.embedding.resize(dim);
    in.read(reinterpret_cast<char*>(entry.embedding.data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    ensure(in.gcount() == static_cast<std::streamsize>(dim * sizeof(float)),
           "load_lut: truncated vector for '" + entry.phrase.text() + "'");
    for (float v : entry.embedding) {
      ensure(std::isfinite(v), "load_lut: non-finite value for '" +
                                   entry.phrase.text() + "'");
    }
    bool dup = std::any_of(entries.begin(), entries.end(),
                           [&](const LookUpTable::Entry& e) {
                             return e.phrase == entry.phrase;
                           });
    ensure(!dup, "load_lut: duplicate phrase '" + entry.phrase.text() + "'");
    entries.push_back(std::move(entry));
  }
  return LookUpTable(dim, std::move(entries));
}

inline void save_lut(const std::string& path, const LookUpTable& lut) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.is_open(), "save_lut: cannot open '" + path + "'");
  save_lut(out, lut);
}

inline LookUpTable load_lut(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  ensure(in.is_open(), "load_lut: cannot open '" + path + "'");
  return load_lut(in);
}

}  // namespace prk
