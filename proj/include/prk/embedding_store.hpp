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

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prk/common.hpp"

namespace prk {

static_assert(std::endian::native == std::endian::little,
              "binary vector io assumes a little-endian host");

//! One vocabulary token and its D-dimensional vector.
struct WordVector {
  std::string token;
  std::vector<float> vector;
};

//! What lookup does when a word is not in the vocabulary.
//!  - error:         throw.
//!  - skip:          return nullopt, caller drops the word.
//!  - mean_of_parts: split compound words on space/underscore and average
//!                   the vectors of the parts that are in the vocabulary.
enum class OovPolicy { error, skip, mean_of_parts };

/*! Immutable set of pretrained word vectors, indexed by token.
 *
 * Vectors are kept exactly as loaded; they are never re-normalized, since
 * downstream distilling losses regress raw embedding values. Construction
 * validates dimensions, token uniqueness and finiteness once, after which
 * the store is safe to share across concurrent readers.
 */
class EmbeddingStore {
 public:
  EmbeddingStore(std::size_t dimension, std::vector<WordVector> entries)
      : dimension_(dimension), entries_(std::move(entries)) {
    ensure(dimension_ > 0, "EmbeddingStore: dimension must be positive");
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const WordVector& wv = entries_[i];
      ensure(!wv.token.empty(), "EmbeddingStore: empty token");
      ensure(wv.vector.size() == dimension_,
             "EmbeddingStore: entry '" + wv.token + "' has dimension " +
                 std::to_string(wv.vector.size()) + ", expected " +
                 std::to_string(dimension_));
      for (float v : wv.vector) {
        ensure(std::isfinite(v),
               "EmbeddingStore: non-finite component in '" + wv.token + "'");
      }
      bool inserted = index_.emplace(wv.token, i).second;
      ensure(inserted, "EmbeddingStore: duplicate token '" + wv.token + "'");
    }
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<WordVector>& entries() const { return entries_; }

  bool contains(std::string_view token) const {
    return index_.find(std::string(token)) != index_.end();
  }

  //! Raw vector of an exact token, nullptr when absent. No case fallback.
  const std::vector<float>* find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? nullptr : &entries_[it->second].vector;
  }

  /*! Resolve a word to a vector.
   *
   * Tries the exact token first, then its lowercased form. Under
   * mean_of_parts a compound word absent from the vocabulary is split on
   * spaces and underscores and the mean of its in-vocabulary parts is
   * returned; a compound with zero in-vocabulary parts is an error under
   * every policy.
   */
  std::optional<std::vector<double>> lookup(
      std::string_view word, OovPolicy policy = OovPolicy::error) const {
    ensure(!word.empty(), "lookup: empty word");
    if (const std::vector<float>* v = find_with_case_fallback(word)) {
      return promote(*v);
    }
    if (policy == OovPolicy::mean_of_parts && is_compound(word)) {
      std::vector<double> sum(dimension_, 0.0);
      std::size_t found = 0;
      for (std::string_view part : split_parts(word)) {
        if (const std::vector<float>* v = find_with_case_fallback(part)) {
          for (std::size_t i = 0; i < dimension_; ++i) {
            sum[i] += static_cast<double>((*v)[i]);
          }
          ++found;
        }
      }
      ensure(found > 0, "lookup: compound word '" + std::string(word) +
                            "' has no in-vocabulary parts");
      for (double& x : sum) {
        x /= static_cast<double>(found);
      }
      return sum;
    }
    switch (policy) {
      case OovPolicy::skip:
        return std::nullopt;
      default:
        throw Error("lookup: out-of-vocabulary word '" + std::string(word) +
                    "'");
    }
  }

 private:
  const std::vector<float>* find_with_case_fallback(std::string_view w) const {
    if (const std::vector<float>* v = find(w)) {
      return v;
    }
    std::string lower = to_lower(w);
    if (lower != w) {
      return find(lower);
    }
    return nullptr;
  }

  static bool is_compound(std::string_view w) {
    return w.find(' ') != std::string_view::npos ||
           w.find('_') != std::string_view::npos;
  }

  static std::vector<std::string_view> split_parts(std::string_view w) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= w.size(); ++i) {
      if (i == w.size() || w[i] == ' ' || w[i] == '_') {
        if (i > start) {
          parts.push_back(w.substr(start, i - start));
        }
        start = i + 1;
      }
    }
    return parts;
  }

  static std::vector<double> promote(const std::vector<float>& v) {
    return std::vector<double>(v.begin(), v.end());
  }

  std::size_t dimension_;
  std::vector<WordVector> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

//! cos(a, b) = dot(a,b) / (|a| |b|). Throws on zero-norm input.
inline double cosine_similarity(std::span<const double> a,
                                std::span<const double> b) {
  ensure(a.size() == b.size(), "cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  ensure(na > 0.0 && nb > 0.0, "cosine_similarity: zero-norm input");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cosine_similarity(const std::vector<float>& a,
                                const std::vector<float>& b) {
  std::vector<double> da(a.begin(), a.end());
  std::vector<double> db(b.begin(), b.end());
  return cosine_similarity(std::span<const double>(da),
                           std::span<const double>(db));
}

namespace detail {

inline std::pair<std::size_t, std::size_t> parse_header(
    const std::string& line) {
  std::size_t vocab = 0, dim = 0;
  const char* begin = line.data();
  const char* end = line.data() + line.size();
  auto r1 = std::from_chars(begin, end, vocab);
  ensure(r1.ec == std::errc() && r1.ptr != end && *r1.ptr == ' ',
         "malformed header: expected '<vocab_size> <dimension>'");
  auto r2 = std::from_chars(r1.ptr + 1, end, dim);
  ensure(r2.ec == std::errc(),
         "malformed header: expected '<vocab_size> <dimension>'");
  for (const char* p = r2.ptr; p != end; ++p) {
    ensure(*p == ' ' || *p == '\r',
           "malformed header: trailing characters");
  }
  ensure(dim > 0, "malformed header: dimension must be positive");
  return {vocab, dim};
}

inline float parse_float_token(std::string_view tok, const std::string& where) {
  float value = 0.0f;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  ensure(r.ec == std::errc() && r.ptr == tok.data() + tok.size(),
         "bad numeric component '" + std::string(tok) + "' " + where);
  ensure(std::isfinite(value),
         "non-finite component '" + std::string(tok) + "' " + where);
  return value;
}

}  // namespace detail

/*! Parse the word2vec text format.
 *
 * First line is "<vocab_size> <dimension>"; each following line is a
 * token and D decimal reals, space-separated. The declared entry count
 * must match exactly; duplicate tokens and non-finite values are errors.
 */
inline EmbeddingStore load_text(std::istream& in) {
  std::string line;
  ensure(static_cast<bool>(std::getline(in, line)),
         "malformed header: empty stream");
  auto [vocab, dim] = detail::parse_header(line);

  std::vector<WordVector> entries;
  entries.reserve(vocab);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;  // tolerate blank lines, entry count is still enforced
    }
    ++row;
    ensure(row <= vocab, "entry-count mismatch: more rows than header "
                         "declares (" + std::to_string(vocab) + ")");
    std::string where = "on row " + std::to_string(row);
    std::size_t pos = line.find(' ');
    ensure(pos != std::string::npos && pos > 0,
           "wrong component count " + where);
    WordVector wv;
    wv.token = line.substr(0, pos);
    wv.vector.reserve(dim);
    std::size_t start = pos + 1;
    while (start < line.size()) {
      std::size_t next = line.find(' ', start);
      if (next == std::string::npos) {
        next = line.size();
      }
      if (next > start) {
        wv.vector.push_back(detail::parse_float_token(
            std::string_view(line).substr(start, next - start), where));
      }
      start = next + 1;
    }
    ensure(wv.vector.size() == dim,
           "wrong component count " + where + ": got " +
               std::to_string(wv.vector.size()) + ", expected " +
               std::to_string(dim));
    entries.push_back(std::move(wv));
  }
  ensure(row == vocab, "entry-count mismatch: header declares " +
                           std::to_string(vocab) + " entries, found " +
                           std::to_string(row));
  return EmbeddingStore(dim, std::move(entries));
}

/*! Parse the word2vec binary format.
 *
 * ASCII header "<vocab> <dim>\n", then per entry: token bytes, a single
 * 0x20, and D little-endian float32 values. Newlines between entries
 * (written by the original word2vec tool) are tolerated.
 */
inline EmbeddingStore load_binary(std::istream& in) {
  std::string line;
  ensure(static_cast<bool>(std::getline(in, line)),
         "malformed header: empty stream");
  auto [vocab, dim] = detail::parse_header(line);

  constexpr std::size_t kMaxTokenBytes = 1 << 16;
  std::vector<WordVector> entries;
  entries.reserve(vocab);
  for (std::size_t e = 0; e < vocab; ++e) {
    WordVector wv;
    char c;
    // token bytes up to the 0x20 separator; skip inter-entry newlines
    while (true) {
      ensure(static_cast<bool>(in.get(c)),
             "truncated stream: ended inside token of entry " +
                 std::to_string(e));
      if (c == ' ') {
        ensure(!wv.token.empty(), "empty token in entry " + std::to_string(e));
        break;
      }
      if ((c == '\n' || c == '\r') && wv.token.empty()) {
        continue;
      }
      wv.token.push_back(c);
      ensure(wv.token.size() <= kMaxTokenBytes,
             "token too long in entry " + std::to_string(e));
    }
    wv.vector.resize(dim);
    in.read(reinterpret_cast<char*>(wv.vector.data()),
            static_cast<std::streamsize>(dim * sizeof(float)));
    ensure(in.gcount() == static_cast<std::streamsize>(dim * sizeof(float)),
           "truncated stream: ended mid-vector in entry '" + wv.token + "'");
    entries.push_back(std::move(wv));
  }
  char trail;
  while (in.get(trail)) {
    ensure(trail == '\n' || trail == '\r' || trail == ' ',
           "trailing bytes after last declared entry");
  }
  return EmbeddingStore(dim, std::move(entries));
}

//! Write the binary layout load_binary parses; round-trips bit-exactly.
inline void write_binary(std::ostream& out, const EmbeddingStore& store) {
  out << store.size() << ' ' << store.dimension() << '\n';
  for (const WordVector& wv : store.entries()) {
    out << wv.token << ' ';
    out.write(reinterpret_cast<const char*>(wv.vector.data()),
              static_cast<std::streamsize>(wv.vector.size() * sizeof(float)));
  }
  ensure(static_cast<bool>(out), "write_binary: stream failure");
}

//! Write the text layout load_text parses. Components use the shortest
//! decimal form that round-trips to the same float32.
inline void write_text(std::ostream& out, const EmbeddingStore& store) {
  out << store.size() << ' ' << store.dimension() << '\n';
  char buf[64];
  for (const WordVector& wv : store.entries()) {
    out << wv.token;
    for (float v : wv.vector) {
      auto r = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ' << std::string_view(buf, r.ptr - buf);
    }
    out << '\n';
  }
  ensure(static_cast<bool>(out), "write_text: stream failure");
}

enum class VectorFormat { text, binary };

inline EmbeddingStore load_store(const std::string& path, VectorFormat fmt) {
  std::ifstream in(path, std::ios::binary);
  ensure(in.is_open(), "cannot open embedding file '" + path + "'");
  return fmt == VectorFormat::text ? load_text(in) : load_binary(in);
}

inline void save_store(const std::string& path, const EmbeddingStore& store,
                       VectorFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.is_open(), "cannot open '" + path + "' for writing");
  fmt == VectorFormat::text ? write_text(out, store)
                            : write_binary(out, store);
}

}  // namespace prk
