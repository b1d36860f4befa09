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
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "prk/common.hpp"
#include "prk/embedding_store.hpp"

namespace prk {

struct Neighbor {
  std::string token;
  double similarity;

  bool operator==(const Neighbor&) const = default;
};

//! Semantic neighborhood of one query word: the top-K most cosine-similar
//! vocabulary words above t_sim, the query itself excluded.
struct NeighborhoodSet {
  std::string query;
  std::vector<Neighbor> neighbors;

  bool operator==(const NeighborhoodSet&) const = default;
};

struct NeighborhoodConfig {
  std::size_t k = 10;
  double t_sim = 0.7;
};

using NeighborhoodMap = std::map<std::string, NeighborhoodSet>;

/*! Exact brute-force neighborhood search.
 *
 * For each query the candidate pool (full vocabulary by default) is
 * scanned; candidates with cosine similarity strictly above t_sim are
 * kept, sorted by similarity descending (ties by token, ascending), and
 * truncated to K. Compound queries resolve through the mean-of-parts
 * rule. Deterministic by construction.
 */
inline NeighborhoodMap build_neighborhoods(
    const EmbeddingStore& store, const std::vector<std::string>& queries,
    const NeighborhoodConfig& config,
    const std::vector<std::string>* candidate_pool = nullptr) {
  ensure(config.k >= 1, "build_neighborhoods: K must be >= 1");

  // materialize the pool once; entries hold (token, vector)
  std::vector<const WordVector*> pool;
  std::vector<WordVector> restricted;  // owns vectors for a supplied pool
  if (candidate_pool == nullptr) {
    pool.reserve(store.size());
    for (const WordVector& wv : store.entries()) {
      pool.push_back(&wv);
    }
  } else {
    restricted.reserve(candidate_pool->size());
    for (const std::string& token : *candidate_pool) {
      const std::vector<float>* v = store.find(token);
      ensure(v != nullptr, "build_neighborhoods: pool word '" + token +
                               "' not in the store");
      restricted.push_back(WordVector{token, *v});
    }
    for (const WordVector& wv : restricted) {
      pool.push_back(&wv);
    }
  }

  NeighborhoodMap out;
  for (const std::string& query : queries) {
    auto qvec = store.lookup(query, OovPolicy::mean_of_parts);
    NeighborhoodSet set;
    set.query = query;
    std::string lowered = to_lower(query);
    for (const WordVector* cand : pool) {
      if (cand->token == query || cand->token == lowered) {
        continue;
      }
      std::vector<double> cv(cand->vector.begin(), cand->vector.end());
      double sim = cosine_similarity(*qvec, cv);
      if (sim > config.t_sim) {
        set.neighbors.push_back(Neighbor{cand->token, sim});
      }
    }
    std::sort(set.neighbors.begin(), set.neighbors.end(),
              [](const Neighbor& a, const Neighbor& b) {
                if (a.similarity != b.similarity) {
                  return a.similarity > b.similarity;
                }
                return a.token < b.token;
              });
    if (set.neighbors.size() > config.k) {
      set.neighbors.resize(config.k);
    }
    out[query] = std::move(set);
  }
  return out;
}

namespace detail {

constexpr const char* kNeighborhoodHeader = "# prk neighborhoods v1";

inline std::string format_similarity(double s) {
  // fixed 17 significant digits: lossless for doubles and >= 9 digits
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", s);
  return buf;
}

}  // namespace detail

//! Line-oriented format: header, then `query<TAB>neighbor:sim,...` per
//! query. Similarities round-trip losslessly.
inline void save_neighborhoods(std::ostream& out, const NeighborhoodMap& map) {
  out << detail::kNeighborhoodHeader << '\n';
  for (const auto& [query, set] : map) {
    ensure(query.find('\t') == std::string::npos &&
               query.find('\n') == std::string::npos,
           "save_neighborhoods: query contains tab/newline");
    out << query << '\t';
    bool first = true;
    for (const Neighbor& n : set.neighbors) {
      ensure(n.token.find_first_of(",\t\n") == std::string::npos,
             "save_neighborhoods: neighbor token '" + n.token +
                 "' contains a reserved character");
      if (!first) {
        out << ',';
      }
      out << n.token << ':' << detail::format_similarity(n.similarity);
      first = false;
    }
    out << '\n';
  }
  ensure(static_cast<bool>(out), "save_neighborhoods: stream failure");
}

inline NeighborhoodMap load_neighborhoods(std::istream& in) {
  std::string line;
  ensure(static_cast<bool>(std::getline(in, line)),
         "load_neighborhoods: empty stream");
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  ensure(line == detail::kNeighborhoodHeader,
         "load_neighborhoods: missing header line");
  NeighborhoodMap map;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::string where = " at line " + std::to_string(lineno);
    std::size_t tab = line.find('\t');
    ensure(tab != std::string::npos && tab > 0,
           "load_neighborhoods: missing query field" + where);
    NeighborhoodSet set;
    set.query = line.substr(0, tab);
    ensure(map.find(set.query) == map.end(),
           "load_neighborhoods: duplicate query '" + set.query + "'" + where);
    std::size_t start = tab + 1;
    double prev = 2.0;
    while (start < line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        comma = line.size();
      }
      std::string item = line.substr(start, comma - start);
      std::size_t colon = item.rfind(':');
      ensure(colon != std::string::npos && colon > 0 &&
                 colon + 1 < item.size(),
             "load_neighborhoods: malformed neighbor '" + item + "'" + where);
      Neighbor n;
      n.token = item.substr(0, colon);
      char* endp = nullptr;
      std::string num = item.substr(colon + 1);
      n.similarity = std::strtod(num.c_str(), &endp);
      ensure(endp == num.c_str() + num.size() && std::isfinite(n.similarity),
             "load_neighborhoods: bad similarity '" + num + "'" + where);
      ensure(n.similarity <= prev,
             "load_neighborhoods: similarities not descending" + where);
      prev = n.similarity;
      set.neighbors.push_back(std::move(n));
      start = comma + 1;
    }
    map[set.query] = std::move(set);
  }
  return map;
}

inline void save_neighborhoods(const std::string& path,
                               const NeighborhoodMap& map) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.is_open(), "cannot open '" + path + "' for writing");
  save_neighborhoods(out, map);
}

inline NeighborhoodMap load_neighborhoods(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  ensure(in.is_open(), "cannot open neighborhood file '" + path + "'");
  return load_neighborhoods(in);
}

}  // namespace prk
