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

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "prk/embedding_store.hpp"
#include "prk/rng.hpp"

namespace prk_test {

//! Fresh path under the system temp dir; removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& stem) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("prk_test_" + stem + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

//! Random store with printable distinct tokens.
inline prk::EmbeddingStore make_random_store(std::size_t words,
                                             std::size_t dim,
                                             std::uint64_t seed) {
  prk::Rng rng(seed);
  std::vector<prk::WordVector> entries;
  entries.reserve(words);
  for (std::size_t w = 0; w < words; ++w) {
    prk::WordVector wv;
    wv.token = "w" + std::to_string(w);
    wv.vector.resize(dim);
    for (float& v : wv.vector) {
      v = static_cast<float>(rng.uniform(-5.0, 5.0));
    }
    entries.push_back(std::move(wv));
  }
  return prk::EmbeddingStore(dim, std::move(entries));
}

inline std::int64_t float_ulp_distance(float a, float b) {
  auto key = [](float f) {
    std::int32_t bits;
    static_assert(sizeof bits == sizeof f);
    std::memcpy(&bits, &f, sizeof f);
    return bits < 0 ? std::int64_t{std::numeric_limits<std::int32_t>::min()} -
                          bits
                    : std::int64_t{bits};
  };
  std::int64_t d = key(a) - key(b);
  return d < 0 ? -d : d;
}

}  // namespace prk_test
