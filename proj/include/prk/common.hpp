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

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prk {

//! Error type thrown by every prk operation on contract violation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void ensure(bool cond, const std::string& msg) {
  if (!cond) {
    throw Error(msg);
  }
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

//! FNV-1a, used to derive named rng streams and for cheap content digests.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64_bytes(const void* data, std::size_t n,
                                   std::uint64_t seed = 0xcbf29ce484222325ULL) {
  return fnv1a64(
      std::string_view(static_cast<const char*>(data), n), seed);
}

}  // namespace prk
