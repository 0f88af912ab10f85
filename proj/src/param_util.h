// Copyright 2026 The CoughScreen Authors. All Rights Reserved.
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

// Internal helpers for reading hyperparameter JSON.

#ifndef COUGHSCREEN_SRC_PARAM_UTIL_H_
#define COUGHSCREEN_SRC_PARAM_UTIL_H_

#include <string>

#include "coughscreen/error.h"
#include "json.hpp"

namespace coughscreen::models::internal {

inline double GetReal(const nlohmann::json& p, const char* key) {
  const auto& v = p.at(key);
  if (!v.is_number()) {
    throw Error(ErrorKind::kValue, std::string("parameter '") + key + "' must be a number");
  }
  return v.get<double>();
}

inline long long GetInt(const nlohmann::json& p, const char* key) {
  const auto& v = p.at(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()))) {
    return static_cast<long long>(v.get<double>());
  }
  throw Error(ErrorKind::kValue, std::string("parameter '") + key + "' must be an integer");
}

inline bool GetBool(const nlohmann::json& p, const char* key) {
  const auto& v = p.at(key);
  if (!v.is_boolean()) {
    throw Error(ErrorKind::kValue, std::string("parameter '") + key + "' must be a boolean");
  }
  return v.get<bool>();
}

inline std::string GetString(const nlohmann::json& p, const char* key) {
  const auto& v = p.at(key);
  if (!v.is_string()) {
    throw Error(ErrorKind::kValue, std::string("parameter '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

inline void Require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::kValue, message);
}

// Deterministic per-stream seeds (splitmix64 finalizer).
inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace coughscreen::models::internal

#endif  // COUGHSCREEN_SRC_PARAM_UTIL_H_
