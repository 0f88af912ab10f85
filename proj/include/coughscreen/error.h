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

#ifndef COUGHSCREEN_ERROR_H_
#define COUGHSCREEN_ERROR_H_

#include <stdexcept>
#include <string>

namespace coughscreen {

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kUsage,
  kDecode,
  kUnsupportedFormat,
  kEmptyAudio,
  kNotFound,
  kSchema,
  kData,
  kValue,
  kUndefinedMetric,
  kInfeasible,
  kStratification,
  kAugmentation,
  kFit,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace coughscreen

#endif  // COUGHSCREEN_ERROR_H_
