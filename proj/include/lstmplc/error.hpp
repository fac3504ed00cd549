// Copyright 2026 The lstmplc Authors
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

#include <stdexcept>
#include <string>

namespace lstmplc {

enum class ErrorCode {
  kConfig = 1,
  kIo,
  kIntegrity,
  kUnsupportedVersion,
  kUnsupportedFormat,
  kNumerical,
};

const char* error_code_name(ErrorCode code);

// All library failures are thrown as Error; the C API maps the code to a
// status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfig, what);
}

}  // namespace lstmplc
