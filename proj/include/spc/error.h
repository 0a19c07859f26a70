// Copyright 2026 The SPC Authors. All Rights Reserved.
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

#ifndef SPC_ERROR_H_
#define SPC_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace spc {

enum class ErrorCode {
  kInvalidArgument,  // caller passed something the contract forbids
  kDataFormat,       // malformed file, stream or dataset
  kNumeric,          // non-finite value produced by an operator
  kInternal,         // broken invariant inside the library
};

// Every failure the library reports carries a code and the name of the
// operation that raised it, e.g. "conv3x3" or "unpack/prior segment".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string where, const std::string& message);

  ErrorCode code() const { return code_; }
  const std::string& where() const { return where_; }

 private:
  ErrorCode code_;
  std::string where_;
};

[[noreturn]] void Fail(ErrorCode code, std::string_view where,
                       std::string_view message);

inline void Require(bool condition, std::string_view where,
                    std::string_view message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, where, message);
}

}  // namespace spc

#endif  // SPC_ERROR_H_
