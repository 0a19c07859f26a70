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

#include "spc/error.h"

namespace spc {

Error::Error(ErrorCode code, std::string where, const std::string& message)
    : std::runtime_error(where + ": " + message),
      code_(code),
      where_(std::move(where)) {}

void Fail(ErrorCode code, std::string_view where, std::string_view message) {
  throw Error(code, std::string(where), std::string(message));
}

}  // namespace spc
