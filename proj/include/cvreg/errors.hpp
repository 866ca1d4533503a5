// Copyright 2026 The cvreg Authors. All Rights Reserved.
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

#ifndef CVREG_ERRORS_HPP_
#define CVREG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cvreg {

// Malformed input: bad dimensions, out-of-range values, broken invariants,
// corrupted payloads. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Filesystem failure: missing file, unreadable or unwritable path.
// Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cvreg

#endif  // CVREG_ERRORS_HPP_
