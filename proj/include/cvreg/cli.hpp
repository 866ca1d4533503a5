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


#ifndef CVREG_CLI_HPP_
#define CVREG_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace cvreg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Runs one command line in-process. `args` excludes the program name.
// Returns 0 on success, 1 on usage or validation errors, 2 on I/O errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err);

}  // namespace cvreg

#endif  // CVREG_CLI_HPP_
