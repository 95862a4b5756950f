//
// Copyright 2026 The indiv_privacy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


// Small file helpers shared by the on-disk formats.

#ifndef INDIV_PRIVACY_IO_UTIL_H_
#define INDIV_PRIVACY_IO_UTIL_H_

#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace indiv_privacy {

// Writes to a temporary sibling file, then renames it over `path`.
absl::Status WriteFileAtomically(const std::string& path,
                                 const std::string& contents);

absl::StatusOr<std::string> ReadFile(const std::string& path);

// Shortest decimal that parses back to the same double.
std::string FormatDouble(double value);

}  // namespace indiv_privacy

#endif  // INDIV_PRIVACY_IO_UTIL_H_
