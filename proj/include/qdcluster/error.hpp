// Copyright 2026 The qdcluster Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qdcluster {

enum class ErrorKind {
    kInvalidArgument,
    kDimensionMismatch,
    kUnknownLabel,
    kNotSquare,
    kInvalidState,
    kInvalidChannel,
    kNonConvergence,
    kNumerical,
    kConfig,
    kIo,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::kInvalidArgument: return "invalid_argument";
        case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
        case ErrorKind::kUnknownLabel: return "unknown_label";
        case ErrorKind::kNotSquare: return "not_square";
        case ErrorKind::kInvalidState: return "invalid_state";
        case ErrorKind::kInvalidChannel: return "invalid_channel";
        case ErrorKind::kNonConvergence: return "non_convergence";
        case ErrorKind::kNumerical: return "numerical";
        case ErrorKind::kConfig: return "config";
        case ErrorKind::kIo: return "io";
    }
    return "unknown";
}

/// Labeled error. The label is available programmatically through kind() and
/// is also the prefix of what().
class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

   private:
    ErrorKind kind_;
};

}  // namespace qdcluster
