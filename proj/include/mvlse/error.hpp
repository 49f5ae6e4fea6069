// Copyright 2026 The mvlse Authors
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
#include <string_view>

namespace mvlse {

enum class ErrorKind {
  kGridMismatch,
  kIndex,
  kDomain,
  kParameter,
  kNearSingularDiffusion,
  kDivergence,
  kUnsupportedCoupling,
  kSingularDesign,
  kNonIdentifiable,
  kEstimationFailed,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the toolkit. The kind decides the CLI exit code:
/// configuration problems map to 2, numerical ones to 3.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_config_error() const noexcept {
    return kind_ == ErrorKind::kConfig || kind_ == ErrorKind::kGridMismatch ||
           kind_ == ErrorKind::kParameter || kind_ == ErrorKind::kIo;
  }

 private:
  ErrorKind kind_;
};

}  // namespace mvlse
