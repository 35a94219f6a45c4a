// Copyright 2026 The cmech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cmech {

// Bad caller input is reported with std::invalid_argument. The types below
// cover the remaining failure classes.

// A numerical or logic failure inside the library (non-finite iterate etc.).
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

// A spend that would push the privacy ledger past its total.
class BudgetExceeded : public std::logic_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::logic_error(what) {}
};

// Malformed experiment configuration, detected before any run.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace cmech
