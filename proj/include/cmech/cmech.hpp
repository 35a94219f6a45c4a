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

#include "cmech/bases.hpp"
#include "cmech/bench.hpp"
#include "cmech/continual.hpp"
#include "cmech/data.hpp"
#include "cmech/errors.hpp"
#include "cmech/mechanism.hpp"
#include "cmech/numerics.hpp"
#include "cmech/privacy.hpp"
#include "cmech/random.hpp"
#include "cmech/reconstruct.hpp"
#include "cmech/sensing.hpp"
