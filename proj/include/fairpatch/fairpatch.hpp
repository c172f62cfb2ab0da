// Copyright 2026 The fairpatch Authors.
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

#include "fairpatch/adversary.hpp"
#include "fairpatch/boosting.hpp"
#include "fairpatch/common.hpp"
#include "fairpatch/csv.hpp"
#include "fairpatch/dataset.hpp"
#include "fairpatch/evaluation.hpp"
#include "fairpatch/fairness.hpp"
#include "fairpatch/rng.hpp"
#include "fairpatch/sampling.hpp"
#include "fairpatch/simulation.hpp"
#include "fairpatch/split.hpp"
#include "fairpatch/tree.hpp"
