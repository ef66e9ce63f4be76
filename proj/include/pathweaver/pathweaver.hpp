// Copyright 2026 The pathweaver Authors
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

#ifndef PATHWEAVER_PATHWEAVER_HPP
#define PATHWEAVER_PATHWEAVER_HPP

#include "pathweaver/bridge.hpp"
#include "pathweaver/csv.hpp"
#include "pathweaver/diffusion.hpp"
#include "pathweaver/drift.hpp"
#include "pathweaver/errors.hpp"
#include "pathweaver/girsanov.hpp"
#include "pathweaver/integrator.hpp"
#include "pathweaver/nn.hpp"
#include "pathweaver/numeric.hpp"
#include "pathweaver/observations.hpp"
#include "pathweaver/oracle.hpp"
#include "pathweaver/parallel.hpp"
#include "pathweaver/path_ensemble.hpp"
#include "pathweaver/rng.hpp"
#include "pathweaver/time_grid.hpp"
#include "pathweaver/transform.hpp"
#include "pathweaver/version.hpp"

#endif  // PATHWEAVER_PATHWEAVER_HPP
