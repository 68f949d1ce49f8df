// Copyright 2026 The nerfsim Authors
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

#ifndef NERFSIM_NERFSIM_HPP
#define NERFSIM_NERFSIM_HPP

/**
 * \file
 * \brief Includes every public nerfsim header.
 */

#include "nerfsim/config.hpp"
#include "nerfsim/crowd.hpp"
#include "nerfsim/dataset.hpp"
#include "nerfsim/errors.hpp"
#include "nerfsim/field.hpp"
#include "nerfsim/fit.hpp"
#include "nerfsim/geometry.hpp"
#include "nerfsim/humanfield.hpp"
#include "nerfsim/image.hpp"
#include "nerfsim/metrics.hpp"
#include "nerfsim/parallel.hpp"
#include "nerfsim/render.hpp"
#include "nerfsim/rng.hpp"
#include "nerfsim/simulation.hpp"
#include "nerfsim/trajectory.hpp"
#include "nerfsim/world.hpp"

#endif
