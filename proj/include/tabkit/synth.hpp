/**
 * Copyright 2026 The tabkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <random>
#include <string>

#include "tabkit/annotation.hpp"

namespace tabkit {

/// Parameters of the synthetic table generator used for fixtures and
/// property tests.
struct SynthConfig {
  int min_rows = 1, max_rows = 10;
  int min_cols = 1, max_cols = 10;
  double span_probability = 0.25;  // chance to try a merge at a free slot
  double max_span_fraction = 0.3;  // cap on span cells / all cells
  int max_span = 3;                // largest rowspan / colspan tried
  bool with_grids = true;
  double wireless_probability = 0.5;
  ImageSize image_size{1000, 800};
};

/// A valid random table. Cell ids follow row-major order of the top-left
/// slot; boxes are slightly inset from their slot union; contents are short
/// tokens, some empty.
TableAnnotation synth_table(std::mt19937_64& rng, const SynthConfig& cfg, const std::string& id);

}  // namespace tabkit
