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

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tabkit/annotation.hpp"

namespace tabkit {

struct AugmentConfig {
  int samples_per_table = 1;
  std::uint64_t rng_seed = 0;
  int max_attempts = 32;
};

/// Inclusive logical region [r1..r2] x [c1..c2].
struct Region {
  int r1 = 0, r2 = 0, c1 = 0, c2 = 0;
  int rows() const { return r2 - r1 + 1; }
  int cols() const { return c2 - c1 + 1; }
  friend bool operator==(const Region&, const Region&) = default;
};

/// Shrinks `region` until no cell crosses its border: a cell sticking out
/// of an edge pulls that edge past the cell. Returns nullopt when the region
/// empties. With `anchored`, the top and left edges are fixed at 0.
std::optional<Region> shrink_until_uncut(const TableAnnotation& ann, Region region, bool anchored);

/// The sub-table inside `region`: cells re-indexed from (r1, c1), ids made
/// dense in original id order, and every box re-normalized to the region's
/// extent (the union of its grid slots, or of its cell boxes without grids).
TableAnnotation extract_region(const TableAnnotation& ann, const Region& region);

/// Draws one sub-table with more than 4 rows and more than 4 columns that
/// contains at least one span cell whole and cuts no cell. Wireless tables
/// always start at row 0, column 0. Proposals are drawn uniformly and
/// repaired with shrink_until_uncut, up to cfg.max_attempts times.
std::optional<TableAnnotation> sample_subtable(const TableAnnotation& ann, const AugmentConfig& cfg,
                                               std::mt19937_64& rng);

/// Per-table seed: cfg.rng_seed xor a stable hash of the table id.
std::uint64_t table_seed(std::uint64_t seed, const std::string& table_id);

/// Up to cfg.samples_per_table sub-tables per input table, in input order.
/// Output ids are "<id>#aug<k>" and carry provenance.
std::vector<TableAnnotation> augment_corpus(const std::vector<TableAnnotation>& anns, const AugmentConfig& cfg);

}  // namespace tabkit
