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

#include "tabkit/augment.hpp"

#include <algorithm>
#include <map>

#include "tabkit/ingest.hpp"

namespace tabkit {

std::optional<Region> shrink_until_uncut(const TableAnnotation& ann, Region region, bool anchored) {
  bool changed = true;
  while (changed) {
    if (region.r1 > region.r2 || region.c1 > region.c2) return std::nullopt;
    changed = false;
    for (const auto& c : ann.cells) {
      const auto& l = c.logical;
      const bool rows_meet = l.start_row <= region.r2 && l.end_row >= region.r1;
      const bool cols_meet = l.start_col <= region.c2 && l.end_col >= region.c1;
      if (!rows_meet || !cols_meet) continue;
      if (l.end_row > region.r2) {
        region.r2 = l.start_row - 1;
        changed = true;
      } else if (l.end_col > region.c2) {
        region.c2 = l.start_col - 1;
        changed = true;
      } else if (l.start_row < region.r1) {
        if (anchored) return std::nullopt;
        region.r1 = l.end_row + 1;
        changed = true;
      } else if (l.start_col < region.c1) {
        if (anchored) return std::nullopt;
        region.c1 = l.end_col + 1;
        changed = true;
      }
      if (changed) break;
    }
  }
  return region;
}

TableAnnotation extract_region(const TableAnnotation& ann, const Region& region) {
  TableAnnotation out;
  out.id = ann.id;
  out.wireless = ann.wireless;

  std::vector<const Cell*> inside;
  for (const auto& c : ann.cells) {
    const auto& l = c.logical;
    if (l.start_row >= region.r1 && l.end_row <= region.r2 && l.start_col >= region.c1 && l.end_col <= region.c2)
      inside.push_back(&c);
  }
  std::sort(inside.begin(), inside.end(), [](const Cell* a, const Cell* b) { return a->id < b->id; });
  std::map<int, int> new_id;
  for (const Cell* c : inside) {
    const int id = static_cast<int>(out.cells.size());
    new_id[c->id] = id;
    Cell n = *c;
    n.id = id;
    n.logical = {c->logical.start_row - region.r1, c->logical.end_row - region.r1, c->logical.start_col - region.c1,
                 c->logical.end_col - region.c1};
    out.cells.push_back(std::move(n));
  }
  for (const auto& g : ann.grids) {
    if (g.row < region.r1 || g.row > region.r2 || g.col < region.c1 || g.col > region.c2) continue;
    auto it = new_id.find(g.cell_id);
    if (it == new_id.end()) continue;
    out.grids.push_back({it->second, g.row - region.r1, g.col - region.c1, g.bbox});
  }

  std::optional<BBox> extent;
  auto grow = [&](const BBox& b) { extent = extent ? bbox_union(*extent, b) : b; };
  if (!out.grids.empty()) {
    for (const auto& g : out.grids) grow(g.bbox);
  } else {
    for (const auto& c : out.cells)
      if (c.bbox) grow(*c.bbox);
  }

  // Boxes are normalized to the source image; the sub-table becomes its own image.
  out.image_size = ann.image_size;
  out.table_box = ann.table_box;
  if (extent && extent->width() > 0 && extent->height() > 0) {
    out.table_box = *extent;
    out = crop_table(ann.image_size, out).table;
  }
  return out;
}

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

std::optional<TableAnnotation> sample_subtable(const TableAnnotation& ann, const AugmentConfig& cfg,
                                               std::mt19937_64& rng) {
  const int rows = ann.rows(), cols = ann.cols();
  if (rows <= 4 || cols <= 4) return std::nullopt;
  const bool has_span = std::any_of(ann.cells.begin(), ann.cells.end(), [](const Cell& c) { return c.logical.is_span(); });
  if (!has_span) return std::nullopt;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    Region proposal;
    if (!ann.wireless) {
      proposal.r1 = uniform(rng, 0, rows - 5);
      proposal.c1 = uniform(rng, 0, cols - 5);
    }
    proposal.r2 = uniform(rng, proposal.r1 + 4, rows - 1);
    proposal.c2 = uniform(rng, proposal.c1 + 4, cols - 1);
    const auto region = shrink_until_uncut(ann, proposal, ann.wireless);
    if (!region || region->rows() <= 4 || region->cols() <= 4) continue;
    TableAnnotation sub = extract_region(ann, *region);
    if (std::none_of(sub.cells.begin(), sub.cells.end(), [](const Cell& c) { return c.logical.is_span(); })) continue;
    sub.augmented_from = Provenance{ann.id, {region->r1, region->r2, region->c1, region->c2}};
    return sub;
  }
  return std::nullopt;
}

std::uint64_t table_seed(std::uint64_t seed, const std::string& table_id) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : table_id) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return seed ^ h;
}

std::vector<TableAnnotation> augment_corpus(const std::vector<TableAnnotation>& anns, const AugmentConfig& cfg) {
  std::vector<TableAnnotation> out;
  for (const auto& ann : anns) {
    std::mt19937_64 rng(table_seed(cfg.rng_seed, ann.id));
    for (int k = 0; k < cfg.samples_per_table; ++k) {
      auto sub = sample_subtable(ann, cfg, rng);
      if (!sub) continue;
      sub->id = ann.id + "#aug" + std::to_string(k);
      out.push_back(std::move(*sub));
    }
  }
  return out;
}

}  // namespace tabkit
