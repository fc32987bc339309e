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

#include "tabkit/synth.hpp"

#include <algorithm>
#include <vector>

namespace tabkit {

namespace {

std::vector<double> random_cuts(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> weight(1.0, 3.0);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (double& v : w) v = weight(rng);
  double total = 0;
  for (double v : w) total += v;
  std::vector<double> cuts{lo};
  for (double v : w) cuts.push_back(cuts.back() + (hi - lo) * v / total);
  cuts.back() = hi;
  return cuts;
}

}  // namespace

TableAnnotation synth_table(std::mt19937_64& rng, const SynthConfig& cfg, const std::string& id) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TableAnnotation ann;
  ann.id = id;
  ann.image_size = cfg.image_size;
  ann.wireless = unit(rng) < cfg.wireless_probability;
  const int rows = pick(cfg.min_rows, cfg.max_rows);
  const int cols = pick(cfg.min_cols, cfg.max_cols);

  const double tx = 0.05 + 0.1 * unit(rng), ty = 0.05 + 0.1 * unit(rng);
  ann.table_box = {tx, ty, 0.95 - 0.1 * unit(rng), 0.95 - 0.1 * unit(rng)};
  const auto xs = random_cuts(rng, cols, ann.table_box.x1, ann.table_box.x2);
  const auto ys = random_cuts(rng, rows, ann.table_box.y1, ann.table_box.y2);

  std::vector<int> owner(static_cast<std::size_t>(rows * cols), -1);
  auto free_rect = [&](int r, int c, int rs, int cs) {
    for (int i = r; i < r + rs; ++i)
      for (int j = c; j < c + cs; ++j)
        if (owner[static_cast<std::size_t>(i * cols + j)] >= 0) return false;
    return true;
  };

  int spans = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (owner[static_cast<std::size_t>(r * cols + c)] >= 0) continue;
      int rs = 1, cs = 1;
      const int n = static_cast<int>(ann.cells.size());
      if (unit(rng) < cfg.span_probability && spans + 1 <= cfg.max_span_fraction * (n + 1)) {
        rs = pick(1, std::min(cfg.max_span, rows - r));
        cs = pick(1, std::min(cfg.max_span, cols - c));
        while (cs > 1 && !free_rect(r, c, rs, cs)) --cs;
        while (rs > 1 && !free_rect(r, c, rs, cs)) --rs;
      }
      Cell cell;
      cell.id = n;
      cell.logical = {r, r + rs - 1, c, c + cs - 1};
      if (cell.logical.is_span()) ++spans;
      for (int i = r; i < r + rs; ++i)
        for (int j = c; j < c + cs; ++j) owner[static_cast<std::size_t>(i * cols + j)] = n;
      const BBox slot{xs[static_cast<std::size_t>(c)], ys[static_cast<std::size_t>(r)],
                      xs[static_cast<std::size_t>(c + cs)], ys[static_cast<std::size_t>(r + rs)]};
      const double ix = 0.1 * slot.width(), iy = 0.1 * slot.height();
      cell.bbox = BBox{slot.x1 + ix, slot.y1 + iy, slot.x2 - ix, slot.y2 - iy};
      if (unit(rng) < 0.85) cell.content = "v" + std::to_string(pick(0, 999));
      ann.cells.push_back(std::move(cell));
    }
  }

  if (cfg.with_grids) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        ann.grids.push_back({owner[static_cast<std::size_t>(r * cols + c)], r, c,
                             BBox{xs[static_cast<std::size_t>(c)], ys[static_cast<std::size_t>(r)],
                                  xs[static_cast<std::size_t>(c + 1)], ys[static_cast<std::size_t>(r + 1)]}});
  }
  return ann;
}

}  // namespace tabkit
