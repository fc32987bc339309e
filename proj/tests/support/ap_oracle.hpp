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

// Average precision recomputed from first principles: greedy matching in
// score order, then for each recall level the best precision among all
// ranks reaching it. Recall comparisons use integer arithmetic.

#include <algorithm>
#include <numeric>
#include <vector>

#include "tabkit/geometry.hpp"

namespace tabkit::testing {

struct OracleDetection {
  int image;
  int index;
  double score;
  BBox box;
};

inline double ap50_oracle(const std::vector<std::vector<BBox>>& preds, const std::vector<std::vector<double>>& scores,
                          const std::vector<std::vector<BBox>>& gts) {
  long total_gt = 0;
  for (const auto& g : gts) total_gt += static_cast<long>(g.size());
  std::vector<OracleDetection> all;
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t k = 0; k < preds[i].size(); ++k)
      all.push_back({static_cast<int>(i), static_cast<int>(k), scores[i][k], preds[i][k]});
  if (total_gt == 0) return all.empty() ? 1.0 : 0.0;

  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image != b.image) return a.image < b.image;
    return a.index < b.index;
  });

  std::vector<std::vector<bool>> used(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) used[i].assign(gts[i].size(), false);
  std::vector<int> tp_at;  // cumulative true positives after each rank
  int tp = 0;
  for (const auto& d : all) {
    const auto& g = gts[static_cast<std::size_t>(d.image)];
    int best = -1;
    double best_iou = 0.5;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (used[static_cast<std::size_t>(d.image)][j]) continue;
      const double v = iou(d.box, g[j]);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(j);
        best_iou = v;
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(d.image)][static_cast<std::size_t>(best)] = true;
      ++tp;
    }
    tp_at.push_back(tp);
  }

  double sum = 0;
  for (int r = 0; r <= 100; ++r) {
    double best = 0;
    for (std::size_t k = 0; k < tp_at.size(); ++k) {
      // recall >= r / 100  <=>  100 * tp >= r * total_gt
      if (100L * tp_at[k] >= static_cast<long>(r) * total_gt)
        best = std::max(best, static_cast<double>(tp_at[k]) / static_cast<double>(k + 1));
    }
    sum += best;
  }
  return sum / 101.0;
}

}  // namespace tabkit::testing
