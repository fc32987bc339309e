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

#include "tabkit/sgcl/forward.hpp"

#include <algorithm>

namespace tabkit::sgcl {

std::vector<std::pair<std::string, std::pair<int, int>>> tensor_shapes(const SgclConfig& cfg) {
  const int d = cfg.model_dim, hid = cfg.mlp_hidden, f = cfg.sine_dim;
  if (d <= 0 || hid <= 0 || cfg.row_col_dim <= 0 || cfg.layers <= 0 || f <= 0 || f % 2 != 0 ||
      cfg.p3_height % 4 != 0 || cfg.p3_width % 4 != 0 || cfg.p3_height <= 0 || cfg.p3_width <= 0)
    throw ShapeError("invalid sgcl configuration");
  std::vector<std::pair<std::string, std::pair<int, int>>> out;
  SgclParams<double> probe;
  probe.refine.resize(cfg.refine_layers);
  for_each_tensor([&](const std::string& name, const Mat<double>&) { out.push_back({name, {0, 0}}); }, probe);

  auto set = [&](const std::string& suffix, int r, int c) {
    for (auto& [name, shape] : out)
      if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        shape = {r, c};
  };
  set("conv31_w", d, cfg.c3);
  set("conv32_w", d, cfg.c4);
  set("conv41_w", d, cfg.c4);
  set("conv42_w", d, cfg.c5);
  for (const char* b : {"conv31_b", "conv32_b", "conv41_b", "conv42_b"}) set(b, d, 1);
  set("pos4", d, cfg.p4_height() * cfg.p4_width());
  set("layer_w", cfg.layers, 1);
  set("row.w", d, cfg.row_col_dim);
  set("row.b", 1, cfg.row_col_dim);
  set("col.w", d, cfg.row_col_dim);
  set("col.b", 1, cfg.row_col_dim);
  for (const char* w : {".wq", ".wk", ".wv", ".wo"}) set(w, d, d);
  for (const char* w : {"reg.w1", "delta_w1"}) set(w, d, hid);
  for (const char* w : {"reg.b1", "delta_b1"}) set(w, 1, hid);
  for (const char* w : {"reg.w2", "delta_w2"}) set(w, hid, 4);
  for (const char* w : {"reg.b2", "delta_b2"}) set(w, 1, 4);
  set("pe_query", 4 * f, d);
  set("pe_key", 2 * f, d);
  set("mask.w", d, d);
  return out;
}

void validate_spans(const TokenSpanIndex& spans, Eigen::Index tokens) {
  if (spans.empty()) throw ShapeError("no cell spans");
  std::vector<std::pair<int, int>> sorted;
  for (std::size_t n = 0; n < spans.size(); ++n) {
    const auto& s = spans[n];
    if (s.start < 0 || s.end < s.start || s.end >= tokens)
      throw ShapeError("span " + std::to_string(n) + " [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                       "] is outside " + std::to_string(tokens) + " tokens");
    sorted.emplace_back(s.start, s.end);
  }
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first <= sorted[i - 1].second)
      throw ShapeError("spans overlap at token " + std::to_string(sorted[i].first));
}

AdjacencyTargets adjacency_targets(const std::vector<LogicalCoords>& cells) {
  const auto n = static_cast<Eigen::Index>(cells.size());
  AdjacencyTargets out{MaskMat::Zero(n, n), MaskMat::Zero(n, n)};
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      const auto& a = cells[static_cast<std::size_t>(x)];
      const auto& b = cells[static_cast<std::size_t>(y)];
      out.row(x, y) = (x == y || a.rows_intersect(b)) ? 1 : 0;
      out.col(x, y) = (x == y || a.cols_intersect(b)) ? 1 : 0;
    }
  return out;
}

Eigen::MatrixXd mask_targets(const std::vector<BBox>& boxes, int height, int width) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(boxes.size()), height * width);
  for (std::size_t n = 0; n < boxes.size(); ++n) {
    const auto& b = boxes[n];
    for (int y = 0; y < height; ++y) {
      const double cy = (y + 0.5) / height;
      if (!(cy > b.y1 && cy < b.y2)) continue;
      for (int x = 0; x < width; ++x) {
        const double cx = (x + 0.5) / width;
        if (cx > b.x1 && cx < b.x2) out(static_cast<Eigen::Index>(n), y * width + x) = 1.0;
      }
    }
  }
  return out;
}

}  // namespace tabkit::sgcl
