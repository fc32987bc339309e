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

#include "tabkit/annotation.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "tabkit/errors.hpp"

namespace tabkit {

int TableAnnotation::rows() const {
  int r = 0;
  for (const auto& c : cells) r = std::max(r, c.logical.end_row + 1);
  return r;
}

int TableAnnotation::cols() const {
  int n = 0;
  for (const auto& c : cells) n = std::max(n, c.logical.end_col + 1);
  return n;
}

const char* to_string(Violation v) {
  switch (v) {
    case Violation::kBadIds: return "bad cell ids";
    case Violation::kBadGeometry: return "invalid box";
    case Violation::kBadLogical: return "invalid logical coordinates";
    case Violation::kOverlappingLogical: return "overlapping logical coordinates";
    case Violation::kNonRectangular: return "non-rectangular layout";
    case Violation::kIncompleteGrids: return "incomplete table grids";
  }
  return "unknown";
}

namespace {

std::string slot_str(int r, int c) {
  std::ostringstream os;
  os << "(" << r << "," << c << ")";
  return os.str();
}

}  // namespace

std::vector<ViolationReport> find_violations(const TableAnnotation& ann, bool grids_required) {
  std::vector<ViolationReport> out;
  const int n = static_cast<int>(ann.cells.size());

  std::vector<int> seen(n, 0);
  for (const auto& c : ann.cells) {
    if (c.id < 0 || c.id >= n || seen[c.id]++) {
      out.push_back({Violation::kBadIds, "cell id " + std::to_string(c.id)});
      break;
    }
  }

  if (!is_valid(ann.table_box)) out.push_back({Violation::kBadGeometry, "table_box"});
  for (const auto& c : ann.cells) {
    if (c.bbox && !is_valid(*c.bbox)) {
      out.push_back({Violation::kBadGeometry, "cell " + std::to_string(c.id)});
      break;
    }
  }
  for (const auto& g : ann.grids) {
    if (!is_valid(g.bbox)) {
      out.push_back({Violation::kBadGeometry, "grid " + slot_str(g.row, g.col)});
      break;
    }
  }

  bool logical_ok = true;
  for (const auto& c : ann.cells) {
    if (!c.logical.is_well_formed()) {
      out.push_back({Violation::kBadLogical, "cell " + std::to_string(c.id)});
      logical_ok = false;
      break;
    }
  }
  if (!logical_ok) return out;

  for (int i = 0; i < n && logical_ok; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (ann.cells[i].logical.intersects(ann.cells[j].logical)) {
        out.push_back({Violation::kOverlappingLogical,
                       "cells " + std::to_string(ann.cells[i].id) + " and " + std::to_string(ann.cells[j].id)});
        logical_ok = false;
        break;
      }
    }
  }
  if (!logical_ok) return out;

  // With no overlaps, the layout is a full rectangle iff the footprint areas
  // add up to R*C.
  const long rows = ann.rows(), cols = ann.cols();
  long covered = 0;
  for (const auto& c : ann.cells) covered += static_cast<long>(c.logical.row_span()) * c.logical.col_span();
  if (n > 0 && covered != rows * cols) {
    out.push_back({Violation::kNonRectangular,
                   std::to_string(covered) + " of " + std::to_string(rows * cols) + " slots covered"});
  }

  if (grids_required || !ann.grids.empty()) {
    std::map<int, const Cell*> by_id;
    for (const auto& c : ann.cells) by_id[c.id] = &c;
    std::vector<int> owner(rows * cols, -1);
    std::string problem;
    for (const auto& g : ann.grids) {
      if (g.row < 0 || g.row >= rows || g.col < 0 || g.col >= cols) {
        problem = "grid " + slot_str(g.row, g.col) + " outside table";
        break;
      }
      auto it = by_id.find(g.cell_id);
      if (it == by_id.end() || !it->second->logical.covers(g.row, g.col)) {
        problem = "grid " + slot_str(g.row, g.col) + " not assigned to its cell";
        break;
      }
      int& slot = owner[g.row * cols + g.col];
      if (slot != -1) {
        problem = "grid " + slot_str(g.row, g.col) + " duplicated";
        break;
      }
      slot = g.cell_id;
    }
    if (problem.empty()) {
      for (const auto& c : ann.cells) {
        for (int r = c.logical.start_row; r <= c.logical.end_row && problem.empty(); ++r)
          for (int k = c.logical.start_col; k <= c.logical.end_col; ++k)
            if (owner[r * cols + k] != c.id) {
              problem = "cell " + std::to_string(c.id) + " missing grid " + slot_str(r, k);
              break;
            }
      }
    }
    if (problem.empty() && std::find(owner.begin(), owner.end(), -1) != owner.end())
      problem = "unassigned grid slot";
    if (!problem.empty()) out.push_back({Violation::kIncompleteGrids, problem});
  }
  return out;
}

void validate(const TableAnnotation& ann, bool grids_required) {
  auto v = find_violations(ann, grids_required);
  if (!v.empty()) {
    throw ValidationError(std::string(to_string(v.front().kind)) + ": " + v.front().detail);
  }
}

RowColLines derive_row_col_lines(const TableAnnotation& ann) {
  if (ann.grids.empty()) throw ValidationError("grids required");
  int rows = 0, cols = 0;
  for (const auto& g : ann.grids) {
    rows = std::max(rows, g.row + 1);
    cols = std::max(cols, g.col + 1);
  }
  std::vector<std::optional<BBox>> r(rows), c(cols);
  for (const auto& g : ann.grids) {
    r[g.row] = r[g.row] ? bbox_union(*r[g.row], g.bbox) : g.bbox;
    c[g.col] = c[g.col] ? bbox_union(*c[g.col], g.bbox) : g.bbox;
  }
  RowColLines out;
  for (int i = 0; i < rows; ++i) {
    if (!r[i]) throw ValidationError("grids required: row " + std::to_string(i) + " has no slots");
    out.rows.push_back(*r[i]);
  }
  for (int i = 0; i < cols; ++i) {
    if (!c[i]) throw ValidationError("grids required: column " + std::to_string(i) + " has no slots");
    out.cols.push_back(*c[i]);
  }
  return out;
}

std::vector<const Cell*> cells_in_logical_order(const TableAnnotation& ann) {
  std::vector<const Cell*> out;
  out.reserve(ann.cells.size());
  for (const auto& c : ann.cells) out.push_back(&c);
  std::stable_sort(out.begin(), out.end(), [](const Cell* a, const Cell* b) {
    if (a->logical.start_row != b->logical.start_row) return a->logical.start_row < b->logical.start_row;
    return a->logical.start_col < b->logical.start_col;
  });
  return out;
}

}  // namespace tabkit
