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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tabkit/geometry.hpp"

namespace tabkit {

/// Inclusive, 0-based row and column ranges of a cell.
struct LogicalCoords {
  int start_row = 0;
  int end_row = 0;
  int start_col = 0;
  int end_col = 0;

  int row_span() const { return end_row - start_row + 1; }
  int col_span() const { return end_col - start_col + 1; }
  bool is_span() const { return end_row > start_row || end_col > start_col; }
  bool covers(int row, int col) const {
    return row >= start_row && row <= end_row && col >= start_col && col <= end_col;
  }
  bool rows_intersect(const LogicalCoords& o) const { return start_row <= o.end_row && o.start_row <= end_row; }
  bool cols_intersect(const LogicalCoords& o) const { return start_col <= o.end_col && o.start_col <= end_col; }
  bool intersects(const LogicalCoords& o) const { return rows_intersect(o) && cols_intersect(o); }
  bool is_well_formed() const {
    return start_row >= 0 && start_col >= 0 && start_row <= end_row && start_col <= end_col;
  }

  friend bool operator==(const LogicalCoords&, const LogicalCoords&) = default;
};

struct Cell {
  int id = 0;
  std::optional<BBox> bbox;
  LogicalCoords logical;
  std::string content;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// One unit slot of the table after splitting merged cells.
struct GridEntry {
  int cell_id = 0;
  int row = 0;
  int col = 0;
  BBox bbox;

  friend bool operator==(const GridEntry&, const GridEntry&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Where an augmented sub-table came from; region is [r1, r2, c1, c2].
struct Provenance {
  std::string source_id;
  std::array<int, 4> region{};

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TableAnnotation {
  std::string id;
  ImageSize image_size;
  BBox table_box{0, 0, 1, 1};
  std::vector<Cell> cells;
  std::vector<GridEntry> grids;
  bool wireless = false;
  std::optional<Provenance> augmented_from;

  /// Number of logical rows/columns spanned by the cells (max end + 1).
  int rows() const;
  int cols() const;

  friend bool operator==(const TableAnnotation&, const TableAnnotation&) = default;
};

enum class Violation {
  kBadIds,            // ids not unique or not dense 0..N-1
  kBadGeometry,       // a box outside [0,1] or inverted
  kBadLogical,        // negative or inverted logical range
  kOverlappingLogical,
  kNonRectangular,    // covered slots do not fill [0,R)x[0,C)
  kIncompleteGrids,   // grid slots and cell footprints disagree
};

const char* to_string(Violation v);

struct ViolationReport {
  Violation kind;
  std::string detail;
};

/// All invariant violations, in the order listed in Violation. Grid
/// completeness is checked only when `grids_required` is set or the
/// annotation carries grids.
std::vector<ViolationReport> find_violations(const TableAnnotation& ann, bool grids_required = false);

/// Throws ValidationError describing the first violation.
void validate(const TableAnnotation& ann, bool grids_required = false);

/// Per-row and per-column extents: the union of the grid-slot boxes sharing
/// each row (resp. column) index. Throws ValidationError when the annotation
/// has no grids.
struct RowColLines {
  std::vector<BBox> rows;
  std::vector<BBox> cols;
};
RowColLines derive_row_col_lines(const TableAnnotation& ann);

/// Cells in logical (start_row, start_col) order.
std::vector<const Cell*> cells_in_logical_order(const TableAnnotation& ann);

}  // namespace tabkit
