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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabkit/annotation.hpp"
#include "tabkit/io.hpp"

namespace tabkit {

/// Foreign annotation layouts accepted by unify().
///   pubtabnet: table HTML (structure tokens or a string) plus per-cell boxes
///   grid:      cells with boxes and logical coordinates
///   spotting:  cell boxes and texts only; a rectangular grid is assumed
/// All foreign boxes are in pixels of the document image.
enum class SourceKind { kPubTabNet, kGrid, kSpotting };

std::optional<SourceKind> parse_source_kind(std::string_view name);

/// Converts one foreign record. The result is not validated: records that
/// break invariants are left for clean(). Grids are derived from the cell
/// boxes when the record has none and the layout allows it.
TableAnnotation unify(const json& record, SourceKind kind);

/// Assigns each item of a set of 1-D intervals to a band. Items are taken in
/// order of their low end and join the current band when their overlap with
/// it, relative to the shorter of the two, is at least `min_overlap`. Bands
/// are numbered by their low end.
std::vector<int> group_into_bands(const std::vector<std::pair<double, double>>& intervals, double min_overlap);

/// Splits every cell into unit grid slots. Row band extents come from the
/// cells covering that row (single-row cells preferred when present);
/// adjacent bands are separated at the midpoint between one band's bottom
/// and the next band's top. Columns likewise. Cells without a box only
/// receive slots. Throws ValidationError on a non-rectangular layout or a
/// band with no boxed cell.
std::vector<GridEntry> derive_grids(const std::vector<Cell>& cells);

struct CleanEvent {
  std::string id;
  std::string rule;  // malformed | overlapping_logical | incomplete_grids | redundant_grids
  std::string detail;
};

struct CleanResult {
  std::vector<TableAnnotation> kept;
  std::vector<CleanEvent> dropped;
  std::vector<CleanEvent> collapsed;  // rule 3 events; these samples are kept

  /// "id, rule, detail" lines: drops first, then collapses, each in input order.
  std::string report() const;
};

/// Applies, in order: drop records with overlapping logical coordinates;
/// drop records whose grids and cell footprints disagree; collapse adjacent
/// grid rows/columns with identical slot-to-cell assignments. Records that
/// fail basic well-formedness (ids, boxes, ranges) are dropped as
/// "malformed" before the three rules.
CleanResult clean(std::vector<TableAnnotation> anns);

/// Collapses redundant grid rows and columns in place; returns the number
/// of (rows, cols) removed. The annotation must carry complete grids.
std::pair<int, int> collapse_redundant_grids(TableAnnotation& ann);

/// Maps a box from document coordinates into the frame of `frame` and back.
BBox to_frame(const BBox& b, const BBox& frame);
BBox from_frame(const BBox& b, const BBox& frame);

struct CropResult {
  TableAnnotation table;
  std::vector<int> clipped_cells;  // ids whose box left the table by more than the tolerance
};

inline constexpr double kCropTolerance = 0.005;

/// Re-normalizes every box to the table crop; table_box becomes (0,0,1,1)
/// and image_size the crop's pixel size. Boxes are clamped to the crop.
CropResult crop_table(ImageSize document_size, const TableAnnotation& ann);

/// Inverse of crop_table for boxes that were not clamped.
TableAnnotation uncrop_table(const TableAnnotation& local, const BBox& table_box, ImageSize document_size);

}  // namespace tabkit
