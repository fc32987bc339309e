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
#include "tabkit/geometry.hpp"

namespace tabkit {

enum class Task {
  kCellDetect,
  kSpanCellDetect,
  kRowColDetect,
  kStructureParse,
  kHtmlParse,
  kSpotOrdered,
  kSpotBoxQuery,
};

const char* to_string(Task t);
std::optional<Task> parse_task(std::string_view name);

struct TaskSample {
  Task task;
  std::string prompt;
  std::string target;
};

/// Target written when a task has nothing to emit.
inline constexpr std::string_view kEmptyTarget = "<none>";

/// "<x1,y1,x2,y2>" with discretized coordinates.
std::string format_box(const DiscreteBox& b);

/// Discretized cell boxes concatenated in logical order. Throws Error
/// naming every cell without a box.
TaskSample gen_cell_detect(const TableAnnotation& ann, const DiscretizationConfig& cfg, bool exclude_span_cells = false);

/// One line per span cell: "<box> rows r1-r2 cols c1-c2".
TaskSample gen_span_cell_detect(const TableAnnotation& ann, const DiscretizationConfig& cfg);

/// "row <band>: <cell><cell>..." per row, then "col <band>: ..." per column.
TaskSample gen_row_col_detect(const TableAnnotation& ann, const DiscretizationConfig& cfg);

enum class StructureFormat { kHtml, kMarkdown };

/// Content-free structure: canonical HTML, or a Markdown pipe table with
/// span cells repeated into every slot and each slot written as "-".
TaskSample gen_structure_parse(const TableAnnotation& ann, StructureFormat format);

/// Canonical table HTML including cell contents.
TaskSample gen_html_parse(const TableAnnotation& ann);

struct TextLine {
  BBox box;
  std::string text;
};

/// Indices of `lines` in reading order: lines whose vertical overlap is at
/// least half of the shorter line form a band; bands go top to bottom and
/// lines within a band left to right.
std::vector<std::size_t> reading_order(const std::vector<TextLine>& lines);

TaskSample gen_spot_ordered(const std::vector<TextLine>& lines, bool with_coords, const DiscretizationConfig& cfg);

/// Keeps lines whose center lies inside `query`, then orders them as
/// gen_spot_ordered; the prompt embeds the discretized query.
TaskSample gen_spot_boxquery(const std::vector<TextLine>& lines, const BBox& query, bool with_coords,
                             const DiscretizationConfig& cfg);

// Target grammar parsers. Each throws Error on input it did not produce.

std::vector<DiscreteBox> parse_box_list(std::string_view target);

struct SpanEntry {
  DiscreteBox box;
  LogicalCoords logical;
  friend bool operator==(const SpanEntry&, const SpanEntry&) = default;
};
std::vector<SpanEntry> parse_span_target(std::string_view target);

struct BandEntry {
  DiscreteBox band;
  std::vector<DiscreteBox> cells;
  friend bool operator==(const BandEntry&, const BandEntry&) = default;
};
struct RowColTarget {
  std::vector<BandEntry> rows;
  std::vector<BandEntry> cols;
};
RowColTarget parse_row_col_target(std::string_view target);

struct SpotEntry {
  std::optional<DiscreteBox> box;
  std::string text;
  friend bool operator==(const SpotEntry&, const SpotEntry&) = default;
};
std::vector<SpotEntry> parse_spot_target(std::string_view target, bool with_coords);

/// Row and column count of a Markdown structure target.
std::pair<int, int> parse_markdown_structure(std::string_view target);

}  // namespace tabkit
