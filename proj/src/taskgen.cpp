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

#include "tabkit/taskgen.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "tabkit/errors.hpp"
#include "tabkit/html.hpp"
#include "tabkit/ingest.hpp"

namespace tabkit {

namespace {

constexpr std::pair<Task, const char*> kTaskNames[] = {
    {Task::kCellDetect, "cell_detect"},       {Task::kSpanCellDetect, "span_cell_detect"},
    {Task::kRowColDetect, "row_col_detect"},  {Task::kStructureParse, "structure_parse"},
    {Task::kHtmlParse, "html_parse"},         {Task::kSpotOrdered, "spot_ordered"},
    {Task::kSpotBoxQuery, "spot_boxquery"},
};

}  // namespace

const char* to_string(Task t) {
  for (const auto& [task, name] : kTaskNames)
    if (task == t) return name;
  return "unknown";
}

std::optional<Task> parse_task(std::string_view name) {
  for (const auto& [task, n] : kTaskNames)
    if (name == n) return task;
  return std::nullopt;
}

std::string format_box(const DiscreteBox& b) {
  return "<" + std::to_string(b[0]) + "," + std::to_string(b[1]) + "," + std::to_string(b[2]) + "," +
         std::to_string(b[3]) + ">";
}

namespace {

void require_boxes(const TableAnnotation& ann) {
  std::string missing;
  for (const auto& c : ann.cells) {
    if (c.bbox) continue;
    if (!missing.empty()) missing += ",";
    missing += std::to_string(c.id);
  }
  if (!missing.empty()) throw Error("cells without bbox: " + missing);
}

std::string join_lines(const std::vector<std::string>& lines) {
  if (lines.empty()) return std::string(kEmptyTarget);
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

}  // namespace

TaskSample gen_cell_detect(const TableAnnotation& ann, const DiscretizationConfig& cfg, bool exclude_span_cells) {
  require_boxes(ann);
  std::string target;
  for (const Cell* c : cells_in_logical_order(ann)) {
    if (exclude_span_cells && c->logical.is_span()) continue;
    target += format_box(discretize(*c->bbox, cfg));
  }
  if (target.empty()) target = kEmptyTarget;
  return {Task::kCellDetect, "Detect all table cells in logical order.", target};
}

TaskSample gen_span_cell_detect(const TableAnnotation& ann, const DiscretizationConfig& cfg) {
  require_boxes(ann);
  std::vector<std::string> lines;
  for (const Cell* c : cells_in_logical_order(ann)) {
    if (!c->logical.is_span()) continue;
    const auto& l = c->logical;
    lines.push_back(format_box(discretize(*c->bbox, cfg)) + " rows " + std::to_string(l.start_row) + "-" +
                    std::to_string(l.end_row) + " cols " + std::to_string(l.start_col) + "-" +
                    std::to_string(l.end_col));
  }
  return {Task::kSpanCellDetect, "Detect all span cells with their row and column ranges.", join_lines(lines)};
}

TaskSample gen_row_col_detect(const TableAnnotation& ann, const DiscretizationConfig& cfg) {
  const RowColLines bands = derive_row_col_lines(ann);
  require_boxes(ann);
  const auto ordered = cells_in_logical_order(ann);
  std::vector<std::string> lines;
  for (std::size_t r = 0; r < bands.rows.size(); ++r) {
    std::string line = "row " + format_box(discretize(bands.rows[r], cfg)) + ":";
    for (const Cell* c : ordered)
      if (static_cast<int>(r) >= c->logical.start_row && static_cast<int>(r) <= c->logical.end_row)
        line += format_box(discretize(*c->bbox, cfg));
    lines.push_back(std::move(line));
  }
  for (std::size_t k = 0; k < bands.cols.size(); ++k) {
    std::string line = "col " + format_box(discretize(bands.cols[k], cfg)) + ":";
    for (const Cell* c : ordered)
      if (static_cast<int>(k) >= c->logical.start_col && static_cast<int>(k) <= c->logical.end_col)
        line += format_box(discretize(*c->bbox, cfg));
    lines.push_back(std::move(line));
  }
  return {Task::kRowColDetect, "Detect table rows and columns with the cells in each.", join_lines(lines)};
}

TaskSample gen_structure_parse(const TableAnnotation& ann, StructureFormat format) {
  if (format == StructureFormat::kHtml) {
    return {Task::kStructureParse, "Parse the table structure as HTML.",
            serialize(erase_contents(grid_to_html(ann)))};
  }
  validate(ann);
  const int rows = ann.rows(), cols = ann.cols();
  std::string row = "|";
  std::string sep = "|";
  for (int c = 0; c < cols; ++c) {
    row += " - |";
    sep += " --- |";
  }
  std::vector<std::string> lines;
  for (int r = 0; r < rows; ++r) {
    lines.push_back(row);
    if (r == 0) lines.push_back(sep);
  }
  return {Task::kStructureParse, "Parse the table structure as Markdown.", join_lines(lines)};
}

TaskSample gen_html_parse(const TableAnnotation& ann) {
  return {Task::kHtmlParse, "Convert the table to HTML.", serialize(grid_to_html(ann))};
}

std::vector<std::size_t> reading_order(const std::vector<TextLine>& lines) {
  std::vector<std::pair<double, double>> ys;
  ys.reserve(lines.size());
  for (const auto& l : lines) ys.emplace_back(l.box.y1, l.box.y2);
  const auto band = group_into_bands(ys, 0.5);
  std::vector<std::size_t> order(lines.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (band[a] != band[b]) return band[a] < band[b];
    if (lines[a].box.x1 != lines[b].box.x1) return lines[a].box.x1 < lines[b].box.x1;
    return lines[a].box.y1 < lines[b].box.y1;
  });
  return order;
}

namespace {

std::string spot_target(const std::vector<TextLine>& lines, bool with_coords, const DiscretizationConfig& cfg) {
  std::vector<std::string> out;
  for (std::size_t i : reading_order(lines)) {
    const auto& l = lines[i];
    out.push_back(with_coords ? format_box(discretize(l.box, cfg)) + " " + one_line(l.text) : one_line(l.text));
  }
  return join_lines(out);
}

}  // namespace

TaskSample gen_spot_ordered(const std::vector<TextLine>& lines, bool with_coords, const DiscretizationConfig& cfg) {
  return {Task::kSpotOrdered,
          with_coords ? "Spot all text lines in reading order." : "Read all text lines in reading order.",
          spot_target(lines, with_coords, cfg)};
}

TaskSample gen_spot_boxquery(const std::vector<TextLine>& lines, const BBox& query, bool with_coords,
                             const DiscretizationConfig& cfg) {
  std::vector<TextLine> kept;
  for (const auto& l : lines) {
    const double cx = l.box.cx(), cy = l.box.cy();
    if (cx >= query.x1 && cx <= query.x2 && cy >= query.y1 && cy <= query.y2) kept.push_back(l);
  }
  const std::string region = format_box(discretize(query, cfg));
  return {Task::kSpotBoxQuery,
          (with_coords ? "Spot all text lines in region " : "Read all text lines in region ") + region + ".",
          spot_target(kept, with_coords, cfg)};
}

// ---------------------------------------------------------------------------
// Parsers

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  bool peek(std::string_view lit) const { return s_.substr(pos_, lit.size()) == lit; }

  void expect(std::string_view lit) {
    if (!peek(lit)) fail("expected '" + std::string(lit) + "'");
    pos_ += lit.size();
  }

  int integer() {
    int v = 0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected integer");
    pos_ = static_cast<std::size_t>(p - s_.data());
    return v;
  }

  DiscreteBox box() {
    DiscreteBox b{};
    expect("<");
    for (int k = 0; k < 4; ++k) {
      if (k) expect(",");
      b[k] = integer();
    }
    expect(">");
    return b;
  }

  std::string_view rest_of_line() {
    const auto nl = s_.find('\n', pos_);
    const auto stop = nl == std::string_view::npos ? s_.size() : nl;
    auto out = s_.substr(pos_, stop - pos_);
    pos_ = stop;
    return out;
  }

  void end_line() {
    if (done()) return;
    expect("\n");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error("bad target at offset " + std::to_string(pos_) + ": " + what);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<DiscreteBox> parse_box_list(std::string_view target) {
  if (target == kEmptyTarget) return {};
  Cursor cur(target);
  std::vector<DiscreteBox> out;
  while (!cur.done()) out.push_back(cur.box());
  return out;
}

std::vector<SpanEntry> parse_span_target(std::string_view target) {
  if (target == kEmptyTarget) return {};
  Cursor cur(target);
  std::vector<SpanEntry> out;
  while (!cur.done()) {
    SpanEntry e;
    e.box = cur.box();
    cur.expect(" rows ");
    e.logical.start_row = cur.integer();
    cur.expect("-");
    e.logical.end_row = cur.integer();
    cur.expect(" cols ");
    e.logical.start_col = cur.integer();
    cur.expect("-");
    e.logical.end_col = cur.integer();
    cur.end_line();
    out.push_back(e);
  }
  return out;
}

RowColTarget parse_row_col_target(std::string_view target) {
  RowColTarget out;
  if (target == kEmptyTarget) return out;
  Cursor cur(target);
  while (!cur.done()) {
    const bool is_row = cur.peek("row ");
    cur.expect(is_row ? "row " : "col ");
    BandEntry e;
    e.band = cur.box();
    cur.expect(":");
    while (cur.peek("<")) e.cells.push_back(cur.box());
    cur.end_line();
    if (is_row) {
      if (!out.cols.empty()) cur.fail("row after columns");
      out.rows.push_back(std::move(e));
    } else {
      out.cols.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<SpotEntry> parse_spot_target(std::string_view target, bool with_coords) {
  if (target == kEmptyTarget) return {};
  Cursor cur(target);
  std::vector<SpotEntry> out;
  while (true) {
    SpotEntry e;
    if (with_coords) {
      e.box = cur.box();
      cur.expect(" ");
    }
    e.text = std::string(cur.rest_of_line());
    out.push_back(std::move(e));
    if (cur.done()) break;
    cur.expect("\n");
  }
  return out;
}

std::pair<int, int> parse_markdown_structure(std::string_view target) {
  if (target == kEmptyTarget) return {0, 0};
  int rows = 0, cols = -1;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= target.size()) {
    const auto nl = target.find('\n', pos);
    const auto line = target.substr(pos, (nl == std::string_view::npos ? target.size() : nl) - pos);
    const int bars = static_cast<int>(std::count(line.begin(), line.end(), '|'));
    if (line.empty() || line.front() != '|' || line.back() != '|' || bars < 2)
      throw Error("bad markdown row " + std::to_string(line_no));
    if (cols < 0) cols = bars - 1;
    if (bars - 1 != cols) throw Error("ragged markdown row " + std::to_string(line_no));
    const bool separator = line.find("---") != std::string_view::npos;
    if (separator != (line_no == 1)) throw Error("misplaced markdown separator at row " + std::to_string(line_no));
    if (!separator) ++rows;
    ++line_no;
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return {rows, cols};
}

}  // namespace tabkit
