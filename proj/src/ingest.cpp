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

#include "tabkit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabkit/errors.hpp"
#include "tabkit/html.hpp"

namespace tabkit {

std::optional<SourceKind> parse_source_kind(std::string_view name) {
  if (name == "pubtabnet") return SourceKind::kPubTabNet;
  if (name == "grid") return SourceKind::kGrid;
  if (name == "spotting") return SourceKind::kSpotting;
  return std::nullopt;
}

namespace {

BBox pixel_box(const json& j, const ImageSize& size) {
  const BBox px = box_from_json(j);
  const double w = size.width, h = size.height;
  return {px.x1 / w, px.y1 / h, px.x2 / w, px.y2 / h};
}

ImageSize read_image_size(const json& rec) {
  const auto& s = rec.at("image_size");
  ImageSize size{s.at(0).get<int>(), s.at(1).get<int>()};
  if (size.width <= 0 || size.height <= 0) throw Error("image_size must be positive");
  return size;
}

std::string read_text(const json& jc) {
  if (jc.contains("tokens")) {
    std::string s;
    for (const auto& t : jc["tokens"]) s += t.get<std::string>();
    return s;
  }
  if (jc.contains("content")) return jc["content"].get<std::string>();
  return jc.value("text", std::string{});
}

// Rebuilds the table HTML from PubTabNet structure tokens, inserting each
// cell's text before its closing </td>.
std::string pubtabnet_html(const json& html) {
  if (html.is_string()) return html.get<std::string>();
  const auto& tokens = html.at("structure").at("tokens");
  const auto& cells = html.contains("cells") ? html["cells"] : json::array();
  std::string out;
  std::size_t cell = 0;
  bool has_table = false;
  for (const auto& t : tokens) {
    const auto tok = t.get<std::string>();
    if (tok == "<table>") has_table = true;
    if (tok == "</td>") {
      if (cell < cells.size()) out += read_text(cells[cell]);
      ++cell;
    }
    out += tok;
  }
  return has_table ? out : "<table>" + out + "</table>";
}

LogicalCoords read_logical(const json& jc) {
  if (jc.contains("logical")) {
    const auto& l = jc["logical"];
    if (l.is_array())
      return {l.at(0).get<int>(), l.at(1).get<int>(), l.at(2).get<int>(), l.at(3).get<int>()};
    return {l.at("start_row").get<int>(), l.at("end_row").get<int>(), l.at("start_col").get<int>(),
            l.at("end_col").get<int>()};
  }
  return {jc.at("start_row").get<int>(), jc.at("end_row").get<int>(), jc.at("start_col").get<int>(),
          jc.at("end_col").get<int>()};
}

void attach_grids(TableAnnotation& ann) {
  if (!ann.grids.empty()) return;
  const bool any_box = std::any_of(ann.cells.begin(), ann.cells.end(), [](const Cell& c) { return c.bbox.has_value(); });
  if (!any_box) return;
  try {
    ann.grids = derive_grids(ann.cells);
  } catch (const Error&) {
    // left empty; clean() reports the record
  }
}

}  // namespace

std::vector<int> group_into_bands(const std::vector<std::pair<double, double>>& intervals, double min_overlap) {
  std::vector<std::size_t> order(intervals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (intervals[a].first != intervals[b].first) return intervals[a].first < intervals[b].first;
    return intervals[a].second < intervals[b].second;
  });
  std::vector<int> band(intervals.size(), -1);
  int current = -1;
  double lo = 0, hi = 0;
  for (std::size_t idx : order) {
    const auto [a, b] = intervals[idx];
    bool joins = false;
    if (current >= 0) {
      const double overlap = std::min(b, hi) - std::max(a, lo);
      const double shorter = std::min(b - a, hi - lo);
      if (shorter > 0) {
        joins = overlap / shorter >= min_overlap;
      } else {
        joins = overlap >= 0;  // a degenerate interval joins a band it touches
      }
    }
    if (joins) {
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    } else {
      ++current;
      lo = a;
      hi = b;
    }
    band[idx] = current;
  }
  return band;
}

TableAnnotation unify(const json& record, SourceKind kind) {
  TableAnnotation ann;
  ann.id = record.contains("id") ? record["id"].get<std::string>() : record.value("filename", std::string{});
  ann.image_size = read_image_size(record);
  ann.table_box = record.contains("table_box") ? pixel_box(record["table_box"], ann.image_size) : BBox{0, 0, 1, 1};
  ann.wireless = record.value("wireless", false);

  switch (kind) {
    case SourceKind::kPubTabNet: {
      const auto& html = record.at("html");
      ann = [&] {
        TableAnnotation grid = html_to_grid(parse_html_string(pubtabnet_html(html), ParseMode::kLenient));
        grid.id = ann.id;
        grid.image_size = ann.image_size;
        grid.table_box = ann.table_box;
        grid.wireless = ann.wireless;
        return grid;
      }();
      const json* boxes = nullptr;
      if (html.is_object() && html.contains("cells")) boxes = &html["cells"];
      else if (record.contains("cells")) boxes = &record["cells"];
      if (boxes) {
        if (boxes->size() != ann.cells.size())
          throw Error("record '" + ann.id + "': " + std::to_string(boxes->size()) + " cell entries for " +
                      std::to_string(ann.cells.size()) + " cells in the HTML");
        for (std::size_t i = 0; i < ann.cells.size(); ++i) {
          const auto& jc = (*boxes)[i];
          if (jc.contains("bbox") && !jc["bbox"].is_null()) ann.cells[i].bbox = pixel_box(jc["bbox"], ann.image_size);
        }
      }
      break;
    }
    case SourceKind::kGrid: {
      int id = 0;
      for (const auto& jc : record.at("cells")) {
        Cell c;
        c.id = id++;
        if (jc.contains("bbox") && !jc["bbox"].is_null()) c.bbox = pixel_box(jc["bbox"], ann.image_size);
        c.logical = read_logical(jc);
        c.content = read_text(jc);
        ann.cells.push_back(std::move(c));
      }
      if (record.contains("grids")) {
        for (const auto& jg : record["grids"]) {
          ann.grids.push_back({jg.at("cell_id").get<int>(), jg.at("row").get<int>(), jg.at("col").get<int>(),
                               pixel_box(jg.at("bbox"), ann.image_size)});
        }
      }
      break;
    }
    case SourceKind::kSpotting: {
      std::vector<std::pair<double, double>> ys, xs;
      int id = 0;
      for (const auto& jc : record.at("cells")) {
        Cell c;
        c.id = id++;
        c.bbox = pixel_box(jc.at("bbox"), ann.image_size);
        c.content = read_text(jc);
        ys.emplace_back(c.bbox->y1, c.bbox->y2);
        xs.emplace_back(c.bbox->x1, c.bbox->x2);
        ann.cells.push_back(std::move(c));
      }
      const auto rows = group_into_bands(ys, 0.5);
      const auto cols = group_into_bands(xs, 0.5);
      for (std::size_t i = 0; i < ann.cells.size(); ++i) ann.cells[i].logical = {rows[i], rows[i], cols[i], cols[i]};
      break;
    }
  }
  attach_grids(ann);
  return ann;
}

std::vector<GridEntry> derive_grids(const std::vector<Cell>& cells) {
  TableAnnotation probe;
  probe.cells = cells;
  for (const auto& v : find_violations(probe)) {
    if (v.kind == Violation::kBadLogical || v.kind == Violation::kOverlappingLogical ||
        v.kind == Violation::kNonRectangular)
      throw ValidationError(std::string("cannot derive grids: ") + to_string(v.kind) + ": " + v.detail);
  }
  const int nrows = probe.rows(), ncols = probe.cols();

  // Returns the [lo, hi] band of every index along one axis.
  auto bands = [&](int count, bool vertical) {
    std::vector<std::pair<double, double>> ext(count);
    for (int k = 0; k < count; ++k) {
      bool found = false;
      for (int pass = 0; pass < 2 && !found; ++pass) {
        for (const auto& c : cells) {
          if (!c.bbox) continue;
          const int s = vertical ? c.logical.start_row : c.logical.start_col;
          const int e = vertical ? c.logical.end_row : c.logical.end_col;
          if (k < s || k > e || (pass == 0 && s != e)) continue;
          const double lo = vertical ? c.bbox->y1 : c.bbox->x1;
          const double hi = vertical ? c.bbox->y2 : c.bbox->x2;
          ext[k] = found ? std::pair{std::min(ext[k].first, lo), std::max(ext[k].second, hi)} : std::pair{lo, hi};
          found = true;
        }
      }
      if (!found)
        throw ValidationError(std::string("cannot derive grids: no boxed cell covers ") + (vertical ? "row " : "column ") +
                              std::to_string(k));
    }
    std::vector<std::pair<double, double>> out(count);
    double prev = ext[0].first;
    for (int k = 0; k < count; ++k) {
      double hi = k + 1 < count ? (ext[k].second + ext[k + 1].first) / 2 : ext[k].second;
      hi = std::max(hi, prev);
      out[k] = {prev, hi};
      prev = hi;
    }
    return out;
  };
  const auto row_band = bands(nrows, true);
  const auto col_band = bands(ncols, false);

  std::vector<GridEntry> grids;
  grids.reserve(static_cast<std::size_t>(nrows) * ncols);
  std::vector<int> owner(static_cast<std::size_t>(nrows) * ncols, -1);
  for (const auto& c : cells)
    for (int r = c.logical.start_row; r <= c.logical.end_row; ++r)
      for (int k = c.logical.start_col; k <= c.logical.end_col; ++k) owner[r * ncols + k] = c.id;
  for (int r = 0; r < nrows; ++r)
    for (int k = 0; k < ncols; ++k)
      grids.push_back({owner[r * ncols + k], r, k,
                       {clamp01(col_band[k].first), clamp01(row_band[r].first), clamp01(col_band[k].second),
                        clamp01(row_band[r].second)}});
  return grids;
}

std::pair<int, int> collapse_redundant_grids(TableAnnotation& ann) {
  int removed_rows = 0, removed_cols = 0;
  auto owner_at = [&](int nrows, int ncols) {
    std::vector<int> owner(static_cast<std::size_t>(nrows) * ncols, -1);
    for (const auto& g : ann.grids) owner[g.row * ncols + g.col] = g.cell_id;
    return owner;
  };
  // Merges line k+1 into line k along one axis.
  auto merge = [&](int k, bool rows) {
    for (auto& c : ann.cells) {
      int& s = rows ? c.logical.start_row : c.logical.start_col;
      int& e = rows ? c.logical.end_row : c.logical.end_col;
      if (s > k) --s;
      if (e > k) --e;
    }
    std::vector<GridEntry> next;
    next.reserve(ann.grids.size());
    for (const auto& g : ann.grids) {
      const int line = rows ? g.row : g.col;
      if (line == k + 1) {
        for (auto& h : ann.grids) {
          if ((rows ? h.row : h.col) == k && (rows ? h.col == g.col : h.row == g.row)) h.bbox = bbox_union(h.bbox, g.bbox);
        }
      }
    }
    for (const auto& g : ann.grids) {
      const int line = rows ? g.row : g.col;
      if (line == k + 1) continue;
      GridEntry e = g;
      if (line > k + 1) --(rows ? e.row : e.col);
      next.push_back(e);
    }
    ann.grids = std::move(next);
  };

  bool changed = true;
  while (changed) {
    changed = false;
    const int nrows = ann.rows(), ncols = ann.cols();
    const auto owner = owner_at(nrows, ncols);
    for (int r = 0; r + 1 < nrows && !changed; ++r) {
      if (std::equal(owner.begin() + r * ncols, owner.begin() + (r + 1) * ncols, owner.begin() + (r + 1) * ncols)) {
        merge(r, true);
        ++removed_rows;
        changed = true;
      }
    }
    for (int k = 0; k + 1 < ncols && !changed; ++k) {
      bool same = true;
      for (int r = 0; r < nrows && same; ++r) same = owner[r * ncols + k] == owner[r * ncols + k + 1];
      if (same) {
        merge(k, false);
        ++removed_cols;
        changed = true;
      }
    }
  }
  return {removed_rows, removed_cols};
}

std::string CleanResult::report() const {
  std::string out;
  for (const auto& e : dropped) out += e.id + ", " + e.rule + ", " + e.detail + "\n";
  for (const auto& e : collapsed) out += e.id + ", " + e.rule + ", " + e.detail + "\n";
  return out;
}

CleanResult clean(std::vector<TableAnnotation> anns) {
  CleanResult result;
  for (auto& ann : anns) {
    const auto violations = find_violations(ann, /*grids_required=*/true);
    const ViolationReport* first = violations.empty() ? nullptr : &violations.front();
    if (first) {
      std::string rule;
      switch (first->kind) {
        case Violation::kBadIds:
        case Violation::kBadGeometry:
        case Violation::kBadLogical: rule = "malformed"; break;
        case Violation::kOverlappingLogical: rule = "overlapping_logical"; break;
        case Violation::kNonRectangular:
        case Violation::kIncompleteGrids: rule = "incomplete_grids"; break;
      }
      result.dropped.push_back({ann.id, rule, std::string(to_string(first->kind)) + ": " + first->detail});
      continue;
    }
    const auto [rows, cols] = collapse_redundant_grids(ann);
    if (rows + cols > 0) {
      result.collapsed.push_back({ann.id, "redundant_grids",
                                  "collapsed " + std::to_string(rows) + " row(s) and " + std::to_string(cols) +
                                      " column(s)"});
    }
    result.kept.push_back(std::move(ann));
  }
  return result;
}

BBox to_frame(const BBox& b, const BBox& f) {
  const double w = f.width(), h = f.height();
  return {(b.x1 - f.x1) / w, (b.y1 - f.y1) / h, (b.x2 - f.x1) / w, (b.y2 - f.y1) / h};
}

BBox from_frame(const BBox& b, const BBox& f) {
  const double w = f.width(), h = f.height();
  return {f.x1 + b.x1 * w, f.y1 + b.y1 * h, f.x1 + b.x2 * w, f.y1 + b.y2 * h};
}

namespace {

// Clamps to [0,1]; `outside` is set when a coordinate leaves the unit range by
// more than the crop tolerance.
BBox clamp_box(const BBox& b, bool& outside) {
  for (double v : b.coords())
    if (v < -kCropTolerance || v > 1 + kCropTolerance) outside = true;
  return {clamp01(b.x1), clamp01(b.y1), clamp01(b.x2), clamp01(b.y2)};
}

}  // namespace

CropResult crop_table(ImageSize document_size, const TableAnnotation& ann) {
  const BBox frame = ann.table_box;
  if (!is_valid(frame) || !(frame.width() > 0) || !(frame.height() > 0))
    throw ValidationError("table_box must be a positive-area box inside the image");
  CropResult out;
  out.table = ann;
  out.table.table_box = {0, 0, 1, 1};
  out.table.image_size = {static_cast<int>(std::lround(document_size.width * frame.width())),
                          static_cast<int>(std::lround(document_size.height * frame.height()))};
  for (auto& c : out.table.cells) {
    if (!c.bbox) continue;
    bool outside = false;
    c.bbox = clamp_box(to_frame(*c.bbox, frame), outside);
    if (outside) out.clipped_cells.push_back(c.id);
  }
  for (auto& g : out.table.grids) {
    bool ignored = false;
    g.bbox = clamp_box(to_frame(g.bbox, frame), ignored);
  }
  return out;
}

TableAnnotation uncrop_table(const TableAnnotation& local, const BBox& table_box, ImageSize document_size) {
  TableAnnotation out = local;
  out.table_box = table_box;
  out.image_size = document_size;
  for (auto& c : out.cells)
    if (c.bbox) c.bbox = from_frame(*c.bbox, table_box);
  for (auto& g : out.grids) g.bbox = from_frame(g.bbox, table_box);
  return out;
}

}  // namespace tabkit
