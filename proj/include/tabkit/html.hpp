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

#include <string>
#include <string_view>
#include <vector>

#include "tabkit/annotation.hpp"

namespace tabkit {

/// Table HTML tree restricted to table/thead/tbody/tr/td. Only td carries
/// span attributes and content; content keeps inline markup verbatim.
struct HtmlNode {
  std::string tag;
  int rowspan = 1;
  int colspan = 1;
  std::string content;
  std::vector<HtmlNode> children;

  static HtmlNode td(std::string content = {}, int rowspan = 1, int colspan = 1) {
    return {"td", rowspan, colspan, std::move(content), {}};
  }
  static HtmlNode tr(std::vector<HtmlNode> cells) { return {"tr", 1, 1, {}, std::move(cells)}; }
  static HtmlNode table(std::vector<HtmlNode> rows) { return {"table", 1, 1, {}, std::move(rows)}; }

  friend bool operator==(const HtmlNode&, const HtmlNode&) = default;
};

/// Number of nodes in the tree.
int tree_size(const HtmlNode& node);

/// Builds table[tr[td...]...] with cells in row-major order of their start
/// slot; span attributes are omitted when 1. Validates the annotation first.
HtmlNode grid_to_html(const TableAnnotation& ann);

/// Canonical bytes: double-quoted attributes, rowspan before colspan, no
/// whitespace between tags.
std::string serialize(const HtmlNode& node);

/// Span-occupancy reconstruction. The result has logical coordinates and
/// contents, ids in document order, and no boxes or grids. Throws
/// MalformedTable on overlapping footprints or ragged rows.
TableAnnotation html_to_grid(const HtmlNode& root);

enum class ParseMode { kStrict, kLenient };

struct ParseDiagnostics {
  bool found_table = false;
  int dropped_tags = 0;
  int auto_closed = 0;
};

/// Strict mode throws ParseError (with byte offset) on any tag, attribute or
/// stray text outside the supported structure. Lenient mode never throws: it
/// drops unknown tags and attributes, treats th as td, auto-closes unclosed
/// td/tr/table, and folds nested table text into the enclosing cell.
HtmlNode parse_html_string(std::string_view s, ParseMode mode, ParseDiagnostics* diag = nullptr);

/// Flattens thead/tbody so the tree is table -> tr -> td.
HtmlNode canonicalize(const HtmlNode& root);

/// Same tree with every td content erased.
HtmlNode erase_contents(const HtmlNode& root);

}  // namespace tabkit
