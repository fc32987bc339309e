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

#include "tabkit/html.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

#include "tabkit/errors.hpp"

namespace tabkit {

int tree_size(const HtmlNode& node) {
  int n = 1;
  for (const auto& c : node.children) n += tree_size(c);
  return n;
}

HtmlNode grid_to_html(const TableAnnotation& ann) {
  validate(ann);
  HtmlNode table = HtmlNode::table({});
  const int rows = ann.rows();
  table.children.assign(rows, HtmlNode::tr({}));
  for (const Cell* c : cells_in_logical_order(ann)) {
    table.children[c->logical.start_row].children.push_back(
        HtmlNode::td(c->content, c->logical.row_span(), c->logical.col_span()));
  }
  return table;
}

namespace {

void serialize_into(const HtmlNode& node, std::string& out) {
  out += '<';
  out += node.tag;
  if (node.tag == "td") {
    if (node.rowspan != 1) out += " rowspan=\"" + std::to_string(node.rowspan) + "\"";
    if (node.colspan != 1) out += " colspan=\"" + std::to_string(node.colspan) + "\"";
    out += '>';
    out += node.content;
  } else {
    out += '>';
    for (const auto& c : node.children) serialize_into(c, out);
  }
  out += "</";
  out += node.tag;
  out += '>';
}

void collect_rows(const HtmlNode& node, std::vector<const HtmlNode*>& rows) {
  for (const auto& c : node.children) {
    if (c.tag == "tr") {
      rows.push_back(&c);
    } else if (c.tag == "thead" || c.tag == "tbody") {
      collect_rows(c, rows);
    }
  }
}

}  // namespace

std::string serialize(const HtmlNode& node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

HtmlNode canonicalize(const HtmlNode& root) {
  std::vector<const HtmlNode*> rows;
  collect_rows(root, rows);
  HtmlNode table = HtmlNode::table({});
  for (const HtmlNode* r : rows) {
    HtmlNode tr = HtmlNode::tr({});
    for (const auto& c : r->children)
      if (c.tag == "td") tr.children.push_back(c);
    table.children.push_back(std::move(tr));
  }
  return table;
}

HtmlNode erase_contents(const HtmlNode& root) {
  HtmlNode out = root;
  out.content.clear();
  for (auto& c : out.children) c = erase_contents(c);
  return out;
}

TableAnnotation html_to_grid(const HtmlNode& root) {
  std::vector<const HtmlNode*> rows;
  collect_rows(root, rows);
  if (rows.empty()) throw MalformedTable("no rows", 0);

  const int nrows = static_cast<int>(rows.size());
  // occupancy[r] grows as cells are placed; -1 marks a free slot.
  std::vector<std::vector<int>> occupancy(nrows);
  auto occupied = [&](int r, int c) {
    return c < static_cast<int>(occupancy[r].size()) && occupancy[r][c] != -1;
  };

  TableAnnotation ann;
  for (int r = 0; r < nrows; ++r) {
    int col = 0;
    for (const auto& td : rows[r]->children) {
      if (td.tag != "td") continue;
      if (td.rowspan < 1 || td.colspan < 1) throw MalformedTable("non-positive span", r);
      while (occupied(r, col)) ++col;
      const int end_row = r + td.rowspan - 1;
      const int end_col = col + td.colspan - 1;
      if (end_row >= nrows) throw MalformedTable("rowspan runs past the last row", r);
      const int id = static_cast<int>(ann.cells.size());
      for (int rr = r; rr <= end_row; ++rr) {
        auto& line = occupancy[rr];
        if (static_cast<int>(line.size()) <= end_col) line.resize(end_col + 1, -1);
        for (int cc = col; cc <= end_col; ++cc) {
          if (line[cc] != -1) throw MalformedTable("overlapping cell footprints", r);
          line[cc] = id;
        }
      }
      ann.cells.push_back({id, std::nullopt, {r, end_row, col, end_col}, td.content});
      col = end_col + 1;
    }
  }

  std::size_t width = 0;
  for (const auto& line : occupancy) width = std::max(width, line.size());
  if (width == 0) throw MalformedTable("no cells", 0);
  for (int r = 0; r < nrows; ++r) {
    const auto& line = occupancy[r];
    if (line.size() != width || std::find(line.begin(), line.end(), -1) != line.end())
      throw MalformedTable("row does not cover every column", r);
  }
  return ann;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Tag {
  std::string name;  // lower-case
  bool closing = false;
  bool self_closing = false;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::size_t begin = 0;
  std::size_t end = 0;  // one past '>'
};

bool is_structural(const std::string& name) {
  return name == "table" || name == "thead" || name == "tbody" || name == "tr" || name == "td";
}

bool is_inline(const std::string& name) { return name == "b" || name == "i" || name == "sup" || name == "sub"; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

// Reads a tag starting at s[pos] == '<'. Returns nullopt when the bytes do not
// form a tag (the '<' is then plain text). Comments and declarations come back
// with name "!".
std::optional<Tag> read_tag(std::string_view s, std::size_t pos) {
  Tag tag;
  tag.begin = pos;
  std::size_t i = pos + 1;
  if (i >= s.size()) return std::nullopt;
  if (s.compare(i, 3, "!--") == 0) {
    const auto close = s.find("-->", i + 3);
    tag.name = "!";
    tag.end = close == std::string_view::npos ? s.size() : close + 3;
    return tag;
  }
  if (s[i] == '!' || s[i] == '?') {
    const auto close = s.find('>', i);
    tag.name = "!";
    tag.end = close == std::string_view::npos ? s.size() : close + 1;
    return tag;
  }
  if (s[i] == '/') {
    tag.closing = true;
    ++i;
  }
  const std::size_t name_begin = i;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == ':')) ++i;
  if (i == name_begin || !std::isalpha(static_cast<unsigned char>(s[name_begin]))) return std::nullopt;
  tag.name = lower(s.substr(name_begin, i - name_begin));

  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    if (s[i] == '>') {
      tag.end = i + 1;
      return tag;
    }
    if (s[i] == '/') {
      tag.self_closing = true;
      ++i;
      continue;
    }
    const std::size_t an = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '=' && s[i] != '>' &&
           s[i] != '/')
      ++i;
    if (i == an) {  // stray character such as a quote
      ++i;
      continue;
    }
    std::string name = lower(s.substr(an, i - an));
    std::string value;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i < s.size() && s[i] == '=') {
      ++i;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        const char q = s[i++];
        const auto close = s.find(q, i);
        const std::size_t stop = close == std::string_view::npos ? s.size() : close;
        value = std::string(s.substr(i, stop - i));
        i = close == std::string_view::npos ? s.size() : close + 1;
      } else {
        const std::size_t vb = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '>') ++i;
        value = std::string(s.substr(vb, i - vb));
      }
    }
    tag.attrs.emplace_back(std::move(name), std::move(value));
  }
  // Unterminated tag: consumes the rest of the input.
  tag.end = s.size();
  return tag;
}

std::optional<int> parse_span(const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || out < 1) return std::nullopt;
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

class Parser {
 public:
  Parser(std::string_view s, ParseMode mode, ParseDiagnostics& diag) : s_(s), strict_(mode == ParseMode::kStrict), diag_(diag) {}

  HtmlNode run() {
    std::size_t pos = 0;
    while (pos < s_.size() && !done_) {
      if (s_[pos] == '<') {
        if (auto tag = read_tag(s_, pos)) {
          if (tag->end == s_.size() && s_.back() != '>' && strict_) fail("unterminated tag", pos);
          handle_tag(*tag);
          pos = tag->end;
          continue;
        }
      }
      const auto next = s_.find('<', pos + 1);
      const std::size_t stop = next == std::string_view::npos ? s_.size() : next;
      handle_text(s_.substr(pos, stop - pos), pos);
      pos = stop;
    }
    if (strict_) {
      if (pos < s_.size() && !is_blank(s_.substr(pos))) fail("content after </table>", pos);
      if (!root_) fail("no table element", s_.size());
      if (!stack_.empty()) fail("unclosed <" + stack_.back()->tag + ">", s_.size());
    } else if (!stack_.empty()) {
      diag_.auto_closed += static_cast<int>(stack_.size());
      stack_.clear();
    }
    diag_.found_table = root_.has_value();
    return root_ ? *root_ : HtmlNode::table({});
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t offset) { throw ParseError(what, offset); }

  HtmlNode* top() { return stack_.empty() ? nullptr : stack_.back(); }
  bool in_td() const { return !stack_.empty() && stack_.back()->tag == "td"; }

  void drop(const Tag& tag, const std::string& why) {
    if (strict_) fail(why + " <" + (tag.closing ? "/" : "") + tag.name + ">", tag.begin);
    ++diag_.dropped_tags;
  }

  void handle_text(std::string_view text, std::size_t offset) {
    if (in_td()) {
      stack_.back()->content.append(text);
      return;
    }
    if (is_blank(text)) return;
    if (strict_) fail("text outside a cell", offset);
  }

  // The open-element stack is rebuilt from the root after every structural open.
  void push(HtmlNode node) {
    HtmlNode* parent = top();
    parent->children.push_back(std::move(node));
    path_.push_back(parent->children.size() - 1);
    rebuild_stack();
  }

  void rebuild_stack() {
    stack_.clear();
    HtmlNode* cur = &*root_;
    stack_.push_back(cur);
    for (std::size_t idx : path_) {
      cur = &cur->children[idx];
      stack_.push_back(cur);
    }
  }

  void pop_to(std::size_t depth) {
    // depth counts nodes on the stack including the root
    if (depth == 0) {
      stack_.clear();
      path_.clear();
      done_ = true;
      return;
    }
    path_.resize(depth - 1);
    rebuild_stack();
  }

  bool close_named(const std::string& name) {
    for (std::size_t i = stack_.size(); i-- > 0;) {
      if (stack_[i]->tag == name) {
        diag_.auto_closed += static_cast<int>(stack_.size() - i - 1);
        pop_to(i);
        return true;
      }
    }
    return false;
  }

  void handle_td_content_tag(const Tag& tag) {
    if (tag.name == "table" && !tag.closing) {
      if (strict_) fail("nested table", tag.begin);
      ++nested_;
      ++diag_.dropped_tags;
      return;
    }
    if (nested_ > 0) {
      if (tag.name == "table" && tag.closing) --nested_;
      ++diag_.dropped_tags;
      if (is_structural(tag.name) && (tag.name == "td" || tag.name == "tr") && tag.closing) {
        stack_.back()->content += ' ';
      }
      return;
    }
    if (is_inline(tag.name)) {
      if (strict_ && !tag.attrs.empty()) fail("attribute on inline tag", tag.begin);
      stack_.back()->content += tag.closing ? "</" + tag.name + ">" : "<" + tag.name + ">";
      return;
    }
    if (tag.name == "td" && tag.closing) {
      pop_to(stack_.size() - 1);
      return;
    }
    if (is_structural(tag.name) || tag.name == "th") {
      // A structural tag while a td is open: the td was never closed.
      if (strict_) fail("unclosed <td>", tag.begin);
      ++diag_.auto_closed;
      pop_to(stack_.size() - 1);
      handle_tag(tag);
      return;
    }
    drop(tag, "unsupported tag");
  }

  void handle_tag(Tag tag) {
    if (tag.name == "!") {
      drop(tag, "unsupported markup");
      return;
    }
    if (!strict_ && tag.name == "th") tag.name = "td";
    if (in_td()) {
      handle_td_content_tag(tag);
      return;
    }
    if (!is_structural(tag.name)) {
      drop(tag, "unsupported tag");
      return;
    }
    if (tag.closing) {
      if (!strict_) {
        if (!close_named(tag.name)) ++diag_.dropped_tags;
        return;
      }
      if (stack_.empty() || stack_.back()->tag != tag.name) fail("mismatched </" + tag.name + ">", tag.begin);
      pop_to(stack_.size() - 1);
      return;
    }

    HtmlNode node;
    node.tag = tag.name;
    for (const auto& [name, value] : tag.attrs) {
      if (tag.name == "td" && (name == "rowspan" || name == "colspan")) {
        auto span = parse_span(value);
        if (!span) {
          if (strict_) fail("invalid " + name + " value", tag.begin);
          ++diag_.dropped_tags;
          continue;
        }
        (name == "rowspan" ? node.rowspan : node.colspan) = *span;
      } else if (strict_) {
        fail("unsupported attribute '" + name + "'", tag.begin);
      }
    }

    if (tag.name == "table") {
      if (!root_) {
        root_ = std::move(node);
        path_.clear();
        rebuild_stack();
        return;
      }
      if (strict_) fail("nested table", tag.begin);
      ++diag_.dropped_tags;
      return;
    }

    if (!root_) {
      if (strict_) fail("<" + tag.name + "> before <table>", tag.begin);
      root_ = HtmlNode::table({});
      path_.clear();
      rebuild_stack();
      ++diag_.auto_closed;
    }

    const std::string parent = stack_.back()->tag;
    if (tag.name == "thead" || tag.name == "tbody") {
      if (parent != "table") {
        if (strict_) fail("<" + tag.name + "> outside <table>", tag.begin);
        diag_.auto_closed += static_cast<int>(stack_.size()) - 1;
        pop_to(1);
      }
      push(std::move(node));
    } else if (tag.name == "tr") {
      if (parent == "tr") {
        if (strict_) fail("unclosed <tr>", tag.begin);
        ++diag_.auto_closed;
        pop_to(stack_.size() - 1);
      }
      push(std::move(node));
    } else {  // td
      if (parent != "tr") {
        if (strict_) fail("<td> outside <tr>", tag.begin);
        ++diag_.auto_closed;
        push(HtmlNode::tr({}));
      }
      if (tag.self_closing) {
        top()->children.push_back(std::move(node));
        return;
      }
      push(std::move(node));
    }
  }

  std::string_view s_;
  bool strict_;
  ParseDiagnostics& diag_;
  std::optional<HtmlNode> root_;
  std::vector<HtmlNode*> stack_;
  std::vector<std::size_t> path_;
  int nested_ = 0;
  bool done_ = false;
};

}  // namespace

HtmlNode parse_html_string(std::string_view s, ParseMode mode, ParseDiagnostics* diag) {
  ParseDiagnostics local;
  Parser parser(s, mode, diag ? *diag : local);
  return parser.run();
}

}  // namespace tabkit
