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

#include <random>

#include "doctest.h"
#include "tabkit/errors.hpp"
#include "tabkit/html.hpp"
#include "tabkit/synth.hpp"

using namespace tabkit;

namespace {

TableAnnotation spans_table() {
  TableAnnotation t;
  t.cells = {{0, std::nullopt, {0, 1, 0, 0}, "a"},
             {1, std::nullopt, {0, 0, 1, 2}, "b<b>x</b>"},
             {2, std::nullopt, {1, 1, 1, 1}, ""},
             {3, std::nullopt, {1, 1, 2, 2}, "d"}};
  return t;
}

}  // namespace

TEST_CASE("canonical serialization") {
  const auto html = grid_to_html(spans_table());
  CHECK(serialize(html) ==
        "<table><tr><td rowspan=\"2\">a</td><td colspan=\"2\">b<b>x</b></td></tr>"
        "<tr><td></td><td>d</td></tr></table>");
  CHECK(tree_size(html) == 7);
  CHECK(serialize(HtmlNode::table({HtmlNode::tr({HtmlNode::td("x", 3, 2)})})) ==
        "<table><tr><td rowspan=\"3\" colspan=\"2\">x</td></tr></table>");
}

TEST_CASE("span occupancy reconstruction") {
  const auto back = html_to_grid(grid_to_html(spans_table()));
  const auto orig = spans_table();
  REQUIRE(back.cells.size() == orig.cells.size());
  for (std::size_t i = 0; i < orig.cells.size(); ++i) {
    CHECK(back.cells[i].logical == orig.cells[i].logical);
    CHECK(back.cells[i].content == orig.cells[i].content);
    CHECK_FALSE(back.cells[i].bbox.has_value());
  }
  CHECK(back.grids.empty());
}

TEST_CASE("malformed layouts are rejected") {
  using H = HtmlNode;
  CHECK_THROWS_AS(html_to_grid(H::table({})), MalformedTable);
  CHECK_THROWS_AS(html_to_grid(H::table({H::tr({H::td("", 2, 1)})})), MalformedTable);
  CHECK_THROWS_AS(html_to_grid(H::table({H::tr({H::td(), H::td()}), H::tr({H::td()})})), MalformedTable);
  CHECK_THROWS_AS(
      html_to_grid(H::table({H::tr({H::td("", 2, 1), H::td()}), H::tr({H::td(), H::td()})})), MalformedTable);
}

TEST_CASE("strict parsing of canonical output is the identity") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    const auto html = grid_to_html(synth_table(rng, SynthConfig{}, "h"));
    const auto s = serialize(html);
    CHECK(parse_html_string(s, ParseMode::kStrict) == html);
    CHECK(serialize(parse_html_string(s, ParseMode::kLenient)) == s);
  }
}

TEST_CASE("strict mode reports the byte offset") {
  try {
    parse_html_string("<table><tr><td>a</td><foo></foo></tr></table>", ParseMode::kStrict);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 21);
  }
  CHECK_THROWS_AS(parse_html_string("<table><tr><td x=\"1\">a</td></tr></table>", ParseMode::kStrict), ParseError);
  CHECK_THROWS_AS(parse_html_string("<table><tr><td>a</td></tr>", ParseMode::kStrict), ParseError);
  CHECK_THROWS_AS(parse_html_string("<table>junk<tr><td>a</td></tr></table>", ParseMode::kStrict), ParseError);
  CHECK_NOTHROW(parse_html_string("<table><tr><td><i>a</i><sup>2</sup></td></tr></table>", ParseMode::kStrict));
}

TEST_CASE("lenient mode repairs common damage") {
  ParseDiagnostics diag;
  const auto t = parse_html_string("<html><table class=\"x\"><tr><th>h</th><td>a<span>b</span></td></tr><tr><td>c",
                                   ParseMode::kLenient, &diag);
  CHECK(diag.found_table);
  CHECK(diag.dropped_tags > 0);
  CHECK(diag.auto_closed > 0);
  const auto c = canonicalize(t);
  REQUIRE(c.children.size() == 2);
  CHECK(c.children[0].children[0].tag == "td");
  CHECK(c.children[0].children[0].content == "h");
  CHECK(c.children[1].children[0].content == "c");

  ParseDiagnostics none;
  parse_html_string("no table here", ParseMode::kLenient, &none);
  CHECK_FALSE(none.found_table);
}

TEST_CASE("head and body sections flatten") {
  const auto t = parse_html_string("<table><thead><tr><td>a</td></tr></thead><tbody><tr><td>b</td></tr></tbody></table>",
                                   ParseMode::kStrict);
  const auto c = canonicalize(t);
  CHECK(serialize(c) == "<table><tr><td>a</td></tr><tr><td>b</td></tr></table>");
  CHECK(serialize(erase_contents(c)) == "<table><tr><td></td></tr><tr><td></td></tr></table>");
}
