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
#include "tabkit/annotation.hpp"
#include "tabkit/io.hpp"
#include "tabkit/synth.hpp"

using namespace tabkit;

namespace {

// 2x2 table with a colspan over the first row.
TableAnnotation two_by_two() {
  TableAnnotation t;
  t.id = "t";
  t.image_size = {100, 100};
  t.cells = {{0, BBox{0, 0, 1, 0.5}, {0, 0, 0, 1}, "head"},
             {1, BBox{0, 0.5, 0.5, 1}, {1, 1, 0, 0}, "a"},
             {2, BBox{0.5, 0.5, 1, 1}, {1, 1, 1, 1}, "b"}};
  t.grids = {{0, 0, 0, {0, 0, 0.5, 0.5}}, {0, 0, 1, {0.5, 0, 1, 0.5}},
             {1, 1, 0, {0, 0.5, 0.5, 1}}, {2, 1, 1, {0.5, 0.5, 1, 1}}};
  return t;
}

bool has(const std::vector<ViolationReport>& v, Violation k) {
  for (const auto& r : v)
    if (r.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("a well-formed table has no violations") {
  const auto t = two_by_two();
  CHECK(find_violations(t, true).empty());
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 2);
  CHECK_NOTHROW(validate(t, true));
}

TEST_CASE("each invariant is detected") {
  auto t = two_by_two();
  t.cells[2].id = 0;
  CHECK(has(find_violations(t), Violation::kBadIds));

  t = two_by_two();
  t.cells[1].bbox = BBox{0.6, 0.5, 0.4, 1};
  CHECK(has(find_violations(t), Violation::kBadGeometry));

  t = two_by_two();
  t.cells[1].logical = {1, 0, 0, 0};
  CHECK(has(find_violations(t), Violation::kBadLogical));

  t = two_by_two();
  t.cells[1].logical.end_col = 1;
  CHECK(has(find_violations(t), Violation::kOverlappingLogical));

  t = two_by_two();
  t.cells.pop_back();
  t.grids.pop_back();
  CHECK(has(find_violations(t), Violation::kNonRectangular));

  t = two_by_two();
  t.grids[3].cell_id = 1;
  CHECK(has(find_violations(t), Violation::kIncompleteGrids));
  CHECK_THROWS_AS(validate(t), ValidationError);

  t = two_by_two();
  t.grids.clear();
  CHECK(find_violations(t).empty());
  CHECK(has(find_violations(t, true), Violation::kIncompleteGrids));
}

TEST_CASE("row and column lines are unions of grid slots") {
  const auto lines = derive_row_col_lines(two_by_two());
  REQUIRE(lines.rows.size() == 2);
  CHECK(lines.rows[0] == BBox{0, 0, 1, 0.5});
  CHECK(lines.cols[1] == BBox{0.5, 0, 1, 1});
  auto t = two_by_two();
  t.grids.clear();
  CHECK_THROWS_AS(derive_row_col_lines(t), ValidationError);
}

TEST_CASE("logical order sorts by start row then start column") {
  auto t = two_by_two();
  std::swap(t.cells[0], t.cells[2]);
  const auto order = cells_in_logical_order(t);
  CHECK(order[0]->content == "head");
  CHECK(order[1]->content == "a");
  CHECK(order[2]->content == "b");
}

TEST_CASE("annotations survive a JSON round trip") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto t = synth_table(rng, SynthConfig{}, "j" + std::to_string(i));
    if (i % 3 == 0) t.augmented_from = Provenance{"src", {0, 5, 1, 6}};
    CHECK(annotation_from_json(to_json(t)) == t);
  }
}

TEST_CASE("synthetic tables are valid") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) CHECK(find_violations(synth_table(rng, SynthConfig{}, "s"), true).empty());
}
