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
#include "support/corpus.hpp"
#include "tabkit/errors.hpp"
#include "tabkit/augment.hpp"
#include "tabkit/io.hpp"

using namespace tabkit;

namespace {

SynthConfig big_tables() {
  SynthConfig cfg;
  cfg.min_rows = cfg.min_cols = 6;
  cfg.span_probability = 0.4;
  return cfg;
}

// A cell crosses the region border when it meets the region without lying
// inside it.
bool cuts(const TableAnnotation& t, const Region& r) {
  for (const auto& c : t.cells) {
    const auto& l = c.logical;
    const bool meets = l.start_row <= r.r2 && l.end_row >= r.r1 && l.start_col <= r.c2 && l.end_col >= r.c1;
    const bool inside = l.start_row >= r.r1 && l.end_row <= r.r2 && l.start_col >= r.c1 && l.end_col <= r.c2;
    if (meets && !inside) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("shrinking removes every cut") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, 9);
  for (int i = 0; i < 300; ++i) {
    const auto t = synth_table(rng, big_tables(), "s");
    Region r{0, t.rows() - 1, 0, t.cols() - 1};
    r.r1 = std::min(pick(rng), t.rows() - 1);
    r.c1 = std::min(pick(rng), t.cols() - 1);
    r.r2 = std::max(r.r1, std::min(pick(rng), t.rows() - 1));
    r.c2 = std::max(r.c1, std::min(pick(rng), t.cols() - 1));
    const bool anchored = i % 2 == 0;
    if (anchored) r.r1 = r.c1 = 0;
    const auto s = shrink_until_uncut(t, r, anchored);
    if (!s) continue;
    CHECK_FALSE(cuts(t, *s));
    CHECK(s->r1 >= r.r1);
    CHECK(s->r2 <= r.r2);
    CHECK(s->c1 >= r.c1);
    CHECK(s->c2 <= r.c2);
    if (anchored) CHECK((s->r1 == 0 && s->c1 == 0));
  }
}

TEST_CASE("extracted regions are valid and re-indexed") {
  std::mt19937_64 rng(2);
  const auto t = synth_table(rng, big_tables(), "e");
  const Region all{0, t.rows() - 1, 0, t.cols() - 1};
  const auto same = extract_region(t, all);
  REQUIRE(same.cells.size() == t.cells.size());
  for (std::size_t k = 0; k < t.cells.size(); ++k) CHECK(same.cells[k].logical == t.cells[k].logical);
  CHECK(find_violations(same, true).empty());
}

TEST_CASE("sampled sub-tables satisfy every constraint") {
  std::mt19937_64 rng(3);
  AugmentConfig cfg;
  int sampled = 0;
  for (int i = 0; i < 200; ++i) {
    const auto t = synth_table(rng, big_tables(), "a" + std::to_string(i));
    const auto sub = sample_subtable(t, cfg, rng);
    if (!sub) continue;
    ++sampled;
    CHECK_MESSAGE(testing::check_subtable(t, *sub).empty(), testing::check_subtable(t, *sub));
  }
  CHECK(sampled > 100);
}

TEST_CASE("small or span-free tables yield nothing") {
  std::mt19937_64 rng(4);
  SynthConfig small;
  small.max_rows = small.max_cols = 4;
  AugmentConfig cfg;
  CHECK_FALSE(sample_subtable(synth_table(rng, small, "x"), cfg, rng).has_value());
  SynthConfig plain = big_tables();
  plain.span_probability = 0;
  CHECK_FALSE(sample_subtable(synth_table(rng, plain, "y"), cfg, rng).has_value());
}

TEST_CASE("augmentation is seeded per table") {
  std::mt19937_64 rng(5);
  std::vector<TableAnnotation> src;
  for (int i = 0; i < 20; ++i) src.push_back(synth_table(rng, big_tables(), "t" + std::to_string(i)));
  AugmentConfig cfg;
  cfg.samples_per_table = 3;
  cfg.rng_seed = 99;
  const auto a = augment_corpus(src, cfg);
  CHECK(a == augment_corpus(src, cfg));
  // Dropping other tables does not change a table's samples.
  const auto b = augment_corpus({src[7]}, cfg);
  std::vector<TableAnnotation> from7;
  for (const auto& s : a)
    if (s.augmented_from->source_id == "t7") from7.push_back(s);
  CHECK(b == from7);
  for (const auto& s : a) CHECK(s.id.find("#aug") != std::string::npos);
  CHECK(table_seed(99, "t1") == table_seed(99, "t1"));
  CHECK(table_seed(99, "t1") != table_seed(99, "t2"));
  cfg.rng_seed = 100;
  CHECK_FALSE(augment_corpus(src, cfg) == a);
}
