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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "support/ap_oracle.hpp"
#include "support/ted_oracle.hpp"
#include "tabkit/metrics.hpp"
#include "tabkit/synth.hpp"

using namespace tabkit;

namespace {

HtmlNode random_tree(std::mt19937_64& rng, int max_nodes) {
  std::uniform_int_distribution<int> size(1, max_nodes);
  const int n = size(rng);
  HtmlNode root{"x", 1, 1, {}, {}};
  std::vector<HtmlNode*> all{&root};
  for (int i = 1; i < n; ++i) {
    HtmlNode* parent = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
    parent->children.reserve(static_cast<std::size_t>(max_nodes));
    parent->children.push_back(HtmlNode{"x", 1, 1, {}, {}});
    all.push_back(&parent->children.back());
  }
  testing::label_randomly(root, rng);
  return root;
}

}  // namespace

TEST_CASE("normalized levenshtein") {
  CHECK(normalized_levenshtein("", "") == 0.0);
  CHECK(normalized_levenshtein("abc", "") == 1.0);
  CHECK(normalized_levenshtein("kitten", "sitting") == doctest::Approx(3.0 / 7.0));
  CHECK(normalized_levenshtein("\xc3\xa9", "e") == 1.0);
  CHECK(normalized_levenshtein("\xc3\xa9t\xc3\xa9", "ete") == doctest::Approx(2.0 / 3.0));
  CHECK(normalized_levenshtein("abc", "abc") == 0.0);
}

TEST_CASE("rename cost") {
  CHECK(rename_cost(HtmlNode::tr({}), HtmlNode::td()) == 1.0);
  CHECK(rename_cost(HtmlNode::tr({}), HtmlNode::tr({})) == 0.0);
  CHECK(rename_cost(HtmlNode::td("ab", 2), HtmlNode::td("ab")) == 1.0);
  CHECK(rename_cost(HtmlNode::td("ab"), HtmlNode::td("ac")) == 0.5);
}

TEST_CASE("tree edit distance matches brute force on random larger trees") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_tree(rng, 9), b = random_tree(rng, 9);
    CHECK(tree_edit_distance(a, b) == doctest::Approx(testing::brute_force_ted(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("tree edit distance is a metric on samples") {
  std::mt19937_64 rng(18);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_tree(rng, 8), b = random_tree(rng, 8), c = random_tree(rng, 8);
    CHECK(tree_edit_distance(a, a) == 0.0);
    CHECK(tree_edit_distance(a, b) == doctest::Approx(tree_edit_distance(b, a)));
    CHECK(tree_edit_distance(a, c) <= tree_edit_distance(a, b) + tree_edit_distance(b, c) + 1e-12);
  }
}

TEST_CASE("teds of identical and perturbed tables") {
  const std::string gt = "<table><tr><td>a</td><td>b</td></tr><tr><td>c</td><td>d</td></tr></table>";
  const auto same = teds(gt, gt);
  CHECK(same.teds == 1.0);
  CHECK(same.teds_s == 1.0);
  CHECK(same.flags == 0);

  // One content change ("d" -> "x") costs 1 of 7 nodes.
  const auto r = teds("<table><tr><td>a</td><td>b</td></tr><tr><td>c</td><td>x</td></tr></table>", gt);
  CHECK(r.teds == doctest::Approx(1.0 - 1.0 / 7.0));
  CHECK(r.teds_s == 1.0);
  CHECK(r.teds_delta == doctest::Approx(r.teds_s - r.teds));

  // One deleted cell.
  const auto d = teds("<table><tr><td>a</td><td>b</td></tr><tr><td>c</td></tr></table>", gt);
  CHECK(d.teds_s == doctest::Approx(1.0 - 1.0 / 7.0));

  CHECK(teds("<table><thead><tr><td>a</td><td>b</td></tr></thead><tbody><tr><td>c</td><td>d</td></tr></tbody></table>",
             gt)
            .teds == 1.0);
  const auto junk = teds("not a table", gt);
  CHECK(junk.flags != 0);
  CHECK(parse_flags_string(0) == "ok");
}

TEST_CASE("ap50 edge cases") {
  const std::vector<std::vector<BBox>> none(1), one{{BBox{0, 0, 0.5, 0.5}}};
  const std::vector<DetectionSet> empty(1), hit{{{BBox{0, 0, 0.5, 0.5}}, std::nullopt}},
      miss{{{BBox{0.6, 0.6, 0.9, 0.9}}, std::nullopt}};
  CHECK(ap50(empty, none) == 1.0);
  CHECK(ap50(hit, none) == 0.0);
  CHECK(ap50(hit, one) == 1.0);
  CHECK(ap50(miss, one) == 0.0);
  CHECK(ap50(empty, one) == 0.0);
  // A false positive ranked first: precision 1/2 at every recall level.
  const std::vector<DetectionSet> both{{{BBox{0.6, 0.6, 0.9, 0.9}, BBox{0, 0, 0.5, 0.5}}, std::vector<double>{0.9, 0.8}}};
  CHECK(ap50(both, one) == doctest::Approx(0.5));
}

TEST_CASE("ap50 agrees with the exhaustive oracle") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 0.7), len(0.05, 0.3), s(0.0, 1.0);
  for (int scene = 0; scene < 200; ++scene) {
    std::vector<std::vector<BBox>> gts(2), preds(2);
    std::vector<std::vector<double>> scores(2);
    std::vector<DetectionSet> sets(2);
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 5; ++k) {
        const double x = u(rng), y = u(rng);
        gts[i].push_back({x, y, x + len(rng), y + len(rng)});
      }
      for (int k = 0; k < 5; ++k) {
        const BBox& g = gts[i][static_cast<std::size_t>(k)];
        const double dx = (s(rng) - 0.5) * 0.1;
        preds[i].push_back({g.x1 + dx, g.y1, g.x2 + dx, g.y2});
        scores[i].push_back(s(rng));
      }
      sets[i] = {preds[i], scores[i]};
    }
    CHECK(ap50(sets, gts) == doctest::Approx(testing::ap50_oracle(preds, scores, gts)).epsilon(1e-9));
  }
}

TEST_CASE("corpus evaluation aligns by id and ignores worker count") {
  std::mt19937_64 rng(20);
  std::vector<EvalSample> gts, preds;
  for (int i = 0; i < 20; ++i) {
    const auto t = synth_table(rng, SynthConfig{}, "e" + std::to_string(i));
    EvalSample s{t.id, serialize(grid_to_html(t)), {}, std::nullopt};
    for (const Cell* c : cells_in_logical_order(t)) s.boxes.push_back(*c->bbox);
    gts.push_back(s);
    if (i % 5 == 0) s.html = "<table><tr><td>zz</td></tr></table>";
    preds.push_back(s);
  }
  preds.pop_back();
  std::reverse(preds.begin(), preds.end());
  const auto one = corpus_eval(preds, gts, true, true, 1);
  const auto many = corpus_eval(preds, gts, true, true, 4);
  CHECK(one.format() == many.format());
  CHECK(one.mismatched_ids == std::vector<std::string>{"e19"});
  CHECK(one.samples.front().id == "e0");
  CHECK(one.mean_teds < 1.0);
}
