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

// Brute-force ordered forest edit distance, written from the recursive
// definition with memoization on forest encodings.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tabkit/html.hpp"
#include "tabkit/metrics.hpp"

namespace tabkit::testing {

class ForestTed {
 public:
  ForestTed(const HtmlNode& a, const HtmlNode& b) {
    index(a, nodes_a_);
    index(b, nodes_b_);
  }

  double distance() { return solve({0}, {0}); }

 private:
  struct Flat {
    const HtmlNode* node;
    std::vector<int> children;
    int size;
  };
  using Forest = std::vector<int>;

  static int index(const HtmlNode& n, std::vector<Flat>& out) {
    const int id = static_cast<int>(out.size());
    out.push_back({&n, {}, 1});
    for (const auto& c : n.children) {
      const int cid = index(c, out);
      out[static_cast<std::size_t>(id)].children.push_back(cid);
      out[static_cast<std::size_t>(id)].size += out[static_cast<std::size_t>(cid)].size;
    }
    return id;
  }

  static int forest_size(const Forest& f, const std::vector<Flat>& nodes) {
    int s = 0;
    for (int r : f) s += nodes[static_cast<std::size_t>(r)].size;
    return s;
  }

  // Removing the rightmost root r puts its children in its place.
  static Forest drop_root(const Forest& f, const std::vector<Flat>& nodes) {
    Forest out(f.begin(), f.end() - 1);
    const auto& kids = nodes[static_cast<std::size_t>(f.back())].children;
    out.insert(out.end(), kids.begin(), kids.end());
    return out;
  }

  double solve(const Forest& f, const Forest& g) {
    if (f.empty()) return forest_size(g, nodes_b_);
    if (g.empty()) return forest_size(f, nodes_a_);
    const auto key = std::make_pair(f, g);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const int v = f.back(), w = g.back();
    const double del = solve(drop_root(f, nodes_a_), g) + 1.0;
    const double ins = solve(f, drop_root(g, nodes_b_)) + 1.0;
    const Forest f_rest(f.begin(), f.end() - 1), g_rest(g.begin(), g.end() - 1);
    const double sub = solve(f_rest, g_rest) +
                       solve(nodes_a_[static_cast<std::size_t>(v)].children, nodes_b_[static_cast<std::size_t>(w)].children) +
                       rename_cost(*nodes_a_[static_cast<std::size_t>(v)].node, *nodes_b_[static_cast<std::size_t>(w)].node);
    const double best = std::min({del, ins, sub});
    memo_.emplace(key, best);
    return best;
  }

  std::vector<Flat> nodes_a_, nodes_b_;
  std::map<std::pair<Forest, Forest>, double> memo_;
};

inline double brute_force_ted(const HtmlNode& a, const HtmlNode& b) { return ForestTed(a, b).distance(); }

/// Every ordered tree shape with exactly n nodes, as HtmlNode trees with
/// placeholder tags.
inline std::vector<HtmlNode> tree_shapes(int n) {
  if (n == 1) return {HtmlNode{"x", 1, 1, {}, {}}};
  // A tree of n nodes is a root over an ordered forest of n-1 nodes.
  std::function<std::vector<std::vector<HtmlNode>>(int)> forests = [&](int k) {
    std::vector<std::vector<HtmlNode>> out;
    if (k == 0) return std::vector<std::vector<HtmlNode>>{{}};
    for (int first = 1; first <= k; ++first)
      for (const auto& head : tree_shapes(first))
        for (auto tail : forests(k - first)) {
          tail.insert(tail.begin(), head);
          out.push_back(std::move(tail));
        }
    return out;
  };
  std::vector<HtmlNode> out;
  for (auto& f : forests(n - 1)) out.push_back(HtmlNode{"x", 1, 1, {}, std::move(f)});
  return out;
}

/// Labels a shape: by depth (table / tr / td with fixed content) or at random
/// from a small alphabet that exercises every rename-cost branch.
inline void label_by_depth(HtmlNode& n, int depth = 0) {
  static const char* tags[] = {"table", "tr", "td"};
  n.tag = tags[std::min(depth, 2)];
  n.content = n.tag == "td" ? "ab" : "";
  for (auto& c : n.children) label_by_depth(c, depth + 1);
}

inline void label_randomly(HtmlNode& n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 6);
  switch (pick(rng)) {
    case 0: n = HtmlNode{"table", 1, 1, {}, std::move(n.children)}; break;
    case 1: n = HtmlNode{"tr", 1, 1, {}, std::move(n.children)}; break;
    case 2: n = HtmlNode{"td", 1, 1, "", std::move(n.children)}; break;
    case 3: n = HtmlNode{"td", 1, 1, "abc", std::move(n.children)}; break;
    case 4: n = HtmlNode{"td", 1, 1, "abd", std::move(n.children)}; break;
    case 5: n = HtmlNode{"td", 2, 1, "abc", std::move(n.children)}; break;
    default: n = HtmlNode{"td", 1, 1, "\xc3\xa9x", std::move(n.children)}; break;
  }
  for (auto& c : n.children) label_randomly(c, rng);
}

}  // namespace tabkit::testing
