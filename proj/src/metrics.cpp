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

#include "tabkit/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <thread>

#include "tabkit/errors.hpp"

namespace tabkit {

namespace {

std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = 1;
    char32_t cp = c;
    if (c >= 0xF0 && c < 0xF8) len = 4, cp = c & 0x07;
    else if (c >= 0xE0) len = 3, cp = c & 0x0F;
    else if (c >= 0xC0) len = 2, cp = c & 0x1F;
    if (len > 1 && i + len <= s.size()) {
      bool ok = true;
      for (int k = 1; k < len; ++k) {
        const auto cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) ok = false;
        cp = (cp << 6) | (cc & 0x3F);
      }
      if (ok) {
        out.push_back(cp);
        i += len;
        continue;
      }
    }
    out.push_back(0x110000u + c);  // stray byte, kept distinct from real code points
    ++i;
  }
  return out;
}

}  // namespace

double normalized_levenshtein(std::string_view a, std::string_view b) {
  const auto x = code_points(a), y = code_points(b);
  const std::size_t n = x.size(), m = y.size();
  if (n == 0 && m == 0) return 0.0;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

double rename_cost(const HtmlNode& a, const HtmlNode& b) {
  if (a.tag != b.tag) return 1.0;
  if (a.tag != "td") return 0.0;
  if (a.rowspan != b.rowspan || a.colspan != b.colspan) return 1.0;
  return normalized_levenshtein(a.content, b.content);
}

namespace {

// Post-order view of a tree for Zhang-Shasha.
struct PostOrder {
  std::vector<const HtmlNode*> nodes;  // 1-based: nodes[0] unused
  std::vector<int> leftmost;           // leftmost leaf descendant, 1-based
  std::vector<int> keyroots;

  explicit PostOrder(const HtmlNode& root) {
    nodes.push_back(nullptr);
    leftmost.push_back(0);
    walk(root);
    const int n = static_cast<int>(nodes.size()) - 1;
    // A keyroot is the highest node for each distinct leftmost leaf.
    std::vector<int> last(n + 1, 0);
    for (int i = 1; i <= n; ++i) last[leftmost[i]] = i;
    for (int i = 1; i <= n; ++i)
      if (last[leftmost[i]] == i) keyroots.push_back(i);
  }

  int walk(const HtmlNode& node) {
    int first_leaf = -1;
    for (const auto& c : node.children) {
      const int l = walk(c);
      if (first_leaf < 0) first_leaf = l;
    }
    nodes.push_back(&node);
    const int idx = static_cast<int>(nodes.size()) - 1;
    leftmost.push_back(first_leaf < 0 ? idx : first_leaf);
    return leftmost.back();
  }

  int size() const { return static_cast<int>(nodes.size()) - 1; }
};

}  // namespace

double tree_edit_distance(const HtmlNode& a, const HtmlNode& b) {
  const PostOrder ta(a), tb(b);
  const int n = ta.size(), m = tb.size();
  std::vector<double> tree_dist((n + 1) * (m + 1), 0.0);
  auto td = [&](int i, int j) -> double& { return tree_dist[i * (m + 1) + j]; };
  std::vector<double> forest((n + 2) * (m + 2), 0.0);

  for (int i : ta.keyroots) {
    for (int j : tb.keyroots) {
      const int li = ta.leftmost[i], lj = tb.leftmost[j];
      const int rows = i - li + 2, cols = j - lj + 2;
      auto fd = [&](int x, int y) -> double& { return forest[x * cols + y]; };
      // fd(x, y): forest distance between ta[li..li+x-1] and tb[lj..lj+y-1]
      fd(0, 0) = 0;
      for (int x = 1; x < rows; ++x) fd(x, 0) = fd(x - 1, 0) + 1.0;
      for (int y = 1; y < cols; ++y) fd(0, y) = fd(0, y - 1) + 1.0;
      for (int x = 1; x < rows; ++x) {
        const int ni = li + x - 1;
        for (int y = 1; y < cols; ++y) {
          const int nj = lj + y - 1;
          const double del = fd(x - 1, y) + 1.0;
          const double ins = fd(x, y - 1) + 1.0;
          if (ta.leftmost[ni] == li && tb.leftmost[nj] == lj) {
            const double ren = fd(x - 1, y - 1) + rename_cost(*ta.nodes[ni], *tb.nodes[nj]);
            fd(x, y) = std::min({del, ins, ren});
            td(ni, nj) = fd(x, y);
          } else {
            const int px = ta.leftmost[ni] - li, py = tb.leftmost[nj] - lj;
            fd(x, y) = std::min({del, ins, fd(px, py) + td(ni, nj)});
          }
        }
      }
    }
  }
  return td(n, m);
}

std::string parse_flags_string(unsigned flags) {
  if (flags == 0) return "ok";
  static const std::pair<unsigned, const char*> names[] = {
      {kPredRepaired, "pred_repaired"}, {kPredNoTable, "pred_no_table"}, {kGtRepaired, "gt_repaired"},
      {kGtNoTable, "gt_no_table"},      {kMissingPred, "missing_pred"},   {kMissingGt, "missing_gt"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

TedsResult teds(const HtmlNode& pred, const HtmlNode& gt) {
  const HtmlNode p = canonicalize(pred), g = canonicalize(gt);
  const double size = std::max(tree_size(p), tree_size(g));
  TedsResult r;
  r.teds = 1.0 - tree_edit_distance(p, g) / size;
  r.teds_s = 1.0 - tree_edit_distance(erase_contents(p), erase_contents(g)) / size;
  r.teds_delta = r.teds_s - r.teds;
  return r;
}

namespace {

HtmlNode parse_for_scoring(std::string_view s, unsigned repaired_flag, unsigned missing_flag, unsigned& flags) {
  try {
    return parse_html_string(s, ParseMode::kStrict);
  } catch (const ParseError&) {
  }
  ParseDiagnostics diag;
  HtmlNode node = parse_html_string(s, ParseMode::kLenient, &diag);
  flags |= diag.found_table ? repaired_flag : missing_flag;
  return node;
}

}  // namespace

TedsResult teds(std::string_view pred_html, std::string_view gt_html) {
  unsigned flags = 0;
  const HtmlNode p = parse_for_scoring(pred_html, kPredRepaired, kPredNoTable, flags);
  const HtmlNode g = parse_for_scoring(gt_html, kGtRepaired, kGtNoTable, flags);
  TedsResult r;
  if (!(flags & (kPredNoTable | kGtNoTable))) r = teds(p, g);
  r.flags = flags;
  return r;
}

double ap50(std::span<const DetectionSet> preds, std::span<const std::vector<BBox>> gts) {
  if (preds.size() != gts.size()) throw Error("ap50: predictions and ground truth are not aligned per image");
  struct Ranked {
    double score;
    std::size_t image;
    std::size_t index;
  };
  std::vector<Ranked> ranked;
  std::size_t total_gt = 0;
  for (std::size_t img = 0; img < preds.size(); ++img) {
    const auto& p = preds[img];
    if (p.scores && p.scores->size() != p.boxes.size()) throw Error("ap50: scores do not align with boxes");
    for (std::size_t k = 0; k < p.boxes.size(); ++k) ranked.push_back({p.scores ? (*p.scores)[k] : 1.0, img, k});
    total_gt += gts[img].size();
  }
  if (total_gt == 0) return ranked.empty() ? 1.0 : 0.0;
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image != b.image) return a.image < b.image;
    return a.index < b.index;
  });

  std::vector<std::vector<bool>> used(gts.size());
  for (std::size_t img = 0; img < gts.size(); ++img) used[img].assign(gts[img].size(), false);
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const auto& r = ranked[k];
    const BBox& box = preds[r.image].boxes[r.index];
    double best = 0.5;
    std::ptrdiff_t match = -1;
    for (std::size_t g = 0; g < gts[r.image].size(); ++g) {
      if (used[r.image][g]) continue;
      const double v = iou(box, gts[r.image][g]);
      if (v >= best && (match < 0 || v > best)) {
        best = v;
        match = static_cast<std::ptrdiff_t>(g);
      }
    }
    if (match >= 0) {
      used[r.image][match] = true;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
  }
  // Precision envelope, then sample at recall 0, 0.01, ..., 1.
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double sum = 0;
  std::size_t k = 0;
  for (int t = 0; t <= 100; ++t) {
    const double level = t / 100.0;
    while (k < recall.size() && recall[k] < level - 1e-12) ++k;
    if (k < recall.size()) sum += precision[k];
  }
  return sum / 101.0;
}

std::string CorpusReport::format() const {
  std::string out;
  char buf[512];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%s, %.6f, %.6f, %.6f, %s\n", s.id.c_str(), s.result.teds, s.result.teds_s,
                  s.result.teds_delta, parse_flags_string(s.result.flags).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "mean, teds=%.6f, teds_s=%.6f, teds_delta=%.6f, ap50=", mean_teds, mean_teds_s,
                mean_teds_delta);
  out += buf;
  if (ap50) {
    std::snprintf(buf, sizeof buf, "%.6f", *ap50);
    out += buf;
  } else {
    out += "n/a";
  }
  std::snprintf(buf, sizeof buf, ", samples=%zu, mismatched=%zu\n", samples.size(), mismatched_ids.size());
  out += buf;
  return out;
}

CorpusReport corpus_eval(const std::vector<EvalSample>& preds, const std::vector<EvalSample>& gts, bool with_teds,
                         bool with_ap50, int workers) {
  std::map<std::string, const EvalSample*> pred_by_id, gt_by_id;
  for (const auto& p : preds) pred_by_id[p.id] = &p;
  for (const auto& g : gts) gt_by_id[g.id] = &g;
  std::map<std::string, std::pair<const EvalSample*, const EvalSample*>> joined;
  for (const auto& [id, p] : pred_by_id) joined[id].first = p;
  for (const auto& [id, g] : gt_by_id) joined[id].second = g;

  CorpusReport report;
  std::vector<std::pair<const EvalSample*, const EvalSample*>> pairs;
  for (const auto& [id, pg] : joined) {
    report.samples.push_back({id, {}});
    pairs.push_back(pg);
    if (!pg.first || !pg.second) report.mismatched_ids.push_back(id);
  }

  if (with_teds) {
    auto score = [&](std::size_t i) {
      const auto [p, g] = pairs[i];
      TedsResult r;
      if (!p) r.flags = kMissingPred;
      else if (!g) r.flags = kMissingGt;
      else r = teds(p->html, g->html);
      report.samples[i].result = r;
    };
    const std::size_t n = pairs.size();
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (w <= 1) {
      for (std::size_t i = 0; i < n; ++i) score(i);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
          for (std::size_t i = t; i < n; i += w) score(i);
        });
      for (auto& th : pool) th.join();
    }
    double st = 0, ss = 0, sd = 0;
    for (const auto& s : report.samples) {
      st += s.result.teds;
      ss += s.result.teds_s;
      sd += s.result.teds_delta;
    }
    if (n > 0) {
      report.mean_teds = st / n;
      report.mean_teds_s = ss / n;
      report.mean_teds_delta = sd / n;
    }
  } else {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!pairs[i].first) report.samples[i].result.flags = kMissingPred;
      else if (!pairs[i].second) report.samples[i].result.flags = kMissingGt;
    }
  }

  if (with_ap50) {
    std::vector<DetectionSet> dets;
    std::vector<std::vector<BBox>> truth;
    for (const auto& [p, g] : pairs) {
      DetectionSet d;
      if (p) {
        d.boxes = p->boxes;
        d.scores = p->scores;
      }
      dets.push_back(std::move(d));
      truth.push_back(g ? g->boxes : std::vector<BBox>{});
    }
    report.ap50 = ap50(dets, truth);
  }
  return report;
}

}  // namespace tabkit
