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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabkit/geometry.hpp"
#include "tabkit/html.hpp"

namespace tabkit {

/// Levenshtein distance over UTF-8 code points divided by the longer length;
/// 0 when both strings are empty.
double normalized_levenshtein(std::string_view a, std::string_view b);

/// Substitution cost between two nodes: 1 for different tags, 0 for equal
/// non-td tags, and for td pairs 1 on differing spans, else the normalized
/// content edit distance.
double rename_cost(const HtmlNode& a, const HtmlNode& b);

/// Exact ordered tree edit distance (Zhang-Shasha) with unit insert/delete
/// and rename_cost substitutions.
double tree_edit_distance(const HtmlNode& a, const HtmlNode& b);

enum ParseFlag : unsigned {
  kPredRepaired = 1u << 0,  // prediction needed lenient repairs
  kPredNoTable = 1u << 1,   // prediction holds no table: scored 0
  kGtRepaired = 1u << 2,
  kGtNoTable = 1u << 3,
  kMissingPred = 1u << 4,  // id present only in ground truth
  kMissingGt = 1u << 5,    // id present only in predictions
};

/// "ok" or a '|'-joined list of flag names.
std::string parse_flags_string(unsigned flags);

struct TedsResult {
  double teds = 0;
  double teds_s = 0;
  double teds_delta = 0;  // teds_s - teds
  unsigned flags = 0;
};

/// Scores two HTML strings after lenient parsing and thead/tbody
/// normalization. TEDS-S erases all cell contents first.
TedsResult teds(std::string_view pred_html, std::string_view gt_html);
TedsResult teds(const HtmlNode& pred, const HtmlNode& gt);

struct DetectionSet {
  std::vector<BBox> boxes;
  std::optional<std::vector<double>> scores;  // defaults to 1.0 each
};

/// AP at IoU >= 0.5 with 101-point interpolation. Predictions are ranked
/// globally by score (ties: image index, then box index) and greedily
/// matched to the best unmatched ground truth of their image. With no
/// ground truth at all the result is 1 when there are also no predictions,
/// else 0.
double ap50(std::span<const DetectionSet> preds, std::span<const std::vector<BBox>> gts);

struct EvalSample {
  std::string id;
  std::string html;
  std::vector<BBox> boxes;
  std::optional<std::vector<double>> scores;
};

struct SampleScore {
  std::string id;
  TedsResult result;
};

struct CorpusReport {
  std::vector<SampleScore> samples;  // sorted by id
  double mean_teds = 0;
  double mean_teds_s = 0;
  double mean_teds_delta = 0;
  std::optional<double> ap50;
  std::vector<std::string> mismatched_ids;

  /// Per-sample lines "id, teds, teds_s, teds_delta, parse_flags" followed by
  /// one summary line.
  std::string format() const;
};

/// Aligns samples by id. An id present on only one side is listed in
/// mismatched_ids and scored 0. `workers` > 1 fans scoring out over threads;
/// the result does not depend on it.
CorpusReport corpus_eval(const std::vector<EvalSample>& preds, const std::vector<EvalSample>& gts,
                         bool with_teds, bool with_ap50, int workers = 1);

}  // namespace tabkit
