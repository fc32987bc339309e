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

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "tabkit/annotation.hpp"
#include "tabkit/html.hpp"
#include "tabkit/sgcl/loss.hpp"

namespace tabkit::sgcl {

/// Structure tokens of canonical table HTML in the usual TSR vocabulary:
/// "<td>" for a plain cell, "<td" + span attributes + ">" for a span cell,
/// one "<text>" token for non-empty content.
struct TokenizedTable {
  std::vector<std::string> tokens;
  TokenSpanIndex spans;  // one per cell, in logical order
};
TokenizedTable tokenize_structure(const HtmlNode& table);

/// Fixed token vocabulary; ids are positions in this list.
const std::vector<std::string>& vocabulary();
int token_id(const std::string& token);

/// A complete, self-contained input to forward() and loss_total().
struct ToyInstance {
  SgclConfig config;
  TableAnnotation annotation;  // cells in logical order, ids 0..N-1
  SgclInputs<double> inputs;
  Mat<double> token_logits;
  Targets targets;
};

/// The 3x3 layout used by the gradient checks: six cells, two of them
/// spanning two columns and one spanning two rows.
TableAnnotation toy_layout();

/// Config for toy instances: d = 16, P'_4 of 8x8.
SgclConfig toy_config();

/// Random hidden states, pyramid features and token logits for `layout`.
ToyInstance make_toy_instance(const TableAnnotation& layout, const SgclConfig& cfg, std::mt19937_64& rng);

/// Random parameters scaled by fan-in.
SgclParams<double> random_params(const SgclConfig& cfg, std::mt19937_64& rng);

/// The same instance with cells reordered: cell perm[k] of `inst` becomes
/// cell k. Hidden states and features are untouched.
ToyInstance permute_cells(const ToyInstance& inst, const std::vector<int>& perm);

// Text serialization. Parameter files start with "tabkit-sgcl-params 1" and
// a config line; every tensor is "tensor <name> <rows> <cols>" followed by
// its values in column-major order.
void write_params(std::ostream& os, const SgclParams<double>& p);
SgclParams<double> read_params(std::istream& is);
void save_params(const std::string& path, const SgclParams<double>& p);
SgclParams<double> load_params(const std::string& path);

// A fixture is "<stem>.json" (the annotation) plus "<stem>.tensors" (config,
// hidden states, pyramid features, token logits and parameters).
void save_fixture(const std::string& stem, const ToyInstance& inst, const SgclParams<double>& params);
std::pair<ToyInstance, SgclParams<double>> load_fixture(const std::string& stem);

}  // namespace tabkit::sgcl
