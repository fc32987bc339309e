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

#include <json.hpp>
#include <string>
#include <vector>

#include "tabkit/annotation.hpp"

namespace tabkit {

using json = nlohmann::json;

/// Unified annotation record. Boxes are [x1, y1, x2, y2] normalized reals;
/// a cell without a box carries "bbox": null.
json to_json(const TableAnnotation& ann);
TableAnnotation annotation_from_json(const json& j);

json box_to_json(const BBox& b);
BBox box_from_json(const json& j);

/// One JSON value per non-empty line.
std::vector<json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<json>& records);

std::vector<TableAnnotation> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<TableAnnotation>& anns);

void write_text(const std::string& path, const std::string& text);

}  // namespace tabkit
