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

#include "tabkit/io.hpp"

#include <fstream>

#include "tabkit/errors.hpp"

namespace tabkit {

json box_to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error("box must be [x1,y1,x2,y2]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json to_json(const TableAnnotation& ann) {
  json j;
  j["id"] = ann.id;
  j["image_size"] = json::array({ann.image_size.width, ann.image_size.height});
  j["table_box"] = box_to_json(ann.table_box);
  json cells = json::array();
  for (const auto& c : ann.cells) {
    cells.push_back({{"id", c.id},
                     {"bbox", c.bbox ? box_to_json(*c.bbox) : json(nullptr)},
                     {"logical",
                      {{"start_row", c.logical.start_row},
                       {"end_row", c.logical.end_row},
                       {"start_col", c.logical.start_col},
                       {"end_col", c.logical.end_col}}},
                     {"content", c.content}});
  }
  j["cells"] = std::move(cells);
  json grids = json::array();
  for (const auto& g : ann.grids) {
    grids.push_back({{"cell_id", g.cell_id}, {"row", g.row}, {"col", g.col}, {"bbox", box_to_json(g.bbox)}});
  }
  j["grids"] = std::move(grids);
  if (ann.wireless) j["wireless"] = true;
  if (ann.augmented_from) {
    const auto& p = *ann.augmented_from;
    j["augmented_from"] = {{"id", p.source_id},
                           {"region", json::array({p.region[0], p.region[1], p.region[2], p.region[3]})}};
  }
  return j;
}

TableAnnotation annotation_from_json(const json& j) {
  TableAnnotation ann;
  try {
    ann.id = j.value("id", std::string{});
    const auto& size = j.at("image_size");
    ann.image_size = {size.at(0).get<int>(), size.at(1).get<int>()};
    ann.table_box = box_from_json(j.at("table_box"));
    for (const auto& jc : j.at("cells")) {
      Cell c;
      c.id = jc.at("id").get<int>();
      if (jc.contains("bbox") && !jc["bbox"].is_null()) c.bbox = box_from_json(jc["bbox"]);
      const auto& l = jc.at("logical");
      c.logical = {l.at("start_row").get<int>(), l.at("end_row").get<int>(), l.at("start_col").get<int>(),
                   l.at("end_col").get<int>()};
      c.content = jc.value("content", std::string{});
      ann.cells.push_back(std::move(c));
    }
    if (j.contains("grids")) {
      for (const auto& jg : j["grids"]) {
        ann.grids.push_back(
            {jg.at("cell_id").get<int>(), jg.at("row").get<int>(), jg.at("col").get<int>(), box_from_json(jg.at("bbox"))});
      }
    }
    ann.wireless = j.value("wireless", false);
    if (j.contains("augmented_from")) {
      const auto& p = j["augmented_from"];
      Provenance prov;
      prov.source_id = p.at("id").get<std::string>();
      for (int k = 0; k < 4; ++k) prov.region[k] = p.at("region").at(k).get<int>();
      ann.augmented_from = prov;
    }
  } catch (const json::exception& e) {
    throw Error("bad annotation record '" + ann.id + "': " + e.what());
  }
  return ann;
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::string text;
  for (const auto& r : records) {
    text += r.dump();
    text += '\n';
  }
  write_text(path, text);
}

std::vector<TableAnnotation> read_annotations(const std::string& path) {
  std::vector<TableAnnotation> out;
  for (const auto& j : read_jsonl(path)) out.push_back(annotation_from_json(j));
  return out;
}

void write_annotations(const std::string& path, const std::vector<TableAnnotation>& anns) {
  std::vector<json> records;
  records.reserve(anns.size());
  for (const auto& a : anns) records.push_back(to_json(a));
  write_jsonl(path, records);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace tabkit
