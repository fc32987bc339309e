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

#include "tabkit/sgcl/toy.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tabkit/io.hpp"

namespace tabkit::sgcl {

namespace {

void tokenize_node(const HtmlNode& node, TokenizedTable& out) {
  if (node.tag == "td") {
    const int start = static_cast<int>(out.tokens.size());
    if (node.rowspan == 1 && node.colspan == 1) {
      out.tokens.push_back("<td>");
    } else {
      out.tokens.push_back("<td");
      if (node.rowspan != 1) out.tokens.push_back(" rowspan=\"" + std::to_string(node.rowspan) + "\"");
      if (node.colspan != 1) out.tokens.push_back(" colspan=\"" + std::to_string(node.colspan) + "\"");
      out.tokens.push_back(">");
    }
    if (!node.content.empty()) out.tokens.push_back("<text>");
    out.tokens.push_back("</td>");
    out.spans.push_back({start, static_cast<int>(out.tokens.size()) - 1});
    return;
  }
  out.tokens.push_back("<" + node.tag + ">");
  for (const auto& c : node.children) tokenize_node(c, out);
  out.tokens.push_back("</" + node.tag + ">");
}

Targets build_targets(const TableAnnotation& ann, const std::vector<int>& tokens, const SgclConfig& cfg) {
  Targets t;
  t.tokens = tokens;
  std::vector<LogicalCoords> logical;
  for (const auto& c : ann.cells) {
    if (!c.bbox) throw ValidationError("toy instance cell " + std::to_string(c.id) + " has no bbox");
    t.boxes.push_back(*c.bbox);
    logical.push_back(c.logical);
  }
  t.masks = mask_targets(t.boxes, cfg.p4_height(), cfg.p4_width());
  t.adjacency = adjacency_targets(logical);
  return t;
}

Mat<double> gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  std::normal_distribution<double> n(0.0, stddev);
  Mat<double> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_tensor(std::ostream& os, const std::string& name, const Mat<double>& m) {
  os << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", m.reshaped()(k));
    os << buf << (k + 1 == m.size() || (k + 1) % 8 == 0 ? '\n' : ' ');
  }
}

Mat<double> read_tensor(std::istream& is, const std::string& expected) {
  std::string word, name;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> word >> name >> rows >> cols) || word != "tensor")
    throw Error("expected tensor header for " + expected);
  if (name != expected) throw Error("expected tensor " + expected + ", found " + name);
  Mat<double> m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k)
    if (!(is >> m.reshaped()(k))) throw Error("truncated tensor " + name);
  return m;
}

void write_config(std::ostream& os, const SgclConfig& c) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.17g", c.sine_temperature);
  os << "config layers " << c.layers << " model_dim " << c.model_dim << " row_col_dim " << c.row_col_dim
     << " mlp_hidden " << c.mlp_hidden << " c3 " << c.c3 << " c4 " << c.c4 << " c5 " << c.c5 << " p3 "
     << c.p3_height << ' ' << c.p3_width << " refine_layers " << c.refine_layers << " sine_dim " << c.sine_dim
     << " sine_temperature " << temp << '\n';
}

SgclConfig read_config(std::istream& is) {
  std::string line;
  while (line.empty() && std::getline(is, line)) {
  }
  std::istringstream ls(line);
  std::string word;
  ls >> word;
  if (word != "config") throw Error("expected config line");
  SgclConfig c;
  while (ls >> word) {
    if (word == "layers") ls >> c.layers;
    else if (word == "model_dim") ls >> c.model_dim;
    else if (word == "row_col_dim") ls >> c.row_col_dim;
    else if (word == "mlp_hidden") ls >> c.mlp_hidden;
    else if (word == "c3") ls >> c.c3;
    else if (word == "c4") ls >> c.c4;
    else if (word == "c5") ls >> c.c5;
    else if (word == "p3") ls >> c.p3_height >> c.p3_width;
    else if (word == "refine_layers") ls >> c.refine_layers;
    else if (word == "sine_dim") ls >> c.sine_dim;
    else if (word == "sine_temperature") ls >> c.sine_temperature;
    else throw Error("unknown config key " + word);
    if (!ls) throw Error("bad value for config key " + word);
  }
  return c;
}

void expect_header(std::istream& is, const std::string& magic) {
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != magic) throw Error("missing " + magic + " header");
  if (version != 1) throw Error("unsupported " + magic + " version " + std::to_string(version));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  return is;
}

void write_param_tensors(std::ostream& os, const SgclParams<double>& p) {
  for_each_tensor([&](const std::string& name, const Mat<double>& m) { write_tensor(os, name, m); }, p);
}

SgclParams<double> read_param_tensors(std::istream& is, const SgclConfig& cfg) {
  SgclParams<double> p = zero_params<double>(cfg);
  for_each_tensor([&](const std::string& name, Mat<double>& m) {
    Mat<double> t = read_tensor(is, name);
    if (t.rows() != m.rows() || t.cols() != m.cols())
      throw ShapeError("tensor " + name + " is " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) +
                       ", expected " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    m = std::move(t);
  }, p);
  return p;
}

}  // namespace

TokenizedTable tokenize_structure(const HtmlNode& table) {
  TokenizedTable out;
  tokenize_node(table, out);
  return out;
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v{"<table>", "</table>", "<tr>", "</tr>", "<td>", "<td", ">", "</td>", "<text>"};
    for (int k = 2; k <= 10; ++k) v.push_back(" rowspan=\"" + std::to_string(k) + "\"");
    for (int k = 2; k <= 10; ++k) v.push_back(" colspan=\"" + std::to_string(k) + "\"");
    v.push_back("<unk>");
    return v;
  }();
  return vocab;
}

int token_id(const std::string& token) {
  const auto& v = vocabulary();
  const auto it = std::find(v.begin(), v.end(), token);
  return static_cast<int>(it == v.end() ? v.size() - 1 : it - v.begin());
}

TableAnnotation toy_layout() {
  TableAnnotation ann;
  ann.id = "toy";
  ann.image_size = {640, 480};
  const double xs[] = {0.05, 0.35, 0.65, 0.95};
  const double ys[] = {0.1, 0.4, 0.7, 0.95};
  const LogicalCoords cells[] = {{0, 0, 0, 1}, {0, 0, 2, 2}, {1, 2, 0, 0}, {1, 1, 1, 1}, {1, 1, 2, 2}, {2, 2, 1, 2}};
  const char* text[] = {"A", "B", "C", "", "E", "F"};
  for (int n = 0; n < 6; ++n) {
    const auto& l = cells[n];
    Cell c;
    c.id = n;
    c.logical = l;
    c.content = text[n];
    c.bbox = BBox{xs[l.start_col] + 0.02, ys[l.start_row] + 0.02, xs[l.end_col + 1] - 0.02, ys[l.end_row + 1] - 0.02};
    ann.cells.push_back(c);
  }
  return ann;
}

SgclConfig toy_config() {
  SgclConfig cfg;
  cfg.model_dim = 16;
  cfg.p3_height = cfg.p3_width = 16;
  return cfg;
}

SgclParams<double> random_params(const SgclConfig& cfg, std::mt19937_64& rng) {
  SgclParams<double> p = zero_params<double>(cfg);
  for_each_tensor([&](const std::string& name, Mat<double>& m) {
    double stddev;
    if (name.find("conv") != std::string::npos && ends_with(name, "_w")) stddev = 1.0 / std::sqrt(double(m.cols()));
    else if (ends_with(name, "_b") || ends_with(name, ".b") || ends_with(name, "b1") || ends_with(name, "b2")) stddev = 0.1;
    else if (name == "pos4") stddev = 0.1;
    else if (name == "layer_w") stddev = 1.0;
    else stddev = 1.0 / std::sqrt(double(m.rows()));
    if (ends_with(name, "delta_w2")) stddev *= 0.3;
    if (name == "mask.w") stddev *= 0.25;
    m = gaussian(rng, m.rows(), m.cols(), stddev);
  }, p);
  return p;
}

ToyInstance make_toy_instance(const TableAnnotation& layout, const SgclConfig& cfg, std::mt19937_64& rng) {
  ToyInstance inst;
  inst.config = cfg;
  inst.annotation = layout;
  std::vector<const Cell*> ordered = cells_in_logical_order(layout);
  inst.annotation.cells.clear();
  for (const Cell* c : ordered) {
    Cell copy = *c;
    copy.id = static_cast<int>(inst.annotation.cells.size());
    inst.annotation.cells.push_back(copy);
  }
  inst.annotation.grids.clear();

  const TokenizedTable tok = tokenize_structure(grid_to_html(inst.annotation));
  std::vector<int> ids;
  for (const auto& t : tok.tokens) ids.push_back(token_id(t));
  const auto tokens = static_cast<Eigen::Index>(ids.size());

  for (int l = 0; l < cfg.layers; ++l) inst.inputs.hidden.push_back(gaussian(rng, tokens, cfg.model_dim, 1.0));
  inst.inputs.spans = tok.spans;
  inst.inputs.p3 = FeatureMap<double>(gaussian(rng, cfg.c3, cfg.p3_height * cfg.p3_width, 1.0), cfg.p3_height, cfg.p3_width);
  inst.inputs.p4 = FeatureMap<double>(gaussian(rng, cfg.c4, cfg.p4_height() * cfg.p4_width(), 1.0), cfg.p4_height(), cfg.p4_width());
  inst.inputs.p5 = FeatureMap<double>(gaussian(rng, cfg.c5, cfg.p5_height() * cfg.p5_width(), 1.0), cfg.p5_height(), cfg.p5_width());
  inst.token_logits = gaussian(rng, tokens, static_cast<Eigen::Index>(vocabulary().size()), 1.0);
  inst.targets = build_targets(inst.annotation, ids, cfg);
  return inst;
}

ToyInstance permute_cells(const ToyInstance& inst, const std::vector<int>& perm) {
  if (perm.size() != inst.annotation.cells.size()) throw ShapeError("permutation size differs from cell count");
  ToyInstance out = inst;
  out.annotation.cells.clear();
  out.inputs.spans.clear();
  for (std::size_t k = 0; k < perm.size(); ++k) {
    Cell c = inst.annotation.cells.at(static_cast<std::size_t>(perm[k]));
    c.id = static_cast<int>(k);
    out.annotation.cells.push_back(c);
    out.inputs.spans.push_back(inst.inputs.spans.at(static_cast<std::size_t>(perm[k])));
  }
  std::vector<LogicalCoords> logical;
  out.targets.boxes.clear();
  for (const auto& c : out.annotation.cells) {
    out.targets.boxes.push_back(*c.bbox);
    logical.push_back(c.logical);
  }
  out.targets.masks = mask_targets(out.targets.boxes, inst.inputs.p4.height, inst.inputs.p4.width);
  out.targets.adjacency = adjacency_targets(logical);
  return out;
}

void write_params(std::ostream& os, const SgclParams<double>& p) {
  os << "tabkit-sgcl-params 1\n";
  write_config(os, p.config);
  write_param_tensors(os, p);
}

SgclParams<double> read_params(std::istream& is) {
  expect_header(is, "tabkit-sgcl-params");
  const SgclConfig cfg = read_config(is);
  return read_param_tensors(is, cfg);
}

void save_params(const std::string& path, const SgclParams<double>& p) {
  auto os = open_out(path);
  write_params(os, p);
}

SgclParams<double> load_params(const std::string& path) {
  auto is = open_in(path);
  return read_params(is);
}

void save_fixture(const std::string& stem, const ToyInstance& inst, const SgclParams<double>& params) {
  write_text(stem + ".json", to_json(inst.annotation).dump(2) + "\n");
  auto os = open_out(stem + ".tensors");
  os << "tabkit-sgcl-fixture 1\n";
  write_config(os, params.config);
  for (std::size_t l = 0; l < inst.inputs.hidden.size(); ++l)
    write_tensor(os, "hidden." + std::to_string(l), inst.inputs.hidden[l]);
  write_tensor(os, "p3", inst.inputs.p3.data);
  write_tensor(os, "p4", inst.inputs.p4.data);
  write_tensor(os, "p5", inst.inputs.p5.data);
  write_tensor(os, "token_logits", inst.token_logits);
  write_param_tensors(os, params);
}

std::pair<ToyInstance, SgclParams<double>> load_fixture(const std::string& stem) {
  TableAnnotation ann;
  {
    auto is = open_in(stem + ".json");
    ann = annotation_from_json(json::parse(is));
  }
  auto is = open_in(stem + ".tensors");
  expect_header(is, "tabkit-sgcl-fixture");
  const SgclConfig cfg = read_config(is);

  std::mt19937_64 unused(0);
  ToyInstance inst = make_toy_instance(ann, cfg, unused);
  for (int l = 0; l < cfg.layers; ++l) {
    Mat<double> h = read_tensor(is, "hidden." + std::to_string(l));
    if (h.rows() != inst.inputs.hidden[static_cast<std::size_t>(l)].rows() || h.cols() != cfg.model_dim)
      throw ShapeError("hidden state " + std::to_string(l) + " does not match the annotation's token count");
    inst.inputs.hidden[static_cast<std::size_t>(l)] = std::move(h);
  }
  auto feature = [&](const char* name, FeatureMap<double>& f) {
    Mat<double> d = read_tensor(is, name);
    if (d.rows() != f.data.rows() || d.cols() != f.data.cols())
      throw ShapeError(std::string("feature map ") + name + " has the wrong shape");
    f.data = std::move(d);
  };
  feature("p3", inst.inputs.p3);
  feature("p4", inst.inputs.p4);
  feature("p5", inst.inputs.p5);
  Mat<double> logits = read_tensor(is, "token_logits");
  if (logits.rows() != inst.token_logits.rows() || logits.cols() != inst.token_logits.cols())
    throw ShapeError("token logits have the wrong shape");
  inst.token_logits = std::move(logits);
  return {std::move(inst), read_param_tensors(is, cfg)};
}

}  // namespace tabkit::sgcl
