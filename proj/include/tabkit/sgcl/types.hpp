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

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace tabkit::sgcl {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Binary relation between cells; entries are 0 or 1.
using MaskMat = Eigen::MatrixXi;

/// channels x (height*width); spatial index is y * width + x.
template <typename Scalar>
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  Mat<Scalar> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w) : channels(c), height(h), width(w), data(Mat<Scalar>::Zero(c, h * w)) {}
  FeatureMap(Mat<Scalar> d, int h, int w)
      : channels(static_cast<int>(d.rows())), height(h), width(w), data(std::move(d)) {}

  int pixels() const { return height * width; }
};

/// One tokens x model_dim matrix per decoder layer.
template <typename Scalar>
using HiddenStates = std::vector<Mat<Scalar>>;

/// Inclusive token range from a cell's "<td" token to its "</td>" token.
struct TokenSpan {
  int start = 0;
  int end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};
using TokenSpanIndex = std::vector<TokenSpan>;

struct SgclConfig {
  int layers = 4;         // decoder layers feeding aggregation
  int model_dim = 16;
  int row_col_dim = 8;    // width of the row/column projections
  int mlp_hidden = 32;
  int c3 = 8, c4 = 12, c5 = 16;
  int p3_height = 16, p3_width = 16;  // P4 and P5 halve per level
  int refine_layers = 3;
  int sine_dim = 8;       // sine features per encoded scalar (even)
  double sine_temperature = 20.0;

  int p4_height() const { return p3_height / 2; }
  int p4_width() const { return p3_width / 2; }
  int p5_height() const { return p3_height / 4; }
  int p5_width() const { return p3_width / 4; }

  friend bool operator==(const SgclConfig&, const SgclConfig&) = default;
};

/// Single-head attention projections; inputs are multiplied on the right.
template <typename Scalar>
struct AttentionParams {
  Mat<Scalar> wq, wk, wv, wo;
};

/// Two masked self-attention blocks followed by one cross-attention block.
template <typename Scalar>
struct BranchParams {
  AttentionParams<Scalar> self1, self2, cross;
};

template <typename Scalar>
struct RefineLayerParams {
  AttentionParams<Scalar> attn;
  Mat<Scalar> pe_query;  // (4 * sine_dim) x model_dim, anchor encoding
  Mat<Scalar> pe_key;    // (2 * sine_dim) x model_dim, token position encoding
  Mat<Scalar> delta_w1, delta_b1, delta_w2, delta_b2;
};

template <typename Scalar>
struct SgclParams {
  SgclConfig config;

  // 1x1 convolutions of the pyramid fusion: out = W * in + b
  Mat<Scalar> conv31_w, conv31_b, conv32_w, conv32_b;
  Mat<Scalar> conv41_w, conv41_b, conv42_w, conv42_b;
  Mat<Scalar> pos4;       // model_dim x (p4 pixels)
  Mat<Scalar> layer_w;    // layers x 1, softmax-normalized on use
  Mat<Scalar> row_w, row_b, col_w, col_b;
  BranchParams<Scalar> row_branch, col_branch;
  Mat<Scalar> reg_w1, reg_b1, reg_w2, reg_b2;
  std::vector<RefineLayerParams<Scalar>> refine;
  Mat<Scalar> mask_w;     // model_dim x model_dim
};

/// Calls f(name, tensor_of_p...) for every parameter tensor, in a fixed order.
/// Accepts several parameter sets of possibly different scalar types, which
/// are visited in lockstep.
template <typename F, typename... P>
void for_each_tensor(F&& f, P&... p) {
  auto attn = [&](const std::string& prefix, auto&... a) {
    f(prefix + ".wq", a.wq...);
    f(prefix + ".wk", a.wk...);
    f(prefix + ".wv", a.wv...);
    f(prefix + ".wo", a.wo...);
  };
  auto branch = [&](const std::string& prefix, auto&... b) {
    attn(prefix + ".self1", b.self1...);
    attn(prefix + ".self2", b.self2...);
    attn(prefix + ".cross", b.cross...);
  };
  f("fuse.conv31_w", p.conv31_w...);
  f("fuse.conv31_b", p.conv31_b...);
  f("fuse.conv32_w", p.conv32_w...);
  f("fuse.conv32_b", p.conv32_b...);
  f("fuse.conv41_w", p.conv41_w...);
  f("fuse.conv41_b", p.conv41_b...);
  f("fuse.conv42_w", p.conv42_w...);
  f("fuse.conv42_b", p.conv42_b...);
  f("pos4", p.pos4...);
  f("layer_w", p.layer_w...);
  f("row.w", p.row_w...);
  f("row.b", p.row_b...);
  f("col.w", p.col_w...);
  f("col.b", p.col_b...);
  branch("branch_row", p.row_branch...);
  branch("branch_col", p.col_branch...);
  f("reg.w1", p.reg_w1...);
  f("reg.b1", p.reg_b1...);
  f("reg.w2", p.reg_w2...);
  f("reg.b2", p.reg_b2...);
  const std::size_t n = std::get<0>(std::forward_as_tuple(p...)).refine.size();
  for (std::size_t l = 0; l < n; ++l) {
    const std::string prefix = "refine." + std::to_string(l);
    attn(prefix + ".attn", p.refine[l].attn...);
    f(prefix + ".pe_query", p.refine[l].pe_query...);
    f(prefix + ".pe_key", p.refine[l].pe_key...);
    f(prefix + ".delta_w1", p.refine[l].delta_w1...);
    f(prefix + ".delta_b1", p.refine[l].delta_b1...);
    f(prefix + ".delta_w2", p.refine[l].delta_w2...);
    f(prefix + ".delta_b2", p.refine[l].delta_b2...);
  }
  f("mask.w", p.mask_w...);
}

/// Expected (rows, cols) of every tensor for a configuration, in
/// for_each_tensor order.
std::vector<std::pair<std::string, std::pair<int, int>>> tensor_shapes(const SgclConfig& cfg);

/// All-zero parameters with the shapes implied by `cfg`.
template <typename Scalar>
SgclParams<Scalar> zero_params(const SgclConfig& cfg) {
  SgclParams<Scalar> p;
  p.config = cfg;
  p.refine.resize(cfg.refine_layers);
  const auto shapes = tensor_shapes(cfg);
  std::size_t k = 0;
  for_each_tensor([&](const std::string&, Mat<Scalar>& m) {
    m = Mat<Scalar>::Zero(shapes[k].second.first, shapes[k].second.second);
    ++k;
  }, p);
  return p;
}

template <typename Scalar>
Eigen::Index parameter_count(const SgclParams<Scalar>& p) {
  Eigen::Index n = 0;
  for_each_tensor([&](const std::string&, const Mat<Scalar>& m) { n += m.size(); }, p);
  return n;
}

/// Flat column-major concatenation of all tensors in for_each_tensor order.
template <typename Scalar>
Vec<Scalar> flatten(const SgclParams<Scalar>& p) {
  Vec<Scalar> out(parameter_count(p));
  Eigen::Index k = 0;
  for_each_tensor([&](const std::string&, const Mat<Scalar>& m) {
    out.segment(k, m.size()) = m.reshaped();
    k += m.size();
  }, p);
  return out;
}

template <typename Scalar>
SgclParams<Scalar> unflatten(const SgclConfig& cfg, const Vec<Scalar>& flat) {
  SgclParams<Scalar> p = zero_params<Scalar>(cfg);
  Eigen::Index k = 0;
  for_each_tensor([&](const std::string&, Mat<Scalar>& m) {
    m.reshaped() = flat.segment(k, m.size());
    k += m.size();
  }, p);
  return p;
}

struct LossWeights {
  double ce = 1.0;
  double box = 0.05;
  double iou = 0.03;
  double mask = 0.03;
  double structure = 0.05;
};

/// Row/column co-membership of cells; symmetric with unit diagonal.
struct AdjacencyTargets {
  MaskMat row;
  MaskMat col;
};

}  // namespace tabkit::sgcl
