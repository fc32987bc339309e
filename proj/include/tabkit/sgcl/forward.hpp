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

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tabkit/annotation.hpp"
#include "tabkit/errors.hpp"
#include "tabkit/geometry.hpp"
#include "tabkit/sgcl/types.hpp"

namespace tabkit::sgcl {

// ---------------------------------------------------------------------------
// Elementwise helpers usable with double and with dual numbers.

template <typename Scalar>
Scalar sigmoid(const Scalar& x) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(Scalar(-x)));
}

template <typename Derived>
auto sigmoid_all(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return x.unaryExpr([](const S& v) { return sigmoid(v); });
}

template <typename Derived>
auto relu_all(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return x.unaryExpr([](const S& v) { return smax(v, S(0)); });
}

/// log(1 + exp(x)) without overflow.
template <typename Scalar>
Scalar softplus(const Scalar& x) {
  using std::exp;
  using std::log;
  if (Scalar(0) < x) return x + log(Scalar(1) + exp(Scalar(-x)));
  return log(Scalar(1) + exp(x));
}

inline double value_of(double v) { return v; }
template <typename Scalar>
double value_of(const Scalar& v) {
  return v.value();
}

// ---------------------------------------------------------------------------
// Pyramid fusion

template <typename Scalar>
FeatureMap<Scalar> conv1x1(const FeatureMap<Scalar>& in, const Mat<Scalar>& w, const Mat<Scalar>& b) {
  if (w.cols() != in.channels || b.rows() != w.rows() || b.cols() != 1)
    throw ShapeError("conv1x1: weight is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                     " for " + std::to_string(in.channels) + " input channels");
  Mat<Scalar> out = w * in.data;
  out.colwise() += b.col(0);
  return {std::move(out), in.height, in.width};
}

/// Nearest-neighbour 2x upsampling.
template <typename Scalar>
FeatureMap<Scalar> upsample2x(const FeatureMap<Scalar>& in) {
  FeatureMap<Scalar> out(in.channels, in.height * 2, in.width * 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.data.col(y * out.width + x) = in.data.col((y / 2) * in.width + x / 2);
  return out;
}

template <typename Scalar>
struct FusedPyramid {
  FeatureMap<Scalar> p3;
  FeatureMap<Scalar> p4;
};

/// P'_i = Conv_i1(P_i) + Conv_i2(Up2x(P_{i+1})) for i = 3, 4.
template <typename Scalar>
FusedPyramid<Scalar> fuse_pyramid(const FeatureMap<Scalar>& p3, const FeatureMap<Scalar>& p4,
                                  const FeatureMap<Scalar>& p5, const SgclParams<Scalar>& params) {
  if (p4.height * 2 != p3.height || p4.width * 2 != p3.width || p5.height * 2 != p4.height ||
      p5.width * 2 != p4.width)
    throw ShapeError("fuse_pyramid: spatial sizes must halve per level");
  FusedPyramid<Scalar> out;
  out.p3 = conv1x1(p3, params.conv31_w, params.conv31_b);
  out.p3.data += conv1x1(upsample2x(p4), params.conv32_w, params.conv32_b).data;
  out.p4 = conv1x1(p4, params.conv41_w, params.conv41_b);
  out.p4.data += conv1x1(upsample2x(p5), params.conv42_w, params.conv42_b).data;
  return out;
}

/// Visual tokens: row-major flatten of (P'_4 + positional table), one token
/// per row.
template <typename Scalar>
Mat<Scalar> flatten_with_pos(const FeatureMap<Scalar>& p4, const Mat<Scalar>& pos_table) {
  if (pos_table.rows() != p4.channels || pos_table.cols() != p4.pixels())
    throw ShapeError("flatten_with_pos: positional table does not match the feature map");
  return (p4.data + pos_table).transpose();
}

/// Inverse of the flatten step (without the positional term).
template <typename Scalar>
FeatureMap<Scalar> unflatten_tokens(const Mat<Scalar>& tokens, int height, int width) {
  if (tokens.rows() != height * width) throw ShapeError("unflatten_tokens: token count mismatch");
  return {tokens.transpose(), height, width};
}

// ---------------------------------------------------------------------------
// Cell representations

template <typename Scalar>
Vec<Scalar> softmax(const Vec<Scalar>& w) {
  Scalar m = w(0);
  for (Eigen::Index i = 1; i < w.size(); ++i) m = smax(m, w(i));
  Vec<Scalar> e = (w.array() - m).exp().matrix();
  return e / e.sum();
}

/// H = sum_i softmax(w)_i * h_i.
template <typename Scalar>
Mat<Scalar> aggregate_layers(const HiddenStates<Scalar>& h, const Mat<Scalar>& w) {
  if (h.empty() || static_cast<Eigen::Index>(h.size()) != w.size())
    throw ShapeError("aggregate_layers: " + std::to_string(w.size()) + " weights for " + std::to_string(h.size()) +
                     " layers");
  const Vec<Scalar> a = softmax<Scalar>(w.reshaped());
  Mat<Scalar> out = a(0) * h[0];
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i].rows() != h[0].rows() || h[i].cols() != h[0].cols())
      throw ShapeError("aggregate_layers: layers differ in shape");
    out += a(static_cast<Eigen::Index>(i)) * h[i];
  }
  return out;
}

/// Spans must lie inside the token range, be non-empty and not overlap.
void validate_spans(const TokenSpanIndex& spans, Eigen::Index tokens);

/// C_n = mean of the rows of H over span n, both delimiters included.
template <typename Scalar>
Mat<Scalar> pool_cells(const Mat<Scalar>& h, const TokenSpanIndex& spans) {
  validate_spans(spans, h.rows());
  Mat<Scalar> c(static_cast<Eigen::Index>(spans.size()), h.cols());
  for (std::size_t n = 0; n < spans.size(); ++n) {
    const auto& s = spans[n];
    c.row(static_cast<Eigen::Index>(n)) = h.middleRows(s.start, s.end - s.start + 1).colwise().sum() /
                                          Scalar(s.end - s.start + 1);
  }
  return c;
}

template <typename Scalar>
struct StructureMasks {
  MaskMat row;
  MaskMat col;
  Mat<Scalar> row_logits;
  Mat<Scalar> col_logits;
};

/// logits = <C^k_x, C^k_y> / dim(C^k); mask = sigmoid(logit) > 0.5 with the
/// diagonal forced to 1.
template <typename Scalar>
StructureMasks<Scalar> structure_masks(const Mat<Scalar>& c, const SgclParams<Scalar>& params) {
  auto one = [&](const Mat<Scalar>& w, const Mat<Scalar>& b, MaskMat& mask, Mat<Scalar>& logits) {
    Mat<Scalar> proj = c * w;
    proj.rowwise() += b.row(0);
    logits = proj * proj.transpose() / Scalar(static_cast<double>(proj.cols()));
    mask = MaskMat::Zero(logits.rows(), logits.cols());
    for (Eigen::Index x = 0; x < logits.rows(); ++x)
      for (Eigen::Index y = 0; y < logits.cols(); ++y) mask(x, y) = (x == y || value_of(logits(x, y)) > 0.0) ? 1 : 0;
  };
  StructureMasks<Scalar> out;
  one(params.row_w, params.row_b, out.row, out.row_logits);
  one(params.col_w, params.col_b, out.col, out.col_logits);
  return out;
}

/// Ground-truth co-membership: two cells share a row (column) iff their row
/// (column) ranges intersect.
AdjacencyTargets adjacency_targets(const std::vector<LogicalCoords>& cells);

// ---------------------------------------------------------------------------
// Attention

/// Single-head scaled dot-product attention of `queries` over `keys_values`.
/// With a mask, position (i, j) takes part only where mask(i, j) != 0 and the
/// softmax is renormalized over those positions. Returns A * V * Wo.
template <typename Scalar>
Mat<Scalar> attend(const Mat<Scalar>& query_in, const Mat<Scalar>& key_in, const Mat<Scalar>& value_in,
                   const AttentionParams<Scalar>& p, const MaskMat* mask = nullptr) {
  using std::exp;
  const Mat<Scalar> q = query_in * p.wq;
  const Mat<Scalar> k = key_in * p.wk;
  const Mat<Scalar> v = value_in * p.wv;
  const Scalar scale = Scalar(1.0 / std::sqrt(static_cast<double>(q.cols())));
  const Mat<Scalar> scores = (q * k.transpose()) * scale;
  Mat<Scalar> weights = Mat<Scalar>::Zero(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    std::optional<Scalar> m;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (mask && (*mask)(i, j) == 0) continue;
      m = m ? smax(*m, scores(i, j)) : scores(i, j);
    }
    if (!m) throw ShapeError("attend: a query has no admissible key");
    Scalar total(0);
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (mask && (*mask)(i, j) == 0) continue;
      weights(i, j) = exp(scores(i, j) - *m);
      total += weights(i, j);
    }
    weights.row(i) /= total;
  }
  return weights * v * p.wo;
}

/// Residual stack of one enhancement branch; returns its increment over the
/// input.
template <typename Scalar>
Mat<Scalar> enhancement_branch(const Mat<Scalar>& c, const MaskMat& mask, const Mat<Scalar>& visual,
                               const BranchParams<Scalar>& p) {
  Mat<Scalar> x = c;
  x += attend(x, x, x, p.self1, &mask);
  x += attend(x, x, x, p.self2, &mask);
  x += attend(x, visual, visual, p.cross);
  return x - c;
}

/// C' = C + branch_row(C) + branch_col(C).
template <typename Scalar>
Mat<Scalar> enhance_cells(const Mat<Scalar>& c, const MaskMat& row_mask, const MaskMat& col_mask,
                          const Mat<Scalar>& visual, const SgclParams<Scalar>& params) {
  if (row_mask.rows() != c.rows() || row_mask.cols() != c.rows() || col_mask.rows() != c.rows() ||
      col_mask.cols() != c.rows())
    throw ShapeError("enhance_cells: masks must be N x N");
  return c + enhancement_branch(c, row_mask, visual, params.row_branch) +
         enhancement_branch(c, col_mask, visual, params.col_branch);
}

// ---------------------------------------------------------------------------
// Box heads

/// Anchor logits of (cx, cy, w, h) to clamped corner boxes.
template <typename Scalar>
std::vector<BoxT<Scalar>> anchors_to_boxes(const Mat<Scalar>& logits) {
  std::vector<BoxT<Scalar>> out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const Scalar cx = sigmoid(logits(n, 0)), cy = sigmoid(logits(n, 1));
    const Scalar hw = sigmoid(logits(n, 2)) / Scalar(2), hh = sigmoid(logits(n, 3)) / Scalar(2);
    out.push_back({clamp01(Scalar(cx - hw)), clamp01(Scalar(cy - hh)), clamp01(Scalar(cx + hw)), clamp01(Scalar(cy + hh))});
  }
  return out;
}

template <typename Scalar>
Mat<Scalar> mlp2(const Mat<Scalar>& x, const Mat<Scalar>& w1, const Mat<Scalar>& b1, const Mat<Scalar>& w2,
                 const Mat<Scalar>& b2) {
  Mat<Scalar> h = x * w1;
  h.rowwise() += b1.row(0);
  Mat<Scalar> out = relu_all(h) * w2;
  out.rowwise() += b2.row(0);
  return out;
}

/// Initial anchor logits from C' through a two-layer MLP.
template <typename Scalar>
Mat<Scalar> regress_initial(const Mat<Scalar>& c_enh, const SgclParams<Scalar>& params) {
  return mlp2(c_enh, params.reg_w1, params.reg_b1, params.reg_w2, params.reg_b2);
}

/// Sine/cosine features of each column of `values` (entries in [0,1]);
/// sine_dim features per column.
template <typename Scalar>
Mat<Scalar> sine_encoding(const Mat<Scalar>& values, int sine_dim, double temperature) {
  using std::cos;
  using std::sin;
  const int half = sine_dim / 2;
  Mat<Scalar> out(values.rows(), values.cols() * sine_dim);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      for (int f = 0; f < half; ++f) {
        const double freq = 2.0 * std::numbers::pi / std::pow(temperature, static_cast<double>(f) / half);
        const Scalar arg = values(r, c) * Scalar(freq);
        out(r, c * sine_dim + 2 * f) = sin(arg);
        out(r, c * sine_dim + 2 * f + 1) = cos(arg);
      }
    }
  }
  return out;
}

/// Normalized pixel centers (x, y) of a feature map, one row per pixel.
template <typename Scalar>
Mat<Scalar> pixel_centers(int height, int width) {
  Mat<Scalar> out(height * width, 2);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      out(y * width + x, 0) = Scalar((x + 0.5) / width);
      out(y * width + x, 1) = Scalar((y + 0.5) / height);
    }
  return out;
}

template <typename Scalar>
struct RefineResult {
  Mat<Scalar> anchors;  // final anchor logits, N x 4
  Mat<Scalar> queries;  // final cell queries, N x model_dim
};

/// Anchor refinement. Every layer lets each cell query attend to the tokens
/// of P'_3 and P'_4 (keys carry a sine encoding of the pixel position,
/// queries one of the current anchor), then adds a predicted delta to the
/// anchor logits. Cells stay in input order; there is no matching step.
template <typename Scalar>
RefineResult<Scalar> refine_boxes(const Mat<Scalar>& anchors, const Mat<Scalar>& c_enh, const FeatureMap<Scalar>& p3,
                                  const FeatureMap<Scalar>& p4, const SgclParams<Scalar>& params) {
  const auto& cfg = params.config;
  if (anchors.rows() != c_enh.rows() || anchors.cols() != 4) throw ShapeError("refine_boxes: anchors must be N x 4");
  Mat<Scalar> tokens(p3.pixels() + p4.pixels(), p3.channels);
  tokens << p3.data.transpose(), p4.data.transpose();
  Mat<Scalar> centers(tokens.rows(), 2);
  centers << pixel_centers<Scalar>(p3.height, p3.width), pixel_centers<Scalar>(p4.height, p4.width);
  const Mat<Scalar> key_pos = sine_encoding(centers, cfg.sine_dim, cfg.sine_temperature);

  RefineResult<Scalar> out{anchors, c_enh};
  for (const auto& layer : params.refine) {
    const Mat<Scalar> anchor_pos = sine_encoding<Scalar>(sigmoid_all(out.anchors), cfg.sine_dim, cfg.sine_temperature);
    const Mat<Scalar> q_in = out.queries + anchor_pos * layer.pe_query;
    const Mat<Scalar> k_in = tokens + key_pos * layer.pe_key;
    out.queries += attend(q_in, k_in, tokens, layer.attn);
    out.anchors += mlp2(out.queries, layer.delta_w1, layer.delta_b1, layer.delta_w2, layer.delta_b2);
  }
  return out;
}

/// Per-cell alignment logits over P'_4: logits(n, p) = <C'_n W_m, P'_4[:, p]>.
template <typename Scalar>
Mat<Scalar> mask_alignment_logits(const Mat<Scalar>& c_enh, const FeatureMap<Scalar>& p4, const Mat<Scalar>& mask_w) {
  return (c_enh * mask_w) * p4.data;
}

/// A pixel is 1 iff its center lies strictly inside the box.
Eigen::MatrixXd mask_targets(const std::vector<BBox>& boxes, int height, int width);

// ---------------------------------------------------------------------------
// Whole module

template <typename Scalar>
struct SgclInputs {
  HiddenStates<Scalar> hidden;
  TokenSpanIndex spans;
  FeatureMap<Scalar> p3, p4, p5;
};

template <typename Scalar>
struct SgclOutputs {
  FusedPyramid<Scalar> fused;
  Mat<Scalar> visual;       // V
  Mat<Scalar> aggregated;   // H
  Mat<Scalar> cells;        // C
  StructureMasks<Scalar> masks;
  Mat<Scalar> enhanced;     // C'
  Mat<Scalar> init_anchors;
  std::vector<BoxT<Scalar>> init_boxes;   // B_init
  Mat<Scalar> final_anchors;
  std::vector<BoxT<Scalar>> boxes;        // B
  Mat<Scalar> mask_logits;  // N x (P'_4 pixels)
};

template <typename Scalar>
SgclOutputs<Scalar> forward(const SgclInputs<Scalar>& in, const SgclParams<Scalar>& params) {
  SgclOutputs<Scalar> out;
  out.fused = fuse_pyramid(in.p3, in.p4, in.p5, params);
  out.visual = flatten_with_pos(out.fused.p4, params.pos4);
  out.aggregated = aggregate_layers(in.hidden, params.layer_w);
  out.cells = pool_cells(out.aggregated, in.spans);
  out.masks = structure_masks(out.cells, params);
  out.enhanced = enhance_cells(out.cells, out.masks.row, out.masks.col, out.visual, params);
  out.init_anchors = regress_initial(out.enhanced, params);
  out.init_boxes = anchors_to_boxes(out.init_anchors);
  out.final_anchors = refine_boxes(out.init_anchors, out.enhanced, out.fused.p3, out.fused.p4, params).anchors;
  out.boxes = anchors_to_boxes(out.final_anchors);
  out.mask_logits = mask_alignment_logits(out.enhanced, out.fused.p4, params.mask_w);
  return out;
}

}  // namespace tabkit::sgcl
