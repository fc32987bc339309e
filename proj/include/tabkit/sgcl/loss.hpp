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

#include <string>
#include <vector>

#include "tabkit/sgcl/forward.hpp"

namespace tabkit::sgcl {

/// Everything the loss reads from a forward pass, plus the token logits of
/// the language head, which SGCL consumes but does not produce.
template <typename Scalar>
struct Prediction {
  Mat<Scalar> token_logits;  // tokens x vocab
  std::vector<BoxT<Scalar>> boxes;
  Mat<Scalar> mask_logits;   // N x pixels
  Mat<Scalar> row_logits;    // N x N
  Mat<Scalar> col_logits;
};

struct Targets {
  std::vector<int> tokens;
  std::vector<BBox> boxes;
  Eigen::MatrixXd masks;     // N x pixels, 0/1
  AdjacencyTargets adjacency;
};

struct LossTerms {
  double ce = 0, box = 0, iou = 0, mask = 0, structure = 0;
};

/// sum of lambda_k * L_k, accumulated box, iou, mask, structure, ce.
double combine(const LossTerms& terms, const LossWeights& w);

template <typename Scalar>
Prediction<Scalar> make_prediction(const SgclOutputs<Scalar>& out, Mat<Scalar> token_logits) {
  return {std::move(token_logits), out.boxes, out.mask_logits, out.masks.row_logits, out.masks.col_logits};
}

void check_aligned(Eigen::Index tokens, Eigen::Index vocab, std::size_t boxes, Eigen::Index mask_rows,
                   Eigen::Index mask_cols, Eigen::Index row_n, Eigen::Index col_n, const Targets& gt);

// ---------------------------------------------------------------------------
// Individual terms

/// Mean over tokens of -log softmax(logits_t)[target_t].
template <typename Scalar>
Scalar ce_term(const Mat<Scalar>& logits, const std::vector<int>& targets) {
  using std::exp;
  using std::log;
  if (logits.rows() != static_cast<Eigen::Index>(targets.size()) || targets.empty())
    throw ShapeError("ce_term: " + std::to_string(targets.size()) + " targets for " + std::to_string(logits.rows()) +
                     " logit rows");
  Scalar total(0);
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const int k = targets[static_cast<std::size_t>(t)];
    if (k < 0 || k >= logits.cols()) throw ShapeError("ce_term: target out of vocabulary");
    Scalar m = logits(t, 0);
    for (Eigen::Index v = 1; v < logits.cols(); ++v) m = smax(m, logits(t, v));
    Scalar z(0);
    for (Eigen::Index v = 0; v < logits.cols(); ++v) z += exp(logits(t, v) - m);
    total += log(z) + m - logits(t, k);
  }
  return total / Scalar(static_cast<double>(logits.rows()));
}

template <typename Scalar>
Scalar box_term(const std::vector<BoxT<Scalar>>& pred, const std::vector<BBox>& gt) {
  if (pred.size() != gt.size() || pred.empty()) throw ShapeError("box_term: box counts differ");
  Scalar total(0);
  for (std::size_t n = 0; n < pred.size(); ++n)
    total += l1_box_loss(pred[n], BoxT<Scalar>{Scalar(gt[n].x1), Scalar(gt[n].y1), Scalar(gt[n].x2), Scalar(gt[n].y2)});
  return total / Scalar(static_cast<double>(pred.size()));
}

template <typename Scalar>
Scalar iou_term(const std::vector<BoxT<Scalar>>& pred, const std::vector<BBox>& gt) {
  if (pred.size() != gt.size() || pred.empty()) throw ShapeError("iou_term: box counts differ");
  Scalar total(0);
  for (std::size_t n = 0; n < pred.size(); ++n)
    total += giou_loss(pred[n], BoxT<Scalar>{Scalar(gt[n].x1), Scalar(gt[n].y1), Scalar(gt[n].x2), Scalar(gt[n].y2)});
  return total / Scalar(static_cast<double>(pred.size()));
}

/// Mean over cells of (pixel-mean BCE + dice loss). Dice uses +1 smoothing in
/// numerator and denominator.
template <typename Scalar>
Scalar mask_term(const Mat<Scalar>& logits, const Eigen::MatrixXd& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols() || logits.rows() == 0)
    throw ShapeError("mask_term: logits and targets differ in shape");
  Scalar total(0);
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    Scalar bce(0), inter(0), psum(0);
    double tsum = 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      const Scalar& l = logits(n, j);
      const double t = targets(n, j);
      bce += softplus(l) - Scalar(t) * l;
      const Scalar p = sigmoid(l);
      inter += p * Scalar(t);
      psum += p;
      tsum += t;
    }
    const Scalar dice = Scalar(1) - (Scalar(2) * inter + Scalar(1)) / (psum + Scalar(tsum + 1.0));
    total += bce / Scalar(static_cast<double>(logits.cols())) + dice;
  }
  return total / Scalar(static_cast<double>(logits.rows()));
}

/// BCE over the off-diagonal entries of both adjacency logit matrices,
/// averaged over all 2 N (N - 1) entries. Zero when N = 1.
template <typename Scalar>
Scalar structure_term(const Mat<Scalar>& row_logits, const Mat<Scalar>& col_logits, const AdjacencyTargets& gt) {
  const Eigen::Index n = row_logits.rows();
  if (row_logits.cols() != n || col_logits.rows() != n || col_logits.cols() != n || gt.row.rows() != n ||
      gt.col.rows() != n || gt.row.cols() != n || gt.col.cols() != n)
    throw ShapeError("structure_term: adjacency shapes differ");
  if (n < 2) return Scalar(0);
  Scalar total(0);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      total += softplus(row_logits(x, y)) - Scalar(static_cast<double>(gt.row(x, y))) * row_logits(x, y);
      total += softplus(col_logits(x, y)) - Scalar(static_cast<double>(gt.col(x, y))) * col_logits(x, y);
    }
  return total / Scalar(2.0 * static_cast<double>(n * (n - 1)));
}

template <typename Scalar>
struct TermValues {
  Scalar ce, box, iou, mask, structure;
};

template <typename Scalar>
TermValues<Scalar> loss_terms(const Prediction<Scalar>& p, const Targets& gt) {
  check_aligned(p.token_logits.rows(), p.token_logits.cols(), p.boxes.size(), p.mask_logits.rows(),
                p.mask_logits.cols(), p.row_logits.rows(), p.col_logits.rows(), gt);
  return {ce_term(p.token_logits, gt.tokens), box_term(p.boxes, gt.boxes), iou_term(p.boxes, gt.boxes),
          mask_term(p.mask_logits, gt.masks),
          structure_term(p.row_logits, p.col_logits, gt.adjacency)};
}

template <typename Scalar>
Scalar loss_total(const Prediction<Scalar>& p, const Targets& gt, const LossWeights& w, LossTerms* breakdown = nullptr) {
  const auto t = loss_terms(p, gt);
  if (breakdown) *breakdown = {value_of(t.ce), value_of(t.box), value_of(t.iou), value_of(t.mask), value_of(t.structure)};
  return Scalar(w.box) * t.box + Scalar(w.iou) * t.iou + Scalar(w.mask) * t.mask + Scalar(w.structure) * t.structure +
         Scalar(w.ce) * t.ce;
}

// ---------------------------------------------------------------------------
// Closed-form gradients of each term with respect to its prediction input.

Eigen::MatrixXd ce_term_grad(const Eigen::MatrixXd& logits, const std::vector<int>& targets);
std::vector<std::array<double, 4>> box_term_grad(const std::vector<BBox>& pred, const std::vector<BBox>& gt);
std::vector<std::array<double, 4>> iou_term_grad(const std::vector<BBox>& pred, const std::vector<BBox>& gt);
Eigen::MatrixXd mask_term_grad(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> structure_term_grad(const Eigen::MatrixXd& row_logits,
                                                                const Eigen::MatrixXd& col_logits,
                                                                const AdjacencyTargets& gt);

}  // namespace tabkit::sgcl
