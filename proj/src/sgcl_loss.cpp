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

#include "tabkit/sgcl/loss.hpp"

namespace tabkit::sgcl {

double combine(const LossTerms& t, const LossWeights& w) {
  return w.box * t.box + w.iou * t.iou + w.mask * t.mask + w.structure * t.structure + w.ce * t.ce;
}

void check_aligned(Eigen::Index tokens, Eigen::Index vocab, std::size_t boxes, Eigen::Index mask_rows,
                   Eigen::Index mask_cols, Eigen::Index row_n, Eigen::Index col_n, const Targets& gt) {
  auto fail = [](const std::string& what) { throw ShapeError("misaligned bundles: " + what); };
  if (tokens != static_cast<Eigen::Index>(gt.tokens.size())) fail("token count");
  if (vocab <= 0) fail("empty vocabulary");
  if (boxes != gt.boxes.size()) fail("box count");
  if (mask_rows != gt.masks.rows() || mask_cols != gt.masks.cols()) fail("mask shape");
  if (row_n != gt.adjacency.row.rows() || col_n != gt.adjacency.col.rows()) fail("adjacency size");
  if (static_cast<std::size_t>(row_n) != boxes) fail("adjacency and box counts");
}

Eigen::MatrixXd ce_term_grad(const Eigen::MatrixXd& logits, const std::vector<int>& targets) {
  Eigen::MatrixXd g(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const Eigen::RowVectorXd e = (logits.row(t).array() - logits.row(t).maxCoeff()).exp().matrix();
    g.row(t) = e / e.sum();
    g(t, targets[static_cast<std::size_t>(t)]) -= 1.0;
  }
  return g / static_cast<double>(logits.rows());
}

std::vector<std::array<double, 4>> box_term_grad(const std::vector<BBox>& pred, const std::vector<BBox>& gt) {
  std::vector<std::array<double, 4>> out;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    auto g = l1_box_loss_grad(pred[n], gt[n]);
    for (double& v : g) v /= static_cast<double>(pred.size());
    out.push_back(g);
  }
  return out;
}

std::vector<std::array<double, 4>> iou_term_grad(const std::vector<BBox>& pred, const std::vector<BBox>& gt) {
  std::vector<std::array<double, 4>> out;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    auto g = giou_loss_grad(pred[n], gt[n]);
    for (double& v : g) v /= static_cast<double>(pred.size());
    out.push_back(g);
  }
  return out;
}

Eigen::MatrixXd mask_term_grad(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets) {
  const double cells = static_cast<double>(logits.rows());
  const double pixels = static_cast<double>(logits.cols());
  Eigen::MatrixXd g(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const Eigen::ArrayXd p = logits.row(n).array().unaryExpr([](double l) { return sigmoid(l); }).transpose();
    const Eigen::ArrayXd t = targets.row(n).array().transpose();
    const double num = 2.0 * (p * t).sum() + 1.0;
    const double den = p.sum() + t.sum() + 1.0;
    // d dice / d p_j = -(2 t_j den - num) / den^2
    const Eigen::ArrayXd d_dice = -(2.0 * t * den - num) / (den * den);
    const Eigen::ArrayXd d_logit = (p - t) / pixels + d_dice * p * (1.0 - p);
    g.row(n) = d_logit.transpose().matrix() / cells;
  }
  return g;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> structure_term_grad(const Eigen::MatrixXd& row_logits,
                                                                const Eigen::MatrixXd& col_logits,
                                                                const AdjacencyTargets& gt) {
  const Eigen::Index n = row_logits.rows();
  Eigen::MatrixXd gr = Eigen::MatrixXd::Zero(n, n), gc = Eigen::MatrixXd::Zero(n, n);
  if (n < 2) return {gr, gc};
  const double count = 2.0 * static_cast<double>(n * (n - 1));
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      gr(x, y) = (sigmoid(row_logits(x, y)) - gt.row(x, y)) / count;
      gc(x, y) = (sigmoid(col_logits(x, y)) - gt.col(x, y)) / count;
    }
  return {gr, gc};
}

}  // namespace tabkit::sgcl
