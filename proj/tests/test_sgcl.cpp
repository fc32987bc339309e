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

// Reference implementations written as plain loops, compared against the
// Eigen expressions of the structure-guided module.

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tabkit/sgcl/check.hpp"
#include "tabkit/sgcl/forward.hpp"
#include "tabkit/sgcl/loss.hpp"
#include "tabkit/sgcl/toy.hpp"

using namespace tabkit;
using namespace tabkit::sgcl;
using Eigen::MatrixXd;

namespace {

MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

FeatureMap<double> random_map(std::mt19937_64& rng, int c, int h, int w) {
  return {gaussian(rng, c, h * w), h, w};
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Single-head attention with -inf masking, written per query.
MatrixXd reference_attention(const MatrixXd& qi, const MatrixXd& ki, const MatrixXd& vi, const AttentionParams<double>& p,
                             const MaskMat* mask) {
  const MatrixXd q = qi * p.wq, k = ki * p.wk, v = vi * p.wv;
  MatrixXd out = MatrixXd::Zero(q.rows(), v.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<double> s(static_cast<std::size_t>(k.rows()));
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      double dot = 0;
      for (Eigen::Index d = 0; d < q.cols(); ++d) dot += q(i, d) * k(j, d);
      s[static_cast<std::size_t>(j)] = mask && (*mask)(i, j) == 0 ? -std::numeric_limits<double>::infinity()
                                                                   : dot / std::sqrt(double(q.cols()));
      m = std::max(m, s[static_cast<std::size_t>(j)]);
    }
    double z = 0;
    for (double& e : s) z += (e = std::exp(e - m));
    for (Eigen::Index j = 0; j < k.rows(); ++j) out.row(i) += s[static_cast<std::size_t>(j)] / z * v.row(j);
  }
  return out * p.wo;
}

AttentionParams<double> random_attention(std::mt19937_64& rng, int in, int d) {
  return {gaussian(rng, in, d, 0.4), gaussian(rng, in, d, 0.4), gaussian(rng, in, d, 0.4), gaussian(rng, d, in, 0.4)};
}

}  // namespace

TEST_CASE("conv1x1 matches a per-pixel loop") {
  std::mt19937_64 rng(1);
  const auto in = random_map(rng, 3, 4, 5);
  const MatrixXd w = gaussian(rng, 6, 3), b = gaussian(rng, 6, 1);
  const auto out = conv1x1(in, w, b);
  REQUIRE(out.channels == 6);
  for (int p = 0; p < in.pixels(); ++p)
    for (int o = 0; o < 6; ++o) {
      double s = b(o, 0);
      for (int c = 0; c < 3; ++c) s += w(o, c) * in.data(c, p);
      CHECK(out.data(o, p) == doctest::Approx(s).epsilon(1e-12));
    }
  CHECK_THROWS_AS(conv1x1(in, MatrixXd(6, 4), b), ShapeError);
}

TEST_CASE("upsampling copies each pixel into a 2x2 block") {
  std::mt19937_64 rng(2);
  const auto in = random_map(rng, 2, 3, 4);
  const auto up = upsample2x(in);
  CHECK(up.height == 6);
  CHECK(up.width == 8);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) CHECK(up.data.col(y * 8 + x) == in.data.col((y / 2) * 4 + x / 2));
}

TEST_CASE("flattening is row-major and invertible") {
  std::mt19937_64 rng(3);
  const auto p4 = random_map(rng, 4, 3, 5);
  const MatrixXd zero = MatrixXd::Zero(4, 15), pos = gaussian(rng, 4, 15);
  const MatrixXd tokens = flatten_with_pos(p4, zero);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x)
      for (int c = 0; c < 4; ++c) CHECK(tokens(y * 5 + x, c) == p4.data(c, y * 5 + x));
  CHECK(unflatten_tokens(tokens, 3, 5).data == p4.data);
  const MatrixXd with_pos = flatten_with_pos(p4, pos);
  CHECK((with_pos - tokens).transpose().isApprox(pos));
}

TEST_CASE("layer aggregation is a softmax-weighted sum") {
  std::mt19937_64 rng(4);
  HiddenStates<double> h{gaussian(rng, 7, 3), gaussian(rng, 7, 3), gaussian(rng, 7, 3)};
  const MatrixXd w = gaussian(rng, 3, 1);
  const double z = std::exp(w(0)) + std::exp(w(1)) + std::exp(w(2));
  const MatrixXd expect = (std::exp(w(0)) * h[0] + std::exp(w(1)) * h[1] + std::exp(w(2)) * h[2]) / z;
  CHECK(aggregate_layers(h, w).isApprox(expect, 1e-12));
  CHECK_THROWS_AS(aggregate_layers(h, MatrixXd(2, 1)), ShapeError);
}

TEST_CASE("cell pooling averages each inclusive token range") {
  std::mt19937_64 rng(5);
  const MatrixXd h = gaussian(rng, 10, 2);
  const TokenSpanIndex spans{{1, 3}, {5, 5}, {6, 9}};
  const MatrixXd c = pool_cells(h, spans);
  for (std::size_t n = 0; n < spans.size(); ++n) {
    Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(2);
    for (int t = spans[n].start; t <= spans[n].end; ++t) s += h.row(t);
    CHECK(c.row(static_cast<Eigen::Index>(n)).isApprox(s / (spans[n].end - spans[n].start + 1), 1e-12));
  }
  CHECK_THROWS_AS(pool_cells(h, {{1, 3}, {3, 4}}), Error);
  CHECK_THROWS_AS(pool_cells(h, {{8, 10}}), Error);
  CHECK_THROWS_AS(pool_cells(h, {{4, 3}}), Error);
}

TEST_CASE("structure masks follow the sign of the projected inner product") {
  std::mt19937_64 rng(6);
  auto params = zero_params<double>(toy_config());
  params.row_w = gaussian(rng, 16, 8);
  params.row_b = gaussian(rng, 1, 8);
  params.col_w = gaussian(rng, 16, 8);
  params.col_b = gaussian(rng, 1, 8);
  const MatrixXd c = gaussian(rng, 6, 16);
  const auto m = structure_masks(c, params);
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y) {
      double dot = 0;
      for (int k = 0; k < 8; ++k) {
        const double a = (c.row(x) * params.row_w.col(k))(0) + params.row_b(0, k);
        const double b = (c.row(y) * params.row_w.col(k))(0) + params.row_b(0, k);
        dot += a * b;
      }
      CHECK(m.row_logits(x, y) == doctest::Approx(dot / 8).epsilon(1e-12));
      CHECK(m.row(x, y) == ((x == y || sig(dot / 8) > 0.5) ? 1 : 0));
    }
  CHECK(m.row == m.row.transpose());
  CHECK(m.col == m.col.transpose());
}

TEST_CASE("masked attention matches the -inf reference") {
  std::mt19937_64 rng(7);
  const auto p = random_attention(rng, 5, 4);
  const MatrixXd x = gaussian(rng, 6, 5), kv = gaussian(rng, 9, 5);
  CHECK(attend(x, kv, kv, p).isApprox(reference_attention(x, kv, kv, p, nullptr), 1e-12));
  MaskMat mask = MaskMat::Identity(6, 6);
  mask(0, 3) = mask(3, 0) = mask(2, 5) = mask(5, 2) = 1;
  CHECK(attend(x, x, x, p, &mask).isApprox(reference_attention(x, x, x, p, &mask), 1e-12));
  MaskMat empty = MaskMat::Zero(6, 6);
  CHECK_THROWS_AS(attend(x, x, x, p, &empty), ShapeError);
}

TEST_CASE("the enhancement branch is a residual stack") {
  std::mt19937_64 rng(8);
  BranchParams<double> b{random_attention(rng, 4, 4), random_attention(rng, 4, 4), random_attention(rng, 4, 4)};
  const MatrixXd c = gaussian(rng, 5, 4), v = gaussian(rng, 12, 4);
  const MaskMat mask = MaskMat::Ones(5, 5);
  MatrixXd x = c;
  x += reference_attention(x, x, x, b.self1, &mask);
  x += reference_attention(x, x, x, b.self2, &mask);
  x += reference_attention(x, v, v, b.cross, nullptr);
  CHECK(enhancement_branch(c, mask, v, b).isApprox(x - c, 1e-12));
}

TEST_CASE("box regression is a two-layer ReLU network") {
  std::mt19937_64 rng(9);
  const MatrixXd x = gaussian(rng, 3, 4), w1 = gaussian(rng, 4, 6), b1 = gaussian(rng, 1, 6), w2 = gaussian(rng, 6, 4),
                 b2 = gaussian(rng, 1, 4);
  const MatrixXd got = mlp2(x, w1, b1, w2, b2);
  for (int n = 0; n < 3; ++n)
    for (int o = 0; o < 4; ++o) {
      double s = b2(0, o);
      for (int h = 0; h < 6; ++h) {
        double a = b1(0, h);
        for (int i = 0; i < 4; ++i) a += x(n, i) * w1(i, h);
        s += std::max(a, 0.0) * w2(h, o);
      }
      CHECK(got(n, o) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("anchor logits decode to clamped corner boxes") {
  MatrixXd a(2, 4);
  a << 0, 0, 0, 0, 10, -10, 10, 10;
  const auto boxes = anchors_to_boxes(a);
  CHECK(boxes[0].x1 == doctest::Approx(0.25));
  CHECK(boxes[0].x2 == doctest::Approx(0.75));
  CHECK(boxes[1].x2 == 1.0);
  CHECK(boxes[1].y1 == 0.0);
}

TEST_CASE("sine encoding pairs sine and cosine at geometric frequencies") {
  MatrixXd v(1, 2);
  v << 0.3, 0.7;
  const MatrixXd e = sine_encoding(v, 4, 20.0);
  REQUIRE(e.cols() == 8);
  for (int c = 0; c < 2; ++c)
    for (int f = 0; f < 2; ++f) {
      const double freq = 2 * M_PI / std::pow(20.0, f / 2.0);
      CHECK(e(0, c * 4 + 2 * f) == doctest::Approx(std::sin(v(0, c) * freq)));
      CHECK(e(0, c * 4 + 2 * f + 1) == doctest::Approx(std::cos(v(0, c) * freq)));
    }
}

TEST_CASE("one refinement layer matches a direct recomputation") {
  std::mt19937_64 rng(10);
  auto cfg = toy_config();
  cfg.refine_layers = 1;
  auto params = random_params(cfg, rng);
  const auto p3 = random_map(rng, cfg.model_dim, cfg.p3_height, cfg.p3_width);
  const auto p4 = random_map(rng, cfg.model_dim, cfg.p4_height(), cfg.p4_width());
  const MatrixXd anchors = gaussian(rng, 4, 4), c = gaussian(rng, 4, cfg.model_dim);
  const auto got = refine_boxes(anchors, c, p3, p4, params);

  const auto& L = params.refine[0];
  MatrixXd tokens(p3.pixels() + p4.pixels(), cfg.model_dim), centers(tokens.rows(), 2);
  int t = 0;
  for (const auto* m : {&p3, &p4})
    for (int y = 0; y < m->height; ++y)
      for (int x = 0; x < m->width; ++x, ++t) {
        tokens.row(t) = m->data.col(y * m->width + x).transpose();
        centers(t, 0) = (x + 0.5) / m->width;
        centers(t, 1) = (y + 0.5) / m->height;
      }
  MatrixXd sa = anchors;
  for (Eigen::Index i = 0; i < sa.size(); ++i) sa.data()[i] = sig(anchors.data()[i]);
  const MatrixXd q = c + sine_encoding(sa, cfg.sine_dim, cfg.sine_temperature) * L.pe_query;
  const MatrixXd k = tokens + sine_encoding(centers, cfg.sine_dim, cfg.sine_temperature) * L.pe_key;
  const MatrixXd queries = c + reference_attention(q, k, tokens, L.attn, nullptr);
  const MatrixXd expect = anchors + mlp2(queries, L.delta_w1, L.delta_b1, L.delta_w2, L.delta_b2);
  CHECK(got.queries.isApprox(queries, 1e-10));
  CHECK(got.anchors.isApprox(expect, 1e-10));
}

TEST_CASE("mask targets mark pixel centers strictly inside each box") {
  const std::vector<BBox> boxes{{0.25, 0.25, 0.75, 0.5}, {0, 0, 0.125, 0.125}};
  const MatrixXd m = mask_targets(boxes, 4, 4);
  for (std::size_t n = 0; n < boxes.size(); ++n)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        const double cx = (x + 0.5) / 4, cy = (y + 0.5) / 4;
        const auto& b = boxes[n];
        const bool in = cx > b.x1 && cx < b.x2 && cy > b.y1 && cy < b.y2;
        CHECK(m(static_cast<Eigen::Index>(n), y * 4 + x) == (in ? 1.0 : 0.0));
      }
  CHECK(m.row(1).sum() == 0.0);
}

TEST_CASE("mask alignment logits are inner products with the projected cell") {
  std::mt19937_64 rng(11);
  const MatrixXd c = gaussian(rng, 3, 4), w = gaussian(rng, 4, 4);
  const auto p4 = random_map(rng, 4, 2, 3);
  const MatrixXd got = mask_alignment_logits(c, p4, w);
  for (int n = 0; n < 3; ++n)
    for (int p = 0; p < 6; ++p) CHECK(got(n, p) == doctest::Approx((c.row(n) * w).dot(p4.data.col(p).transpose())));
}

TEST_CASE("adjacency targets") {
  const std::vector<LogicalCoords> cells{{0, 0, 0, 1}, {0, 1, 2, 2}, {1, 1, 0, 0}, {1, 1, 1, 1}};
  const auto t = adjacency_targets(cells);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) {
      CHECK(t.row(x, y) == (cells[x].rows_intersect(cells[y]) ? 1 : 0));
      CHECK(t.col(x, y) == (cells[x].cols_intersect(cells[y]) ? 1 : 0));
    }
  CHECK(t.row(0, 1) == 1);
  CHECK(t.row(0, 2) == 0);
  CHECK(t.col(1, 3) == 0);
}

TEST_CASE("loss terms match direct formulas") {
  std::mt19937_64 rng(12);
  const MatrixXd logits = gaussian(rng, 3, 5);
  const std::vector<int> tok{4, 0, 2};
  double ce = 0;
  for (int t = 0; t < 3; ++t) {
    double z = 0;
    for (int v = 0; v < 5; ++v) z += std::exp(logits(t, v));
    ce += -std::log(std::exp(logits(t, tok[static_cast<std::size_t>(t)])) / z);
  }
  CHECK(ce_term(logits, tok) == doctest::Approx(ce / 3).epsilon(1e-12));

  const std::vector<BBox> pred{{0.1, 0.1, 0.5, 0.5}, {0.2, 0.3, 0.4, 0.9}}, gt{{0.2, 0.1, 0.5, 0.6}, {0.6, 0.6, 0.8, 0.8}};
  CHECK(box_term(pred, gt) == doctest::Approx(((0.1 + 0.1) / 4 + (0.4 + 0.3 + 0.4 + 0.1) / 4) / 2));
  // Box 1: inter 0.12, union 0.19, hull 0.2; box 2: disjoint, hull 0.36.
  const double g1 = 1 - (0.12 / 0.19 - (0.2 - 0.19) / 0.2), g2 = 1 - (0 - (0.36 - 0.16) / 0.36);
  CHECK(iou_term(pred, gt) == doctest::Approx((g1 + g2) / 2));

  const MatrixXd ml = gaussian(rng, 2, 4);
  MatrixXd mt(2, 4);
  mt << 1, 0, 1, 0, 0, 0, 0, 0;
  double mask = 0;
  for (int n = 0; n < 2; ++n) {
    double bce = 0, inter = 0, ps = 0, ts = 0;
    for (int j = 0; j < 4; ++j) {
      const double p = sig(ml(n, j));
      bce += -(mt(n, j) * std::log(p) + (1 - mt(n, j)) * std::log(1 - p));
      inter += p * mt(n, j);
      ps += p;
      ts += mt(n, j);
    }
    mask += bce / 4 + 1 - (2 * inter + 1) / (ps + ts + 1);
  }
  CHECK(mask_term(ml, mt) == doctest::Approx(mask / 2).epsilon(1e-12));

  const MatrixXd rl = gaussian(rng, 3, 3), cl = gaussian(rng, 3, 3);
  const auto adj = adjacency_targets({{0, 0, 0, 0}, {0, 0, 1, 1}, {1, 1, 0, 1}});
  double s = 0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      if (x == y) continue;
      for (const auto& [l, t] : {std::pair{rl(x, y), adj.row(x, y)}, std::pair{cl(x, y), adj.col(x, y)}}) {
        const double p = sig(l);
        s += -(t * std::log(p) + (1 - t) * std::log(1 - p));
      }
    }
  CHECK(structure_term(rl, cl, adj) == doctest::Approx(s / 12).epsilon(1e-12));
  CHECK(structure_term(MatrixXd(1, 1), MatrixXd(1, 1), adjacency_targets({{0, 0, 0, 0}})) == 0.0);
}

TEST_CASE("closed-form gradients agree with finite differences") {
  std::mt19937_64 rng(13);
  const MatrixXd logits = gaussian(rng, 3, 5);
  const std::vector<int> tok{1, 3, 0};
  const MatrixXd g = ce_term_grad(logits, tok);
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    MatrixXd a = logits, b = logits;
    a.data()[i] += 1e-6;
    b.data()[i] -= 1e-6;
    CHECK(g.data()[i] == doctest::Approx((ce_term(a, tok) - ce_term(b, tok)) / 2e-6).epsilon(1e-6));
  }
  const MatrixXd ml = gaussian(rng, 2, 6), mt = (gaussian(rng, 2, 6).array() > 0).cast<double>();
  const MatrixXd gm = mask_term_grad(ml, mt);
  for (Eigen::Index i = 0; i < ml.size(); ++i) {
    MatrixXd a = ml, b = ml;
    a.data()[i] += 1e-6;
    b.data()[i] -= 1e-6;
    CHECK(gm.data()[i] == doctest::Approx((mask_term(a, mt) - mask_term(b, mt)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("the composite loss with unit terms is 1.16") {
  CHECK(combine({1, 1, 1, 1, 1}, LossWeights{}) == 1.16);
  CHECK(loss_composition_check().passed);
}

TEST_CASE("parameters flatten and serialize without loss") {
  std::mt19937_64 rng(14);
  const auto cfg = toy_config();
  const auto p = random_params(cfg, rng);
  const auto flat = flatten(p);
  CHECK(flat.size() == parameter_count(p));
  CHECK(flatten(unflatten(cfg, flat)) == flat);
  std::stringstream ss;
  write_params(ss, p);
  CHECK(flatten(read_params(ss)) == flat);
  std::stringstream bad("tabkit-sgcl-params 2\n");
  CHECK_THROWS_AS(read_params(bad), Error);
}

TEST_CASE("fixtures reload to the same loss") {
  std::mt19937_64 rng(15);
  const auto inst = make_toy_instance(toy_layout(), toy_config(), rng);
  const auto params = random_params(inst.config, rng);
  const auto dir = std::filesystem::temp_directory_path() / "tabkit_sgcl_fixture_test";
  std::filesystem::create_directories(dir);
  const std::string stem = (dir / "toy").string();
  save_fixture(stem, inst, params);
  const auto [back, back_params] = load_fixture(stem);
  std::filesystem::remove_all(dir);
  const auto loss = [](const ToyInstance& i, const SgclParams<double>& p) {
    return loss_total(make_prediction(forward(i.inputs, p), i.token_logits), i.targets, LossWeights{});
  };
  CHECK(loss(back, back_params) == loss(inst, params));
}

TEST_CASE("toy tokenization delimits every cell") {
  const auto html = grid_to_html(toy_layout());
  const auto tok = tokenize_structure(html);
  REQUIRE(tok.spans.size() == 6);
  for (const auto& s : tok.spans) {
    CHECK(tok.tokens[static_cast<std::size_t>(s.start)].rfind("<td", 0) == 0);
    CHECK(tok.tokens[static_cast<std::size_t>(s.end)] == "</td>");
  }
  CHECK(vocabulary().size() == 28);
  CHECK(token_id("<td") >= 0);
}

TEST_CASE("permuting cells permutes every per-cell output") {
  std::mt19937_64 rng(16);
  const auto inst = make_toy_instance(toy_layout(), toy_config(), rng);
  const auto params = random_params(inst.config, rng);
  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  const auto moved = permute_cells(inst, perm);
  const auto a = forward(inst.inputs, params), b = forward(moved.inputs, params);
  for (int n = 0; n < 6; ++n) CHECK(b.enhanced.row(n).isApprox(a.enhanced.row(perm[static_cast<std::size_t>(n)]), 1e-9));
}

TEST_CASE("a descent step lowers the loss") {
  std::mt19937_64 rng(17);
  const auto inst = make_toy_instance(toy_layout(), toy_config(), rng);
  CHECK(descent_smoke_check(inst, random_params(inst.config, rng), 3).passed);
}

TEST_CASE("relative error guards against non-finite input") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS(relative_error(std::nan(""), 1.0));
}
