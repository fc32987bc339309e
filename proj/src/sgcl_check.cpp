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

#include "tabkit/sgcl/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tabkit/synth.hpp"

namespace tabkit::sgcl {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Eigen::VectorXd random_direction(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v / v.norm();
}

template <typename Scalar>
SgclInputs<Scalar> cast_inputs(const SgclInputs<double>& in) {
  SgclInputs<Scalar> out;
  for (const auto& h : in.hidden) out.hidden.push_back(h.cast<Scalar>());
  out.spans = in.spans;
  out.p3 = FeatureMap<Scalar>(in.p3.data.cast<Scalar>(), in.p3.height, in.p3.width);
  out.p4 = FeatureMap<Scalar>(in.p4.data.cast<Scalar>(), in.p4.height, in.p4.width);
  out.p5 = FeatureMap<Scalar>(in.p5.data.cast<Scalar>(), in.p5.height, in.p5.width);
  return out;
}

template <typename Scalar>
Scalar pipeline_loss_t(const ToyInstance& inst, const SgclInputs<Scalar>& inputs, const PipelinePoint& at,
                       const Vec<Scalar>& x, const LossWeights& w) {
  const SgclParams<Scalar> params = unflatten<Scalar>(at.config, Vec<Scalar>(x.head(at.param_count)));
  const Eigen::Index rows = inst.token_logits.rows(), cols = inst.token_logits.cols();
  Mat<Scalar> logits = x.tail(rows * cols).reshaped(rows, cols);
  const auto out = forward(inputs, params);
  return loss_total(make_prediction(out, std::move(logits)), inst.targets, w);
}

std::vector<double> flatten_boxes(const std::vector<BBox>& boxes) {
  std::vector<double> out;
  for (const auto& b : boxes) out.insert(out.end(), {b.x1, b.y1, b.x2, b.y2});
  return out;
}

std::vector<BBox> boxes_from(const Eigen::VectorXd& x) {
  std::vector<BBox> out;
  for (Eigen::Index k = 0; k + 3 < x.size(); k += 4) out.push_back({x(k), x(k + 1), x(k + 2), x(k + 3)});
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd box_grad_vector(const std::vector<std::array<double, 4>>& g) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(4 * g.size()));
  for (std::size_t n = 0; n < g.size(); ++n)
    for (int k = 0; k < 4; ++k) out(static_cast<Eigen::Index>(4 * n + k)) = g[n][k];
  return out;
}

Prediction<double> prediction_from(const Prediction<double>& like, const Eigen::VectorXd& x) {
  Prediction<double> p = like;
  Eigen::Index k = 0;
  auto take = [&](Mat<double>& m) {
    m = x.segment(k, m.size()).reshaped(m.rows(), m.cols());
    k += m.size();
  };
  take(p.token_logits);
  const auto boxes = boxes_from(x.segment(k, static_cast<Eigen::Index>(4 * p.boxes.size())));
  k += static_cast<Eigen::Index>(4 * p.boxes.size());
  p.boxes = boxes;
  take(p.mask_logits);
  take(p.row_logits);
  take(p.col_logits);
  return p;
}

Eigen::VectorXd prediction_vector(const Prediction<double>& p) {
  const auto boxes = flatten_boxes(p.boxes);
  Eigen::VectorXd x(p.token_logits.size() + static_cast<Eigen::Index>(boxes.size()) + p.mask_logits.size() +
                    p.row_logits.size() + p.col_logits.size());
  x << p.token_logits.reshaped(), to_vector(boxes), p.mask_logits.reshaped(), p.row_logits.reshaped(),
      p.col_logits.reshaped();
  return x;
}

/// Tracks the worst relative error over a run of checks.
struct Tally {
  int smooth = 0;
  int tried = 0;
  double worst = 0;
  void add(double e) {
    ++smooth;
    worst = std::max(worst, e);
  }
  CheckLine line(const std::string& name, int wanted, double tol) const {
    CheckLine l;
    l.name = name;
    l.passed = smooth == wanted && worst <= tol;
    l.detail = "points=" + std::to_string(smooth) + "/" + std::to_string(wanted) + " tried=" + std::to_string(tried) +
               " max_rel_err=" + fmt("%.3e", worst) + " tol=" + fmt("%.0e", tol);
    return l;
  }
};

void zero_cross_outputs(SgclParams<double>& p) {
  p.row_branch.cross.wo.setZero();
  p.col_branch.cross.wo.setZero();
}

/// Cells reachable from x in at most two steps of `m` (x included).
std::vector<bool> two_hop(const MaskMat& m, Eigen::Index x) {
  const Eigen::Index n = m.rows();
  std::vector<bool> out(static_cast<std::size_t>(n), false);
  out[static_cast<std::size_t>(x)] = true;
  for (Eigen::Index z = 0; z < n; ++z) {
    if (!m(x, z)) continue;
    out[static_cast<std::size_t>(z)] = true;
    for (Eigen::Index y = 0; y < n; ++y)
      if (m(z, y)) out[static_cast<std::size_t>(y)] = true;
  }
  return out;
}

MaskMat partition_mask(std::mt19937_64& rng, Eigen::Index n, int classes) {
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::vector<int> label(static_cast<std::size_t>(n));
  for (int& l : label) l = pick(rng);
  MaskMat m(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) m(x, y) = label[static_cast<std::size_t>(x)] == label[static_cast<std::size_t>(y)];
  return m;
}

/// Perturbs C_y for every y and reports whether any C'_x moved although
/// `may_depend(x, y)` is false.
bool isolation_holds(const Mat<double>& c, const MaskMat& row, const MaskMat& col, const Mat<double>& v,
                     const SgclParams<double>& params, std::mt19937_64& rng,
                     const std::function<bool(Eigen::Index, Eigen::Index)>& may_depend, int& checked) {
  std::normal_distribution<double> g(0.0, 1.0);
  const Mat<double> base = enhance_cells(c, row, col, v, params);
  for (Eigen::Index y = 0; y < c.rows(); ++y) {
    Mat<double> moved = c;
    for (Eigen::Index k = 0; k < c.cols(); ++k) moved(y, k) += g(rng);
    const Mat<double> out = enhance_cells(moved, row, col, v, params);
    for (Eigen::Index x = 0; x < c.rows(); ++x) {
      if (may_depend(x, y)) continue;
      ++checked;
      if (out.row(x) != base.row(x)) return false;
    }
  }
  return true;
}

SynthConfig toy_synth() {
  SynthConfig s;
  s.min_rows = 2;
  s.max_rows = 4;
  s.min_cols = 2;
  s.max_cols = 4;
  s.span_probability = 0.4;
  s.max_span_fraction = 0.5;
  s.max_span = 2;
  s.with_grids = false;
  return s;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  if (!std::isfinite(analytic) || !std::isfinite(numeric))
    throw Error("non-finite value in gradient check: analytic=" + fmt("%g", analytic) + " numeric=" + fmt("%g", numeric));
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

double central_difference(const ScalarFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h) {
  const double hi = f(x + h * v), lo = f(x - h * v);
  if (!std::isfinite(hi) || !std::isfinite(lo)) throw Error("non-finite function value in finite difference");
  return (hi - lo) / (2.0 * h);
}

GradCheck grad_check(const ScalarFn& f, double analytic, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                     double h) {
  GradCheck r;
  r.analytic = analytic;
  r.numeric = central_difference(f, x, v, h);
  r.rel_error = relative_error(r.analytic, r.numeric);
  return r;
}

bool locally_smooth(const ScalarFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h) {
  const double a = central_difference(f, x, v, h);
  const double b = central_difference(f, x, v, h / 2);
  return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b)) + 1e-9;
}

PipelinePoint pack(const SgclParams<double>& params, const Mat<double>& token_logits) {
  PipelinePoint p;
  p.config = params.config;
  const Eigen::VectorXd flat = flatten(params);
  p.param_count = flat.size();
  p.x.resize(flat.size() + token_logits.size());
  p.x << flat, token_logits.reshaped();
  return p;
}

double pipeline_loss(const ToyInstance& inst, const PipelinePoint& at, const Eigen::VectorXd& x, const LossWeights& w) {
  return pipeline_loss_t<double>(inst, inst.inputs, at, x, w);
}

double pipeline_directional(const ToyInstance& inst, const PipelinePoint& at, const Eigen::VectorXd& v,
                            const LossWeights& w) {
  Vec<Dual> xd(at.x.size());
  for (Eigen::Index i = 0; i < xd.size(); ++i) xd(i) = Dual(at.x(i), Eigen::Matrix<double, 1, 1>(v(i)));
  const Dual loss = pipeline_loss_t<Dual>(inst, cast_inputs<Dual>(inst.inputs), at, xd, w);
  return loss.derivatives().size() ? loss.derivatives()(0) : 0.0;
}

const char* to_string(Term t) {
  switch (t) {
    case Term::kCe: return "ce";
    case Term::kBox: return "box";
    case Term::kIou: return "iou";
    case Term::kMask: return "mask";
    case Term::kStructure: return "structure";
    case Term::kTotal: return "total";
  }
  return "unknown";
}

TermCheck check_term(Term term, const Prediction<double>& pred, const Targets& gt, std::mt19937_64& rng, double h) {
  ScalarFn f;
  Eigen::VectorXd x, grad;
  switch (term) {
    case Term::kCe:
      x = pred.token_logits.reshaped();
      f = [&](const Eigen::VectorXd& p) {
        return ce_term<double>(p.reshaped(pred.token_logits.rows(), pred.token_logits.cols()), gt.tokens);
      };
      grad = ce_term_grad(pred.token_logits, gt.tokens).reshaped();
      break;
    case Term::kBox:
      x = to_vector(flatten_boxes(pred.boxes));
      f = [&](const Eigen::VectorXd& p) { return box_term<double>(boxes_from(p), gt.boxes); };
      grad = box_grad_vector(box_term_grad(pred.boxes, gt.boxes));
      break;
    case Term::kIou:
      x = to_vector(flatten_boxes(pred.boxes));
      f = [&](const Eigen::VectorXd& p) { return iou_term<double>(boxes_from(p), gt.boxes); };
      grad = box_grad_vector(iou_term_grad(pred.boxes, gt.boxes));
      break;
    case Term::kMask:
      x = pred.mask_logits.reshaped();
      f = [&](const Eigen::VectorXd& p) {
        return mask_term<double>(p.reshaped(pred.mask_logits.rows(), pred.mask_logits.cols()), gt.masks);
      };
      grad = mask_term_grad(pred.mask_logits, gt.masks).reshaped();
      break;
    case Term::kStructure: {
      const Eigen::Index n = pred.row_logits.rows();
      x.resize(2 * n * n);
      x << pred.row_logits.reshaped(), pred.col_logits.reshaped();
      f = [&, n](const Eigen::VectorXd& p) {
        return structure_term<double>(p.head(n * n).reshaped(n, n), p.tail(n * n).reshaped(n, n), gt.adjacency);
      };
      const auto [gr, gc] = structure_term_grad(pred.row_logits, pred.col_logits, gt.adjacency);
      grad.resize(2 * n * n);
      grad << gr.reshaped(), gc.reshaped();
      break;
    }
    case Term::kTotal: {
      const LossWeights w;
      x = prediction_vector(pred);
      f = [&](const Eigen::VectorXd& p) { return loss_total(prediction_from(pred, p), gt, w); };
      const auto [gr, gc] = structure_term_grad(pred.row_logits, pred.col_logits, gt.adjacency);
      const Eigen::VectorXd boxes =
          w.box * box_grad_vector(box_term_grad(pred.boxes, gt.boxes)) + w.iou * box_grad_vector(iou_term_grad(pred.boxes, gt.boxes));
      grad.resize(x.size());
      grad << w.ce * ce_term_grad(pred.token_logits, gt.tokens).reshaped(), boxes,
          w.mask * mask_term_grad(pred.mask_logits, gt.masks).reshaped(), w.structure * gr.reshaped(),
          w.structure * gc.reshaped();
      break;
    }
  }
  const Eigen::VectorXd v = random_direction(rng, x.size());
  TermCheck out;
  out.term = term;
  out.smooth = locally_smooth(f, x, v, h);
  out.result = grad_check(f, grad.dot(v), x, v, h);
  return out;
}

std::vector<CheckLine> gradient_checks(const ToyInstance& inst, const SuiteOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const SgclConfig& cfg = inst.config;
  const int max_tries = opts.points * 20;
  std::vector<CheckLine> lines;

  const Term terms[] = {Term::kBox, Term::kIou, Term::kMask, Term::kStructure, Term::kCe, Term::kTotal};
  for (Term term : terms) {
    Tally t;
    while (t.smooth < opts.points && t.tried < max_tries) {
      ++t.tried;
      const auto params = random_params(cfg, rng);
      const auto out = forward(inst.inputs, params);
      const auto pred = make_prediction(out, inst.token_logits);
      const TermCheck c = check_term(term, pred, inst.targets, rng, opts.fd_step);
      if (c.smooth) t.add(c.result.rel_error);
    }
    lines.push_back(t.line(std::string("grad_") + to_string(term), opts.points, opts.tolerance));
  }

  Tally t;
  std::normal_distribution<double> g(0.0, 1.0);
  while (t.smooth < opts.points && t.tried < max_tries) {
    ++t.tried;
    Mat<double> logits = inst.token_logits;
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.reshaped()(i) += g(rng);
    const PipelinePoint at = pack(random_params(cfg, rng), logits);
    const Eigen::VectorXd v = random_direction(rng, at.x.size());
    const ScalarFn f = [&](const Eigen::VectorXd& x) { return pipeline_loss(inst, at, x); };
    if (!locally_smooth(f, at.x, v, opts.fd_step)) continue;
    t.add(grad_check(f, pipeline_directional(inst, at, v), at.x, v, opts.fd_step).rel_error);
  }
  lines.push_back(t.line("grad_loss_total_params", opts.points, opts.tolerance));
  return lines;
}

std::vector<CheckLine> invariant_checks(const SuiteOptions& opts) {
  std::mt19937_64 rng(opts.seed ^ 0x5eedull);
  const SgclConfig cfg = toy_config();
  std::normal_distribution<double> g(0.0, 1.0);

  int iso_checked = 0, iso2_checked = 0, iso_fail = 0, iso2_fail = 0;
  int perm_fail = 0, zero_fail = 0, adj_fail = 0;
  double perm_worst = 0;

  for (int i = 0; i < opts.instances; ++i) {
    const TableAnnotation layout = synth_table(rng, toy_synth(), "toy" + std::to_string(i));
    const ToyInstance inst = make_toy_instance(layout, cfg, rng);
    SgclParams<double> params = random_params(cfg, rng);
    const auto base = forward(inst.inputs, params);
    const Eigen::Index n = base.cells.rows();

    // Mask isolation, with cross-attention contributions removed.
    SgclParams<double> iso = params;
    zero_cross_outputs(iso);
    const MaskMat prow = partition_mask(rng, n, 2), pcol = partition_mask(rng, n, 3);
    if (!isolation_holds(base.cells, prow, pcol, base.visual, iso, rng,
                         [&](Eigen::Index x, Eigen::Index y) { return prow(x, y) || pcol(x, y); }, iso_checked))
      ++iso_fail;
    const MaskMat& mrow = base.masks.row;
    const MaskMat& mcol = base.masks.col;
    if (!isolation_holds(base.cells, mrow, mcol, base.visual, iso, rng,
                         [&](Eigen::Index x, Eigen::Index y) {
                           return two_hop(mrow, x)[static_cast<std::size_t>(y)] ||
                                  two_hop(mcol, x)[static_cast<std::size_t>(y)];
                         },
                         iso2_checked))
      ++iso2_fail;

    // Permutation equivariance.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const ToyInstance pinst = permute_cells(inst, perm);
    const auto pout = forward(pinst.inputs, params);
    const double loss = loss_total(make_prediction(base, inst.token_logits), inst.targets, LossWeights{});
    const double ploss = loss_total(make_prediction(pout, pinst.token_logits), pinst.targets, LossWeights{});
    double worst = std::abs(loss - ploss) / std::max(1.0, std::abs(loss));
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& a = base.init_boxes[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
      const auto& b = pout.init_boxes[static_cast<std::size_t>(k)];
      const auto& c = base.boxes[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
      const auto& d = pout.boxes[static_cast<std::size_t>(k)];
      for (int j = 0; j < 4; ++j) {
        worst = std::max(worst, std::abs(a.coords()[j] - b.coords()[j]));
        worst = std::max(worst, std::abs(c.coords()[j] - d.coords()[j]));
      }
    }
    perm_worst = std::max(perm_worst, worst);
    if (!(worst <= 1e-9)) ++perm_fail;

    // Zero-update fixed point.
    SgclParams<double> frozen = params;
    for (auto& layer : frozen.refine) {
      layer.delta_w2.setZero();
      layer.delta_b2.setZero();
    }
    const auto fout = forward(inst.inputs, frozen);
    if (fout.final_anchors != fout.init_anchors || fout.boxes != fout.init_boxes) ++zero_fail;

    // Adjacency targets.
    const auto& adj = inst.targets.adjacency;
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y) {
        const auto& a = inst.annotation.cells[static_cast<std::size_t>(x)].logical;
        const auto& b = inst.annotation.cells[static_cast<std::size_t>(y)].logical;
        const bool row = x == y || std::max(a.start_row, b.start_row) <= std::min(a.end_row, b.end_row);
        const bool col = x == y || std::max(a.start_col, b.start_col) <= std::min(a.end_col, b.end_col);
        if (adj.row(x, y) != adj.row(y, x) || adj.col(x, y) != adj.col(y, x) || adj.row(x, y) != row ||
            adj.col(x, y) != col || (x == y && (adj.row(x, x) != 1 || adj.col(x, x) != 1))) {
          ++adj_fail;
          x = n;
          break;
        }
      }
  }

  const std::string inst = "instances=" + std::to_string(opts.instances);
  return {
      {"mask_isolation", iso_fail == 0, inst + " pairs=" + std::to_string(iso_checked) + " failures=" + std::to_string(iso_fail)},
      {"mask_isolation_two_hop", iso2_fail == 0,
       inst + " pairs=" + std::to_string(iso2_checked) + " failures=" + std::to_string(iso2_fail)},
      {"permutation_equivariance", perm_fail == 0,
       inst + " failures=" + std::to_string(perm_fail) + " max_dev=" + fmt("%.3e", perm_worst)},
      {"zero_update_fixed_point", zero_fail == 0, inst + " failures=" + std::to_string(zero_fail)},
      {"adjacency_targets", adj_fail == 0, inst + " failures=" + std::to_string(adj_fail)},
  };
}

CheckLine loss_composition_check() {
  const double total = combine(LossTerms{1.0, 1.0, 1.0, 1.0, 1.0}, LossWeights{});
  return {"loss_composition", total == 1.16, "loss_total=" + fmt("%.15g", total) + " expected=1.16"};
}

CheckLine descent_smoke_check(const ToyInstance& inst, const SgclParams<double>& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const PipelinePoint at = pack(params, inst.token_logits);
  const double before = pipeline_loss(inst, at, at.x);
  Eigen::VectorXd step = Eigen::VectorXd::Zero(at.x.size());
  for (int k = 0; k < 16; ++k) {
    const Eigen::VectorXd v = random_direction(rng, at.x.size());
    step -= pipeline_directional(inst, at, v) * v;
  }
  double after = before;
  double eta = 1.0;
  for (int k = 0; k < 30 && !(after < before); ++k, eta /= 2) after = pipeline_loss(inst, at, at.x + eta * step);
  return {"descent_step", after < before, "before=" + fmt("%.9f", before) + " after=" + fmt("%.9f", after)};
}

}  // namespace tabkit::sgcl
