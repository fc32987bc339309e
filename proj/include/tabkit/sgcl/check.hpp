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

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include "tabkit/sgcl/toy.hpp"

namespace tabkit::sgcl {

/// Forward-mode dual number carrying one directional derivative.
using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

/// |a - f| / max(|a|, |f|, 1e-8). Throws Error when either value is not finite.
double relative_error(double analytic, double numeric);

/// (f(x + h v) - f(x - h v)) / 2h.
double central_difference(const ScalarFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h);

struct GradCheck {
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
};

/// Compares `analytic` (a directional derivative along v) with the central
/// difference of f at x.
GradCheck grad_check(const ScalarFn& f, double analytic, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                     double h);

/// True when the central differences at step h and h/2 agree, i.e. no kink
/// or jump of f lies within h of x along v.
bool locally_smooth(const ScalarFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h);

/// Full pipeline: parameters and token logits packed into one vector.
struct PipelinePoint {
  SgclConfig config;
  Eigen::Index param_count = 0;
  Eigen::VectorXd x;  // [flatten(params); token_logits column-major]
};

PipelinePoint pack(const SgclParams<double>& params, const Mat<double>& token_logits);

/// loss_total at the packed point.
double pipeline_loss(const ToyInstance& inst, const PipelinePoint& at, const Eigen::VectorXd& x,
                     const LossWeights& w = {});

/// d loss_total / d x along v, by forward-mode differentiation.
double pipeline_directional(const ToyInstance& inst, const PipelinePoint& at, const Eigen::VectorXd& v,
                            const LossWeights& w = {});

// Per-term checks at a point taken from a forward pass: the closed-form
// gradient of the term, contracted with a random direction, against central
// differences. Each returns the relative error; `smooth` is cleared when the
// point is too close to a kink to be usable.

enum class Term { kCe, kBox, kIou, kMask, kStructure, kTotal };
const char* to_string(Term t);

struct TermCheck {
  Term term;
  GradCheck result;
  bool smooth = true;
};

TermCheck check_term(Term term, const Prediction<double>& pred, const Targets& gt, std::mt19937_64& rng, double h);

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteOptions {
  int points = 100;           // smooth points per gradient check
  int instances = 100;        // randomized instances for the invariants
  double tolerance = 1e-4;    // relative error bound for gradients
  double fd_step = 1e-5;
  std::uint64_t seed = 7;
};

/// Gradient checks of every loss term and of loss_total on `inst`, at
/// opts.points random smooth parameter points.
std::vector<CheckLine> gradient_checks(const ToyInstance& inst, const SuiteOptions& opts);

/// Mask isolation, permutation equivariance, zero-update fixed point and
/// adjacency-target properties on opts.instances random instances.
std::vector<CheckLine> invariant_checks(const SuiteOptions& opts);

/// loss_total with every term equal to 1 and default weights.
CheckLine loss_composition_check();

/// One plain gradient step along a random subspace must lower loss_total.
CheckLine descent_smoke_check(const ToyInstance& inst, const SgclParams<double>& params, std::uint64_t seed);

}  // namespace tabkit::sgcl
