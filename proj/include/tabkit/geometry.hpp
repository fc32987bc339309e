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

#include <array>
#include <cmath>

namespace tabkit {

template <typename Scalar>
inline Scalar smin(const Scalar& a, const Scalar& b) {
  return b < a ? b : a;
}

template <typename Scalar>
inline Scalar smax(const Scalar& a, const Scalar& b) {
  return a < b ? b : a;
}

template <typename Scalar>
inline Scalar clamp01(const Scalar& v) {
  return smin(smax(v, Scalar(0)), Scalar(1));
}

/// Axis-aligned rectangle in corner form, normalized to the image size.
template <typename Scalar>
struct BoxT {
  Scalar x1{0}, y1{0}, x2{0}, y2{0};

  Scalar width() const { return x2 - x1; }
  Scalar height() const { return y2 - y1; }
  Scalar area() const { return width() * height(); }
  Scalar cx() const { return (x1 + x2) / Scalar(2); }
  Scalar cy() const { return (y1 + y2) / Scalar(2); }

  std::array<Scalar, 4> coords() const { return {x1, y1, x2, y2}; }

  friend bool operator==(const BoxT&, const BoxT&) = default;
};

using BBox = BoxT<double>;

/// x1 <= x2, y1 <= y2, every coordinate in [0,1].
inline bool is_valid(const BBox& b) {
  auto in01 = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  return in01(b.x1) && in01(b.y1) && in01(b.x2) && in01(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

inline BBox bbox_union(const BBox& a, const BBox& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

template <typename Scalar>
Scalar intersection_area(const BoxT<Scalar>& a, const BoxT<Scalar>& b) {
  const Scalar w = smax(Scalar(0), Scalar(smin(a.x2, b.x2) - smax(a.x1, b.x1)));
  const Scalar h = smax(Scalar(0), Scalar(smin(a.y2, b.y2) - smax(a.y1, b.y1)));
  return w * h;
}

/// Intersection over union; 0 when the union has zero area.
template <typename Scalar>
Scalar iou(const BoxT<Scalar>& a, const BoxT<Scalar>& b) {
  const Scalar inter = intersection_area(a, b);
  const Scalar uni = a.area() + b.area() - inter;
  if (!(Scalar(0) < uni)) return Scalar(0);
  return inter / uni;
}

/// 1 - GIoU. Range [0, 2]; 0 for identical positive-area boxes.
template <typename Scalar>
Scalar giou_loss(const BoxT<Scalar>& pred, const BoxT<Scalar>& gt) {
  const Scalar inter = intersection_area(pred, gt);
  const Scalar uni = pred.area() + gt.area() - inter;
  const Scalar enclose = Scalar(smax(pred.x2, gt.x2) - smin(pred.x1, gt.x1)) *
                         Scalar(smax(pred.y2, gt.y2) - smin(pred.y1, gt.y1));
  if (!(Scalar(0) < enclose)) return Scalar(0);  // both boxes collapse to one point
  const Scalar iou_term = (Scalar(0) < uni) ? inter / uni : Scalar(0);
  const Scalar giou = iou_term - (enclose - uni) / enclose;
  return Scalar(1) - giou;
}

/// Mean absolute difference over the four corner coordinates.
template <typename Scalar>
Scalar l1_box_loss(const BoxT<Scalar>& pred, const BoxT<Scalar>& gt) {
  using std::abs;
  return (abs(pred.x1 - gt.x1) + abs(pred.y1 - gt.y1) + abs(pred.x2 - gt.x2) + abs(pred.y2 - gt.y2)) /
         Scalar(4);
}

/// Gradients of the box losses with respect to the predicted corners, in
/// (x1, y1, x2, y2) order.
std::array<double, 4> l1_box_loss_grad(const BBox& pred, const BBox& gt);
std::array<double, 4> giou_loss_grad(const BBox& pred, const BBox& gt);

struct DiscretizationConfig {
  int bins = 1000;
};

using DiscreteBox = std::array<int, 4>;

int discretize(double v, const DiscretizationConfig& cfg);
double undiscretize(int k, const DiscretizationConfig& cfg);
DiscreteBox discretize(const BBox& b, const DiscretizationConfig& cfg);
BBox undiscretize(const DiscreteBox& b, const DiscretizationConfig& cfg);

}  // namespace tabkit
