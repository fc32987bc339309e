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

#include "tabkit/geometry.hpp"

#include <algorithm>

namespace tabkit {

std::array<double, 4> l1_box_loss_grad(const BBox& pred, const BBox& gt) {
  auto sgn = [](double d) { return d > 0 ? 0.25 : (d < 0 ? -0.25 : 0.0); };
  return {sgn(pred.x1 - gt.x1), sgn(pred.y1 - gt.y1), sgn(pred.x2 - gt.x2), sgn(pred.y2 - gt.y2)};
}

// loss = 2 - I/U - U/E, differentiated branch by branch; branches follow
// smin/smax in giou_loss.
std::array<double, 4> giou_loss_grad(const BBox& p, const BBox& g) {
  const double iw = std::min(p.x2, g.x2) - std::max(p.x1, g.x1);
  const double ih = std::min(p.y2, g.y2) - std::max(p.y1, g.y1);
  const bool overlap = iw > 0 && ih > 0;
  const double inter = overlap ? iw * ih : 0.0;
  const double pw = p.x2 - p.x1, ph = p.y2 - p.y1;
  const double uni = pw * ph + g.area() - inter;
  const double ew = std::max(p.x2, g.x2) - std::min(p.x1, g.x1);
  const double eh = std::max(p.y2, g.y2) - std::min(p.y1, g.y1);
  const double enc = ew * eh;
  if (!(enc > 0)) return {0, 0, 0, 0};

  // d(inter), d(area_p), d(enclose) with respect to x1, y1, x2, y2
  std::array<double, 4> d_inter{0, 0, 0, 0};
  if (overlap) {
    d_inter[0] = (p.x1 < g.x1) ? 0.0 : -ih;
    d_inter[2] = (g.x2 < p.x2) ? 0.0 : ih;
    d_inter[1] = (p.y1 < g.y1) ? 0.0 : -iw;
    d_inter[3] = (g.y2 < p.y2) ? 0.0 : iw;
  }
  const std::array<double, 4> d_area{-ph, -pw, ph, pw};
  std::array<double, 4> d_enc{0, 0, 0, 0};
  d_enc[0] = (g.x1 < p.x1) ? 0.0 : -eh;
  d_enc[2] = (p.x2 < g.x2) ? 0.0 : eh;
  d_enc[1] = (g.y1 < p.y1) ? 0.0 : -ew;
  d_enc[3] = (p.y2 < g.y2) ? 0.0 : ew;

  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) {
    const double d_uni = d_area[k] - d_inter[k];
    double d = -(d_uni * enc - uni * d_enc[k]) / (enc * enc);
    if (uni > 0) d -= (d_inter[k] * uni - inter * d_uni) / (uni * uni);
    out[k] = d;
  }
  return out;
}

int discretize(double v, const DiscretizationConfig& cfg) {
  const double scaled = std::floor(v * cfg.bins);
  return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(cfg.bins - 1)));
}

double undiscretize(int k, const DiscretizationConfig& cfg) { return (k + 0.5) / cfg.bins; }

DiscreteBox discretize(const BBox& b, const DiscretizationConfig& cfg) {
  return {discretize(b.x1, cfg), discretize(b.y1, cfg), discretize(b.x2, cfg), discretize(b.y2, cfg)};
}

BBox undiscretize(const DiscreteBox& b, const DiscretizationConfig& cfg) {
  return {undiscretize(b[0], cfg), undiscretize(b[1], cfg), undiscretize(b[2], cfg), undiscretize(b[3], cfg)};
}

}  // namespace tabkit
