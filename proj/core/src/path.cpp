// Copyright 2026 The nfmppi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nfmppi/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nfmppi/error.hpp"

namespace nfmppi {

namespace {
constexpr int kWindow = 4;
}

LocalPath::LocalPath(std::vector<Eigen::Vector2d> waypoints)
    : points_(std::move(waypoints)) {
  if (points_.size() < 2) {
    throw InvalidArgument("LocalPath: need at least two waypoints");
  }
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!points_[i].allFinite() || !points_[i - 1].allFinite()) {
      throw InvalidArgument("LocalPath: non-finite waypoint");
    }
    const double len = (points_[i] - points_[i - 1]).norm();
    if (!(len > 0.0)) {
      throw InvalidArgument("LocalPath: consecutive waypoints coincide at index " +
                            std::to_string(i));
    }
    cumulative_.push_back(cumulative_.back() + len);
  }
}

Eigen::Vector2d LocalPath::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  auto seg = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
      0, std::min<std::ptrdiff_t>(it - cumulative_.begin() - 1,
                                  num_segments() - 1)));
  const double seg_len = cumulative_[seg + 1] - cumulative_[seg];
  const double u = (s - cumulative_[seg]) / seg_len;
  return points_[seg] + u * (points_[seg + 1] - points_[seg]);
}

double LocalPath::heading_at(double s) const {
  s = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  auto seg = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
      0, std::min<std::ptrdiff_t>(it - cumulative_.begin() - 1,
                                  num_segments() - 1)));
  const Eigen::Vector2d d = points_[seg + 1] - points_[seg];
  return std::atan2(d.y(), d.x());
}

PathProjection LocalPath::project_on_segment(const Eigen::Vector2d& p, int seg,
                                             double* dist2) const {
  const auto i = static_cast<std::size_t>(seg);
  const Eigen::Vector2d a = points_[i];
  const Eigen::Vector2d d = points_[i + 1] - a;
  const double len2 = d.squaredNorm();
  const double u = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  const Eigen::Vector2d closest = a + u * d;
  const Eigen::Vector2d r = p - closest;
  *dist2 = r.squaredNorm();
  const double cross = d.x() * r.y() - d.y() * r.x();
  const double dist = std::sqrt(*dist2);
  PathProjection out;
  out.station = cumulative_[i] + u * std::sqrt(len2);
  out.offset = cross < 0.0 ? -dist : dist;
  out.segment = seg;
  return out;
}

PathProjection LocalPath::project(const Eigen::Vector2d& p) const {
  PathProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < num_segments(); ++s) {
    double d2;
    const PathProjection cand = project_on_segment(p, s, &d2);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = cand;
    }
  }
  return best;
}

PathProjection LocalPath::project_near(const Eigen::Vector2d& p, int hint) const {
  const int last = num_segments() - 1;
  int center = std::clamp(hint, 0, last);
  for (;;) {
    const int lo = std::max(0, center - kWindow);
    const int hi = std::min(last, center + kWindow);
    PathProjection best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int s = lo; s <= hi; ++s) {
      double d2;
      const PathProjection cand = project_on_segment(p, s, &d2);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = cand;
      }
    }
    const bool at_low_edge = best.segment == lo && lo > 0;
    const bool at_high_edge = best.segment == hi && hi < last;
    if (!at_low_edge && !at_high_edge) return best;
    center = best.segment;
  }
}

LocalPath LocalPath::offset_by(double offset) const {
  const std::size_t n = points_.size();
  std::vector<Eigen::Vector2d> out(n);
  auto seg_normal = [&](std::size_t s) {
    const Eigen::Vector2d d = (points_[s + 1] - points_[s]).normalized();
    return Eigen::Vector2d(-d.y(), d.x());
  };
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d nrm;
    if (i == 0) {
      nrm = seg_normal(0);
    } else if (i == n - 1) {
      nrm = seg_normal(n - 2);
    } else {
      nrm = (seg_normal(i - 1) + seg_normal(i)).normalized();
    }
    out[i] = points_[i] + offset * nrm;
  }
  return LocalPath(std::move(out));
}

}  // namespace nfmppi
