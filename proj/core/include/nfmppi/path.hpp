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

#ifndef NFMPPI_PATH_HPP_
#define NFMPPI_PATH_HPP_

#include <vector>

#include <Eigen/Core>

namespace nfmppi {

struct PathProjection {
  double station = 0.0;   // arc length of the closest point [m]
  double offset = 0.0;    // signed lateral offset, positive to the left [m]
  int segment = 0;        // index of the closest segment
};

/// Ordered 2-D polyline with arc-length parameterization.
class LocalPath {
 public:
  LocalPath() = default;
  // Throws InvalidArgument for fewer than two points, repeated consecutive
  // points or non-finite coordinates.
  explicit LocalPath(std::vector<Eigen::Vector2d> waypoints);

  const std::vector<Eigen::Vector2d>& waypoints() const noexcept { return points_; }
  int num_segments() const noexcept { return static_cast<int>(points_.size()) - 1; }
  double length() const noexcept { return cumulative_.back(); }
  double station_of_vertex(int i) const { return cumulative_[static_cast<std::size_t>(i)]; }

  // Point and tangent heading at arc length s (clamped to [0, length]).
  Eigen::Vector2d point_at(double s) const;
  double heading_at(double s) const;

  // Exact projection: scans every segment.
  PathProjection project(const Eigen::Vector2d& p) const;

  // Local search around `hint` segment. Walks towards better segments until
  // the best candidate is interior to the search window; matches project()
  // whenever the nearest segment is reachable by descent from the hint.
  PathProjection project_near(const Eigen::Vector2d& p, int hint) const;

  // Polyline displaced laterally by `offset` (positive left) using averaged
  // vertex normals.
  LocalPath offset_by(double offset) const;

 private:
  PathProjection project_on_segment(const Eigen::Vector2d& p, int seg,
                                    double* dist2) const;

  std::vector<Eigen::Vector2d> points_;
  std::vector<double> cumulative_;
};

}  // namespace nfmppi

#endif  // NFMPPI_PATH_HPP_
