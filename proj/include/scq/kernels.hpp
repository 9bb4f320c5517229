// Copyright 2026-present the scq-recur project
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

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scq/geometry.hpp"

/*! Data-parallel inner loops.
 *
 *  Every kernel exists twice with identical signatures: `serial::` is the
 *  plain reference used by the tests, `omp::` is the OpenMP version the
 *  library calls. Both must return bit-identical results.
 */
namespace scq::kernels {

//! Signed geometric level of axis coordinate t; see CellKey.
inline int axis_level(double t, double beta, double log1p_alpha, int b) {
  const double a = std::abs(t) / beta;
  if (!(a > 1.0) || b == 0) return 0;
  double j = std::ceil(std::log(a) / log1p_alpha);
  int level = j < 1.0 ? 1 : (j > static_cast<double>(b) ? b : static_cast<int>(j));
  return t < 0 ? -level : level;
}

struct MarginTerms {
  std::vector<double> max_inside;   // max d_W(x,c)^2 over the cluster
  std::vector<double> min_outside;  // min d_W(y,c)^2 over the complement
  std::vector<std::size_t> counts;
};

struct HullSeparation {
  std::vector<std::uint8_t> mask;  // 1 where the query is in the hull
  Eigen::MatrixXd separators;      // rows x m; column j valid where mask[j] == 0
};

struct SpanProjection {
  std::vector<std::uint8_t> in_span;  // residual <= span tolerance
  Eigen::MatrixXd coords;             // r x m, valid where in_span
};

namespace serial {

std::vector<std::uint8_t> ellipsoid_mask(const PointSet& points, std::span<const PointId> ids,
                                         const Ellipsoid& e, double form_tolerance);

//! Row-major |ids| x r level matrix.
std::vector<std::int32_t> cell_levels(const PointSet& points, std::span<const PointId> ids,
                                      const Ellipsoid& e, std::span<const double> beta,
                                      double alpha, int b);

MarginTerms margin_terms(const PointSet& points, std::span<const int> labels,
                         std::span<const ClusterMetric> metrics);

SpanProjection project_to_span(const PointSet& points, std::span<const PointId> ids,
                               const AffineSpan& span);

//! One convex-combination LP per query column.
std::vector<std::uint8_t> hull_mask(const Eigen::MatrixXd& generators,
                                    const Eigen::MatrixXd& queries, double tolerance);

//! hull_mask plus the Farkas direction of every query outside the hull.
HullSeparation hull_separate(const Eigen::MatrixXd& generators, const Eigen::MatrixXd& queries,
                             double tolerance);

std::vector<double> squared_distances(const PointSet& points, std::span<const PointId> ids,
                                      const Eigen::VectorXd& center);

}  // namespace serial

namespace omp {

std::vector<std::uint8_t> ellipsoid_mask(const PointSet& points, std::span<const PointId> ids,
                                         const Ellipsoid& e, double form_tolerance);

std::vector<std::int32_t> cell_levels(const PointSet& points, std::span<const PointId> ids,
                                      const Ellipsoid& e, std::span<const double> beta,
                                      double alpha, int b);

MarginTerms margin_terms(const PointSet& points, std::span<const int> labels,
                         std::span<const ClusterMetric> metrics);

SpanProjection project_to_span(const PointSet& points, std::span<const PointId> ids,
                               const AffineSpan& span);

std::vector<std::uint8_t> hull_mask(const Eigen::MatrixXd& generators,
                                    const Eigen::MatrixXd& queries, double tolerance);

//! hull_mask plus the Farkas direction of every query outside the hull.
HullSeparation hull_separate(const Eigen::MatrixXd& generators, const Eigen::MatrixXd& queries,
                             double tolerance);

std::vector<double> squared_distances(const PointSet& points, std::span<const PointId> ids,
                                      const Eigen::VectorXd& center);

}  // namespace omp

}  // namespace scq::kernels
