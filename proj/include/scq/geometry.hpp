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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace scq {

using PointId = std::uint32_t;

/*! The input point set X: n points in R^d stored row-major.
 *
 *  Point ids are the row indices 0..n-1.
 */
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t n, std::size_t d);
  PointSet(std::size_t n, std::size_t d, std::vector<double> coords);

  static PointSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<const double> operator[](std::size_t id) const {
    return {coords_.data() + id * d_, d_};
  }
  std::span<double> mutable_point(std::size_t id) {
    return {coords_.data() + id * d_, d_};
  }
  Eigen::Map<const Eigen::VectorXd> vec(std::size_t id) const {
    return Eigen::Map<const Eigen::VectorXd>(coords_.data() + id * d_,
                                             static_cast<Eigen::Index>(d_));
  }
  const std::vector<double>& coords() const { return coords_; }

  //! Throws InvalidArgument unless n >= 1, d >= 1 and all coordinates are
  //! finite.
  void validate() const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> coords_;
};

//! All ids 0..n-1.
std::vector<PointId> all_ids(const PointSet& points);

/*! Symmetric positive semidefinite matrix W inducing d_W(x,y) = |x-y|_W.
 */
class PsdMetric {
 public:
  PsdMetric() = default;
  //! Validates symmetry (relative 1e-9) and numerical PSD-ness
  //! (lambda_min >= -1e-9 lambda_max).
  explicit PsdMetric(Eigen::MatrixXd w);

  static PsdMetric identity(std::size_t d);

  const Eigen::MatrixXd& matrix() const { return w_; }
  std::size_t dim() const { return static_cast<std::size_t>(w_.rows()); }

 private:
  Eigen::MatrixXd w_;
};

//! Per-cluster latent metric and reference point (W, c).
struct ClusterMetric {
  PsdMetric w;
  Eigen::VectorXd center;
};

/*! Affine span of a point subset, expressed as origin + colspace(basis).
 */
struct AffineSpan {
  Eigen::VectorXd origin;
  Eigen::MatrixXd basis;  // d x r, orthonormal columns
  std::size_t rank = 0;
  double tolerance = 0.0;  // residual norm treated as zero

  Eigen::VectorXd coords(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double residual(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/*! Ellipsoid {mu + U t : sum_i (t_i / ell_i)^2 <= 1}, possibly rank-deficient.
 *
 *  Rank 0 is the single point mu.
 */
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd basis;      // d x r, orthonormal columns
  Eigen::VectorXd semiaxes;   // r, sorted descending
  double span_tolerance = 0;  // max distance from the affine span

  std::size_t rank() const { return static_cast<std::size_t>(semiaxes.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(center.size()); }

  //! Coordinates t = U^T (x - mu).
  Eigen::VectorXd axis_coords(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  //! sum_i (t_i / ell_i)^2 for x in the span; +inf when x leaves the span.
  double form(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x,
                double form_tolerance = kMembershipTolerance) const;

  static constexpr double kMembershipTolerance = 1e-7;
};

struct RoundingCertificate {
  double epsilon = 0;
  //! max over the input of (x-mu)^T Sigma^{-1} (x-mu); the ellipsoid is the
  //! level set of this form at exactly this value.
  double max_scaled_distance = 0;
  std::size_t iterations = 0;
};

struct MveeResult {
  Ellipsoid ellipsoid;
  RoundingCertificate certificate;
};

struct MveeOptions {
  double epsilon = 1e-3;
  //! Multiplier of the r^2 ln|S| / eps iteration cap.
  double iteration_cap_factor = 100.0;
};

//! Relative residual tolerance used for rank detection.
inline constexpr double kRankTolerance = 1e-9;
//! Feasibility tolerance of the hull-membership LP.
inline constexpr double kHullTolerance = 1e-8;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

AffineSpan orthonormal_span(const PointSet& points, std::span<const PointId> ids);
AffineSpan orthonormal_span(const Eigen::MatrixXd& columns);

MveeResult mvee(const PointSet& points, std::span<const PointId> ids,
                const MveeOptions& options = {});
//! Same on a d x m matrix of column points.
MveeResult mvee(const Eigen::MatrixXd& columns, const MveeOptions& options = {});

double metric_distance(const PsdMetric& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y);

bool hull_membership(const PointSet& points, std::span<const PointId> ids,
                     const Eigen::Ref<const Eigen::VectorXd>& q);
//! Columns of `generators` are the hull points.
bool hull_membership(const Eigen::MatrixXd& generators,
                     const Eigen::Ref<const Eigen::VectorXd>& q);

/*! Per-cluster margin value min_out d_W^2 / max_in d_W^2 - 1.
 *
 *  +inf when the cluster's inner radius is zero. labels must be in 0..k-1
 *  with metrics.size() == k; throws EmptyCluster for a label with no points.
 */
std::vector<double> margin_of_clustering(const PointSet& points,
                                         std::span<const int> labels,
                                         std::span<const ClusterMetric> metrics);

//! True iff every value is >= gamma up to a 1e-9 relative slack.
bool has_margin(std::span<const double> margins, double gamma);

}  // namespace scq
