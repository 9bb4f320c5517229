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

#include "scq/kernels.hpp"

#include <algorithm>
#include <limits>

#include <omp.h>

#include "scq/errors.hpp"
#include "scq/lp.hpp"

namespace scq::kernels {

namespace {

// Scratch-holding projector onto an affine frame (origin, basis).
class Projector {
 public:
  Projector(const Eigen::VectorXd& origin, const Eigen::MatrixXd& basis, double tolerance)
      : origin_(origin), basis_(basis), tol_(tolerance),
        diff_(origin.size()), t_(basis.cols()) {}

  // Returns false when x is farther than the tolerance from the span.
  bool project(std::span<const double> x) {
    for (Eigen::Index i = 0; i < diff_.size(); ++i) diff_(i) = x[static_cast<std::size_t>(i)] - origin_(i);
    t_.noalias() = basis_.transpose() * diff_;
    diff_.noalias() -= basis_ * t_;
    return diff_.norm() <= tol_;
  }
  const Eigen::VectorXd& coords() const { return t_; }

 private:
  const Eigen::VectorXd& origin_;
  const Eigen::MatrixXd& basis_;
  double tol_;
  Eigen::VectorXd diff_;
  Eigen::VectorXd t_;
};

inline bool inside(Projector& proj, const Ellipsoid& e, std::span<const double> x,
                   double form_tolerance) {
  if (!proj.project(x)) return false;
  const auto& t = proj.coords();
  double form = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    double s = t(i) / e.semiaxes(i);
    form += s * s;
  }
  return form <= 1.0 + form_tolerance;
}

inline double quad(const Eigen::MatrixXd& w, const Eigen::VectorXd& center,
                   std::span<const double> x, Eigen::VectorXd& scratch) {
  for (Eigen::Index i = 0; i < scratch.size(); ++i) scratch(i) = x[static_cast<std::size_t>(i)] - center(i);
  double v = scratch.dot(w * scratch);
  return v > 0 ? v : 0.0;
}

void fold_margin(MarginTerms& acc, const MarginTerms& part) {
  for (std::size_t c = 0; c < acc.counts.size(); ++c) {
    acc.max_inside[c] = std::max(acc.max_inside[c], part.max_inside[c]);
    acc.min_outside[c] = std::min(acc.min_outside[c], part.min_outside[c]);
    acc.counts[c] += part.counts[c];
  }
}

MarginTerms empty_terms(std::size_t k) {
  MarginTerms t;
  t.max_inside.assign(k, 0.0);
  t.min_outside.assign(k, std::numeric_limits<double>::infinity());
  t.counts.assign(k, 0);
  return t;
}

void margin_point(const PointSet& points, std::span<const int> labels,
                  std::span<const ClusterMetric> metrics, std::size_t i, MarginTerms& acc,
                  Eigen::VectorXd& scratch) {
  const auto label = static_cast<std::size_t>(labels[i]);
  acc.counts[label] += 1;
  for (std::size_t c = 0; c < metrics.size(); ++c) {
    double v = quad(metrics[c].w.matrix(), metrics[c].center, points[i], scratch);
    if (c == label) {
      acc.max_inside[c] = std::max(acc.max_inside[c], v);
    } else {
      acc.min_outside[c] = std::min(acc.min_outside[c], v);
    }
  }
}

// Column generation: solve on a growing subset of generators, adding the one
// most violating the subset's separator, until the separator holds for all
// of them or the subset LP becomes feasible. Falls back to the full LP.
lp::ConvexCombination restricted_hull_lp(const Eigen::MatrixXd& generators,
                                         const Eigen::Ref<const Eigen::VectorXd>& q,
                                         double tolerance) {
  const Eigen::Index rows = generators.rows();
  const Eigen::Index m = generators.cols();
  if (m <= 4 * (rows + 1)) return lp::convex_combination(generators, q, tolerance);
  std::vector<Eigen::Index> cols;
  Eigen::Index nearest = 0;
  (generators.colwise() - q).colwise().squaredNorm().minCoeff(&nearest);
  cols.push_back(nearest);
  const Eigen::Index cap = 8 * (rows + 1) + 64;
  Eigen::MatrixXd sub(rows, cap);
  for (Eigen::Index it = 0; it < cap; ++it) {
    const auto used = static_cast<Eigen::Index>(cols.size());
    for (Eigen::Index c = 0; c < used; ++c) sub.col(c) = generators.col(cols[static_cast<std::size_t>(c)]);
    auto res = lp::convex_combination(sub.leftCols(used), q, tolerance);
    if (res.feasible) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
      for (Eigen::Index c = 0; c < used; ++c) w(cols[static_cast<std::size_t>(c)]) += res.weights(c);
      res.weights = std::move(w);
      return res;
    }
    Eigen::Index worst = 0;
    const double lowest = (res.separator.transpose() * generators).minCoeff(&worst);
    if (lowest > res.separator.dot(q)) return res;
    if (std::find(cols.begin(), cols.end(), worst) != cols.end()) break;
    cols.push_back(worst);
  }
  return lp::convex_combination(generators, q, tolerance);
}

bool hull_test(const Eigen::MatrixXd& generators, const Eigen::MatrixXd& queries,
               Eigen::Index j, double tolerance) {
  return restricted_hull_lp(generators, queries.col(j), tolerance).feasible;
}

void separate_one(const Eigen::MatrixXd& generators, const Eigen::MatrixXd& queries,
                  Eigen::Index j, double tolerance, HullSeparation& out) {
  auto res = restricted_hull_lp(generators, queries.col(j), tolerance);
  if (res.feasible) {
    out.mask[static_cast<std::size_t>(j)] = 1;
  } else {
    out.separators.col(j) = res.separator;
  }
}

}  // namespace

namespace serial {

std::vector<std::uint8_t> ellipsoid_mask(const PointSet& points, std::span<const PointId> ids,
                                         const Ellipsoid& e, double form_tolerance) {
  std::vector<std::uint8_t> mask(ids.size(), 0);
  Projector proj(e.center, e.basis, e.span_tolerance);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    mask[i] = inside(proj, e, points[ids[i]], form_tolerance) ? 1 : 0;
  }
  return mask;
}

std::vector<std::int32_t> cell_levels(const PointSet& points, std::span<const PointId> ids,
                                      const Ellipsoid& e, std::span<const double> beta,
                                      double alpha, int b) {
  const std::size_t r = e.rank();
  const double l1a = std::log1p(alpha);
  std::vector<std::int32_t> levels(ids.size() * r, 0);
  Projector proj(e.center, e.basis, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    proj.project(points[ids[i]]);
    for (std::size_t a = 0; a < r; ++a) {
      levels[i * r + a] = axis_level(proj.coords()(static_cast<Eigen::Index>(a)), beta[a], l1a, b);
    }
  }
  return levels;
}

MarginTerms margin_terms(const PointSet& points, std::span<const int> labels,
                         std::span<const ClusterMetric> metrics) {
  MarginTerms acc = empty_terms(metrics.size());
  Eigen::VectorXd scratch(static_cast<Eigen::Index>(points.dim()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    margin_point(points, labels, metrics, i, acc, scratch);
  }
  return acc;
}

SpanProjection project_to_span(const PointSet& points, std::span<const PointId> ids,
                               const AffineSpan& span) {
  SpanProjection out;
  out.in_span.assign(ids.size(), 0);
  out.coords.resize(span.basis.cols(), static_cast<Eigen::Index>(ids.size()));
  Projector proj(span.origin, span.basis, span.tolerance);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.in_span[i] = proj.project(points[ids[i]]) ? 1 : 0;
    out.coords.col(static_cast<Eigen::Index>(i)) = proj.coords();
  }
  return out;
}

std::vector<std::uint8_t> hull_mask(const Eigen::MatrixXd& generators,
                                    const Eigen::MatrixXd& queries, double tolerance) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(queries.cols()), 0);
  for (Eigen::Index j = 0; j < queries.cols(); ++j) {
    mask[static_cast<std::size_t>(j)] = hull_test(generators, queries, j, tolerance) ? 1 : 0;
  }
  return mask;
}

HullSeparation hull_separate(const Eigen::MatrixXd& generators, const Eigen::MatrixXd& queries,
                             double tolerance) {
  HullSeparation out{std::vector<std::uint8_t>(static_cast<std::size_t>(queries.cols()), 0),
                     Eigen::MatrixXd::Zero(queries.rows(), queries.cols())};
  for (Eigen::Index j = 0; j < queries.cols(); ++j) separate_one(generators, queries, j, tolerance, out);
  return out;
}

std::vector<double> squared_distances(const PointSet& points, std::span<const PointId> ids,
                                      const Eigen::VectorXd& center) {
  std::vector<double> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[i] = (points.vec(ids[i]) - center).squaredNorm();
  }
  return out;
}

}  // namespace serial

namespace omp {

std::vector<std::uint8_t> ellipsoid_mask(const PointSet& points, std::span<const PointId> ids,
                                         const Ellipsoid& e, double form_tolerance) {
  std::vector<std::uint8_t> mask(ids.size(), 0);
  const auto n = static_cast<std::int64_t>(ids.size());
#pragma omp parallel
  {
    Projector proj(e.center, e.basis, e.span_tolerance);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      mask[static_cast<std::size_t>(i)] =
          inside(proj, e, points[ids[static_cast<std::size_t>(i)]], form_tolerance) ? 1 : 0;
    }
  }
  return mask;
}

std::vector<std::int32_t> cell_levels(const PointSet& points, std::span<const PointId> ids,
                                      const Ellipsoid& e, std::span<const double> beta,
                                      double alpha, int b) {
  const std::size_t r = e.rank();
  const double l1a = std::log1p(alpha);
  std::vector<std::int32_t> levels(ids.size() * r, 0);
  const auto n = static_cast<std::int64_t>(ids.size());
#pragma omp parallel
  {
    Projector proj(e.center, e.basis, std::numeric_limits<double>::infinity());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      proj.project(points[ids[ui]]);
      for (std::size_t a = 0; a < r; ++a) {
        levels[ui * r + a] = axis_level(proj.coords()(static_cast<Eigen::Index>(a)), beta[a], l1a, b);
      }
    }
  }
  return levels;
}

MarginTerms margin_terms(const PointSet& points, std::span<const int> labels,
                         std::span<const ClusterMetric> metrics) {
  MarginTerms acc = empty_terms(metrics.size());
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel
  {
    MarginTerms part = empty_terms(metrics.size());
    Eigen::VectorXd scratch(static_cast<Eigen::Index>(points.dim()));
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      margin_point(points, labels, metrics, static_cast<std::size_t>(i), part, scratch);
    }
#pragma omp critical
    fold_margin(acc, part);
  }
  return acc;
}

SpanProjection project_to_span(const PointSet& points, std::span<const PointId> ids,
                               const AffineSpan& span) {
  SpanProjection out;
  out.in_span.assign(ids.size(), 0);
  out.coords.resize(span.basis.cols(), static_cast<Eigen::Index>(ids.size()));
  const auto n = static_cast<std::int64_t>(ids.size());
#pragma omp parallel
  {
    Projector proj(span.origin, span.basis, span.tolerance);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      out.in_span[ui] = proj.project(points[ids[ui]]) ? 1 : 0;
      out.coords.col(static_cast<Eigen::Index>(i)) = proj.coords();
    }
  }
  return out;
}

std::vector<std::uint8_t> hull_mask(const Eigen::MatrixXd& generators,
                                    const Eigen::MatrixXd& queries, double tolerance) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(queries.cols()), 0);
  const auto n = static_cast<std::int64_t>(queries.cols());
  // An LpFailure inside the region is rethrown after the join.
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t j = 0; j < n; ++j) {
    try {
      mask[static_cast<std::size_t>(j)] = hull_test(generators, queries, j, tolerance) ? 1 : 0;
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw LpFailure("hull_mask: feasibility LP did not terminate");
  return mask;
}

HullSeparation hull_separate(const Eigen::MatrixXd& generators, const Eigen::MatrixXd& queries,
                             double tolerance) {
  HullSeparation out{std::vector<std::uint8_t>(static_cast<std::size_t>(queries.cols()), 0),
                     Eigen::MatrixXd::Zero(queries.rows(), queries.cols())};
  const auto n = static_cast<std::int64_t>(queries.cols());
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t j = 0; j < n; ++j) {
    try {
      separate_one(generators, queries, j, tolerance, out);
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw LpFailure("hull_separate: feasibility LP did not terminate");
  return out;
}

std::vector<double> squared_distances(const PointSet& points, std::span<const PointId> ids,
                                      const Eigen::VectorXd& center) {
  std::vector<double> out(ids.size());
  const auto n = static_cast<std::int64_t>(ids.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = (points.vec(ids[static_cast<std::size_t>(i)]) - center).squaredNorm();
  }
  return out;
}

}  // namespace omp

}  // namespace scq::kernels
