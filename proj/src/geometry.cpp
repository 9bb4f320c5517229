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

#include "scq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scq/errors.hpp"
#include "scq/kernels.hpp"
#include "scq/lp.hpp"

namespace scq {

PointSet::PointSet(std::size_t n, std::size_t d) : n_(n), d_(d), coords_(n * d, 0.0) {}

PointSet::PointSet(std::size_t n, std::size_t d, std::vector<double> coords)
    : n_(n), d_(d), coords_(std::move(coords)) {
  if (coords_.size() != n * d) throw InvalidArgument("PointSet: coordinate count != n*d");
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidArgument("PointSet: no points");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (const auto& row : rows) {
    if (row.size() != d) throw InvalidArgument("PointSet: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return PointSet(rows.size(), d, std::move(flat));
}

void PointSet::validate() const {
  if (n_ == 0 || d_ == 0) throw InvalidArgument("PointSet: need n >= 1 and d >= 1");
  for (double v : coords_) {
    if (!std::isfinite(v)) throw InvalidArgument("PointSet: non-finite coordinate");
  }
}

std::vector<PointId> all_ids(const PointSet& points) {
  std::vector<PointId> ids(points.size());
  std::iota(ids.begin(), ids.end(), PointId{0});
  return ids;
}

PsdMetric::PsdMetric(Eigen::MatrixXd w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols() || w_.rows() == 0) throw InvalidArgument("PsdMetric: not square");
  const double scale = std::max(w_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((w_ - w_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidArgument("PsdMetric: matrix is not symmetric");
  }
  w_ = (0.5 * (w_ + w_.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-9 * std::max(hi, 0.0)) throw PsdViolation("PsdMetric: negative eigenvalue");
}

PsdMetric PsdMetric::identity(std::size_t d) {
  return PsdMetric(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                             static_cast<Eigen::Index>(d)));
}

Eigen::VectorXd AffineSpan::coords(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return basis.transpose() * (x - origin);
}

double AffineSpan::residual(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd diff = x - origin;
  diff -= basis * (basis.transpose() * diff);
  return diff.norm();
}

Eigen::VectorXd Ellipsoid::axis_coords(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return basis.transpose() * (x - center);
}

double Ellipsoid::form(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd diff = x - center;
  Eigen::VectorXd t = basis.transpose() * diff;
  diff -= basis * t;
  if (diff.norm() > span_tolerance) return kInfinity;
  return t.cwiseQuotient(semiaxes).squaredNorm();
}

bool Ellipsoid::contains(const Eigen::Ref<const Eigen::VectorXd>& x,
                         double form_tolerance) const {
  return form(x) <= 1.0 + form_tolerance;
}

// ---------------------------------------------------------------------------
// Spans
// ---------------------------------------------------------------------------

AffineSpan orthonormal_span(const Eigen::MatrixXd& columns) {
  if (columns.cols() == 0) throw InvalidArgument("orthonormal_span: empty subset");
  const Eigen::Index d = columns.rows();
  AffineSpan span;
  span.origin = columns.col(0);
  double max_norm = 0;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    max_norm = std::max(max_norm, columns.col(j).norm());
  }
  span.tolerance = kRankTolerance * std::max(max_norm, std::numeric_limits<double>::min());

  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index j = 1; j < columns.cols() && static_cast<Eigen::Index>(basis.size()) < d; ++j) {
    Eigen::VectorXd v = columns.col(j) - span.origin;
    // Two Gram-Schmidt sweeps keep the basis orthonormal to working precision.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (const auto& u : basis) v -= u.dot(v) * u;
    }
    double norm = v.norm();
    if (norm > span.tolerance) basis.push_back(v / norm);
  }
  span.rank = basis.size();
  span.basis.resize(d, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    span.basis.col(static_cast<Eigen::Index>(i)) = basis[i];
  }
  return span;
}

namespace {

Eigen::MatrixXd gather(const PointSet& points, std::span<const PointId> ids) {
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(points.dim()), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (ids[j] >= points.size()) throw InvalidId("point id out of range");
    cols.col(static_cast<Eigen::Index>(j)) = points.vec(ids[j]);
  }
  return cols;
}

// Weighted Khachiyan / Todd-Yildirim iteration on lifted points q_j = (y_j, 1)
// in R^{r+1}, with away steps and Harman-Pronzato elimination. Returns the
// weights u (over all input columns).
class KhachiyanSolver {
 public:
  KhachiyanSolver(const Eigen::MatrixXd& y, double epsilon, double cap_factor)
      : y_(y), r_(y.rows()), m_(y.cols()), eps_(epsilon) {
    const double lnm = std::log(static_cast<double>(std::max<Eigen::Index>(m_, 2)));
    cap_ = static_cast<std::size_t>(
        std::ceil(cap_factor * static_cast<double>(r_ * r_) * lnm / epsilon));
    q_.resize(r_ + 1, m_);
    q_.topRows(r_) = y_;
    q_.row(r_).setOnes();
    u_ = Eigen::VectorXd::Constant(m_, 1.0 / static_cast<double>(m_));
  }

  std::size_t iterations() const { return iterations_; }

  Eigen::VectorXd solve() {
    active_.resize(static_cast<std::size_t>(m_));
    std::iota(active_.begin(), active_.end(), Eigen::Index{0});
    const double n = static_cast<double>(r_ + 1);
    const double target = 1.0 + (1.0 + eps_) * static_cast<double>(r_);

    for (;;) {
      refresh();
      for (int inner = 0;; ++inner) {
        if (++iterations_ > cap_) {
          throw NonConvergence("mvee: Khachiyan iteration cap exceeded (epsilon too small)");
        }
        Eigen::Index jp = -1, jm = -1;
        double mp = -1, mm = kInfinity;
        for (std::size_t a = 0; a < active_.size(); ++a) {
          Eigen::Index j = active_[a];
          double mj = mval_(static_cast<Eigen::Index>(a));
          if (mj > mp) { mp = mj; jp = static_cast<Eigen::Index>(a); }
          if (u_(j) > 0 && mj < mm) { mm = mj; jm = static_cast<Eigen::Index>(a); }
        }
        if (mp <= target) {
          if (inner == 0) break;  // verified right after a fresh refresh
          inner = -1;
          refresh();
          continue;
        }
        const double eps_plus = mp / n - 1.0;
        const double eps_minus = 1.0 - mm / n;
        Eigen::Index a;
        double tau;
        if (eps_plus >= eps_minus || jm < 0 || mm <= 1.0) {
          a = jp;
          tau = (mp - n) / (n * (mp - 1.0));
        } else {
          a = jm;
          const double uj = u_(active_[static_cast<std::size_t>(a)]);
          tau = -std::min((n - mm) / (n * (mm - 1.0)), uj / (1.0 - uj));
        }
        step(a, tau);
        if (inner % 64 == 63) {
          eliminate();
          refresh();
        }
      }
      // Converged on the active set; check the eliminated points too.
      Eigen::MatrixXd xinv = lifted_inverse();
      double worst = 0;
      for (Eigen::Index j = 0; j < m_; ++j) {
        worst = std::max(worst, q_.col(j).dot(xinv * q_.col(j)));
      }
      if (worst <= target || active_.size() == static_cast<std::size_t>(m_)) break;
      active_.resize(static_cast<std::size_t>(m_));
      std::iota(active_.begin(), active_.end(), Eigen::Index{0});
    }
    return u_;
  }

 private:
  Eigen::MatrixXd lifted_inverse() const {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(r_ + 1, r_ + 1);
    for (Eigen::Index j : active_) {
      if (u_(j) > 0) x.noalias() += u_(j) * q_.col(j) * q_.col(j).transpose();
    }
    return x.ldlt().solve(Eigen::MatrixXd::Identity(r_ + 1, r_ + 1));
  }

  void refresh() {
    double total = 0;
    for (Eigen::Index j : active_) total += u_(j);
    for (Eigen::Index j : active_) u_(j) /= total;
    xinv_ = lifted_inverse();
    mval_.resize(static_cast<Eigen::Index>(active_.size()));
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const auto col = q_.col(active_[a]);
      mval_(static_cast<Eigen::Index>(a)) = col.dot(xinv_ * col);
    }
  }

  // X' = (1 - tau) X + tau q q^T, Sherman-Morrison on X^{-1} and M.
  void step(Eigen::Index a, double tau) {
    const Eigen::Index j = active_[static_cast<std::size_t>(a)];
    const double mj = mval_(a);
    const Eigen::VectorXd w = xinv_ * q_.col(j);
    const double denom = 1.0 - tau + tau * mj;
    const double shrink = 1.0 / (1.0 - tau);
    for (std::size_t b = 0; b < active_.size(); ++b) {
      const double g = q_.col(active_[b]).dot(w);
      auto bi = static_cast<Eigen::Index>(b);
      mval_(bi) = shrink * (mval_(bi) - tau * g * g / denom);
    }
    xinv_ = shrink * (xinv_ - (tau / denom) * w * w.transpose());
    for (Eigen::Index i : active_) u_(i) *= (1.0 - tau);
    u_(j) += tau;
    if (u_(j) < 1e-300) u_(j) = 0;
  }

  // Harman-Pronzato: points whose variance function is below the bound cannot
  // support the optimal ellipsoid.
  void eliminate() {
    const double n = static_cast<double>(r_ + 1);
    const double mp = mval_.maxCoeff();
    const double e = mp / n - 1.0;
    const double bound = n * (1.0 + e / 2.0 - std::sqrt(e * (4.0 + e - 4.0 / n)) / 2.0);
    std::vector<Eigen::Index> keep;
    keep.reserve(active_.size());
    for (std::size_t a = 0; a < active_.size(); ++a) {
      if (mval_(static_cast<Eigen::Index>(a)) >= bound) {
        keep.push_back(active_[a]);
      } else {
        u_(active_[a]) = 0;
      }
    }
    if (keep.size() > static_cast<std::size_t>(r_)) active_ = std::move(keep);
  }

  const Eigen::MatrixXd& y_;
  Eigen::Index r_;
  Eigen::Index m_;
  double eps_;
  std::size_t cap_ = 0;
  std::size_t iterations_ = 0;
  Eigen::MatrixXd q_;
  Eigen::VectorXd u_;
  Eigen::MatrixXd xinv_;
  Eigen::VectorXd mval_;
  std::vector<Eigen::Index> active_;
};

}  // namespace

AffineSpan orthonormal_span(const PointSet& points, std::span<const PointId> ids) {
  return orthonormal_span(gather(points, ids));
}

MveeResult mvee(const Eigen::MatrixXd& columns, const MveeOptions& options) {
  if (!(options.epsilon > 0)) throw InvalidArgument("mvee: epsilon must be positive");
  AffineSpan span = orthonormal_span(columns);
  MveeResult out;
  out.certificate.epsilon = options.epsilon;
  out.ellipsoid.span_tolerance = span.tolerance;
  const Eigen::Index d = columns.rows();
  const auto r = static_cast<Eigen::Index>(span.rank);
  if (r == 0) {
    out.ellipsoid.center = span.origin;
    out.ellipsoid.basis.resize(d, 0);
    out.ellipsoid.semiaxes.resize(0);
    return out;
  }

  // Coordinates in the span, re-centred at their mean for conditioning.
  Eigen::MatrixXd y = span.basis.transpose() * (columns.colwise() - span.origin);
  const Eigen::VectorXd mean = y.rowwise().mean();
  y.colwise() -= mean;

  KhachiyanSolver solver(y, options.epsilon, options.iteration_cap_factor);
  const Eigen::VectorXd u = solver.solve();

  const Eigen::VectorXd c = y * u;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    if (u(j) > 0) {
      Eigen::VectorXd v = y.col(j) - c;
      sigma.noalias() += u(j) * v * v.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const Eigen::VectorXd sig = eig.eigenvalues();
  const Eigen::MatrixXd vecs = eig.eigenvectors();

  double dmax = 0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    Eigen::VectorXd t = vecs.transpose() * (y.col(j) - c);
    dmax = std::max(dmax, t.cwiseQuotient(sig).dot(t));
  }

  // Descending semiaxes.
  Eigen::MatrixXd axes(r, r);
  Eigen::VectorXd lengths(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    axes.col(i) = vecs.col(r - 1 - i);
    lengths(i) = std::sqrt(dmax * sig(r - 1 - i));
  }
  out.ellipsoid.center = span.origin + span.basis * (mean + c);
  out.ellipsoid.basis = span.basis * axes;
  out.ellipsoid.semiaxes = lengths;
  out.certificate.max_scaled_distance = dmax;
  out.certificate.iterations = solver.iterations();
  return out;
}

MveeResult mvee(const PointSet& points, std::span<const PointId> ids, const MveeOptions& options) {
  if (ids.empty()) throw InvalidArgument("mvee: empty subset");
  return mvee(gather(points, ids), options);
}

double metric_distance(const PsdMetric& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size() || static_cast<std::size_t>(x.size()) != w.dim()) {
    throw InvalidArgument("metric_distance: dimension mismatch");
  }
  const Eigen::VectorXd diff = x - y;
  const double v = diff.dot(w.matrix() * diff);
  if (v < -1e-12) throw PsdViolation("metric_distance: negative quadratic form");
  return std::sqrt(std::max(v, 0.0));
}

bool hull_membership(const Eigen::MatrixXd& generators, const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (generators.cols() == 0) throw InvalidArgument("hull_membership: empty subset");
  return lp::convex_combination(generators, q, kHullTolerance).feasible;
}

bool hull_membership(const PointSet& points, std::span<const PointId> ids,
                     const Eigen::Ref<const Eigen::VectorXd>& q) {
  return hull_membership(gather(points, ids), q);
}

std::vector<double> margin_of_clustering(const PointSet& points, std::span<const int> labels,
                                         std::span<const ClusterMetric> metrics) {
  if (labels.size() != points.size()) throw InvalidArgument("margin_of_clustering: label count");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= metrics.size()) {
      throw InvalidArgument("margin_of_clustering: label without a metric");
    }
  }
  for (const auto& m : metrics) {
    if (m.w.dim() != points.dim() || static_cast<std::size_t>(m.center.size()) != points.dim()) {
      throw InvalidArgument("margin_of_clustering: metric dimension mismatch");
    }
  }
  const kernels::MarginTerms terms = kernels::omp::margin_terms(points, labels, metrics);
  std::vector<double> out(metrics.size());
  for (std::size_t c = 0; c < metrics.size(); ++c) {
    if (terms.counts[c] == 0) throw EmptyCluster("margin_of_clustering: empty cluster");
    out[c] = terms.max_inside[c] == 0 ? kInfinity
                                      : terms.min_outside[c] / terms.max_inside[c] - 1.0;
  }
  return out;
}

bool has_margin(std::span<const double> margins, double gamma) {
  const double slack = 1e-9 * std::max(1.0, std::abs(gamma));
  return std::all_of(margins.begin(), margins.end(),
                     [&](double m) { return m >= gamma - slack; });
}

}  // namespace scq
