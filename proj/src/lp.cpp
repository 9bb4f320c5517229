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

#include "scq/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "scq/errors.hpp"

namespace scq::lp {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;
constexpr int kDegenerateSwitch = 50;
constexpr double kRankTol = 1e-10;

ConvexCombination phase_one(const Eigen::Ref<const Eigen::MatrixXd>& generators,
                            const Eigen::Ref<const Eigen::VectorXd>& q, double tolerance) {
  const Eigen::Index m = generators.rows();
  const Eigen::Index n = generators.cols();

  ConvexCombination out;
  if (n == 0) {
    out.infeasibility = std::numeric_limits<double>::infinity();
    out.separator = Eigen::VectorXd::Zero(m);
    return out;
  }

  double scale = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    scale = std::max(scale, (generators.col(j) - q).cwiseAbs().maxCoeff());
  }
  if (scale == 0 || m == 0) {
    out.feasible = true;
    out.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    out.separator = Eigen::VectorXd::Zero(m);
    return out;
  }

  // Rows 0..m-1: (g_j - q)/scale, row m: ones. rhs = e_m. Artificials form
  // the initial basis, so the rhs is already non-negative.
  const Eigen::Index rows = m + 1;
  const Eigen::Index width = n + rows + 1;
  const Eigen::Index rhs = width - 1;
  std::vector<double> t(static_cast<std::size_t>(rows * width), 0.0);
  std::vector<double> obj(static_cast<std::size_t>(width), 0.0);
  auto at = [&](Eigen::Index i, Eigen::Index j) -> double& {
    return t[static_cast<std::size_t>(i * width + j)];
  };

  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) at(i, j) = (generators(i, j) - q(i)) / scale;
  }
  for (Eigen::Index j = 0; j < n; ++j) at(m, j) = 1.0;
  for (Eigen::Index i = 0; i < rows; ++i) at(i, n + i) = 1.0;
  at(m, rhs) = 1.0;

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = n + i;
  for (Eigen::Index j = 0; j < width; ++j) {
    if (j >= n && j < rhs) continue;
    double s = 0;
    for (Eigen::Index i = 0; i < rows; ++i) s += at(i, j);
    obj[static_cast<std::size_t>(j)] = -s;
  }

  const long cap = 20L * static_cast<long>(n + rows) + 1000;
  bool bland = false;
  int degenerate = 0;
  int pivots = 0;
  for (;;) {
    Eigen::Index enter = -1;
    double best = -kCostTol;
    for (Eigen::Index j = 0; j < n; ++j) {
      double c = obj[static_cast<std::size_t>(j)];
      if (c < best) {
        enter = j;
        if (bland) break;
        best = c;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double ratio = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      double a = at(i, enter);
      if (a <= kPivotTol) continue;
      double r = at(i, rhs) / a;
      if (leave < 0 || r < ratio - 1e-15 ||
          (r <= ratio + 1e-15 && basis[static_cast<std::size_t>(i)] <
                                     basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        ratio = r;
      }
    }
    if (leave < 0) throw LpFailure("convex_combination: unbounded phase-1 direction");

    if (ratio <= 1e-14) {
      if (++degenerate > kDegenerateSwitch) bland = true;
    } else {
      degenerate = 0;
    }

    const double p = at(leave, enter);
    for (Eigen::Index j = 0; j < width; ++j) at(leave, j) /= p;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == leave) continue;
      double f = at(i, enter);
      if (f == 0) continue;
      for (Eigen::Index j = 0; j < width; ++j) at(i, j) -= f * at(leave, j);
    }
    {
      double f = obj[static_cast<std::size_t>(enter)];
      for (Eigen::Index j = 0; j < width; ++j) {
        obj[static_cast<std::size_t>(j)] -= f * at(leave, j);
      }
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    if (++pivots > cap) throw LpFailure("convex_combination: pivot cap exceeded");
  }

  double w = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (basis[static_cast<std::size_t>(i)] >= n) w += std::max(0.0, at(i, rhs));
  }
  out.pivots = pivots;
  out.infeasibility = w;
  out.feasible = w <= tolerance;
  if (out.feasible) {
    out.weights = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < rows; ++i) {
      Eigen::Index b = basis[static_cast<std::size_t>(i)];
      if (b < n) out.weights(b) = std::max(0.0, at(i, rhs));
    }
    out.separator = Eigen::VectorXd::Zero(m);
  } else {
    // y_i = 1 - reduced cost of artificial i; the Farkas vector is -y.
    out.separator.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      out.separator(i) = -(1.0 - obj[static_cast<std::size_t>(n + i)]) / scale;
    }
  }
  return out;
}

}  // namespace

ConvexCombination convex_combination(const Eigen::Ref<const Eigen::MatrixXd>& generators,
                                     const Eigen::Ref<const Eigen::VectorXd>& q,
                                     double tolerance) {
  const Eigen::Index m = generators.rows();
  const Eigen::Index n = generators.cols();
  if (q.size() != m) throw InvalidArgument("convex_combination: dimension mismatch");
  if (n < 2 || m == 0) return phase_one(generators, q, tolerance);

  // Redundant equality rows stall phase 1, so work in the affine span when
  // the generators do not fill the ambient space.
  const Eigen::VectorXd origin = generators.col(0);
  const Eigen::MatrixXd centred = generators.colwise() - origin;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > kRankTol * std::max(sv(0), 1e-300)) ++rank;
  if (rank == m) return phase_one(generators, q, tolerance);

  const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
  const Eigen::VectorXd shifted = q - origin;
  const Eigen::VectorXd coords = basis.transpose() * shifted;
  const Eigen::VectorXd residual = shifted - basis * coords;

  double scale = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    scale = std::max(scale, (generators.col(j) - q).cwiseAbs().maxCoeff());
  }
  const double off = residual.cwiseAbs().maxCoeff();
  if (scale > 0 && off > tolerance * scale) {
    ConvexCombination out;
    out.infeasibility = off / scale;
    out.separator = -residual / scale;
    return out;
  }
  if (rank == 0) return phase_one(Eigen::MatrixXd::Zero(0, n), Eigen::VectorXd::Zero(0), tolerance);

  ConvexCombination out =
      phase_one(basis.transpose() * centred, coords, tolerance);
  out.separator = out.feasible ? Eigen::VectorXd::Zero(m) : Eigen::VectorXd(basis * out.separator);
  return out;
}

}  // namespace scq::lp
