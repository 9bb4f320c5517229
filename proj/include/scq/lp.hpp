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

#include <Eigen/Dense>

namespace scq::lp {

/*! Outcome of the convex-combination feasibility problem
 *
 *    sum_j a_j g_j = q,  sum_j a_j = 1,  a >= 0.
 *
 *  When infeasible, `separator` is a direction h with h.g_j > h.q for every
 *  generator (a Farkas certificate read off the phase-1 duals).
 */
struct ConvexCombination {
  bool feasible = false;
  double infeasibility = 0;  // phase-1 optimum, in units of the generator spread
  Eigen::VectorXd weights;   // valid when feasible
  Eigen::VectorXd separator;
  int pivots = 0;
};

/*! Phase-1 dense simplex on the (rows+1) x m tableau.
 *
 *  Generators are the columns of `generators`. Throws LpFailure when the pivot
 *  cap is hit.
 */
ConvexCombination convex_combination(const Eigen::Ref<const Eigen::MatrixXd>& generators,
                                     const Eigen::Ref<const Eigen::VectorXd>& q,
                                     double tolerance = 1e-8);

}  // namespace scq::lp
