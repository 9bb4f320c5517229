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

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "scq/geometry.hpp"
#include "scq/oracle.hpp"
#include "scq/tessellation.hpp"

namespace scq {

struct SamplingMode {
  enum class Kind { kQuota, kBatch };
  Kind kind = Kind::kQuota;
  double b_const = 1.0;  // quota: ceil(b_const d^2 ln k) draws of one cluster
  std::size_t m = 0;     // batch: draws per round; 0 means 10 k

  static SamplingMode quota(double b_const = 1.0) { return {Kind::kQuota, b_const, 0}; }
  static SamplingMode batch(std::size_t m = 0) { return {Kind::kBatch, 1.0, m}; }
};

/*! How far each greedy hull expansion pass scales conv(S) about its centroid.
 *
 *  kTessellation: alpha = tess_alpha(r, gamma, 1 + mvee_epsilon).
 *  kMarginSafe: alpha = 0.99 (sqrt(1 + gamma_eff) - 1) / 2, independent of r.
 *  Both keep every absorbed point inside the cluster when gamma is at most the
 *  true margin: a scaled hull point is within (1 + 2 alpha) of the cluster's
 *  radius in its metric.
 */
struct HullExpansionOptions {
  enum class Factor { kTessellation, kMarginSafe };
  double mvee_epsilon = 1e-3;
  Factor factor = Factor::kTessellation;
};

inline constexpr double kMarginSafeShrink = 0.99;

struct RecurConfig {
  double epsilon = 0;  // stop once at most epsilon n points are unlabeled
  SamplingMode sampling;
  bool use_hull_expansion = false;
  HullExpansionOptions::Factor expansion_factor = HullExpansionOptions::Factor::kTessellation;
  double mvee_epsilon = 1e-3;
  std::uint64_t rng_seed = 0;
  bool infer_sample_cells = true;
};

inline constexpr int kUnlabeled = -1;

struct RoundStats {
  std::size_t round = 0;  // 1-based
  int cluster_local_id = 0;
  std::size_t sample_size = 0;    // distinct ids drawn for the chosen cluster
  std::size_t expanded_size = 0;  // after hull expansion (= sample_size when off)
  std::size_t recovered = 0;
  std::size_t residual = 0;  // after removal
  std::uint64_t queries_cumulative = 0;
  double error_so_far = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0;
};

struct RecoveredClustering {
  std::vector<int> assignment;  // local cluster id or kUnlabeled
  std::vector<RoundStats> rounds;

  std::size_t unlabeled() const;
};

/*! Optional instrumentation. Nothing here affects the algorithm.
 */
struct RecurHooks {
  //! Latent labels; when set, RoundStats::error_so_far is filled.
  std::span<const int> latent;
  //! Called after each round with the round's trace and the points it labelled.
  std::function<void(const RoundStats&, const TessellationTrace&, std::span<const PointId>,
                     std::span<const int>)>
      on_round;
};

/*! Exact recovery by repeated sampling, rounding and tessellation.
 *
 *  Throws InvalidArgument on bad inputs and QuotaStall when 10 k quota draws
 *  in a row fail to fill any cluster's quota.
 */
RecoveredClustering recur(const PointSet& points, int k, double gamma, const RecurConfig& config,
                          const Oracle& oracle, QueryLedger& ledger, const RecurHooks& hooks = {});

struct HullExpansionStats {
  double alpha = 0;
  std::size_t vertices = 0;  // generators the LPs ended up using
  std::size_t passes = 0;
  std::size_t lps = 0;
  std::size_t absorbed = 0;
};

/*! Grows `sample` by absorbing residual points inside its convex hull scaled by
 *  (1 + alpha) about the centroid, until a pass adds nothing. No queries.
 *
 *  Returns ascending ids, a superset of `sample`.
 */
std::vector<PointId> greedy_hull_expansion(const PointSet& points,
                                           std::span<const PointId> residual,
                                           std::span<const PointId> sample, double gamma,
                                           const HullExpansionOptions& options = {},
                                           HullExpansionStats* stats = nullptr);

double hull_expansion_alpha(std::size_t rank, double gamma, const HullExpansionOptions& options);

/*! Minimum-cost perfect matching of a square cost matrix (row-major, size
 *  m x m). Returns col[i] for each row i.
 */
std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t m);

/*! Fraction of points outside the best bijection between output and latent
 *  clusters. kUnlabeled entries always count as mismatches.
 */
double clustering_error(std::span<const int> assignment, std::span<const int> labels, int k);

}  // namespace scq
