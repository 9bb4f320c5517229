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
#include <span>

#include "scq/oracle.hpp"
#include "scq/recur.hpp"

namespace scq {

struct BaselineConfig {
  std::size_t phase1_samples = 0;  // 0: default_phase1_samples
  std::uint64_t rng_seed = 0;
};

//! min(n, ceil(k ln k / gamma^4)), capped at 10 k.
std::size_t default_phase1_samples(std::size_t n, int k, double gamma);

/*! SCQ-k-means: k rounds of centroid estimation followed by a binary search
 *  for the cluster radius along the Euclidean order around the estimate.
 *
 *  Each round emits one RoundStats row. Points left after k rounds go to the
 *  last round's cluster. `latent`, when given, fills error_so_far.
 */
RecoveredClustering scq_kmeans(const PointSet& points, int k, double gamma,
                               const BaselineConfig& config, const Oracle& oracle,
                               QueryLedger& ledger, std::span<const int> latent = {});

}  // namespace scq
