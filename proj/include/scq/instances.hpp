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
#include <iosfwd>
#include <string>

#include "scq/oracle.hpp"

namespace scq {

/*! k equal clusters (remainder to the last), each uniform in the unit ball of
 *  its own metric W = Q^T diag(lambda) Q with lambda log-spaced in [1, kappa].
 *
 *  Centers sit on random vertices of an integer lattice whose scale doubles
 *  from 1/sqrt(kappa) until every verified margin is >= gamma.
 *  Throws GenerationFailure after 20 doublings.
 */
LatentInstance gen_ellipsoidal(std::size_t n, int k, std::size_t d, double gamma, double kappa,
                               std::uint64_t seed);

/*! Two clusters in the plane sharing W = diag(1/4, 1): C1 at (+-1, 0), C2 at
 *  (0, sqrt(1+gamma)/2). C1's margin is exactly gamma.
 *
 *  perturb > 0 jitters every point uniformly in a disc of that radius; the
 *  declared gamma then becomes the smallest verified margin.
 */
LatentInstance gen_adversarial_kmeans(std::size_t n, double p, double gamma, std::uint64_t seed,
                                      double perturb = 0.0);

struct HiddenInstance {
  LatentInstance instance;
  PointId hidden = 0;  // id of the outlier point
};

/*! Greedy packing Z on the positive orthant of the unit sphere at pairwise
 *  distance >= sqrt(8 gamma / (1 + gamma)); X = {+-sqrt(z)}.
 *
 *  Labels: 0 for the bulk, 1 for -sqrt(z*), 2 for +sqrt(z*) (the hidden point).
 *  Throws PackingTooSmall below 2 packed points.
 */
HiddenInstance gen_lb_sphere(std::size_t d, double gamma, std::uint64_t seed);

/*! n random 0/1 vectors with P(1) = 1/(2(1+gamma)); the last one is the hidden
 *  singleton and W = diag(x*) for the rest. Rejection-sampled until the points
 *  are distinct and both margins hold; the retry count lands in provenance.
 */
HiddenInstance gen_lb_hypercube(std::size_t d, double gamma, std::size_t n, std::uint64_t seed);

//! Canonical JSON; re-serializing a loaded instance is byte-identical.
std::string instance_to_json(const LatentInstance& instance);
//! Throws ParseError on malformed input and MarginMismatch when the stored
//! margins disagree with the recomputed ones.
LatentInstance instance_from_json(const std::string& text);

void save_instance(const LatentInstance& instance, const std::string& path);
LatentInstance load_instance(const std::string& path);

}  // namespace scq
