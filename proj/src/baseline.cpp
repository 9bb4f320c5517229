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

#include "scq/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "scq/errors.hpp"
#include "scq/kernels.hpp"
#include "scq/rng.hpp"

namespace scq {

std::size_t default_phase1_samples(std::size_t n, int k, double gamma) {
  if (k < 2 || !(gamma > 0)) throw InvalidArgument("default_phase1_samples: need k >= 2, gamma > 0");
  const double kk = static_cast<double>(k);
  const double raw = std::ceil(kk * std::log(kk) / std::pow(gamma, 4));
  const double cap = std::min(static_cast<double>(n), 10.0 * kk);
  return static_cast<std::size_t>(std::max(1.0, std::min(raw, cap)));
}

RecoveredClustering scq_kmeans(const PointSet& points, int k, double gamma,
                               const BaselineConfig& config, const Oracle& oracle,
                               QueryLedger& ledger, std::span<const int> latent) {
  points.validate();
  if (k < 2) throw InvalidArgument("scq_kmeans: k must be >= 2");
  if (oracle.size() != points.size()) throw InvalidArgument("scq_kmeans: oracle and points disagree on n");
  const std::size_t n = points.size();
  const std::size_t phase1 =
      config.phase1_samples == 0 ? default_phase1_samples(n, k, gamma) : config.phase1_samples;

  const auto start = std::chrono::steady_clock::now();
  RecoveredClustering out;
  out.assignment.assign(n, kUnlabeled);
  std::vector<PointId> residual = all_ids(points);
  std::vector<int> cache(n, kUnlabeled);
  std::vector<PointId> reps;
  Rng rng = make_rng(config.rng_seed, Stream::kBaseline);
  int last = kUnlabeled;

  for (int round = 1; round <= k && !residual.empty(); ++round) {
    std::uniform_int_distribution<std::size_t> pick(0, residual.size() - 1);
    std::vector<std::vector<PointId>> drawn;
    for (std::size_t s = 0; s < phase1; ++s) {
      const PointId id = residual[pick(rng)];
      if (cache[id] == kUnlabeled) {
        const PointId one[1] = {id};
        cache[id] = label_with_representatives(oracle, ledger, one, reps)[0];
      }
      const auto l = static_cast<std::size_t>(cache[id]);
      if (l >= drawn.size()) drawn.resize(l + 1);
      drawn[l].push_back(id);
    }
    std::size_t major = 0;
    for (std::size_t c = 0; c < drawn.size(); ++c) {
      if (drawn[c].size() > drawn[major].size()) major = c;
    }
    if (drawn.empty() || drawn[major].empty()) throw DegenerateSample("scq_kmeans: empty majority sample");

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.dim()));
    for (PointId id : drawn[major]) mu += points.vec(id);
    mu /= static_cast<double>(drawn[major].size());
    const PointId member = drawn[major].front();

    const auto dist = kernels::omp::squared_distances(points, residual, mu);
    std::vector<std::size_t> order(residual.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    // Largest index answering +1, assuming a +1 prefix.
    std::ptrdiff_t lo = -1;
    auto hi = static_cast<std::ptrdiff_t>(order.size());
    while (hi - lo > 1) {
      const std::ptrdiff_t mid = lo + (hi - lo) / 2;
      const PointId probe = residual[order[static_cast<std::size_t>(mid)]];
      if (oracle.scq(ledger, member, probe) == 1) lo = mid;
      else hi = mid;
    }

    const int cid = static_cast<int>(major);
    std::vector<PointId> taken(drawn[major]);
    for (std::ptrdiff_t i = 0; i <= lo; ++i) taken.push_back(residual[order[static_cast<std::size_t>(i)]]);
    std::sort(taken.begin(), taken.end());
    taken.erase(std::unique(taken.begin(), taken.end()), taken.end());
    for (PointId id : taken) out.assignment[id] = cid;
    std::vector<PointId> rest;
    std::set_difference(residual.begin(), residual.end(), taken.begin(), taken.end(),
                        std::back_inserter(rest));
    residual = std::move(rest);
    last = cid;

    if (round == k) {
      for (PointId id : residual) out.assignment[id] = last;
      residual.clear();
    }

    RoundStats st;
    st.round = static_cast<std::size_t>(round);
    st.cluster_local_id = cid;
    st.sample_size = drawn[major].size();
    st.expanded_size = st.sample_size;
    st.recovered = taken.size();
    st.residual = residual.size();
    st.queries_cumulative = ledger.count();
    if (!latent.empty()) st.error_so_far = clustering_error(out.assignment, latent, k);
    st.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rounds.push_back(st);
  }
  return out;
}

}  // namespace scq
