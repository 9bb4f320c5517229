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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scq/geometry.hpp"

namespace scq {

//! Where an instance came from: generator name, its parameters and seed.
struct Provenance {
  std::string generator;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;
};

/*! Ground truth: the point set, its latent labels and (optionally) the per-
 *  cluster metrics that certify the declared margin.
 */
struct LatentInstance {
  PointSet points;
  std::vector<int> labels;
  int k = 0;
  double gamma = 0;
  std::optional<std::vector<ClusterMetric>> metrics;
  Provenance provenance;

  std::size_t size() const { return points.size(); }

  //! Checks labels cover 0..k-1 and sizes agree; throws InvalidArgument.
  void validate_structure() const;
  //! margin_of_clustering over the stored metrics (empty if none).
  std::vector<double> margins() const;
};

struct QueryRecord {
  PointId i;
  PointId j;
  int answer;
};

/*! Monotone query counter with an optional transcript.
 */
class QueryLedger {
 public:
  explicit QueryLedger(bool keep_transcript = false) : keep_(keep_transcript) {}

  std::uint64_t count() const { return count_; }
  bool keeps_transcript() const { return keep_; }
  const std::vector<QueryRecord>& transcript() const { return transcript_; }

  void record(PointId i, PointId j, int answer) {
    ++count_;
    if (keep_) transcript_.push_back({i, j, answer});
  }

  //! CSV with header (seq, i, j, answer); seq starts at 1.
  void write_csv(std::ostream& out) const;

 private:
  bool keep_;
  std::uint64_t count_ = 0;
  std::vector<QueryRecord> transcript_;
};

/*! Noise-free same-cluster oracle over latent labels.
 */
class Oracle {
 public:
  explicit Oracle(std::span<const int> labels) : labels_(labels) {}
  explicit Oracle(const LatentInstance& instance) : labels_(instance.labels) {}

  std::size_t size() const { return labels_.size(); }

  //! +1 iff i and j share a latent cluster. Every call costs one query,
  //! including i == j.
  int scq(QueryLedger& ledger, PointId i, PointId j) const;

 private:
  std::span<const int> labels_;
};

/*! Labels each point of `sample` by querying the representatives in discovery
 *  order; a point answering -1 to all of them becomes a new representative.
 *
 *  Returns the local label (index into `reps`) of every sample point.
 */
std::vector<int> label_with_representatives(const Oracle& oracle, QueryLedger& ledger,
                                            std::span<const PointId> sample,
                                            std::vector<PointId>& reps);

}  // namespace scq
