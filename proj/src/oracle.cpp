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

#include "scq/oracle.hpp"

#include <ostream>

#include "scq/errors.hpp"

namespace scq {

void LatentInstance::validate_structure() const {
  points.validate();
  if (k < 2) throw InvalidArgument("instance: k must be >= 2");
  if (labels.size() != points.size()) throw InvalidArgument("instance: label count != n");
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (int l : labels) {
    if (l < 0 || l >= k) throw InvalidArgument("instance: label outside 0..k-1");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw EmptyCluster("instance: cluster " + std::to_string(c) + " is empty");
  }
  if (!(gamma > 0)) throw InvalidArgument("instance: gamma must be positive");
  if (metrics && metrics->size() != static_cast<std::size_t>(k)) {
    throw InvalidArgument("instance: need one metric per cluster");
  }
}

std::vector<double> LatentInstance::margins() const {
  if (!metrics) return {};
  return margin_of_clustering(points, labels, *metrics);
}

void QueryLedger::write_csv(std::ostream& out) const {
  out << "seq,i,j,answer\n";
  std::uint64_t seq = 0;
  for (const auto& q : transcript_) {
    out << ++seq << ',' << q.i << ',' << q.j << ',' << q.answer << '\n';
  }
}

int Oracle::scq(QueryLedger& ledger, PointId i, PointId j) const {
  if (i >= labels_.size() || j >= labels_.size()) throw InvalidId("scq: point id out of range");
  const int answer = labels_[i] == labels_[j] ? 1 : -1;
  ledger.record(i, j, answer);
  return answer;
}

std::vector<int> label_with_representatives(const Oracle& oracle, QueryLedger& ledger,
                                            std::span<const PointId> sample,
                                            std::vector<PointId>& reps) {
  std::vector<int> local(sample.size(), -1);
  for (std::size_t s = 0; s < sample.size(); ++s) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if (oracle.scq(ledger, reps[r], sample[s]) == 1) {
        local[s] = static_cast<int>(r);
        break;
      }
    }
    if (local[s] < 0) {
      local[s] = static_cast<int>(reps.size());
      reps.push_back(sample[s]);
    }
  }
  return local;
}

}  // namespace scq
