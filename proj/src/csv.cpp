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

#include "scq/csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace scq {

namespace {

void put_real(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  const auto old = out.precision(12);
  out << v;
  out.precision(old);
}

}  // namespace

void write_round_csv(std::ostream& out, std::span<const RoundStats> rounds) {
  out << "round,cluster_local_id,sample_size,recovered,residual,queries_cumulative,error_so_far,wall_time_s\n";
  for (const auto& r : rounds) {
    out << r.round << ',' << r.cluster_local_id << ',' << r.sample_size << ',' << r.recovered << ','
        << r.residual << ',' << r.queries_cumulative << ',';
    put_real(out, r.error_so_far);
    out << ',';
    put_real(out, r.wall_time_s);
    out << '\n';
  }
}

void write_compare_csv(std::ostream& out, std::vector<CompareRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) {
    return std::tie(a.algo, a.seed, a.round) < std::tie(b.algo, b.seed, b.round);
  });
  out << "algo,seed,round,queries_cumulative,error\n";
  for (const auto& r : rows) {
    out << r.algo << ',' << r.seed << ',' << r.round << ',' << r.queries_cumulative << ',';
    put_real(out, r.error);
    out << '\n';
  }
}

}  // namespace scq
