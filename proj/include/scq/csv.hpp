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
#include <span>
#include <string>
#include <vector>

#include "scq/recur.hpp"

namespace scq {

/*! Per-round CSV:
 *  round,cluster_local_id,sample_size,recovered,residual,queries_cumulative,error_so_far,wall_time_s
 *  error_so_far is empty when latent labels were not available.
 */
void write_round_csv(std::ostream& out, std::span<const RoundStats> rounds);

struct CompareRow {
  std::string algo;
  std::uint64_t seed = 0;
  std::size_t round = 0;
  std::uint64_t queries_cumulative = 0;
  double error = 0;

  auto operator<=>(const CompareRow&) const = default;
};

//! Long-format comparison CSV (algo,seed,round,queries_cumulative,error),
//! sorted by (algo, seed, round).
void write_compare_csv(std::ostream& out, std::vector<CompareRow> rows);

}  // namespace scq
