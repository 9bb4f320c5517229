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

#include <map>
#include <random>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "scq/errors.hpp"
#include "scq/oracle.hpp"

using namespace scq;

TEST_CASE("scq answers and accounting") {
  std::vector<int> labels{0, 0, 1, 2, 1};
  Oracle oracle(labels);
  QueryLedger ledger(true);
  CHECK(oracle.scq(ledger, 3, 3) == 1);
  CHECK(ledger.count() == 1);
  CHECK(oracle.scq(ledger, 0, 1) == 1);
  CHECK(oracle.scq(ledger, 0, 2) == -1);
  CHECK(oracle.scq(ledger, 2, 4) == 1);
  CHECK(ledger.count() == 4);
  CHECK(ledger.transcript().size() == 4);
  CHECK_THROWS_AS(oracle.scq(ledger, 0, 5), InvalidId);
  CHECK(ledger.count() == 4);

  for (PointId i = 0; i < 5; ++i)
    for (PointId j = 0; j < 5; ++j) {
      QueryLedger scratch;
      CHECK(oracle.scq(scratch, i, j) == oracle.scq(scratch, j, i));
      CHECK(oracle.scq(scratch, i, j) == (labels[i] == labels[j] ? 1 : -1));
    }

  std::ostringstream csv;
  ledger.write_csv(csv);
  CHECK(csv.str() == "seq,i,j,answer\n1,3,3,1\n2,0,1,1\n3,0,2,-1\n4,2,4,1\n");
}

TEST_CASE("label_with_representatives") {
  SECTION("single cluster") {
    std::vector<int> labels(10, 4);
    Oracle oracle(labels);
    QueryLedger ledger;
    std::vector<PointId> reps;
    std::vector<PointId> s{2, 5, 7, 9};
    auto local = label_with_representatives(oracle, ledger, s, reps);
    CHECK(reps == std::vector<PointId>{2});
    CHECK(local == std::vector<int>{0, 0, 0, 0});
    CHECK(ledger.count() <= 4);
  }
  SECTION("random samples never mislabel") {
    std::mt19937_64 rng(31);
    const int k = 6;
    std::vector<int> labels(300);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(rng() % k);
    Oracle oracle(labels);
    for (int trial = 0; trial < 30; ++trial) {
      QueryLedger ledger;
      std::vector<PointId> reps;
      std::vector<PointId> s(50);
      for (auto& id : s) id = static_cast<PointId>(rng() % labels.size());
      auto local = label_with_representatives(oracle, ledger, s, reps);
      CHECK(ledger.count() <= static_cast<std::uint64_t>(k) * s.size());
      std::map<int, int> to_latent;
      for (std::size_t i = 0; i < s.size(); ++i) {
        auto [it, fresh] = to_latent.emplace(local[i], labels[s[i]]);
        CHECK(it->second == labels[s[i]]);
      }
      std::map<int, int> back;
      for (auto [l, t] : to_latent) CHECK(back.emplace(t, l).second);
      for (std::size_t r = 0; r < reps.size(); ++r) CHECK(to_latent.at(static_cast<int>(r)) == labels[reps[r]]);
    }
  }
  SECTION("all clusters present") {
    std::vector<int> labels{0, 1, 2, 0, 1, 2};
    Oracle oracle(labels);
    QueryLedger ledger;
    std::vector<PointId> reps;
    std::vector<PointId> s{0, 1, 2, 3, 4, 5, 3};
    auto local = label_with_representatives(oracle, ledger, s, reps);
    CHECK(reps.size() == 3);
    CHECK(local[3] == local[6]);
  }
}

TEST_CASE("instance structure validation") {
  LatentInstance inst;
  inst.points = PointSet::from_rows({{0}, {1}, {2}});
  inst.labels = {0, 1, 1};
  inst.k = 2;
  inst.gamma = 1;
  CHECK_NOTHROW(inst.validate_structure());
  CHECK(inst.margins().empty());
  inst.labels = {0, 0, 0};
  CHECK_THROWS_AS(inst.validate_structure(), EmptyCluster);
  inst.labels = {0, 2, 1};
  CHECK_THROWS_AS(inst.validate_structure(), InvalidArgument);
}
