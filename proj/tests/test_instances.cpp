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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include "scq/errors.hpp"
#include "scq/instances.hpp"

using namespace scq;
using Catch::Approx;

namespace {

std::vector<std::size_t> cluster_sizes(const LatentInstance& inst) {
  std::vector<std::size_t> s(static_cast<std::size_t>(inst.k), 0);
  for (int l : inst.labels) s[static_cast<std::size_t>(l)]++;
  return s;
}

}  // namespace

TEST_CASE("gen_ellipsoidal") {
  SECTION("sizes and margins") {
    auto inst = gen_ellipsoidal(2003, 5, 8, 1.0, 100, 1);
    CHECK(inst.size() == 2003);
    CHECK(inst.points.dim() == 8);
    CHECK(cluster_sizes(inst) == std::vector<std::size_t>{400, 400, 400, 400, 403});
    REQUIRE(inst.metrics);
    auto m = inst.margins();
    CHECK(has_margin(m, 1.0));
    for (const auto& cm : *inst.metrics) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cm.w.matrix());
      const auto ev = eig.eigenvalues();
      CHECK(ev.maxCoeff() / ev.minCoeff() == Approx(100.0).epsilon(1e-6));
    }
    // every point is inside its own unit W-ball
    for (std::size_t i = 0; i < inst.size(); ++i) {
      const auto& cm = (*inst.metrics)[static_cast<std::size_t>(inst.labels[i])];
      CHECK(metric_distance(cm.w, inst.points.vec(i), cm.center) <= 1 + 1e-12);
    }
  }
  SECTION("kappa 1 and one dimension") {
    auto iso = gen_ellipsoidal(500, 3, 3, 2.0, 1, 4);
    CHECK(has_margin(iso.margins(), 2.0));
    auto tiny = gen_ellipsoidal(10, 2, 1, 1.0, 1, 9);
    REQUIRE(tiny.size() == 10);
    // direct enumeration of the margin in 1-d
    for (int c = 0; c < 2; ++c) {
      const auto& cm = (*tiny.metrics)[static_cast<std::size_t>(c)];
      const double w = cm.w.matrix()(0, 0), ctr = cm.center(0);
      double in = 0, out = 1e300;
      for (std::size_t i = 0; i < 10; ++i) {
        const double v = w * std::pow(tiny.points[i][0] - ctr, 2);
        if (tiny.labels[i] == c) in = std::max(in, v);
        else out = std::min(out, v);
      }
      CHECK(out / in - 1 >= 1.0);
      CHECK(tiny.margins()[static_cast<std::size_t>(c)] == Approx(out / in - 1));
    }
  }
  SECTION("deterministic") {
    CHECK(instance_to_json(gen_ellipsoidal(300, 3, 4, 1.0, 50, 8)) ==
          instance_to_json(gen_ellipsoidal(300, 3, 4, 1.0, 50, 8)));
    CHECK(instance_to_json(gen_ellipsoidal(300, 3, 4, 1.0, 50, 8)) !=
          instance_to_json(gen_ellipsoidal(300, 3, 4, 1.0, 50, 9)));
  }
  SECTION("bad parameters") {
    CHECK_THROWS_AS(gen_ellipsoidal(1, 2, 2, 1, 1, 0), InvalidArgument);
    CHECK_THROWS_AS(gen_ellipsoidal(10, 2, 2, 1, 0.5, 0), InvalidArgument);
  }
}

TEST_CASE("gen_adversarial_kmeans") {
  auto inst = gen_adversarial_kmeans(10000, 0.5, 0.05, 2);
  CHECK(cluster_sizes(inst) == std::vector<std::size_t>{7500, 2500});
  auto m = inst.margins();
  CHECK(std::abs(m[0] - 0.05) <= 1e-12);
  CHECK(std::isinf(m[1]));
  std::size_t left = 0, right = 0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (inst.labels[i] != 0) {
      CHECK(inst.points[i][1] == Approx(std::sqrt(1.05) / 2));
      continue;
    }
    left += inst.points[i][0] == -1.0;
    right += inst.points[i][0] == 1.0;
  }
  CHECK(left == 3750);
  CHECK(right == 3750);
  PsdMetric w(Eigen::Vector2d(0.25, 1).asDiagonal().toDenseMatrix());
  CHECK(metric_distance(w, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0)) == Approx(0.5));

  auto jitter = gen_adversarial_kmeans(1000, 0.5, 0.05, 2, 1e-4);
  CHECK(jitter.gamma > 0);
  CHECK(has_margin(jitter.margins(), jitter.gamma));
  // a jitter comparable to the gap between the clusters breaks the margin
  CHECK_THROWS_AS(gen_adversarial_kmeans(1000, 0.5, 0.05, 2, 0.01), GenerationFailure);

  CHECK_THROWS_AS(gen_adversarial_kmeans(100, 0.5, 0.2, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_adversarial_kmeans(3, 0.5, 0.05, 1), InvalidArgument);
}

TEST_CASE("gen_lb_sphere") {
  SECTION("d = 2 packs two points") {
    auto h = gen_lb_sphere(2, 0.1, 1);
    CHECK(h.instance.size() == 4);
    CHECK(std::sqrt(8 * 0.1 / 1.1) == Approx(0.8528).epsilon(1e-4));
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double gamma = 0.1;
    auto h = gen_lb_sphere(4, gamma, seed);
    const auto& inst = h.instance;
    REQUIRE(inst.k == 3);
    CHECK(inst.labels[h.hidden] == 2);
    CHECK(has_margin(inst.margins(), gamma));
    const auto& c0 = (*inst.metrics)[0];
    const double eps = std::sqrt(8 * gamma / (1 + gamma));
    std::vector<Eigen::VectorXd> z;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      const double dist2 = std::pow(metric_distance(c0.w, inst.points.vec(i), c0.center), 2);
      if (inst.labels[i] == 0) CHECK(dist2 <= 1 + 1e-12);
      else CHECK(dist2 == Approx(1 + gamma));
      const Eigen::VectorXd x = inst.points.vec(i);
      if (x.minCoeff() >= 0) z.push_back(x.cwiseAbs2());
    }
    for (std::size_t a = 0; a < z.size(); ++a) {
      CHECK(z[a].norm() == Approx(1.0));
      for (std::size_t b = a + 1; b < z.size(); ++b) CHECK((z[a] - z[b]).norm() >= eps - 1e-12);
    }
  }
  CHECK_THROWS_AS(gen_lb_sphere(3, 0.2, 1), InvalidArgument);
}

TEST_CASE("gen_lb_hypercube") {
  std::size_t accepted = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    try {
      auto h = gen_lb_hypercube(64, 0.1, 8, seed);
      ++accepted;
      const auto& inst = h.instance;
      CHECK(inst.labels[h.hidden] == 1);
      CHECK(has_margin(inst.margins(), 0.1));
      const auto& c0 = (*inst.metrics)[0];
      const double weight = inst.points.vec(h.hidden).sum();
      CHECK(std::pow(metric_distance(c0.w, inst.points.vec(h.hidden), c0.center), 2) == Approx(weight));
      std::set<std::vector<double>> distinct;
      for (std::size_t i = 0; i < inst.size(); ++i)
        distinct.emplace(inst.points[i].begin(), inst.points[i].end());
      CHECK(distinct.size() == 8);
      bool has_retries = false;
      for (const auto& [key, value] : inst.provenance.params) has_retries |= key == "retries";
      CHECK(has_retries);
    } catch (const GenerationFailure&) {
    }
  }
  CHECK(accepted >= 15);
  try {
    gen_lb_hypercube(8, 1.0, 40, 3);
    FAIL("expected GenerationFailure");
  } catch (const GenerationFailure& e) {
    CHECK(std::string(e.what()).find("48") != std::string::npos);
  }
}

TEST_CASE("instance JSON") {
  SECTION("round trip is byte identical") {
    for (const auto& inst : {gen_ellipsoidal(200, 3, 3, 1.0, 10, 2), gen_adversarial_kmeans(50, 0.5, 0.05, 1),
                             gen_lb_sphere(3, 0.1, 1).instance, gen_lb_hypercube(64, 0.1, 8, 1).instance}) {
      const std::string text = instance_to_json(inst);
      auto back = instance_from_json(text);
      CHECK(instance_to_json(back) == text);
      CHECK(back.labels == inst.labels);
      CHECK(back.points.coords() == inst.points.coords());
    }
  }
  SECTION("minimal document") {
    auto inst = instance_from_json(R"({"n":2,"d":1,"k":2,"gamma":1,"points":[[0],[1]],"labels":[0,1]})");
    CHECK(inst.size() == 2);
    CHECK_FALSE(inst.metrics.has_value());
  }
  SECTION("corrupted margin") {
    auto j = nlohmann::json::parse(instance_to_json(gen_ellipsoidal(100, 2, 2, 1.0, 10, 1)));
    j["margins"][0] = j["margins"][0].get<double>() + 0.5;
    CHECK_THROWS_AS(instance_from_json(j.dump()), MarginMismatch);
  }
  SECTION("malformed input") {
    CHECK_THROWS_AS(instance_from_json("{"), ParseError);
    CHECK_THROWS_AS(instance_from_json(R"({"n":2,"d":1,"k":2,"gamma":1,"points":[[0]],"labels":[0,1]})"),
                    ParseError);
    CHECK_THROWS_AS(instance_from_json(R"({"n":2,"d":1,"k":2,"gamma":1,"points":[[0],[1]],"labels":[0,0]})"),
                    ParseError);
  }
  SECTION("files") {
    auto path = std::filesystem::temp_directory_path() / "scq_instance_roundtrip.json";
    auto inst = gen_adversarial_kmeans(40, 0.5, 0.05, 7);
    save_instance(inst, path.string());
    CHECK(instance_to_json(load_instance(path.string())) == instance_to_json(inst));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_instance(path.string()), ParseError);
  }
}
