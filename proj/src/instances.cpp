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

#include "scq/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scq/errors.hpp"
#include "scq/rng.hpp"

namespace scq {

namespace {

using Json = nlohmann::ordered_json;

// Haar-distributed rotation: QR of a Gaussian matrix with the sign of R's
// diagonal folded into Q.
Eigen::MatrixXd random_rotation(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal;
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd g(dd, dd);
  for (Eigen::Index i = 0; i < dd; ++i) {
    for (Eigen::Index j = 0; j < dd; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dd; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

Eigen::VectorXd uniform_in_ball(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd u(static_cast<Eigen::Index>(d));
  double norm = 0;
  do {
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
    norm = u.norm();
  } while (norm == 0);
  return u / norm * std::pow(unit(rng), 1.0 / static_cast<double>(d));
}

// Permutes points and labels together.
void shuffle_instance(LatentInstance& inst, Rng& rng) {
  const std::size_t n = inst.points.size();
  const std::size_t d = inst.points.dim();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> coords(n * d);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = inst.points[perm[i]];
    std::copy(src.begin(), src.end(), coords.begin() + static_cast<std::ptrdiff_t>(i * d));
    labels[i] = inst.labels[perm[i]];
  }
  inst.points = PointSet(n, d, std::move(coords));
  inst.labels = std::move(labels);
}

PointId locate(const std::vector<int>& labels, int label) {
  return static_cast<PointId>(std::find(labels.begin(), labels.end(), label) - labels.begin());
}

}  // namespace

LatentInstance gen_ellipsoidal(std::size_t n, int k, std::size_t d, double gamma, double kappa,
                               std::uint64_t seed) {
  if (k < 2 || n < static_cast<std::size_t>(k)) throw InvalidArgument("gen_ellipsoidal: need n >= k >= 2");
  if (d < 1) throw InvalidArgument("gen_ellipsoidal: d must be >= 1");
  if (!(gamma > 0)) throw InvalidArgument("gen_ellipsoidal: gamma must be positive");
  if (!(kappa >= 1)) throw InvalidArgument("gen_ellipsoidal: kappa must be >= 1");
  Rng rng = make_rng(seed, Stream::kGenerator);
  const auto kk = static_cast<std::size_t>(k);
  const auto dd = static_cast<Eigen::Index>(d);

  Eigen::VectorXd lambda(dd);
  for (Eigen::Index i = 0; i < dd; ++i) {
    lambda(i) = d == 1 ? 1.0 : std::pow(kappa, static_cast<double>(i) / static_cast<double>(d - 1));
  }

  std::vector<ClusterMetric> metrics;
  std::vector<Eigen::MatrixXd> shapes;  // x = c + shape u maps the unit ball onto the W-ball
  for (std::size_t c = 0; c < kk; ++c) {
    const Eigen::MatrixXd q = random_rotation(d, rng);
    Eigen::MatrixXd w = q.transpose() * lambda.asDiagonal() * q;
    w = 0.5 * (w + w.transpose());
    metrics.push_back({PsdMetric(w), Eigen::VectorXd::Zero(dd)});
    shapes.push_back(q.transpose() * lambda.cwiseSqrt().cwiseInverse().asDiagonal());
  }

  // Distinct random vertices of the smallest g^d lattice with at least k points.
  std::size_t g = 2;
  while (std::pow(static_cast<double>(g), static_cast<double>(d)) < static_cast<double>(k)) ++g;
  std::uniform_int_distribution<std::size_t> digit(0, g - 1);
  std::set<std::vector<std::size_t>> chosen;
  std::vector<Eigen::VectorXd> lattice;
  while (lattice.size() < kk) {
    std::vector<std::size_t> v(d);
    for (auto& x : v) x = digit(rng);
    if (!chosen.insert(v).second) continue;
    Eigen::VectorXd p(dd);
    for (Eigen::Index i = 0; i < dd; ++i) p(i) = static_cast<double>(v[static_cast<std::size_t>(i)]);
    lattice.push_back(p);
  }

  std::vector<int> labels(n);
  std::vector<Eigen::VectorXd> offsets(n);
  const std::size_t base = n / kk;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = std::min(i / base, kk - 1);
    labels[i] = static_cast<int>(c);
    offsets[i] = shapes[c] * uniform_in_ball(d, rng);
  }

  LatentInstance inst;
  inst.k = k;
  inst.gamma = gamma;
  auto place = [&](double s) -> std::optional<PointSet> {
    for (std::size_t c = 0; c < kk; ++c) metrics[c].center = s * lattice[c];
    std::vector<double> coords(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd x = metrics[static_cast<std::size_t>(labels[i])].center + offsets[i];
      std::copy(x.data(), x.data() + dd, coords.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    PointSet ps(n, d, std::move(coords));
    if (!has_margin(margin_of_clustering(ps, labels, metrics), gamma)) return std::nullopt;
    return ps;
  };

  double scale = 1.0 / std::sqrt(kappa);
  bool ok = false;
  for (int attempt = 0; attempt <= 20; ++attempt, scale *= 2.0) {
    if (auto ps = place(scale)) {
      inst.points = std::move(*ps);
      ok = true;
      break;
    }
  }
  if (!ok) throw GenerationFailure("gen_ellipsoidal: margin not reached after 20 scale doublings");

  inst.labels = std::move(labels);
  inst.metrics = std::move(metrics);
  shuffle_instance(inst, rng);
  inst.provenance = {"ellipsoidal",
                     {{"n", static_cast<double>(n)},
                      {"k", static_cast<double>(k)},
                      {"d", static_cast<double>(d)},
                      {"gamma", gamma},
                      {"kappa", kappa},
                      {"scale", scale}},
                     seed};
  return inst;
}

LatentInstance gen_adversarial_kmeans(std::size_t n, double p, double gamma, std::uint64_t seed,
                                      double perturb) {
  if (!(p > 0 && p < 1)) throw InvalidArgument("gen_adversarial_kmeans: p must be in (0,1)");
  if (!(gamma > 0 && gamma <= 0.1)) throw InvalidArgument("gen_adversarial_kmeans: gamma must be in (0, 0.1]");
  if (n < 4) throw InvalidArgument("gen_adversarial_kmeans: n must be >= 4");
  if (!(perturb >= 0)) throw InvalidArgument("gen_adversarial_kmeans: perturb must be >= 0");
  Rng rng = make_rng(seed, Stream::kGenerator);

  const auto n1 = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 + p) / 2.0));
  const double top = std::sqrt(1.0 + gamma) / 2.0;
  std::vector<double> coords;
  coords.reserve(2 * n);
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n1) {
      coords.push_back(i < n1 / 2 ? 1.0 : -1.0);
      coords.push_back(0.0);
      labels.push_back(0);
    } else {
      coords.push_back(0.0);
      coords.push_back(top);
      labels.push_back(1);
    }
  }
  if (perturb > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd u = uniform_in_ball(2, rng) * perturb;
      coords[2 * i] += u(0);
      coords[2 * i + 1] += u(1);
    }
  }

  LatentInstance inst;
  inst.points = PointSet(n, 2, std::move(coords));
  inst.labels = std::move(labels);
  inst.k = 2;
  Eigen::MatrixXd w = Eigen::Vector2d(0.25, 1.0).asDiagonal();
  inst.metrics = std::vector<ClusterMetric>{{PsdMetric(w), Eigen::Vector2d(0.0, 0.0)},
                                            {PsdMetric(w), Eigen::Vector2d(0.0, top)}};
  shuffle_instance(inst, rng);
  const auto margins = inst.margins();
  inst.gamma = gamma;
  if (perturb > 0) {
    inst.gamma = *std::min_element(margins.begin(), margins.end());
    if (!(inst.gamma > 0)) throw GenerationFailure("gen_adversarial_kmeans: perturbation destroyed the margin");
  } else if (!has_margin(margins, gamma)) {
    throw GenerationFailure("gen_adversarial_kmeans: margin verification failed");
  }
  inst.provenance = {"adversarial",
                     {{"n", static_cast<double>(n)}, {"p", p}, {"gamma", gamma}, {"perturb", perturb}},
                     seed};
  return inst;
}

HiddenInstance gen_lb_sphere(std::size_t d, double gamma, std::uint64_t seed) {
  if (d < 2) throw InvalidArgument("gen_lb_sphere: d must be >= 2");
  if (!(gamma > 0 && gamma < 1.0 / 7.0)) throw InvalidArgument("gen_lb_sphere: gamma must be in (0, 1/7)");
  Rng rng = make_rng(seed, Stream::kGenerator);
  const double eps = std::sqrt(8.0 * gamma / (1.0 + gamma));
  const auto dd = static_cast<Eigen::Index>(d);

  // First-fit: the standard basis, then random orthant directions.
  std::vector<Eigen::VectorXd> packed;
  auto try_add = [&](const Eigen::VectorXd& z) {
    for (const auto& q : packed) {
      if ((q - z).norm() < eps) return false;
    }
    packed.push_back(z);
    return true;
  };
  for (Eigen::Index i = 0; i < dd; ++i) try_add(Eigen::VectorXd::Unit(dd, i));
  std::normal_distribution<double> normal;
  std::size_t misses = 0;
  for (std::size_t tries = 0; tries < 200000 && misses < 2000; ++tries) {
    Eigen::VectorXd z(dd);
    for (Eigen::Index i = 0; i < dd; ++i) z(i) = std::abs(normal(rng));
    if (z.norm() == 0) continue;
    misses = try_add(z / z.norm()) ? 0 : misses + 1;
  }
  if (packed.size() < 2) throw PackingTooSmall("gen_lb_sphere: fewer than 2 packing points");

  const std::size_t m = packed.size();
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  const std::size_t star = pick(rng);
  std::vector<double> coords;
  std::vector<int> labels;
  for (int sign : {1, -1}) {
    for (std::size_t i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < dd; ++j) coords.push_back(sign * std::sqrt(packed[i](j)));
      labels.push_back(i != star ? 0 : (sign > 0 ? 2 : 1));
    }
  }
  const Eigen::VectorXd root = packed[star].cwiseSqrt();
  LatentInstance inst;
  inst.points = PointSet(2 * m, d, std::move(coords));
  inst.labels = std::move(labels);
  inst.k = 3;
  inst.gamma = gamma;
  Eigen::MatrixXd w = ((1.0 + gamma) * packed[star]).asDiagonal();
  inst.metrics = std::vector<ClusterMetric>{{PsdMetric(w), Eigen::VectorXd::Zero(dd)},
                                            {PsdMetric::identity(d), -root},
                                            {PsdMetric::identity(d), root}};
  shuffle_instance(inst, rng);
  if (!has_margin(inst.margins(), gamma)) throw GenerationFailure("gen_lb_sphere: margin verification failed");
  inst.provenance = {"lb_sphere",
                     {{"d", static_cast<double>(d)}, {"gamma", gamma}, {"packing", static_cast<double>(m)}},
                     seed};
  const PointId hidden = locate(inst.labels, 2);
  return {std::move(inst), hidden};
}

HiddenInstance gen_lb_hypercube(std::size_t d, double gamma, std::size_t n, std::uint64_t seed) {
  if (d < 8) throw InvalidArgument("gen_lb_hypercube: d must be >= 8");
  if (!(gamma > 0)) throw InvalidArgument("gen_lb_hypercube: gamma must be positive");
  if (n < 2) throw InvalidArgument("gen_lb_hypercube: n must be >= 2");
  Rng rng = make_rng(seed, Stream::kGenerator);
  const double p = 1.0 / (2.0 * (1.0 + gamma));
  std::bernoulli_distribution bit(p);
  const auto dd = static_cast<Eigen::Index>(d);

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& row : rows) {
      for (auto& x : row) x = bit(rng) ? 1.0 : 0.0;
    }
    const auto& star = rows.back();
    if (std::all_of(star.begin(), star.end(), [](double x) { return x == 0; })) continue;
    std::set<std::vector<double>> distinct(rows.begin(), rows.end());
    if (distinct.size() != n) continue;

    LatentInstance inst;
    inst.points = PointSet::from_rows(rows);
    inst.labels.assign(n, 0);
    inst.labels.back() = 1;
    inst.k = 2;
    inst.gamma = gamma;
    Eigen::VectorXd xs(dd);
    for (Eigen::Index i = 0; i < dd; ++i) xs(i) = star[static_cast<std::size_t>(i)];
    Eigen::MatrixXd w = xs.asDiagonal();
    inst.metrics = std::vector<ClusterMetric>{{PsdMetric(w), Eigen::VectorXd::Zero(dd)},
                                              {PsdMetric::identity(d), xs}};
    if (!has_margin(inst.margins(), gamma)) continue;
    shuffle_instance(inst, rng);
    inst.provenance = {"lb_hypercube",
                       {{"d", static_cast<double>(d)},
                        {"gamma", gamma},
                        {"n", static_cast<double>(n)},
                        {"retries", static_cast<double>(attempt)}},
                       seed};
    const PointId hidden = locate(inst.labels, 1);
    return {std::move(inst), hidden};
  }
  std::ostringstream msg;
  msg << "gen_lb_hypercube: no valid instance in 100 retries; the construction needs d >= 48(1+gamma)^2 = "
      << 48.0 * (1.0 + gamma) * (1.0 + gamma);
  throw GenerationFailure(msg.str());
}

std::string instance_to_json(const LatentInstance& inst) {
  Json j;
  j["n"] = inst.points.size();
  j["d"] = inst.points.dim();
  j["k"] = inst.k;
  j["gamma"] = inst.gamma;
  Json pts = Json::array();
  for (std::size_t i = 0; i < inst.points.size(); ++i) {
    const auto row = inst.points[i];
    pts.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["points"] = std::move(pts);
  j["labels"] = inst.labels;
  if (inst.metrics) {
    Json ms = Json::array();
    for (const auto& m : *inst.metrics) {
      Json w = Json::array();
      const auto& mat = m.w.matrix();
      for (Eigen::Index r = 0; r < mat.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(mat.cols()));
        for (Eigen::Index c = 0; c < mat.cols(); ++c) row[static_cast<std::size_t>(c)] = mat(r, c);
        w.push_back(row);
      }
      Json entry;
      entry["W"] = std::move(w);
      entry["c"] = std::vector<double>(m.center.data(), m.center.data() + m.center.size());
      ms.push_back(std::move(entry));
    }
    j["metrics"] = std::move(ms);
    Json margins = Json::array();
    for (double v : inst.margins()) {
      if (std::isinf(v)) margins.push_back("inf");
      else margins.push_back(v);
    }
    j["margins"] = std::move(margins);
  }
  Json prov;
  prov["generator"] = inst.provenance.generator;
  Json params = Json::object();
  for (const auto& [key, value] : inst.provenance.params) params[key] = value;
  prov["params"] = std::move(params);
  prov["seed"] = inst.provenance.seed;
  j["provenance"] = std::move(prov);
  return j.dump() + "\n";
}

LatentInstance instance_from_json(const std::string& text) {
  LatentInstance inst;
  Json j;
  try {
    j = Json::parse(text);
    const auto n = j.at("n").get<std::size_t>();
    const auto d = j.at("d").get<std::size_t>();
    inst.k = j.at("k").get<int>();
    inst.gamma = j.at("gamma").get<double>();
    const auto& pts = j.at("points");
    if (!pts.is_array() || pts.size() != n) throw ParseError("instance: points must have n rows");
    std::vector<double> coords;
    coords.reserve(n * d);
    for (const auto& row : pts) {
      if (!row.is_array() || row.size() != d) throw ParseError("instance: every point needs d coordinates");
      for (const auto& x : row) coords.push_back(x.get<double>());
    }
    inst.points = PointSet(n, d, std::move(coords));
    inst.labels = j.at("labels").get<std::vector<int>>();
    if (j.contains("metrics")) {
      std::vector<ClusterMetric> metrics;
      for (const auto& m : j.at("metrics")) {
        const auto rows = m.at("W").get<std::vector<std::vector<double>>>();
        if (rows.size() != d) throw ParseError("instance: W must be d x d");
        Eigen::MatrixXd w(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < d; ++r) {
          if (rows[r].size() != d) throw ParseError("instance: W must be d x d");
          for (std::size_t c = 0; c < d; ++c) {
            w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
          }
        }
        const auto c = m.at("c").get<std::vector<double>>();
        if (c.size() != d) throw ParseError("instance: c must have d entries");
        metrics.push_back({PsdMetric(w), Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(d))});
      }
      inst.metrics = std::move(metrics);
    }
    if (j.contains("provenance")) {
      const auto& prov = j.at("provenance");
      inst.provenance.generator = prov.value("generator", std::string{});
      if (prov.contains("params")) {
        for (const auto& [key, value] : prov.at("params").items()) {
          inst.provenance.params.emplace_back(key, value.get<double>());
        }
      }
      inst.provenance.seed = prov.value("seed", std::uint64_t{0});
    }
    inst.validate_structure();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }

  if (inst.metrics && j.contains("margins")) {
    const auto actual = inst.margins();
    const auto& stored = j.at("margins");
    if (!stored.is_array() || stored.size() != actual.size()) {
      throw MarginMismatch("instance: margins field has the wrong length");
    }
    for (std::size_t c = 0; c < actual.size(); ++c) {
      const auto& s = stored[c];
      const bool ok = s.is_string() ? (s.get<std::string>() == "inf" && std::isinf(actual[c]))
                      : s.is_number()
                          ? std::abs(s.get<double>() - actual[c]) <= 1e-9 * std::max(1.0, std::abs(actual[c]))
                          : false;
      if (!ok) throw MarginMismatch("instance: stored margin of cluster " + std::to_string(c) +
                                    " disagrees with the recomputed value");
    }
  }
  return inst;
}

void save_instance(const LatentInstance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("save_instance: cannot open " + path);
  out << instance_to_json(instance);
  if (!out) throw InvalidArgument("save_instance: write failed for " + path);
}

LatentInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_instance: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

}  // namespace scq
