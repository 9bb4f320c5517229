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

#include "scq/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "scq/errors.hpp"
#include "scq/kernels.hpp"

namespace scq {

double TessParams::cell_budget() const {
  return std::pow(2.0 * (b + 1) + 1.0, static_cast<double>(rank));
}

double tess_alpha(std::size_t rank, double gamma, double phi) {
  const double g = std::min(gamma, kMaxTessGamma);
  return g / (kTessConstant * std::sqrt(2.0) * phi * static_cast<double>(rank));
}

TessParams tess_params(std::size_t rank, double gamma, std::span<const double> semiaxes,
                       double phi) {
  if (rank == 0 || semiaxes.size() != rank) throw InvalidArgument("tess_params: rank mismatch");
  if (!(gamma > 0)) throw InvalidArgument("tess_params: gamma must be positive");
  if (!(phi >= 1.0)) throw InvalidArgument("tess_params: phi must be >= 1");
  TessParams p;
  p.rank = rank;
  p.gamma_eff = std::min(gamma, kMaxTessGamma);
  p.c = kTessConstant;
  p.phi = phi;
  const double r = static_cast<double>(rank);
  p.alpha = tess_alpha(rank, gamma, phi);
  // L_i / beta_i is the same for every axis.
  const double ratio = p.c * phi * r * std::sqrt(2.0 * r) / p.gamma_eff;
  p.beta.resize(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (!(semiaxes[i] > 0)) throw InvalidArgument("tess_params: semiaxes must be positive");
    p.beta[i] = p.gamma_eff / (p.c * std::sqrt(2.0 * r)) * semiaxes[i] / (phi * r);
  }
  p.b = ratio <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log(ratio) / std::log1p(p.alpha)));
  return p;
}

CellKey cell_key(const Ellipsoid& e, const TessParams& params,
                 const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (e.rank() == 0) throw InvalidArgument("cell_key: rank-0 ellipsoid has a single cell");
  if (!e.contains(y)) throw NotInEllipsoid("cell_key: point outside the ellipsoid");
  const Eigen::VectorXd t = e.axis_coords(y);
  const double l1a = std::log1p(params.alpha);
  CellKey key;
  key.levels.resize(e.rank());
  for (std::size_t i = 0; i < e.rank(); ++i) {
    key.levels[i] = kernels::axis_level(t(static_cast<Eigen::Index>(i)), params.beta[i], l1a, params.b);
  }
  return key;
}

std::vector<PointId> tessellation_learn(const PointSet& points,
                                        std::span<const PointId> residual,
                                        std::span<const PointId> sample, double gamma,
                                        const Oracle& oracle, QueryLedger& ledger,
                                        const TessellationOptions& options,
                                        TessellationTrace* trace) {
  if (sample.empty()) throw InvalidArgument("tessellation_learn: empty sample");
  if (!(gamma > 0)) throw InvalidArgument("tessellation_learn: gamma must be positive");

  MveeResult rounding = mvee(points, sample, MveeOptions{.epsilon = options.mvee_epsilon});
  const Ellipsoid& e = rounding.ellipsoid;
  const std::size_t r = e.rank();
  TessParams params;
  if (r > 0) {
    std::vector<double> axes(e.semiaxes.data(), e.semiaxes.data() + r);
    params = tess_params(r, gamma, axes, 1.0 + options.mvee_epsilon);
  }

  const auto mask = kernels::omp::ellipsoid_mask(points, residual, e, Ellipsoid::kMembershipTolerance);
  std::vector<PointId> inside;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (mask[i]) inside.push_back(residual[i]);
  }
  std::vector<std::int32_t> levels;
  if (r > 0) {
    levels = kernels::omp::cell_levels(points, inside, e, params.beta, params.alpha, params.b);
  }

  // Group by key; ties by id so each cell's members come out ascending.
  std::vector<std::size_t> order(inside.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key_less = [&](std::size_t a, std::size_t b) {
    const auto* la = levels.data() + a * r;
    const auto* lb = levels.data() + b * r;
    int cmp = 0;
    for (std::size_t i = 0; i < r && cmp == 0; ++i) cmp = (la[i] > lb[i]) - (la[i] < lb[i]);
    if (cmp != 0) return cmp < 0;
    return inside[a] < inside[b];
  };
  std::sort(order.begin(), order.end(), key_less);

  std::vector<PointId> sorted_sample(sample.begin(), sample.end());
  std::sort(sorted_sample.begin(), sorted_sample.end());
  sorted_sample.erase(std::unique(sorted_sample.begin(), sorted_sample.end()), sorted_sample.end());
  const PointId anchor = sorted_sample.front();
  auto in_sample = [&](PointId id) {
    return std::binary_search(sorted_sample.begin(), sorted_sample.end(), id);
  };

  std::vector<TessCell> cells;
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e_idx = s + 1;
    const auto* ls = levels.data() + order[s] * r;
    while (e_idx < order.size() &&
           std::equal(ls, ls + r, levels.data() + order[e_idx] * r)) {
      ++e_idx;
    }
    TessCell cell;
    cell.key.levels.assign(ls, ls + r);
    for (std::size_t t = s; t < e_idx; ++t) {
      PointId id = inside[order[t]];
      cell.members.push_back(id);
      cell.contains_sample = cell.contains_sample || in_sample(id);
    }
    cell.representative = cell.members.front();
    cells.push_back(std::move(cell));
    s = e_idx;
  }

  const std::uint64_t before = ledger.count();
  std::vector<PointId> learned(sorted_sample);
  for (auto& cell : cells) {
    if (options.infer_sample_cells && cell.contains_sample) {
      cell.answer = 1;
    } else {
      cell.queried = true;
      cell.answer = oracle.scq(ledger, anchor, cell.representative);
    }
    if (cell.answer == 1) learned.insert(learned.end(), cell.members.begin(), cell.members.end());
  }
  std::sort(learned.begin(), learned.end());
  learned.erase(std::unique(learned.begin(), learned.end()), learned.end());

  if (trace) {
    trace->ellipsoid = e;
    trace->certificate = rounding.certificate;
    trace->params = params;
    trace->cells = std::move(cells);
    trace->sample_size = sorted_sample.size();
    trace->queries = ledger.count() - before;
  }
  return learned;
}

void write_tessellation_json(std::ostream& out, std::span<const TessellationTrace> traces,
                             std::span<const int> labels) {
  using nlohmann::json;
  json doc = json::array();
  for (const auto& tr : traces) {
    json t;
    const auto& e = tr.ellipsoid;
    t["center"] = std::vector<double>(e.center.data(), e.center.data() + e.center.size());
    t["semiaxes"] = std::vector<double>(e.semiaxes.data(), e.semiaxes.data() + e.semiaxes.size());
    json axes = json::array();
    for (Eigen::Index c = 0; c < e.basis.cols(); ++c) {
      axes.push_back(std::vector<double>(e.basis.col(c).data(), e.basis.col(c).data() + e.basis.rows()));
    }
    t["axes"] = axes;
    t["max_scaled_distance"] = tr.certificate.max_scaled_distance;
    t["rank"] = tr.params.rank;
    t["gamma_eff"] = tr.params.gamma_eff;
    t["alpha"] = tr.params.alpha;
    t["b"] = tr.params.b;
    t["beta"] = tr.params.beta;
    t["sample_size"] = tr.sample_size;
    t["queries"] = tr.queries;
    json cells = json::array();
    for (const auto& cell : tr.cells) {
      json c;
      c["key"] = cell.key.levels;
      c["size"] = cell.members.size();
      c["representative"] = cell.representative;
      c["queried"] = cell.queried;
      c["answer"] = cell.answer;
      c["members"] = cell.members;
      if (!labels.empty()) {
        std::vector<int> ls;
        ls.reserve(cell.members.size());
        for (PointId id : cell.members) ls.push_back(labels[id]);
        c["labels"] = ls;
      }
      cells.push_back(std::move(c));
    }
    t["cells"] = std::move(cells);
    doc.push_back(std::move(t));
  }
  out << doc.dump(1) << '\n';
}

}  // namespace scq
