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

#include "scq/recur.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "scq/errors.hpp"
#include "scq/kernels.hpp"
#include "scq/rng.hpp"

namespace scq {

std::size_t RecoveredClustering::unlabeled() const {
  return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), kUnlabeled));
}

namespace {

// Coordinates of `ids` in the span, one column each.
Eigen::MatrixXd span_coords(const PointSet& points, std::span<const PointId> ids,
                            const AffineSpan& span) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(span.rank), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = span.coords(points.vec(ids[i]));
  }
  return out;
}

}  // namespace

double hull_expansion_alpha(std::size_t rank, double gamma, const HullExpansionOptions& options) {
  if (rank == 0) return 0.0;
  if (options.factor == HullExpansionOptions::Factor::kMarginSafe) {
    const double g = std::min(gamma, kMaxTessGamma);
    return kMarginSafeShrink * (std::sqrt(1.0 + g) - 1.0) / 2.0;
  }
  return tess_alpha(rank, gamma, 1.0 + options.mvee_epsilon);
}

std::vector<PointId> greedy_hull_expansion(const PointSet& points,
                                           std::span<const PointId> residual,
                                           std::span<const PointId> sample, double gamma,
                                           const HullExpansionOptions& options,
                                           HullExpansionStats* stats) {
  if (sample.empty()) throw InvalidArgument("greedy_hull_expansion: empty sample");
  if (!(gamma > 0)) throw InvalidArgument("greedy_hull_expansion: gamma must be positive");
  std::vector<PointId> grown(sample.begin(), sample.end());
  std::sort(grown.begin(), grown.end());
  grown.erase(std::unique(grown.begin(), grown.end()), grown.end());
  HullExpansionStats local;

  const AffineSpan span = orthonormal_span(points, grown);
  const auto r = static_cast<Eigen::Index>(span.rank);
  const auto proj = kernels::omp::project_to_span(points, residual, span);

  // Candidates: residual points in the span that are not yet in the set.
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (proj.in_span[i] && !std::binary_search(grown.begin(), grown.end(), residual[i])) {
      pending.push_back(i);
    }
  }

  if (r == 0) {
    // The hull is a single point; absorb its duplicates.
    for (std::size_t i : pending) grown.push_back(residual[i]);
    local.absorbed = pending.size();
    local.passes = 1;
    std::sort(grown.begin(), grown.end());
    if (stats) *stats = local;
    return grown;
  }

  const double alpha = hull_expansion_alpha(span.rank, gamma, options);
  local.alpha = alpha;
  Eigen::MatrixXd s_coords = span_coords(points, grown, span);

  // Vertex set for the LPs; grows only when a separator fails on the full set.
  std::vector<Eigen::Index> vertices;
  for (Eigen::Index a = 0; a < r; ++a) {
    Eigen::Index lo = 0, hi = 0;
    s_coords.row(a).minCoeff(&lo);
    s_coords.row(a).maxCoeff(&hi);
    vertices.push_back(lo);
    vertices.push_back(hi);
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());

  // Per-candidate separator h with min_{s in S} h.s over the first `seen`
  // columns; the set only grows, so the minimum is updated incrementally.
  struct Cached {
    Eigen::VectorXd h;
    double min_hs = 0;
    Eigen::Index seen = 0;
  };
  std::vector<Cached> cache(residual.size());

  while (true) {
    ++local.passes;
    const Eigen::Index cols = s_coords.cols();
    const Eigen::VectorXd g = s_coords.rowwise().mean();
    const Eigen::MatrixXd scaled = ((s_coords.colwise() - g) * (1.0 + alpha)).colwise() + g;
    const Eigen::VectorXd lo = scaled.rowwise().minCoeff();
    const Eigen::VectorXd hi = scaled.rowwise().maxCoeff();
    const double slack = 1e-9 * std::max(1.0, (hi - lo).maxCoeff());

    // Prefilter: the scaled hull lies in the box of the scaled set and in the
    // scaled covariance ellipsoid {(x-g)^T Sigma^-1 (x-g) <= max_s ...}.
    const Eigen::MatrixXd centered = s_coords.colwise() - g;
    Eigen::LDLT<Eigen::MatrixXd> cov((centered * centered.transpose()) / static_cast<double>(cols));
    const bool use_cov = cov.info() == Eigen::Success && cov.isPositive() &&
                         cov.vectorD().minCoeff() > 1e-12 * std::max(1.0, cov.vectorD().maxCoeff());
    double cov_radius = 0;
    if (use_cov) {
      cov_radius = (centered.array() * cov.solve(centered).array()).colwise().sum().maxCoeff();
      cov_radius *= (1.0 + alpha) * (1.0 + alpha) * (1.0 + 1e-9);
    }
    std::vector<std::size_t> boxed;
    for (std::size_t i : pending) {
      const auto c = proj.coords.col(static_cast<Eigen::Index>(i));
      if (!(((c - lo).array() >= -slack).all() && ((hi - c).array() >= -slack).all())) continue;
      if (use_cov) {
        const Eigen::VectorXd dc = c - g;
        if (dc.dot(cov.solve(dc)) > cov_radius) continue;
      }
      boxed.push_back(i);
    }

    // A cached separator that still separates spares the LP.
    std::vector<std::uint8_t> need(boxed.size(), 1);
    const auto nb = static_cast<std::int64_t>(boxed.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t b = 0; b < nb; ++b) {
      Cached& c = cache[boxed[static_cast<std::size_t>(b)]];
      if (c.h.size() == 0) continue;
      if (c.seen < cols) {
        c.min_hs = std::min(c.min_hs, (c.h.transpose() * s_coords.middleCols(c.seen, cols - c.seen)).minCoeff());
        c.seen = cols;
      }
      const double hg = c.h.dot(g);
      const double hq = c.h.dot(proj.coords.col(static_cast<Eigen::Index>(boxed[static_cast<std::size_t>(b)])));
      need[static_cast<std::size_t>(b)] = hg + (1.0 + alpha) * (c.min_hs - hg) > hq ? 0 : 1;
    }

    std::vector<std::size_t> absorbed;
    std::vector<std::size_t> unresolved;
    for (std::size_t b = 0; b < boxed.size(); ++b) {
      if (need[b]) unresolved.push_back(boxed[b]);
    }
    while (!unresolved.empty()) {
      Eigen::MatrixXd gen(r, static_cast<Eigen::Index>(vertices.size()));
      for (std::size_t v = 0; v < vertices.size(); ++v) gen.col(static_cast<Eigen::Index>(v)) = scaled.col(vertices[v]);
      Eigen::MatrixXd queries(r, static_cast<Eigen::Index>(unresolved.size()));
      for (std::size_t q = 0; q < unresolved.size(); ++q) {
        queries.col(static_cast<Eigen::Index>(q)) = proj.coords.col(static_cast<Eigen::Index>(unresolved[q]));
      }
      const auto sep = kernels::omp::hull_separate(gen, queries, kHullTolerance);
      local.lps += unresolved.size();

      // For each separated query, the most violating point of the full set.
      const auto m = static_cast<std::int64_t>(unresolved.size());
      std::vector<Eigen::Index> witness(unresolved.size(), -1);
#pragma omp parallel for schedule(dynamic, 16)
      for (std::int64_t q = 0; q < m; ++q) {
        if (sep.mask[static_cast<std::size_t>(q)]) continue;
        const Eigen::VectorXd h = sep.separators.col(q);
        const double hq = h.dot(queries.col(q));
        const double hg = h.dot(g);
        Eigen::Index arg = 0;
        const double raw = (h.transpose() * s_coords).minCoeff(&arg);
        if (hg + (1.0 + alpha) * (raw - hg) <= hq) {
          witness[static_cast<std::size_t>(q)] = arg;
        } else {
          cache[unresolved[static_cast<std::size_t>(q)]] = {h, raw, cols};
        }
      }

      std::vector<std::size_t> next;
      std::vector<Eigen::Index> added;
      for (std::size_t q = 0; q < unresolved.size(); ++q) {
        if (sep.mask[q]) {
          absorbed.push_back(unresolved[q]);
        } else if (witness[q] >= 0 &&
                   !std::binary_search(vertices.begin(), vertices.end(), witness[q])) {
          added.push_back(witness[q]);
          next.push_back(unresolved[q]);
        }
      }
      if (added.empty()) break;
      vertices.insert(vertices.end(), added.begin(), added.end());
      std::sort(vertices.begin(), vertices.end());
      vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
      unresolved = std::move(next);
    }

    if (absorbed.empty()) break;
    std::sort(absorbed.begin(), absorbed.end());
    s_coords.conservativeResize(Eigen::NoChange, cols + static_cast<Eigen::Index>(absorbed.size()));
    for (std::size_t a = 0; a < absorbed.size(); ++a) {
      s_coords.col(cols + static_cast<Eigen::Index>(a)) = proj.coords.col(static_cast<Eigen::Index>(absorbed[a]));
      grown.push_back(residual[absorbed[a]]);
    }
    local.absorbed += absorbed.size();
    std::vector<std::size_t> rest;
    std::set_difference(pending.begin(), pending.end(), absorbed.begin(), absorbed.end(),
                        std::back_inserter(rest));
    pending = std::move(rest);
  }

  local.vertices = vertices.size();
  std::sort(grown.begin(), grown.end());
  if (stats) *stats = local;
  return grown;
}

RecoveredClustering recur(const PointSet& points, int k, double gamma, const RecurConfig& config,
                          const Oracle& oracle, QueryLedger& ledger, const RecurHooks& hooks) {
  points.validate();
  if (k < 2) throw InvalidArgument("recur: k must be >= 2");
  if (!(gamma > 0)) throw InvalidArgument("recur: gamma must be positive");
  if (!(config.epsilon >= 0 && config.epsilon <= 1)) throw InvalidArgument("recur: epsilon outside [0,1]");
  if (oracle.size() != points.size()) throw InvalidArgument("recur: oracle and points disagree on n");
  if (!hooks.latent.empty() && hooks.latent.size() != points.size()) {
    throw InvalidArgument("recur: latent labels and points disagree on n");
  }

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = points.size();
  const bool quota_mode = config.sampling.kind == SamplingMode::Kind::kQuota;
  std::size_t threshold = 0;
  if (quota_mode) {
    if (!(config.sampling.b_const > 0)) throw InvalidArgument("recur: b_const must be positive");
    const double d = static_cast<double>(points.dim());
    threshold = static_cast<std::size_t>(
        std::max(1.0, std::ceil(config.sampling.b_const * d * d * std::log(static_cast<double>(k)))));
  } else {
    threshold = config.sampling.m == 0 ? 10 * static_cast<std::size_t>(k) : config.sampling.m;
    if (threshold < static_cast<std::size_t>(k)) throw InvalidArgument("recur: batch m must be >= k");
  }

  RecoveredClustering out;
  out.assignment.assign(n, kUnlabeled);
  std::vector<PointId> residual = all_ids(points);
  std::vector<int> cache(n, kUnlabeled);
  std::vector<PointId> reps;
  Rng rng = make_rng(config.rng_seed, Stream::kRecur);
  const TessellationOptions topts{config.mvee_epsilon, config.infer_sample_cells};

  auto label_of = [&](PointId id) {
    if (cache[id] == kUnlabeled) {
      const PointId one[1] = {id};
      cache[id] = label_with_representatives(oracle, ledger, one, reps)[0];
    }
    return cache[id];
  };

  std::size_t round = 0;
  while (static_cast<double>(residual.size()) > config.epsilon * static_cast<double>(n)) {
    ++round;
    std::vector<std::vector<PointId>> drawn;
    std::uniform_int_distribution<std::size_t> pick(0, residual.size() - 1);
    int chosen = -1;
    std::size_t draws = 0;
    const std::size_t stall_limit = 10 * static_cast<std::size_t>(k) * threshold;
    while (chosen < 0) {
      const PointId id = residual[pick(rng)];
      const int l = label_of(id);
      if (static_cast<std::size_t>(l) >= drawn.size()) drawn.resize(static_cast<std::size_t>(l) + 1);
      drawn[static_cast<std::size_t>(l)].push_back(id);
      ++draws;
      if (quota_mode) {
        if (drawn[static_cast<std::size_t>(l)].size() >= threshold) chosen = l;
        else if (draws >= stall_limit) throw QuotaStall("recur: no cluster reached its quota; check k");
      } else if (draws == threshold) {
        std::size_t best = 0;
        for (std::size_t c = 0; c < drawn.size(); ++c) {
          if (drawn[c].size() > drawn[best].size()) best = c;
        }
        chosen = static_cast<int>(best);
      }
    }

    std::vector<PointId> sample = drawn[static_cast<std::size_t>(chosen)];
    std::sort(sample.begin(), sample.end());
    sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
    std::vector<PointId> expanded =
        config.use_hull_expansion
            ? greedy_hull_expansion(points, residual, sample, gamma,
                                    {config.mvee_epsilon, config.expansion_factor})
            : sample;

    TessellationTrace trace;
    const std::vector<PointId> learned =
        tessellation_learn(points, residual, expanded, gamma, oracle, ledger, topts, &trace);
    for (PointId id : learned) out.assignment[id] = chosen;
    std::vector<PointId> rest;
    rest.reserve(residual.size() - learned.size());
    std::set_difference(residual.begin(), residual.end(), learned.begin(), learned.end(),
                        std::back_inserter(rest));
    residual = std::move(rest);

    RoundStats st;
    st.round = round;
    st.cluster_local_id = chosen;
    st.sample_size = sample.size();
    st.expanded_size = expanded.size();
    st.recovered = learned.size();
    st.residual = residual.size();
    st.queries_cumulative = ledger.count();
    if (!hooks.latent.empty()) st.error_so_far = clustering_error(out.assignment, hooks.latent, k);
    st.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rounds.push_back(st);
    if (hooks.on_round) hooks.on_round(st, trace, learned, out.assignment);
  }
  return out;
}

std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t m) {
  if (cost.size() != m * m) throw InvalidArgument("min_cost_assignment: cost must be m x m");
  // Potentials-based Hungarian method, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0), v(m + 1, 0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= m; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(m, -1);
  for (std::size_t j = 1; j <= m; ++j) col[p[j] - 1] = static_cast<int>(j - 1);
  return col;
}

double clustering_error(std::span<const int> assignment, std::span<const int> labels, int k) {
  if (assignment.size() != labels.size()) throw InvalidArgument("clustering_error: size mismatch");
  if (labels.empty()) return 0.0;
  int m = k;
  for (int a : assignment) m = std::max(m, a + 1);
  for (int l : labels) {
    if (l < 0 || l >= k) throw InvalidArgument("clustering_error: latent label outside 0..k-1");
  }
  const auto mm = static_cast<std::size_t>(m);
  std::vector<double> overlap(mm * mm, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (assignment[i] == kUnlabeled) continue;
    if (assignment[i] < 0) throw InvalidArgument("clustering_error: negative cluster id");
    overlap[static_cast<std::size_t>(assignment[i]) * mm + static_cast<std::size_t>(labels[i])] += 1.0;
  }
  std::vector<double> cost(overlap.size());
  std::transform(overlap.begin(), overlap.end(), cost.begin(), [](double x) { return -x; });
  const auto col = min_cost_assignment(cost, mm);
  double matched = 0;
  for (std::size_t i = 0; i < mm; ++i) matched += overlap[i * mm + static_cast<std::size_t>(col[i])];
  return 1.0 - matched / static_cast<double>(labels.size());
}

}  // namespace scq
