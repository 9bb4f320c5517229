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
#include <vector>

#include "scq/geometry.hpp"
#include "scq/oracle.hpp"

namespace scq {

/*! Constants of the monochromatic tessellation of a rank-r rounding ellipsoid.
 *
 *  gamma is clamped at 1/2; for larger margins the construction is the one
 *  for 1/2.
 */
struct TessParams {
  std::size_t rank = 0;
  double gamma_eff = 0;
  double c = 0;    // sqrt(5)
  double phi = 1;  // rounding stretch of the ellipsoid
  double alpha = 0;
  int b = 0;
  std::vector<double> beta;  // one per axis

  //! Largest possible number of distinct keys, (2(b+1)+1)^r, saturating.
  double cell_budget() const;
};

inline constexpr double kTessConstant = 2.2360679774997896964;  // sqrt(5)
inline constexpr double kMaxTessGamma = 0.5;

TessParams tess_params(std::size_t rank, double gamma, std::span<const double> semiaxes,
                       double phi);
//! alpha alone: gamma_eff / (c sqrt(2) phi r).
double tess_alpha(std::size_t rank, double gamma, double phi);

/*! Signed per-axis level vector of a hyperrectangle.
 *
 *  Level 0 covers |t_i| <= beta_i; level +-j covers
 *  beta_i (1+alpha)^{j-1} < |t_i| <= beta_i (1+alpha)^j with the sign of t_i.
 */
struct CellKey {
  std::vector<std::int32_t> levels;
  auto operator<=>(const CellKey&) const = default;
};

//! Throws NotInEllipsoid unless y is in E; E must have rank >= 1.
CellKey cell_key(const Ellipsoid& e, const TessParams& params,
                 const Eigen::Ref<const Eigen::VectorXd>& y);

struct TessCell {
  CellKey key;
  std::vector<PointId> members;  // ascending ids
  PointId representative = 0;    // lowest id
  bool queried = false;
  bool contains_sample = false;
  int answer = 0;  // +1 / -1; +1 for inferred cells
};

/*! Everything tessellation_learn computed, for audits and the JSON dump.
 */
struct TessellationTrace {
  Ellipsoid ellipsoid;
  RoundingCertificate certificate;
  TessParams params;
  std::vector<TessCell> cells;  // sorted by key
  std::size_t sample_size = 0;
  std::uint64_t queries = 0;
};

struct TessellationOptions {
  double mvee_epsilon = 1e-3;
  //! A cell holding a sample point is inside the cluster by monochromaticity
  //! and is labelled without a query. Off: every nonempty cell is queried.
  bool infer_sample_cells = true;
};

/*! Learns C ∩ E where E is the MVEE of `sample` (all in one latent cluster C).
 *
 *  `residual` lists the candidate points. Returns ascending ids: every point in
 *  a cell answered +1, plus the sample itself.
 */
std::vector<PointId> tessellation_learn(const PointSet& points,
                                        std::span<const PointId> residual,
                                        std::span<const PointId> sample, double gamma,
                                        const Oracle& oracle, QueryLedger& ledger,
                                        const TessellationOptions& options = {},
                                        TessellationTrace* trace = nullptr);

//! JSON dump of a trace. `labels`, when given, adds the latent label of each
//! member for visual inspection.
void write_tessellation_json(std::ostream& out, std::span<const TessellationTrace> traces,
                             std::span<const int> labels = {});

}  // namespace scq
