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

#include <stdexcept>
#include <string>

namespace scq {

/*! Base class of every error raised by the library.
 */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Khachiyan iteration exceeded its cap.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

//! Quadratic form of a metric came out clearly negative.
class PsdViolation : public Error {
 public:
  using Error::Error;
};

//! Feasibility simplex did not terminate.
class LpFailure : public Error {
 public:
  using Error::Error;
};

//! A cluster label has no points.
class EmptyCluster : public Error {
 public:
  using Error::Error;
};

//! Point id outside 0..n-1.
class InvalidId : public Error {
 public:
  using Error::Error;
};

//! Point passed to cell_key lies outside the ellipsoid.
class NotInEllipsoid : public Error {
 public:
  using Error::Error;
};

//! Sampling never reached the per-cluster quota.
class QuotaStall : public Error {
 public:
  using Error::Error;
};

//! Baseline majority sample came out empty.
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

//! Instance generator could not satisfy its margin contract.
class GenerationFailure : public Error {
 public:
  using Error::Error;
};

//! Sphere packing produced fewer than two points.
class PackingTooSmall : public Error {
 public:
  using Error::Error;
};

//! Malformed instance file.
class ParseError : public Error {
 public:
  using Error::Error;
};

//! Loaded instance does not have the margin it declares.
class MarginMismatch : public Error {
 public:
  using Error::Error;
};

//! Generic precondition violation (bad sizes, bad parameters).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace scq
