// SPDX-License-Identifier: Apache-2.0
//
// wbcr-sim: wideband cognitive-radio communication and sensing simulator
// Copyright (C) 2026 wbcr-sim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <armadillo>
#include <string>
#include <vector>

namespace wbcr {

// Small dense semidefinite programming over complex Hermitian blocks:
//
//   maximize   sum_b Tr(C_b X_b)
//   subject to sum_b Tr(A_{j,b} X_b) <= b_j,   j = 1..m
//              X_b >= 0 (PSD), b = 1..nb
//
// Hermitian data is lifted to real-symmetric form via the
// [Re -Im; Im Re] embedding; the real cone is handled by an
// infeasible-start primal-dual path-following method with
// Nesterov-Todd scaling and a Mehrotra-style centering heuristic.

struct SdpConstraint {
  std::vector<arma::cx_mat> A;  // one Hermitian matrix per block (may be empty = zero)
  double b = 0.0;
};

struct SdpProblem {
  std::vector<arma::uword> block_dims;
  std::vector<arma::cx_mat> objective;  // Hermitian C_b per block
  std::vector<SdpConstraint> constraints;
};

enum class SdpStatus { optimal, max_iter, infeasible };

struct SdpSolution {
  std::vector<arma::cx_mat> X;  // PSD blocks
  double objective_value = 0.0;
  SdpStatus status = SdpStatus::max_iter;
  double duality_gap = 0.0;          // relative |p - d| / (1 + |p| + |d|)
  double constraint_residual = 0.0;  // max relative violation
  int iterations = 0;
};

/// Solves the block SDP to relative duality gap <= tol. Never throws on
/// infeasible/unbounded instances; the status field reports the outcome.
SdpSolution solve_sdp(const SdpProblem& p, double tol = 1e-9);

/// max(0, -lambda_min(X)) for Hermitian X.
double psd_residual(const arma::cx_mat& X);

/// Plain-text dump of a problem instance for external cross-checking.
std::string sdp_problem_to_text(const SdpProblem& p);

}  // namespace wbcr
