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
#include <vector>

#include "wbcr/scenario.hpp"

namespace wbcr {

// Communication-only beamforming on the unit-trace complex sphere
// M = { V in C^{(M+1) x K} : Tr(V V^H) = 1 }. The power budget is folded
// into lifted channels hhat_k = sqrt(p_max) [h_k; 0], and the extra row is
// a slack absorbing unused power. A fractional-programming outer loop
// updates per-user auxiliary weights; the inner loop is Riemannian
// conjugate gradient with Hestenes-Stiefel directions and Armijo search.

struct RcgParams {
  double delta_1 = 1e-6;  // inner loop: gradient-norm tolerance
  double delta_2 = 1e-6;  // outer loop: absolute objective-change tolerance
  int max_inner = 500;
  int max_outer = 100;
  double armijo_c1 = 1e-4;
  double armijo_contraction = 0.5;
  int armijo_max_backtracks = 50;
  Retraction retraction = Retraction::sphere;
  // Prefactor on the recorded rate objective, e.g. (tau - tau_c)/tau.
  double rate_weight = 1.0;
};

struct RcgTrace {
  std::vector<double> objective;   // recorded objective (non-increasing)
  std::vector<double> grad_norm;   // Riemannian gradient norm per entry
  std::vector<arma::uword> outer_marks;  // trace indices of outer updates
};

struct RcgResult {
  arma::cx_mat V_tilde;  // (M+1) x K point on the sphere
  arma::vec mu;          // final auxiliary weights (per-user SINRs)
  RcgTrace trace;
  double objective = 0.0;  // final recorded objective; -objective = sum rate
  double sum_rate = 0.0;   // rate_weight * sum_k log2(1 + sinr_k)
  int inner_iterations_total = 0;
  int outer_iterations = 0;
  bool all_inner_converged = true;  // every inner loop hit ||grad|| <= delta_1
};

/// hhat_k = sqrt(p_max) [h_k ; 0]; h given as an M x K matrix of columns.
arma::cx_mat lift_channels(const arma::cx_mat& h_cols, double p_max);

/// SINR of user k for a lifted point: |hhat_k^H V e_k|^2 over
/// (sum_{i != k} |hhat_k^H V e_i|^2 + sigma2).
double comm_sinr_lifted(const arma::cx_mat& V, const arma::cx_mat& Hhat, arma::uword k,
                        double sigma2);

/// mu_k = comm_sinr_lifted(V, ., k) for all k.
arma::vec fp_update_mu(const arma::cx_mat& V, const arma::cx_mat& Hhat, double sigma2);

/// Sum of weighted ratios sum_k muhat_k |hhat_k^H V e_k|^2 / (sum_i |hhat_k^H V e_i|^2 + sigma2).
double fp_ratio_sum(const arma::cx_mat& V, const arma::vec& mu_hat, const arma::cx_mat& Hhat,
                    double sigma2);

/// Euclidean gradient of the minimized objective f(V) = -fp_ratio_sum(V)
/// with respect to the real inner product Re Tr(X^H Y).
arma::cx_mat euclidean_gradient(const arma::cx_mat& V, const arma::vec& mu_hat,
                                const arma::cx_mat& Hhat, double sigma2);

/// G - Re<X, G> X; the result is tangent at X (Re Tr(X^H out) = 0).
arma::cx_mat project_tangent(const arma::cx_mat& X, const arma::cx_mat& G);

/// (X + step dir) normalized back to unit trace-norm. The elementwise mode
/// maps every entry to equal modulus instead (comparison only).
arma::cx_mat retract(const arma::cx_mat& X, double step, const arma::cx_mat& dir,
                     Retraction mode = Retraction::sphere);

/// Full double-loop solve. Hhat is (M+1) x Ka with one column per active
/// user; inactive users are excluded by the caller and stay identically zero.
RcgResult rcg_solve(const arma::cx_mat& Hhat, double sigma2, const RcgParams& params);

/// w_k = sqrt(p_max) * (top M rows of column k).
arma::cx_mat recover_precoders(const arma::cx_mat& V_tilde, double p_max);

}  // namespace wbcr
