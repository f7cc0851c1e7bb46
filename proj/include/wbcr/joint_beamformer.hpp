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
#include <functional>
#include <vector>

#include "wbcr/allocation.hpp"
#include "wbcr/channel.hpp"
#include "wbcr/rng.hpp"
#include "wbcr/scenario.hpp"
#include "wbcr/sdp.hpp"

namespace wbcr {

// Joint design for a sensing sub-carrier: alternating optimization between
// closed-form receive combiners (a generalized Rayleigh quotient per target)
// and the lifted transmit design, where a convexified surrogate is maximized
// over PSD covariance blocks via tangent refreshes around the pure SDP core,
// followed by rank-one extraction with Gaussian randomization.

struct AoMode {
  bool comm_terms = true;               // include user rate terms and W blocks
  bool interference_constraint = true;  // enforce per-user |g^H s|^2 cap
};

struct JointSolution {
  std::vector<arma::uword> users;  // assigned user indices on this sub-carrier
  std::vector<arma::cx_mat> W;     // lifted per-user covariances (M x M)
  arma::cx_mat S;                  // sensing covariance (N x N)
  std::vector<arma::cx_vec> w;     // recovered precoders
  arma::cx_vec s;                  // recovered sensing waveform, ||s||^2 = Tr(S)
  std::vector<arma::cx_vec> u;     // unit-norm combiners, one per target
  std::vector<double> objective_trace;        // true objective per AO iteration
  arma::mat per_target_sinr;       // iterations x T
  arma::mat per_user_sinr;         // iterations x Ka
  int iterations = 0;
};

struct AoParams {
  double epsilon = 1e-3;     // relative-improvement stop
  int max_iterations = 25;
  int surrogate_max_steps = 16;   // tangent refreshes per transmit update
  double surrogate_tol = 1e-6;    // relative surrogate-change tolerance
  double sdp_tol = 1e-8;
  long long gr_draws = 1000;
  // Objective band within which the steering-aligned covariance
  // representative is preferred over a coherent rank-one one.
  double alignment_tolerance = 0.02;
};

/// MMSE combiner u = Q^{-1} f / ||Q^{-1} f|| in covariance form; maximizes the
/// sensing SINR of target t for fixed S and primary covariance R_x.
arma::cx_vec mmse_combiner(const ChannelSet& ch, const arma::cx_mat& S, const arma::cx_mat& R_x,
                           arma::uword l, arma::uword t, double sigma2);

/// Sensing SINR of target t, covariance form.
double sensing_sinr(const ChannelSet& ch, const arma::cx_vec& u, const arma::cx_mat& S,
                    const arma::cx_mat& R_x, arma::uword l, arma::uword t, double sigma2);

/// First-order expansion data for the transmit-design surrogate around the
/// previous iterate (W_p, S_p) with fixed combiners.
struct ScaCoefficients {
  std::vector<arma::uword> users;     // assigned users (may be empty)
  arma::vec D;                        // per assigned user
  arma::vec B;                        // per target
  std::vector<std::vector<arma::cx_vec>> f;  // f[t][j] = a_j (b_j^H u_t)
  std::vector<arma::cx_vec> g_int;    // F u_t
  std::vector<arma::cx_vec> g_si;     // G_si u_t
  std::vector<arma::cx_mat> W_p;      // expansion point
  arma::cx_mat S_p;
};

ScaCoefficients sca_coefficients(const std::vector<arma::cx_mat>& W_p, const arma::cx_mat& S_p,
                                 const std::vector<arma::cx_vec>& u,
                                 const std::vector<arma::uword>& users, const ChannelSet& ch,
                                 arma::uword l, double sigma2, const AoMode& mode);

/// Affine functional of the covariance blocks: sum_b <coef_b, X_b> + constant.
struct AffineExpr {
  std::vector<arma::cx_mat> coef;
  double constant = 0.0;

  double eval(const std::vector<arma::cx_mat>& X) const;
};

/// Concave transmit-design subproblem: maximize
///   scale * ( sum_m log2(log_arg_m(X)) + linear(X) )
/// over PSD blocks under trace-linear constraints. Solved by refreshing
/// tangents of the log terms around the current iterate, each refresh being
/// one pure SDP solve, with an exact segment search for monotone ascent.
struct Q3Problem {
  std::vector<arma::uword> block_dims;  // [W blocks..., S] (present blocks only)
  bool has_comm_blocks = false;
  bool has_sensing_block = false;
  std::vector<AffineExpr> log_arg;
  AffineExpr linear;
  std::vector<AffineExpr> con_lhs;  // constraints con_lhs <= con_rhs
  std::vector<double> con_rhs;
  double scale = 1.0;

  double objective(const std::vector<arma::cx_mat>& X) const;
  bool feasible(const std::vector<arma::cx_mat>& X, double slack = 1e-9) const;
};

Q3Problem build_q3(const ScaCoefficients& coeffs, const ChannelSet& ch, arma::uword l,
                   const Scenario& sc, const AoMode& mode);

struct Q3SolveResult {
  std::vector<arma::cx_mat> X;
  double objective = 0.0;
  int refreshes = 0;
};

Q3SolveResult solve_q3(const Q3Problem& q3, const std::vector<arma::cx_mat>& start,
                       const AoParams& prm);

/// Rank-one extraction: principal eigenvector when X is numerically rank one
/// (lambda2/lambda1 <= 1e-6), otherwise Gaussian randomization with every
/// candidate rescaled to trace_budget, filtered by `feasible` and ranked by
/// `objective`. Throws when no candidate is feasible.
///
/// When `tie_break` is given, candidates whose objective lies within
/// tie_band (relative) of the best are re-ranked by it; the randomization
/// objective is near-flat and the secondary score picks the representative.
arma::cx_vec rank1_extract(const arma::cx_mat& X, double trace_budget,
                           const std::function<bool(const arma::cx_vec&)>& feasible,
                           const std::function<double(const arma::cx_vec&)>& objective,
                           long long draws, Stream& rng,
                           const std::function<double(const arma::cx_vec&)>& tie_break = {},
                           double tie_band = 0.0);

/// True (non-surrogate) objective value for a candidate design.
double joint_objective(const ChannelSet& ch, const std::vector<arma::uword>& users,
                       const std::vector<arma::cx_mat>& W, const arma::cx_mat& S,
                       const std::vector<arma::cx_vec>& u, arma::uword l, const Scenario& sc,
                       const AoMode& mode);

/// Full alternating optimization for sub-carrier l in the sensing set.
JointSolution ao_solve(const ChannelSet& ch, const arma::umat& alpha, arma::uword l,
                       const Scenario& sc, const AoMode& mode, Stream& gr_rng,
                       const AoParams& prm);

/// AoParams derived from a Scenario (epsilon, GR draws, tolerances).
AoParams ao_params_from(const Scenario& sc);

}  // namespace wbcr
