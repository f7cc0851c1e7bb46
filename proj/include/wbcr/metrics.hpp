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
#include <optional>
#include <vector>

#include "wbcr/channel.hpp"
#include "wbcr/scenario.hpp"

namespace wbcr {

/// Downlink SINR of user k with precoder columns w (alpha-masked), no
/// sensing interference.
double comm_sinr(const ChannelSet& ch, const arma::umat& alpha, const arma::cx_mat& w_cols,
                 arma::uword l, arma::uword k);

/// Same with the sensing interference term g^H S g added to the denominator.
double comm_sinr_with_sensing(const ChannelSet& ch, const arma::umat& alpha,
                              const arma::cx_mat& w_cols, const arma::cx_mat& S, arma::uword l,
                              arma::uword k);

/// Per-(sub-carrier, user) rate in bits/s/Hz. For sensing sub-carriers the
/// frame splits into a detection part (w_det, no sensing interference) and a
/// sensing part (w_sens with the secondary active); otherwise the whole
/// post-estimation window uses w_det.
double comm_rate(const ChannelSet& ch, const arma::umat& alpha, const arma::cx_mat& w_det,
                 const arma::cx_mat& w_sens, const arma::cx_mat& S, arma::uword l, arma::uword k,
                 const Scenario& sc, bool in_psi_s);

/// (tau_s/tau) log2(1 + sensing SINR) on sensing sub-carriers, else 0.
double sens_rate(const ChannelSet& ch, const arma::cx_vec& u, const arma::cx_mat& S,
                 const arma::cx_mat& R_x, arma::uword l, arma::uword t, const Scenario& sc,
                 bool in_psi_s);

/// Sampled radar patterns over an angle grid:
///   p1 = |a(theta)^H s|^2, p2[t] = |u_t^H b(theta)|^2, p3[t] = p1 * p2[t].
struct Beampatterns {
  arma::vec theta;  // radians
  arma::vec p1;
  arma::mat p2;  // grid x T
  arma::mat p3;  // grid x T
};

Beampatterns beampatterns(const arma::cx_vec& s, const std::vector<arma::cx_vec>& u,
                          int n_antennas, const arma::vec& grid);

arma::vec angle_grid(double step_deg);

struct AngleMse {
  double transmit = 0.0;
  double receive = 0.0;
  double combined = 0.0;
  int transmit_misses = 0;  // targets without a matched transmit peak
};

/// Peak-based angle estimation against the true bearings. The transmit
/// pattern is matched greedily peak-to-target; receive/combined estimates
/// take each target's tallest pattern peak.
AngleMse angle_mse(const Beampatterns& bp, const arma::vec& true_thetas);

/// Tallest local maximum of column t of p3, in radians.
double combined_peak_angle(const Beampatterns& bp, arma::uword t);

/// Distance from the true bearing to the nearest distinct local maximum of
/// target t's combined pattern, in radians.
double nearest_peak_offset(const Beampatterns& bp, arma::uword t, double true_theta);

struct TrialMetrics {
  double comm_sum_rate = 0.0;
  double sens_sum_rate = 0.0;
  arma::vec per_user_rates;    // K
  arma::vec per_target_rates;  // T
  std::optional<Beampatterns> patterns;
  std::optional<AngleMse> mse;
  std::vector<double> ao_trace;  // first sensing sub-carrier, when present
};

}  // namespace wbcr
