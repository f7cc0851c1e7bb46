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
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wbcr/rng.hpp"
#include "wbcr/scenario.hpp"

namespace wbcr {

/// All per-sub-carrier channels for one coherence block.
///   h[l][k] : M-vector, primary BS -> user k
///   g[l][k] : N-vector, secondary TX -> user k
///   F[l]    : MxN, primary BS -> secondary RX array
///   a[l][t], b[l][t] : N-vectors, unit-norm transmit/receive steering to target t
///   G_si[l] : NxN self-interference channel (unit large-scale gain)
///   beta[t] : complex reflection amplitude, |beta[t]| fixed by the scenario
struct ChannelSet {
  std::vector<std::vector<arma::cx_vec>> h;
  std::vector<std::vector<arma::cx_vec>> g;
  std::vector<arma::cx_mat> F;
  std::vector<std::vector<arma::cx_vec>> a;
  std::vector<std::vector<arma::cx_vec>> b;
  std::vector<arma::cx_mat> G_si;
  arma::cx_vec beta;
  arma::vec theta;  // true target bearings [rad], from the secondary BS
  double sigma2 = 0.0;
  double beta_si = 0.0;  // residual self-interference gain (linear)

  arma::uword n_subcarriers() const { return F.size(); }
};

struct Positions {
  std::vector<std::array<double, 2>> users;
  std::vector<std::array<double, 2>> targets;
};

/// Street-canyon LoS path loss: PL[dB] = 32.4 + 21 log10(d) + 20 log10(fc[GHz]).
/// Returns the linear gain 10^(-PL/10). Throws std::domain_error for d <= 0.
double path_loss_umi(double distance_m, double fc_hz);

/// Half-wavelength ULA steering vector, element n = exp(j pi n sin(theta)) / sqrt(N).
arma::cx_vec steering_vector(int n_antennas, double theta);

/// sqrt(kappa zeta / (kappa+1)) * los + sqrt(zeta / (kappa+1)) * W,
/// W with i.i.d. CN(0,1) entries drawn row-major from `rng`.
arma::cx_mat sample_rician(int rows, int cols, double kappa, double zeta,
                           const arma::cx_mat& los, Stream& rng);

/// Uniform positions inside the configured user/target disks.
Positions sample_positions(const Scenario& sc, Stream& rng);

/// Positions with targets pinned at given bearings (radians) from the
/// secondary BS, at the nominal target-region range. Users are sampled.
Positions sample_positions_fixed_targets(const Scenario& sc, const std::vector<double>& target_angles,
                                         Stream& rng);

/// Draws every channel for one coherence block. Pure function of
/// (scenario, positions, seed); sub-carriers use independent derived streams.
ChannelSet generate_channel_set(const Scenario& sc, const Positions& pos, std::uint64_t seed);

/// x + e with complex-Gaussian e of variance (1-eta)|x|^2 ('corrected') or
/// eta|x|^2 ('paper').
std::complex<double> inject_csi_error_entry(std::complex<double> x, double eta, Stream& rng,
                                            CsiErrorConvention conv);

/// Entrywise perturbation of h, g and F only; a, b, G_si and beta are copied.
ChannelSet inject_csi_error(const ChannelSet& ch, double eta, Stream& rng,
                            CsiErrorConvention conv);

void dump_channels_json(const ChannelSet& ch, const std::string& path);

}  // namespace wbcr
