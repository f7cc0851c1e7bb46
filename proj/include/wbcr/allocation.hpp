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

#include "wbcr/channel.hpp"
#include "wbcr/rng.hpp"

namespace wbcr {

/// Binary comm assignment (L x K) plus the ordered sensing sub-carrier set.
struct Allocation {
  arma::umat alpha;                 // L x K, alpha(l,k) in {0,1}
  std::vector<arma::uword> psi_s;   // sensing sub-carriers, |psi_s| = L_s

  bool in_psi_s(arma::uword l) const {
    for (auto x : psi_s)
      if (x == l) return true;
    return false;
  }
};

/// Per user, marks the L_c sub-carriers with the largest ||h[l][k]||^2.
/// Sub-carriers may be shared between users; ties break toward lower index.
arma::umat allocate_comm(const std::vector<std::vector<arma::cx_vec>>& h, int L_c);

/// Average over n_snapshots of ||F_l^H x_l + z||^2 with x_l built from unit
/// power random symbols through the given precoders (columns masked by alpha).
double interference_energy(const ChannelSet& ch, const std::vector<arma::cx_mat>& precoders,
                           const arma::umat& alpha, arma::uword l, int n_snapshots, Stream& rng);

/// The L_s indices with the smallest energies, ascending by energy,
/// ties broken by lower index.
std::vector<arma::uword> select_sensing(const arma::vec& energies, int L_s);

/// Uniform random draw of L_s distinct indices (non-cooperative benchmark),
/// returned in ascending index order.
std::vector<arma::uword> select_sensing_random(arma::uword L, int L_s, Stream& rng);

}  // namespace wbcr
