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

#include "wbcr/allocation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace wbcr {

arma::umat allocate_comm(const std::vector<std::vector<arma::cx_vec>>& h, int L_c) {
  const arma::uword L = h.size();
  if (L == 0) throw std::domain_error("allocate_comm: no sub-carriers");
  const arma::uword K = h[0].size();
  if (L_c < 1 || static_cast<arma::uword>(L_c) > L)
    throw std::domain_error("allocate_comm: L_c must satisfy 1 <= L_c <= L");

  arma::umat alpha(L, K, arma::fill::zeros);
  for (arma::uword k = 0; k < K; ++k) {
    std::vector<std::pair<double, arma::uword>> gains(L);
    for (arma::uword l = 0; l < L; ++l) {
      const double n = arma::norm(h[l][k]);
      gains[l] = {n * n, l};
    }
    std::sort(gains.begin(), gains.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    for (int i = 0; i < L_c; ++i) alpha(gains[i].second, k) = 1;
  }
  return alpha;
}

double interference_energy(const ChannelSet& ch, const std::vector<arma::cx_mat>& precoders,
                           const arma::umat& alpha, arma::uword l, int n_snapshots, Stream& rng) {
  if (n_snapshots < 1) throw std::domain_error("interference_energy: n_snapshots >= 1 required");
  const arma::cx_mat& F = ch.F[l];
  const arma::uword N = F.n_cols;
  const arma::uword K = alpha.n_cols;

  // Effective per-user receive signatures F^H (alpha_k w_k), fixed per snapshot.
  arma::cx_mat B(N, K, arma::fill::zeros);
  for (arma::uword k = 0; k < K; ++k)
    if (alpha(l, k)) B.col(k) = F.t() * precoders[l].col(k);

  const double noise_scale = std::sqrt(ch.sigma2);
  double acc = 0.0;
  arma::cx_vec q(K), y(N);
  for (int s = 0; s < n_snapshots; ++s) {
    for (arma::uword k = 0; k < K; ++k) q(k) = rng.cgauss();
    y = B * q;
    for (arma::uword n = 0; n < N; ++n) y(n) += noise_scale * rng.cgauss();
    const double e = arma::norm(y);
    acc += e * e;
  }
  return acc / n_snapshots;
}

std::vector<arma::uword> select_sensing(const arma::vec& energies, int L_s) {
  const arma::uword L = energies.n_elem;
  if (L_s < 1 || static_cast<arma::uword>(L_s) > L)
    throw std::domain_error("select_sensing: L_s must satisfy 1 <= L_s <= L");
  std::vector<arma::uword> idx(L);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](arma::uword x, arma::uword y) {
    if (energies(x) != energies(y)) return energies(x) < energies(y);
    return x < y;
  });
  idx.resize(L_s);
  return idx;
}

std::vector<arma::uword> select_sensing_random(arma::uword L, int L_s, Stream& rng) {
  if (L_s < 1 || static_cast<arma::uword>(L_s) > L)
    throw std::domain_error("select_sensing_random: L_s must satisfy 1 <= L_s <= L");
  std::vector<arma::uword> idx(L);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates, then ascending order for a stable contract.
  for (int i = 0; i < L_s; ++i) {
    const arma::uword j = i + rng.index(L - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(L_s);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace wbcr
