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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wbcr/allocation.hpp"

using namespace wbcr;

namespace {

// h[l][k] with prescribed per-(l,k) gains.
std::vector<std::vector<arma::cx_vec>> gains_to_channels(const arma::mat& gains) {
  std::vector<std::vector<arma::cx_vec>> h(gains.n_rows);
  for (arma::uword l = 0; l < gains.n_rows; ++l) {
    h[l].resize(gains.n_cols);
    for (arma::uword k = 0; k < gains.n_cols; ++k) {
      arma::cx_vec v(2, arma::fill::zeros);
      v(0) = std::sqrt(gains(l, k));
      h[l][k] = v;
    }
  }
  return h;
}

ChannelSet tiny_channelset(const arma::cx_mat& F, double sigma2) {
  ChannelSet ch;
  ch.F.push_back(F);
  ch.sigma2 = sigma2;
  return ch;
}

}  // namespace

TEST_CASE("comm allocation picks the strongest sub-carriers per user") {
  arma::mat gains(5, 1);
  gains.col(0) = arma::vec{5, 1, 3, 2, 4};
  const arma::umat alpha = allocate_comm(gains_to_channels(gains), 3);
  CHECK(alpha(0, 0) == 1);
  CHECK(alpha(4, 0) == 1);
  CHECK(alpha(2, 0) == 1);
  CHECK(alpha(1, 0) == 0);
  CHECK(alpha(3, 0) == 0);
}

TEST_CASE("L_c = L assigns everything; identical users share") {
  arma::mat gains(4, 2);
  gains.col(0) = arma::vec{1, 2, 3, 4};
  gains.col(1) = arma::vec{1, 2, 3, 4};
  const arma::umat all = allocate_comm(gains_to_channels(gains), 4);
  CHECK(arma::accu(all) == 8);
  const arma::umat top2 = allocate_comm(gains_to_channels(gains), 2);
  CHECK(arma::accu(arma::umat(top2.col(0) != top2.col(1))) == 0);
  CHECK_THROWS_AS(allocate_comm(gains_to_channels(gains), 5), std::domain_error);
}

TEST_CASE("property: allocation is equivariant under sub-carrier permutation") {
  Stream rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    arma::mat gains(6, 3);
    for (auto& v : gains) v = rng.uniform();
    const arma::umat base = allocate_comm(gains_to_channels(gains), 2);

    arma::uvec perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    for (arma::uword i = 5; i > 0; --i) std::swap(perm(i), perm(rng.index(i + 1)));

    arma::mat permuted(6, 3);
    for (arma::uword l = 0; l < 6; ++l) permuted.row(l) = gains.row(perm(l));
    const arma::umat shuffled = allocate_comm(gains_to_channels(permuted), 2);
    for (arma::uword l = 0; l < 6; ++l)
      for (arma::uword k = 0; k < 3; ++k) CHECK(shuffled(l, k) == base(perm(l), k));
  }
}

TEST_CASE("sensing selection: smallest energies, ascending, index tie-break") {
  const arma::vec e{5, 1, 3, 2, 4};
  CHECK(select_sensing(e, 1) == std::vector<arma::uword>{1});
  CHECK(select_sensing(e, 2) == std::vector<arma::uword>{1, 3});
  const arma::vec flat{7, 7, 7, 7};
  CHECK(select_sensing(flat, 2) == std::vector<arma::uword>{0, 1});
  CHECK_THROWS_AS(select_sensing(e, 6), std::domain_error);
}

TEST_CASE("property: selection is invariant to a constant energy offset") {
  Stream rng(22);
  for (int rep = 0; rep < 50; ++rep) {
    arma::vec e(7);
    for (auto& v : e) v = rng.uniform();
    CHECK(select_sensing(e, 3) == select_sensing(arma::vec(e + 11.25), 3));
  }
}

TEST_CASE("random selection draws L_s distinct indices") {
  Stream rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = select_sensing_random(5, 3, rng);
    CHECK(s.size() == 3);
    CHECK(s[0] < s[1]);
    CHECK(s[1] < s[2]);
    CHECK(s[2] < 5);
  }
}

TEST_CASE("interference energy: no leakage when F = 0 and noise is off") {
  ChannelSet ch = tiny_channelset(arma::cx_mat(4, 4, arma::fill::zeros), 1e-30);
  std::vector<arma::cx_mat> w{arma::cx_mat(4, 2, arma::fill::ones)};
  arma::umat alpha(1, 2, arma::fill::ones);
  Stream rng(31);
  CHECK(interference_energy(ch, w, alpha, 0, 100, rng) < 1e-25);
}

TEST_CASE("interference energy: zero precoders leave the noise floor N sigma^2") {
  const double sigma2 = 0.37;
  ChannelSet ch = tiny_channelset(arma::cx_mat(3, 6, arma::fill::randu), sigma2);
  std::vector<arma::cx_mat> w{arma::cx_mat(3, 2, arma::fill::zeros)};
  arma::umat alpha(1, 2, arma::fill::ones);
  Stream rng(32);
  const double e = interference_energy(ch, w, alpha, 0, 10000, rng);
  CHECK(e == doctest::Approx(6.0 * sigma2).epsilon(0.05));
}

TEST_CASE("interference energy: deterministic for a fixed stream seed") {
  ChannelSet ch = tiny_channelset(arma::cx_mat(4, 4, arma::fill::eye), 0.1);
  std::vector<arma::cx_mat> w{arma::cx_mat(4, 3, arma::fill::ones)};
  arma::umat alpha(1, 3, arma::fill::ones);
  Stream r1(33), r2(33);
  CHECK(interference_energy(ch, w, alpha, 0, 64, r1) ==
        interference_energy(ch, w, alpha, 0, 64, r2));
}
