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

#include <cmath>

#include "wbcr/manifold_beamformer.hpp"
#include "wbcr/metrics.hpp"

using namespace wbcr;

namespace {

constexpr double kPi = 3.14159265358979323846;

ChannelSet one_carrier(int M, int N, int K, double sigma2, Stream& rng) {
  ChannelSet ch;
  ch.sigma2 = sigma2;
  ch.beta_si = 0.0;
  ch.h.resize(1);
  ch.g.resize(1);
  ch.h[0].resize(K);
  ch.g[0].resize(K);
  for (int k = 0; k < K; ++k) {
    arma::cx_vec h(M), g(N);
    for (auto& v : h) v = rng.cgauss();
    for (auto& v : g) v = rng.cgauss();
    ch.h[0][k] = h;
    ch.g[0][k] = g;
  }
  ch.F.push_back(arma::cx_mat(M, N, arma::fill::zeros));
  ch.a.resize(1);
  ch.b.resize(1);
  ch.G_si.push_back(arma::cx_mat(N, N, arma::fill::zeros));
  ch.theta.set_size(0);
  ch.beta.set_size(0);
  return ch;
}

}  // namespace

TEST_CASE("comm rate: unassigned user earns nothing") {
  Stream rng(81);
  ChannelSet ch = one_carrier(4, 4, 2, 0.1, rng);
  Scenario sc = default_scenario();
  sc.M = 4;
  sc.N = 4;
  sc.K = 2;
  sc.tau_c = 2;
  arma::umat alpha(1, 2, arma::fill::zeros);
  alpha(0, 0) = 1;
  arma::cx_mat w(4, 2, arma::fill::ones);
  CHECK(comm_rate(ch, alpha, w, w, arma::cx_mat(), 0, 1, sc, false) == 0.0);
}

TEST_CASE("comm rate: single user at unit SINR earns one weighted bit") {
  Stream rng(82);
  ChannelSet ch = one_carrier(4, 4, 1, 0.04, rng);
  Scenario sc = default_scenario();
  sc.M = 4;
  sc.N = 4;
  sc.K = 1;
  sc.tau_c = 1;
  arma::umat alpha(1, 1, arma::fill::ones);
  // scale w so that |h^H w|^2 = sigma^2
  arma::cx_mat w(4, 1);
  w.col(0) = ch.h[0][0];
  const double hw = std::norm(arma::cdot(ch.h[0][0], w.col(0)));
  w *= std::sqrt(ch.sigma2 / hw);
  const double rate = comm_rate(ch, alpha, w, w, arma::cx_mat(), 0, 0, sc, false);
  CHECK(rate == doctest::Approx((sc.tau - sc.tau_c) / double(sc.tau)).epsilon(1e-12));
}

TEST_CASE("comm rate on a sensing sub-carrier: zero S collapses both phases") {
  Stream rng(83);
  ChannelSet ch = one_carrier(4, 4, 2, 0.2, rng);
  Scenario sc = default_scenario();
  sc.M = 4;
  sc.N = 4;
  sc.K = 2;
  sc.tau_c = 2;
  arma::umat alpha(1, 2, arma::fill::ones);
  arma::cx_mat w(4, 2);
  for (auto& v : w) v = rng.cgauss();
  const arma::cx_mat S0(4, 4, arma::fill::zeros);
  const double with_split = comm_rate(ch, alpha, w, w, S0, 0, 0, sc, true);
  const double gamma = comm_sinr(ch, alpha, w, 0, 0);
  const double expect =
      (sc.tau_d + sc.tau_s()) / double(sc.tau) * std::log2(1.0 + gamma);
  CHECK(with_split == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("comm rate monotonicity in signal and sensing interference") {
  Stream rng(84);
  ChannelSet ch = one_carrier(4, 4, 1, 0.1, rng);
  Scenario sc = default_scenario();
  sc.M = 4;
  sc.N = 4;
  sc.K = 1;
  sc.tau_c = 1;
  arma::umat alpha(1, 1, arma::fill::ones);
  arma::cx_mat w(4, 1);
  w.col(0) = ch.h[0][0];
  const arma::cx_mat S_small = 0.1 * arma::eye<arma::cx_mat>(4, 4);
  const arma::cx_mat S_big = 1.0 * arma::eye<arma::cx_mat>(4, 4);
  const double r1 = comm_rate(ch, alpha, w, w, S_small, 0, 0, sc, true);
  const double r2 = comm_rate(ch, alpha, w, arma::cx_mat(2.0 * w), S_small, 0, 0, sc, true);
  const double r3 = comm_rate(ch, alpha, w, w, S_big, 0, 0, sc, true);
  CHECK(r2 > r1);  // stronger signal
  CHECK(r3 < r1);  // stronger sensing interference
}

TEST_CASE("sensing rate: off-set sub-carriers and simple SINR values") {
  Stream rng(85);
  Scenario sc = default_scenario();
  ChannelSet ch = one_carrier(4, 4, 1, 0.1, rng);
  ch.theta.set_size(1);
  ch.theta(0) = 0.1;
  ch.beta.set_size(1);
  ch.beta(0) = 1.0;
  ch.a[0].push_back(steering_vector(4, 0.1));
  ch.b[0].push_back(steering_vector(4, 0.1));
  const arma::cx_vec u = ch.b[0][0];
  CHECK(sens_rate(ch, u, arma::cx_mat(4, 4, arma::fill::eye), arma::cx_mat(), 0, 0, sc, false) ==
        0.0);

  // Upsilon = 1 and Upsilon = 3 via S = c a a^H.
  const double w_ts = static_cast<double>(sc.tau_s()) / sc.tau;
  const arma::cx_mat S1 = ch.sigma2 * (ch.a[0][0] * ch.a[0][0].t());
  CHECK(sens_rate(ch, u, S1, arma::cx_mat(), 0, 0, sc, true) ==
        doctest::Approx(w_ts).epsilon(1e-9));
  const arma::cx_mat S3 = 3.0 * ch.sigma2 * (ch.a[0][0] * ch.a[0][0].t());
  CHECK(sens_rate(ch, u, S3, arma::cx_mat(), 0, 0, sc, true) ==
        doctest::Approx(2.0 * w_ts).epsilon(1e-9));
}

TEST_CASE("beampatterns: matched steering peaks and the product identity") {
  const int N = 8;
  const double theta0 = 10.0 * kPi / 180.0;
  const arma::vec grid = angle_grid(0.05);
  const double p = 2.5;
  const arma::cx_vec s = std::sqrt(p) * steering_vector(N, theta0);
  const std::vector<arma::cx_vec> u{steering_vector(N, theta0)};
  const Beampatterns bp = beampatterns(s, u, N, grid);

  const arma::uword imax = bp.p1.index_max();
  CHECK(std::abs(bp.theta(imax) - theta0) < 0.05 * kPi / 180.0 + 1e-12);
  CHECK(bp.p1(imax) == doctest::Approx(p).epsilon(1e-4));
  CHECK(bp.p2.col(0).max() == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(bp.theta(bp.p2.col(0).index_max()) == doctest::Approx(theta0).epsilon(1e-2));

  // p3 = p1 .* p2 pointwise (|xy|^2 = |x|^2 |y|^2).
  Stream rng(86);
  arma::cx_vec s2(N), u2(N);
  for (auto& v : s2) v = rng.cgauss();
  for (auto& v : u2) v = rng.cgauss();
  u2 /= arma::norm(u2);
  const Beampatterns bp2 = beampatterns(s2, {u2}, N, angle_grid(1.0));
  for (arma::uword i = 0; i < bp2.theta.n_elem; ++i)
    CHECK(bp2.p3(i, 0) == doctest::Approx(bp2.p1(i) * bp2.p2(i, 0)).epsilon(1e-12));
}

TEST_CASE("beampatterns are invariant to global phase rotations") {
  Stream rng(87);
  const int N = 6;
  arma::cx_vec s(N), u(N);
  for (auto& v : s) v = rng.cgauss();
  for (auto& v : u) v = rng.cgauss();
  u /= arma::norm(u);
  const auto rot = std::polar(1.0, 1.234);
  const arma::vec grid = angle_grid(2.0);
  const Beampatterns a = beampatterns(s, {u}, N, grid);
  const Beampatterns b = beampatterns(arma::cx_vec(rot * s), {arma::cx_vec(rot * u)}, N, grid);
  CHECK(arma::abs(a.p1 - b.p1).max() < 1e-10);
  CHECK(arma::abs(a.p3.col(0) - b.p3.col(0)).max() < 1e-10);
}

TEST_CASE("angle MSE: exact on-grid match and the quantization floor") {
  const int N = 8;
  const arma::vec grid = angle_grid(0.05);
  const double on_grid = grid(1801);  // an exact grid angle
  arma::vec truth{on_grid};
  const arma::cx_vec s = steering_vector(N, on_grid);
  const Beampatterns bp = beampatterns(s, {s}, N, grid);
  const AngleMse m = angle_mse(bp, truth);
  CHECK(m.transmit == doctest::Approx(0.0));
  CHECK(m.receive == doctest::Approx(0.0));
  CHECK(m.combined == doctest::Approx(0.0));
  CHECK(m.transmit_misses == 0);

  // Truth off-grid by half a step: squared half-step floor.
  const double step = grid(1) - grid(0);
  arma::vec truth2{on_grid + step / 2};
  const AngleMse m2 = angle_mse(bp, truth2);
  CHECK(m2.combined == doctest::Approx(step * step / 4).epsilon(1e-9));
}

TEST_CASE("cross-module consistency: solver rate equals the metrics rate") {
  Stream rng(88);
  const int M = 5, K = 3;
  ChannelSet ch = one_carrier(M, 4, K, 0.3, rng);
  Scenario sc = default_scenario();
  sc.M = M;
  sc.N = 4;
  sc.K = K;
  sc.tau_c = K;
  arma::umat alpha(1, K, arma::fill::ones);

  arma::cx_mat hc(M, K);
  for (int k = 0; k < K; ++k) hc.col(k) = ch.h[0][k];
  RcgParams prm;
  prm.rate_weight = (sc.tau - sc.tau_c) / double(sc.tau);
  const RcgResult res = rcg_solve(lift_channels(hc, sc.p_max), ch.sigma2, prm);
  const arma::cx_mat w = recover_precoders(res.V_tilde, sc.p_max);

  double rate = 0.0;
  for (int k = 0; k < K; ++k)
    rate += comm_rate(ch, alpha, w, w, arma::cx_mat(), 0, k, sc, false);
  CHECK(rate == doctest::Approx(res.sum_rate).epsilon(1e-9));
}
