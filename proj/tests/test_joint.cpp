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

#include "wbcr/joint_beamformer.hpp"
#include "wbcr/metrics.hpp"

using namespace wbcr;

namespace {

constexpr double kPi = 3.14159265358979323846;

arma::cx_vec random_unit(arma::uword n, Stream& rng) {
  arma::cx_vec v(n);
  for (auto& x : v) x = rng.cgauss();
  return v / arma::norm(v);
}

arma::cx_mat random_psd(arma::uword n, Stream& rng) {
  arma::cx_mat G(n, n);
  for (auto& x : G) x = rng.cgauss();
  return G * G.t() / static_cast<double>(n);
}

// One-sub-carrier channel set with steering targets at given angles.
ChannelSet synth_channels(int M, int N, int K, const std::vector<double>& angles, double sigma2,
                          double beta_si, double beta_mag, Stream& rng) {
  ChannelSet ch;
  ch.sigma2 = sigma2;
  ch.beta_si = beta_si;
  const int T = static_cast<int>(angles.size());
  ch.theta.set_size(T);
  ch.beta.set_size(T);
  ch.h.resize(1);
  ch.g.resize(1);
  ch.a.resize(1);
  ch.b.resize(1);
  ch.h[0].resize(K);
  ch.g[0].resize(K);
  for (int k = 0; k < K; ++k) {
    arma::cx_vec h(M), g(N);
    for (auto& x : h) x = rng.cgauss();
    for (auto& x : g) x = rng.cgauss();
    ch.h[0][k] = h;
    ch.g[0][k] = g;
  }
  arma::cx_mat F(M, N);
  for (auto& x : F) x = rng.cgauss();
  ch.F.push_back(0.3 * F);
  ch.a[0].resize(T);
  ch.b[0].resize(T);
  for (int t = 0; t < T; ++t) {
    ch.a[0][t] = steering_vector(N, angles[t]);
    ch.b[0][t] = steering_vector(N, angles[t]);
    ch.theta(t) = angles[t];
    ch.beta(t) = std::polar(beta_mag, rng.uniform(0.0, 2 * kPi));
  }
  arma::cx_mat G(N, N);
  for (auto& x : G) x = rng.cgauss();
  ch.G_si.push_back(G);
  return ch;
}

// Direct scalar transcription of the covariance-form sensing SINR,
// independent of the production code path.
double sinr_oracle(const ChannelSet& ch, const arma::cx_vec& u, const arma::cx_mat& S,
                   const arma::cx_mat& R_x, arma::uword t, double sigma2) {
  const arma::uword T = ch.theta.n_elem;
  const auto& a = ch.a[0];
  const auto& b = ch.b[0];
  auto qform = [](const arma::cx_vec& v, const arma::cx_mat& A) {
    std::complex<double> acc = 0.0;
    for (arma::uword i = 0; i < v.n_elem; ++i)
      for (arma::uword j = 0; j < v.n_elem; ++j) acc += std::conj(v(i)) * A(i, j) * v(j);
    return acc.real();
  };
  const double num =
      std::norm(ch.beta(t)) * qform(a[t], S) * std::norm(arma::cdot(u, b[t]));
  double den = sigma2;  // ||u|| = 1
  for (arma::uword j = 0; j < T; ++j) {
    if (j == t) continue;
    den += std::norm(ch.beta(j)) * qform(a[j], S) * std::norm(arma::cdot(u, b[j]));
  }
  if (R_x.n_elem > 0) den += qform(arma::cx_vec(ch.F[0] * u), R_x);
  den += ch.beta_si * qform(arma::cx_vec(ch.G_si[0] * u), S);
  return num / den;
}

double top_generalized_eig(const ChannelSet& ch, const arma::cx_mat& S, const arma::cx_mat& R_x,
                           arma::uword t, double sigma2) {
  const arma::uword N = ch.a[0][0].n_elem;
  const arma::uword T = ch.theta.n_elem;
  arma::cx_mat Q(N, N, arma::fill::eye);
  Q *= sigma2;
  for (arma::uword j = 0; j < T; ++j) {
    if (j == t) continue;
    Q += std::norm(ch.beta(j)) * std::real(arma::cdot(ch.a[0][j], S * ch.a[0][j])) *
         (ch.b[0][j] * ch.b[0][j].t());
  }
  if (R_x.n_elem > 0) Q += ch.F[0].t() * R_x * ch.F[0];
  Q += ch.beta_si * ch.G_si[0].t() * S * ch.G_si[0];
  const arma::cx_mat num = std::norm(ch.beta(t)) *
                           std::real(arma::cdot(ch.a[0][t], S * ch.a[0][t])) *
                           (ch.b[0][t] * ch.b[0][t].t());
  const arma::cx_mat L = arma::chol(Q, "lower");
  const arma::cx_mat Li = arma::inv(arma::trimatl(L));
  arma::vec ev;
  arma::eig_sym(ev, arma::cx_mat(Li * num * Li.t()));
  return ev.max();
}

}  // namespace

TEST_CASE("combiner: matched filter when the denominator is white") {
  Stream rng(71);
  ChannelSet ch = synth_channels(4, 6, 1, {0.3}, 0.2, 0.0, 0.1, rng);
  ch.G_si[0].zeros();
  ch.F[0].zeros();
  const arma::cx_mat S = random_psd(6, rng);
  const arma::cx_vec u =
      mmse_combiner(ch, S, arma::cx_mat(4, 4, arma::fill::zeros), 0, 0, 0.2);
  CHECK(std::abs(arma::cdot(u, ch.b[0][0])) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("combiner achieves the top generalized eigenvalue; no perturbation beats it") {
  Stream rng(72);
  for (int rep = 0; rep < 10; ++rep) {
    ChannelSet ch = synth_channels(4, 6, 2, {-0.5, 0.2, 0.9}, 0.05, 1e-3, 0.4, rng);
    const arma::cx_mat S = random_psd(6, rng);
    const arma::cx_mat R_x = random_psd(4, rng);
    const arma::uword t = rng.index(3);
    const arma::cx_vec u = mmse_combiner(ch, S, R_x, 0, t, ch.sigma2);
    CHECK(arma::norm(u) == doctest::Approx(1.0).epsilon(1e-12));
    const double achieved = sensing_sinr(ch, u, S, R_x, 0, t, ch.sigma2);
    const double bound = top_generalized_eig(ch, S, R_x, t, ch.sigma2);
    CHECK(achieved == doctest::Approx(bound).epsilon(1e-8));

    for (int p = 0; p < 1000; ++p) {
      arma::cx_vec up = u + 0.2 * random_unit(6, rng);
      up /= arma::norm(up);
      CHECK(sensing_sinr(ch, up, S, R_x, 0, t, ch.sigma2) <=
            achieved * (1.0 + 1e-8) + 1e-12);
    }
  }
}

TEST_CASE("sensing SINR: zero reflection, unit case, independent oracle") {
  Stream rng(73);
  ChannelSet ch = synth_channels(4, 6, 1, {0.4, -0.7}, 0.3, 0.0, 0.2, rng);
  ch.beta(0) = 0.0;
  const arma::cx_mat S = random_psd(6, rng);
  CHECK(sensing_sinr(ch, random_unit(6, rng), S, arma::cx_mat(), 0, 0, ch.sigma2) == 0.0);

  // T=1, u=b, S = p a a^H, no primary, no SI: SINR = |beta|^2 p / sigma^2.
  ChannelSet one = synth_channels(4, 6, 1, {0.4}, 0.3, 0.0, 0.2, rng);
  const double p = 2.7;
  const arma::cx_mat Sp = p * (one.a[0][0] * one.a[0][0].t());
  const double got = sensing_sinr(one, one.b[0][0], Sp, arma::cx_mat(), 0, 0, one.sigma2);
  CHECK(got == doctest::Approx(std::norm(one.beta(0)) * p / one.sigma2).epsilon(1e-10));

  // Random instances against the scalar transcription.
  for (int rep = 0; rep < 10; ++rep) {
    ChannelSet c = synth_channels(3, 5, 2, {-0.3, 0.6}, 0.11, 2e-4, 0.5, rng);
    const arma::cx_mat S2 = random_psd(5, rng);
    const arma::cx_mat R2 = random_psd(3, rng);
    const arma::cx_vec u2 = random_unit(5, rng);
    for (arma::uword t = 0; t < 2; ++t)
      CHECK(sensing_sinr(c, u2, S2, R2, 0, t, c.sigma2) ==
            doctest::Approx(sinr_oracle(c, u2, S2, R2, t, c.sigma2)).epsilon(1e-10));
  }
}

TEST_CASE("surrogate expansion is tight at the expansion point") {
  Stream rng(74);
  Scenario sc = default_scenario();
  sc.M = 4;
  sc.N = 5;
  sc.K = 2;
  sc.T = 2;
  sc.tau_c = sc.K;
  sc.validate();
  ChannelSet ch = synth_channels(sc.M, sc.N, sc.K, {-0.4, 0.5}, 0.07, 1e-4, 0.3, rng);

  const std::vector<arma::uword> users{0, 1};
  std::vector<arma::cx_mat> W{random_psd(4, rng), random_psd(4, rng)};
  arma::cx_mat S = random_psd(5, rng);
  std::vector<arma::cx_vec> u{random_unit(5, rng), random_unit(5, rng)};
  AoMode mode;

  const ScaCoefficients co = sca_coefficients(W, S, u, users, ch, 0, ch.sigma2, mode);
  const Q3Problem q3 = build_q3(co, ch, 0, sc, mode);
  std::vector<arma::cx_mat> X = W;
  X.push_back(S);

  const double surrogate = q3.objective(X);
  const double truth = joint_objective(ch, users, W, S, u, 0, sc, mode);
  CHECK(surrogate == doctest::Approx(truth).epsilon(1e-9));

  // And it minorizes the truth elsewhere.
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<arma::cx_mat> Y{random_psd(4, rng), random_psd(4, rng), random_psd(5, rng)};
    const double s_val = q3.objective(Y);
    const double t_val = joint_objective(ch, users, {Y[0], Y[1]}, Y[2], u, 0, sc, mode);
    CHECK(s_val <= t_val + 1e-9 * std::max(1.0, std::abs(t_val)));
  }
}

TEST_CASE("expansion terms: single-user denominator and vanishing SI") {
  Stream rng(75);
  ChannelSet ch = synth_channels(4, 5, 1, {0.2}, 0.09, 0.0, 0.3, rng);
  const std::vector<arma::uword> users{0};
  std::vector<arma::cx_mat> W{random_psd(4, rng)};
  arma::cx_mat S = random_psd(5, rng);
  std::vector<arma::cx_vec> u{random_unit(5, rng)};
  AoMode mode;
  const ScaCoefficients co = sca_coefficients(W, S, u, users, ch, 0, ch.sigma2, mode);

  // K=1: no interference sum, D = g^H S g + sigma^2.
  const double expect =
      std::real(arma::cdot(ch.g[0][0], S * ch.g[0][0])) + ch.sigma2;
  CHECK(co.D(0) == doctest::Approx(expect).epsilon(1e-12));

  // beta_si = 0 removes the SI contribution from B.
  double b_manual = ch.sigma2;
  b_manual += std::real(arma::cdot(co.g_int[0], W[0] * co.g_int[0]));
  CHECK(co.B(0) == doctest::Approx(b_manual).epsilon(1e-12));
}

TEST_CASE("subproblem assembly: constraint counts and degenerate budgets") {
  Stream rng(76);
  Scenario sc = default_scenario();
  sc.M = 4;
  sc.N = 5;
  sc.K = 3;
  sc.T = 2;
  sc.tau_c = 3;
  sc.validate();
  ChannelSet ch = synth_channels(sc.M, sc.N, sc.K, {-0.2, 0.6}, 0.05, 1e-4, 0.3, rng);
  const std::vector<arma::uword> users{0, 2};
  std::vector<arma::cx_mat> W{random_psd(4, rng), random_psd(4, rng)};
  arma::cx_mat S = random_psd(5, rng);
  std::vector<arma::cx_vec> u{random_unit(5, rng), random_unit(5, rng)};
  AoMode mode;
  const ScaCoefficients co = sca_coefficients(W, S, u, users, ch, 0, ch.sigma2, mode);

  const Q3Problem q3 = build_q3(co, ch, 0, sc, mode);
  CHECK(q3.con_lhs.size() == static_cast<std::size_t>(sc.K) + 2);
  CHECK(q3.block_dims.size() == 3);  // two users + sensing covariance

  // p_max = 0 drops the transmit blocks entirely.
  Scenario zero_p = sc;
  zero_p.p_max = 0.0;
  const Q3Problem q3z = build_q3(co, ch, 0, zero_p, mode);
  CHECK_FALSE(q3z.has_comm_blocks);
  CHECK(q3z.block_dims.size() == 1);

  // A huge interference cap leaves those rows inactive at the optimum.
  Scenario loose = sc;
  loose.delta_max = 1e12;
  const Q3Problem q3l = build_q3(co, ch, 0, loose, mode);
  AoParams prm;
  prm.gr_draws = 100;
  std::vector<arma::cx_mat> start{W[0], W[1], S};
  const Q3SolveResult sol = solve_q3(q3l, start, prm);
  for (int k = 0; k < sc.K; ++k)
    CHECK(q3l.con_lhs[k].eval(sol.X) < 0.5 * loose.delta_max);
}

TEST_CASE("rank-one extraction: exact rank one returns the factor up to phase") {
  Stream rng(77);
  const arma::cx_vec v = 1.7 * random_unit(5, rng);
  const arma::cx_mat X = v * v.t();
  Stream gr(1);
  const arma::cx_vec r = rank1_extract(
      X, std::real(arma::trace(X)), [](const arma::cx_vec&) { return true; },
      [](const arma::cx_vec&) { return 0.0; }, 10, gr);
  CHECK(std::abs(arma::cdot(r, v)) == doctest::Approx(arma::norm(r) * arma::norm(v)).epsilon(1e-8));
  CHECK(arma::norm(r) == doctest::Approx(arma::norm(v)).epsilon(1e-8));
}

TEST_CASE("rank-one extraction: candidates are rescaled to the trace budget") {
  Stream gr(2);
  const arma::cx_mat X = arma::eye<arma::cx_mat>(2, 2);
  const arma::cx_vec r = rank1_extract(
      X, 1.0, [](const arma::cx_vec&) { return true; },
      [](const arma::cx_vec& c) { return c(0).real(); }, 50, gr);
  CHECK(arma::norm(r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rank-one extraction: infeasible everywhere raises with diagnostics") {
  Stream gr(3);
  const arma::cx_mat X = arma::eye<arma::cx_mat>(2, 2);
  CHECK_THROWS_WITH_AS(
      rank1_extract(X, 1.0, [](const arma::cx_vec&) { return false; },
                    [](const arma::cx_vec&) { return 0.0; }, 25, gr),
      doctest::Contains("25 draws"), std::runtime_error);
}

TEST_CASE("randomization recovers at least 80% of the lifted bound") {
  Stream rng(78);
  int ok = 0;
  for (int rep = 0; rep < 100; ++rep) {
    // Repeated top eigenvalue forces a rank-2 lifted optimum.
    arma::cx_mat Qm(4, 4);
    for (auto& v : Qm) v = rng.cgauss();
    arma::cx_mat Qu, Rr;
    arma::qr(Qu, Rr, Qm);
    arma::vec d{2.0, 2.0, 0.7, 0.1};
    const arma::cx_mat C = Qu * arma::diagmat(arma::cx_vec(d, arma::zeros(4))) * Qu.t();

    SdpProblem p;
    p.block_dims = {4};
    p.objective = {0.5 * (C + C.t())};
    p.constraints.push_back({{arma::cx_mat(arma::eye<arma::cx_mat>(4, 4))}, 1.0});
    const SdpSolution sol = solve_sdp(p, 1e-9);
    REQUIRE(sol.status == SdpStatus::optimal);

    auto obj = [&](const arma::cx_vec& r) { return std::real(arma::cdot(r, C * r)); };
    Stream gr(1000 + rep);
    const arma::cx_vec r = rank1_extract(sol.X[0], std::real(arma::trace(sol.X[0])),
                                         [](const arma::cx_vec&) { return true; }, obj, 200, gr);
    if (obj(r) >= 0.8 * sol.objective_value) ++ok;
  }
  CHECK(ok == 100);
}

TEST_CASE("alternating optimization: monotone objective, quick convergence, feasibility") {
  Stream rng(79);
  Scenario sc = default_scenario();
  sc.M = 4;
  sc.N = 4;
  sc.K = 2;
  sc.T = 2;
  sc.tau_c = 2;
  sc.L = 1;
  sc.L_c = 1;
  sc.gr_draws = 200;
  sc.validate();

  for (int rep = 0; rep < 3; ++rep) {
    Stream prng(900 + rep);
    const Positions pos = sample_positions(sc, prng);
    const ChannelSet ch = generate_channel_set(sc, pos, 500 + rep);
    arma::umat alpha(1, 2, arma::fill::ones);
    AoMode mode;
    Stream gr(55 + rep);
    const JointSolution js = ao_solve(ch, alpha, 0, sc, mode, gr, ao_params_from(sc));

    REQUIRE(js.objective_trace.size() >= 1);
    for (std::size_t i = 1; i < js.objective_trace.size(); ++i)
      CHECK(js.objective_trace[i] >=
            js.objective_trace[i - 1] - 1e-6 * std::max(1.0, js.objective_trace[i - 1]));
    CHECK(js.iterations <= 10);

    for (const auto& ut : js.u) CHECK(arma::norm(ut) == doctest::Approx(1.0).epsilon(1e-9));
    double pw = 0.0;
    for (const auto& Wk : js.W) pw += std::real(arma::trace(Wk));
    CHECK(pw <= sc.p_max * (1.0 + 1e-6));
    CHECK(std::real(arma::trace(js.S)) <= sc.p_max_prime * (1.0 + 1e-6));
    for (int k = 0; k < sc.K; ++k) {
      CHECK(std::real(arma::cdot(ch.g[0][k], js.S * ch.g[0][k])) <=
            sc.delta_max * (1.0 + 1e-6));
      CHECK(std::norm(arma::cdot(ch.g[0][k], js.s)) <= sc.delta_max * (1.0 + 1e-6));
    }
    CHECK(arma::norm(js.s) * arma::norm(js.s) <=
          std::real(arma::trace(js.S)) * (1.0 + 1e-9));
    for (const auto& wk : js.w) CHECK(wk.n_elem == static_cast<arma::uword>(sc.M));
  }
}

TEST_CASE("sensing-only design (no users) points beams at every target") {
  Scenario sc = default_scenario();
  sc.M = 8;
  sc.N = 8;
  sc.K = 3;
  sc.T = 4;
  sc.tau_c = 3;
  sc.gr_draws = 500;
  sc.validate();
  const std::vector<double> angles{-40 * kPi / 180, -15 * kPi / 180, 10 * kPi / 180,
                                   35 * kPi / 180};
  Stream prng(1234);
  const Positions pos = sample_positions_fixed_targets(sc, angles, prng);
  const ChannelSet ch = generate_channel_set(sc, pos, 777);

  AoMode mode;
  mode.comm_terms = false;
  mode.interference_constraint = false;
  arma::umat alpha(sc.L, sc.K, arma::fill::zeros);
  Stream gr(9);
  const JointSolution js = ao_solve(ch, alpha, 0, sc, mode, gr, ao_params_from(sc));

  const Beampatterns bp = beampatterns(js.s, js.u, sc.N, angle_grid(0.05));
  for (int t = 0; t < sc.T; ++t) {
    const double peak = combined_peak_angle(bp, t);
    CHECK(std::abs(peak - angles[t]) < 1.0 * kPi / 180.0);
  }
}
