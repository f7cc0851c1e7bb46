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

#include "wbcr/channel.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace wbcr {

namespace {

constexpr double kPi = 3.14159265358979323846;

double distance(std::array<double, 2> p, std::array<double, 2> q) {
  return std::hypot(p[0] - q[0], p[1] - q[1]);
}

double bearing(std::array<double, 2> from, std::array<double, 2> to) {
  return std::atan2(to[1] - from[1], to[0] - from[0]);
}

std::array<double, 2> disk_point(std::array<double, 2> center, double radius, Stream& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return {center[0] + r * std::cos(phi), center[1] + r * std::sin(phi)};
}

}  // namespace

double path_loss_umi(double distance_m, double fc_hz) {
  if (!(distance_m > 0.0)) throw std::domain_error("path_loss_umi: distance must be positive");
  const double pl_db =
      32.4 + 21.0 * std::log10(distance_m) + 20.0 * std::log10(fc_hz / 1e9);
  return db_to_linear(-pl_db);
}

arma::cx_vec steering_vector(int n_antennas, double theta) {
  arma::cx_vec v(n_antennas);
  const double s = std::sin(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
  for (int n = 0; n < n_antennas; ++n) {
    const double phase = kPi * n * s;
    v(n) = std::complex<double>(scale * std::cos(phase), scale * std::sin(phase));
  }
  return v;
}

arma::cx_mat sample_rician(int rows, int cols, double kappa, double zeta,
                           const arma::cx_mat& los, Stream& rng) {
  if (static_cast<int>(los.n_rows) != rows || static_cast<int>(los.n_cols) != cols)
    throw std::domain_error("sample_rician: LoS shape mismatch");
  if (kappa < 0.0 || zeta < 0.0) throw std::domain_error("sample_rician: kappa, zeta >= 0 required");
  const double c_los = std::sqrt(kappa * zeta / (kappa + 1.0));
  const double c_nlos = std::sqrt(zeta / (kappa + 1.0));
  arma::cx_mat out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = c_los * los(r, c) + c_nlos * rng.cgauss();
  return out;
}

Positions sample_positions(const Scenario& sc, Stream& rng) {
  Positions pos;
  const auto& ge = sc.geometry;
  for (int k = 0; k < sc.K; ++k)
    pos.users.push_back(disk_point({ge.user_center_x, ge.user_center_y}, ge.user_radius, rng));
  for (int t = 0; t < sc.T; ++t)
    pos.targets.push_back(
        disk_point({ge.target_center_x, ge.target_center_y}, ge.target_radius, rng));
  return pos;
}

Positions sample_positions_fixed_targets(const Scenario& sc,
                                         const std::vector<double>& target_angles, Stream& rng) {
  if (static_cast<int>(target_angles.size()) != sc.T)
    throw std::invalid_argument("fixed target angles: need exactly T angles");
  Positions pos;
  const auto& ge = sc.geometry;
  for (int k = 0; k < sc.K; ++k)
    pos.users.push_back(disk_point({ge.user_center_x, ge.user_center_y}, ge.user_radius, rng));
  const std::array<double, 2> bs{ge.secondary_bs_x, ge.secondary_bs_y};
  const double range =
      distance(bs, {ge.target_center_x, ge.target_center_y});
  for (double th : target_angles)
    pos.targets.push_back({bs[0] + range * std::cos(th), bs[1] + range * std::sin(th)});
  return pos;
}

ChannelSet generate_channel_set(const Scenario& sc, const Positions& pos, std::uint64_t seed) {
  if (static_cast<int>(pos.users.size()) != sc.K ||
      static_cast<int>(pos.targets.size()) != sc.T)
    throw std::invalid_argument("generate_channel_set: positions do not match K, T");

  const auto& ge = sc.geometry;
  const std::array<double, 2> p_bs{ge.primary_bs_x, ge.primary_bs_y};
  const std::array<double, 2> s_bs{ge.secondary_bs_x, ge.secondary_bs_y};

  ChannelSet ch;
  ch.sigma2 = noise_power(sc);
  ch.beta_si = sc.beta_si;
  ch.theta.set_size(sc.T);
  ch.beta.set_size(sc.T);
  for (int t = 0; t < sc.T; ++t) ch.theta(t) = bearing(s_bs, pos.targets[t]);

  // Reflection phases are fixed per coherence block, shared across sub-carriers.
  {
    Stream bs_rng(derive_seed(seed, "beta"));
    for (int t = 0; t < sc.T; ++t) {
      const double phi = bs_rng.uniform(0.0, 2.0 * kPi);
      ch.beta(t) = std::polar(sc.beta_t_mag, phi);
    }
  }

  // Deterministic LoS geometry, shared across sub-carriers.
  std::vector<arma::cx_vec> h_los(sc.K), g_los(sc.K);
  std::vector<double> zeta_h(sc.K), zeta_g(sc.K);
  for (int k = 0; k < sc.K; ++k) {
    h_los[k] = std::sqrt(static_cast<double>(sc.M)) *
               steering_vector(sc.M, bearing(p_bs, pos.users[k]));
    g_los[k] = std::sqrt(static_cast<double>(sc.N)) *
               steering_vector(sc.N, bearing(s_bs, pos.users[k]));
    zeta_h[k] = path_loss_umi(distance(p_bs, pos.users[k]), sc.fc);
    zeta_g[k] = path_loss_umi(distance(s_bs, pos.users[k]), sc.fc);
  }
  const arma::cx_mat f_los = std::sqrt(static_cast<double>(sc.M * sc.N)) *
                             steering_vector(sc.M, bearing(p_bs, s_bs)) *
                             steering_vector(sc.N, bearing(s_bs, p_bs)).t();
  const double zeta_f = path_loss_umi(distance(p_bs, s_bs), sc.fc);
  const arma::cx_mat si_los(arma::ones<arma::mat>(sc.N, sc.N), arma::zeros<arma::mat>(sc.N, sc.N));
  // Large-scale gain of the self-interference loop: nominal 1 m separation
  // between the co-located transmit and receive arrays.
  const double zeta_si = path_loss_umi(1.0, sc.fc);

  ch.h.resize(sc.L);
  ch.g.resize(sc.L);
  ch.F.resize(sc.L);
  ch.a.resize(sc.L);
  ch.b.resize(sc.L);
  ch.G_si.resize(sc.L);

  for (int l = 0; l < sc.L; ++l) {
    Stream rng(derive_seed(seed, "chan", static_cast<std::uint64_t>(l)));
    ch.h[l].resize(sc.K);
    ch.g[l].resize(sc.K);
    for (int k = 0; k < sc.K; ++k) {
      ch.h[l][k] = sample_rician(sc.M, 1, sc.kappa, zeta_h[k], h_los[k], rng);
      ch.g[l][k] = sample_rician(sc.N, 1, sc.kappa, zeta_g[k], g_los[k], rng);
    }
    ch.F[l] = sample_rician(sc.M, sc.N, sc.kappa, zeta_f, f_los, rng);
    ch.a[l].resize(sc.T);
    ch.b[l].resize(sc.T);
    for (int t = 0; t < sc.T; ++t) {
      ch.a[l][t] = steering_vector(sc.N, ch.theta(t));
      ch.b[l][t] = steering_vector(sc.N, ch.theta(t));
    }
    ch.G_si[l] = sample_rician(sc.N, sc.N, sc.kappa_si, zeta_si, si_los, rng);
  }
  return ch;
}

std::complex<double> inject_csi_error_entry(std::complex<double> x, double eta, Stream& rng,
                                            CsiErrorConvention conv) {
  const double frac = conv == CsiErrorConvention::corrected ? (1.0 - eta) : eta;
  const double sigma_e = std::sqrt(frac) * std::abs(x);
  return x + sigma_e * rng.cgauss();
}

ChannelSet inject_csi_error(const ChannelSet& ch, double eta, Stream& rng,
                            CsiErrorConvention conv) {
  if (eta < 0.0 || eta > 1.0) throw std::domain_error("inject_csi_error: eta in [0,1] required");
  ChannelSet out = ch;
  for (arma::uword l = 0; l < ch.n_subcarriers(); ++l) {
    for (auto& hv : out.h[l])
      for (auto& x : hv) x = inject_csi_error_entry(x, eta, rng, conv);
    for (auto& gv : out.g[l])
      for (auto& x : gv) x = inject_csi_error_entry(x, eta, rng, conv);
    for (auto& x : out.F[l]) x = inject_csi_error_entry(x, eta, rng, conv);
  }
  return out;
}

namespace {

nlohmann::json cx_to_json(const arma::cx_mat& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (arma::uword r = 0; r < m.n_rows; ++r) {
    nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
    for (arma::uword c = 0; c < m.n_cols; ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

}  // namespace

void dump_channels_json(const ChannelSet& ch, const std::string& path) {
  nlohmann::json j;
  j["sigma2"] = ch.sigma2;
  j["theta"] = std::vector<double>(ch.theta.begin(), ch.theta.end());
  j["beta"] = cx_to_json(arma::cx_mat(ch.beta));
  for (arma::uword l = 0; l < ch.n_subcarriers(); ++l) {
    nlohmann::json jl;
    for (const auto& v : ch.h[l]) jl["h"].push_back(cx_to_json(arma::cx_mat(v)));
    for (const auto& v : ch.g[l]) jl["g"].push_back(cx_to_json(arma::cx_mat(v)));
    jl["F"] = cx_to_json(ch.F[l]);
    for (const auto& v : ch.a[l]) jl["a"].push_back(cx_to_json(arma::cx_mat(v)));
    for (const auto& v : ch.b[l]) jl["b"].push_back(cx_to_json(arma::cx_mat(v)));
    jl["G_si"] = cx_to_json(ch.G_si[l]);
    j["subcarriers"].push_back(jl);
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("dump_channels_json: cannot open '" + path + "'");
  f << j.dump(2) << "\n";
}

}  // namespace wbcr
