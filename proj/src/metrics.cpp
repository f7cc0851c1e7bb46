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

#include "wbcr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "wbcr/joint_beamformer.hpp"

namespace wbcr {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Indices of strict local maxima; flat plateaus keep their first sample.
std::vector<arma::uword> local_maxima(const arma::vec& p) {
  std::vector<arma::uword> out;
  const arma::uword n = p.n_elem;
  for (arma::uword i = 0; i < n; ++i) {
    const double left = i > 0 ? p(i - 1) : -1.0;
    const double right = i + 1 < n ? p(i + 1) : -1.0;
    if (p(i) > left && p(i) >= right) out.push_back(i);
  }
  return out;
}

double tallest_peak_angle(const arma::vec& p, const arma::vec& theta) {
  const auto peaks = local_maxima(p);
  if (peaks.empty()) return theta(p.index_max());
  arma::uword best = peaks.front();
  for (auto i : peaks)
    if (p(i) > p(best)) best = i;
  return theta(best);
}

// Distinct peaks worth matching: local maxima above a relative floor.
std::vector<arma::uword> distinct_peaks(const arma::vec& p) {
  std::vector<arma::uword> peaks = local_maxima(p);
  const double floor = 1e-3 * p.max();
  std::vector<arma::uword> out;
  for (auto i : peaks)
    if (p(i) >= floor) out.push_back(i);
  return out;
}

// Greedy nearest peak-to-target matching; returns per-target squared error
// over matched pairs and the number of unmatched targets.
std::pair<double, int> matched_mse(const std::vector<arma::uword>& peaks, const arma::vec& theta,
                                   const arma::vec& truths) {
  const arma::uword T = truths.n_elem;
  std::vector<bool> peak_used(peaks.size(), false), tgt_used(T, false);
  double se = 0.0;
  int matched = 0;
  for (arma::uword round = 0; round < std::min<arma::uword>(T, peaks.size()); ++round) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bt = -1;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      if (peak_used[i]) continue;
      for (arma::uword t = 0; t < T; ++t) {
        if (tgt_used[t]) continue;
        const double d = std::abs(theta(peaks[i]) - truths(t));
        if (d < best) {
          best = d;
          bi = static_cast<int>(i);
          bt = static_cast<int>(t);
        }
      }
    }
    if (bi < 0) break;
    peak_used[bi] = true;
    tgt_used[bt] = true;
    se += best * best;
    ++matched;
  }
  return {matched > 0 ? se / matched : 0.0, static_cast<int>(T) - matched};
}

}  // namespace

double comm_sinr(const ChannelSet& ch, const arma::umat& alpha, const arma::cx_mat& w_cols,
                 arma::uword l, arma::uword k) {
  if (!alpha(l, k)) return 0.0;
  const arma::cx_vec& hk = ch.h[l][k];
  const double sig = std::norm(arma::cdot(hk, w_cols.col(k)));
  double den = ch.sigma2;
  for (arma::uword i = 0; i < alpha.n_cols; ++i)
    if (i != k && alpha(l, i)) den += std::norm(arma::cdot(hk, w_cols.col(i)));
  return sig / den;
}

double comm_sinr_with_sensing(const ChannelSet& ch, const arma::umat& alpha,
                              const arma::cx_mat& w_cols, const arma::cx_mat& S, arma::uword l,
                              arma::uword k) {
  if (!alpha(l, k)) return 0.0;
  const arma::cx_vec& hk = ch.h[l][k];
  const double sig = std::norm(arma::cdot(hk, w_cols.col(k)));
  double den = ch.sigma2 + std::real(arma::cdot(ch.g[l][k], S * ch.g[l][k]));
  for (arma::uword i = 0; i < alpha.n_cols; ++i)
    if (i != k && alpha(l, i)) den += std::norm(arma::cdot(hk, w_cols.col(i)));
  return sig / den;
}

double comm_rate(const ChannelSet& ch, const arma::umat& alpha, const arma::cx_mat& w_det,
                 const arma::cx_mat& w_sens, const arma::cx_mat& S, arma::uword l, arma::uword k,
                 const Scenario& sc, bool in_psi_s) {
  if (!alpha(l, k)) return 0.0;
  const double tau = sc.tau;
  if (in_psi_s) {
    const double g_det = comm_sinr(ch, alpha, w_det, l, k);
    const double g_sens = comm_sinr_with_sensing(ch, alpha, w_sens, S, l, k);
    return (sc.tau_d / tau) * std::log2(1.0 + g_det) +
           (sc.tau_s() / tau) * std::log2(1.0 + g_sens);
  }
  const double g = comm_sinr(ch, alpha, w_det, l, k);
  return ((tau - sc.tau_c) / tau) * std::log2(1.0 + g);
}

double sens_rate(const ChannelSet& ch, const arma::cx_vec& u, const arma::cx_mat& S,
                 const arma::cx_mat& R_x, arma::uword l, arma::uword t, const Scenario& sc,
                 bool in_psi_s) {
  if (!in_psi_s) return 0.0;
  const double sinr = sensing_sinr(ch, u, S, R_x, l, t, ch.sigma2);
  return (static_cast<double>(sc.tau_s()) / sc.tau) * std::log2(1.0 + sinr);
}

arma::vec angle_grid(double step_deg) {
  const double step = step_deg * kPi / 180.0;
  const arma::uword n = static_cast<arma::uword>(std::floor(kPi / step)) + 1;
  arma::vec g(n);
  for (arma::uword i = 0; i < n; ++i) g(i) = -kPi / 2 + i * step;
  if (g(n - 1) > kPi / 2) g(n - 1) = kPi / 2;
  return g;
}

Beampatterns beampatterns(const arma::cx_vec& s, const std::vector<arma::cx_vec>& u,
                          int n_antennas, const arma::vec& grid) {
  const arma::uword G = grid.n_elem;
  const arma::uword T = u.size();
  Beampatterns bp;
  bp.theta = grid;
  bp.p1.set_size(G);
  bp.p2.set_size(G, T);
  bp.p3.set_size(G, T);
  for (arma::uword i = 0; i < G; ++i) {
    const arma::cx_vec st = steering_vector(n_antennas, grid(i));
    bp.p1(i) = std::norm(arma::cdot(st, s));
    for (arma::uword t = 0; t < T; ++t) {
      bp.p2(i, t) = std::norm(arma::cdot(u[t], st));
      bp.p3(i, t) = bp.p1(i) * bp.p2(i, t);
    }
  }
  return bp;
}

AngleMse angle_mse(const Beampatterns& bp, const arma::vec& true_thetas) {
  const arma::uword T = true_thetas.n_elem;
  AngleMse out;

  // Transmit: one pattern with up to T distinct peaks matched to targets.
  {
    const auto [mse, misses] = matched_mse(distinct_peaks(bp.p1), bp.theta, true_thetas);
    out.transmit = mse;
    out.transmit_misses = misses;
  }

  // Receive / combined: each target's own pattern, matched to its target.
  double se_r = 0.0, se_c = 0.0;
  for (arma::uword t = 0; t < T; ++t) {
    const arma::vec truth{true_thetas(t)};
    se_r += matched_mse(distinct_peaks(bp.p2.col(t)), bp.theta, truth).first;
    se_c += matched_mse(distinct_peaks(bp.p3.col(t)), bp.theta, truth).first;
  }
  out.receive = se_r / T;
  out.combined = se_c / T;
  return out;
}

double combined_peak_angle(const Beampatterns& bp, arma::uword t) {
  return tallest_peak_angle(bp.p3.col(t), bp.theta);
}

double nearest_peak_offset(const Beampatterns& bp, arma::uword t, double true_theta) {
  const auto peaks = distinct_peaks(bp.p3.col(t));
  double best = std::numeric_limits<double>::infinity();
  for (auto i : peaks) best = std::min(best, std::abs(bp.theta(i) - true_theta));
  return best;
}

}  // namespace wbcr
