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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wbcr {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CsiErrorConvention { corrected, paper };
enum class Retraction { sphere, elementwise };

struct Geometry {
  double primary_bs_x = 0.0, primary_bs_y = 0.0;
  double secondary_bs_x = 70.0, secondary_bs_y = 0.0;
  double user_center_x = 30.0, user_center_y = 0.0, user_radius = 10.0;
  double target_center_x = 80.0, target_center_y = 0.0, target_radius = 10.0;
};

/// Full experiment configuration. Every power/ratio field is stored in
/// linear units (mW for powers); dB and dBm appear only in the config file
/// and are converted at the parsing boundary. Immutable after validate().
struct Scenario {
  int M = 8;   // primary BS antennas
  int N = 8;   // secondary BS transmit (= receive) antennas
  int K = 3;   // users
  int T = 2;   // targets

  int L = 5;    // total sub-carriers
  int L_c = 3;  // comm sub-carriers per user
  int L_s = 1;  // sensing sub-carriers

  double p_max = 1000.0;        // mW  (30 dBm)
  double p_max_prime = 1000.0;  // mW  (30 dBm)
  double delta_max = 0.1;       // mW  (-10 dBm)

  int tau = 400;
  int tau_c = 3;  // defaults to K when absent from the config
  int tau_d = 100;

  double kappa = 1.9952623149688795;     // 3 dB
  double kappa_si = 1.9952623149688795;  // 3 dB
  double beta_si = 1e-7;                 // -70 dB
  double beta_t_mag = 1e-2;

  double fc = 28e9;         // Hz
  double bandwidth = 10e6;  // Hz
  double n0_mw_per_hz = 3.9810717055349694e-18;  // -174 dBm/Hz
  double noise_figure = 10.0;                    // 10 dB

  Geometry geometry;

  double eta = 1.0;       // CSI quality, 1 = perfect
  double delta_1 = 1e-6;  // inner gradient tolerance
  double delta_2 = 1e-6;  // outer objective tolerance
  double epsilon = 1e-3;  // alternating-optimization tolerance
  long long gr_draws = 100000;  // Gaussian-randomization draws

  int det_snapshots = 0;  // energy-detection snapshots; 0 means tau_d
  CsiErrorConvention csi_error_convention = CsiErrorConvention::corrected;
  Retraction manifold_retraction = Retraction::sphere;

  std::uint64_t seed = 1;
  int n_trials = 1000;

  int tau_s() const { return tau - tau_c - tau_d; }
  int detection_snapshots() const { return det_snapshots > 0 ? det_snapshots : tau_d; }

  /// Throws ValidationError naming the violated rule.
  void validate() const;

  /// Config-file representation; load_scenario() round-trips it.
  std::string to_config_string() const;
  void save(const std::string& path) const;
};

Scenario default_scenario();

/// Parses the flat key-value config format. Unknown keys are rejected.
/// Absent keys fall back to defaults; tau_c additionally defaults to K.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& content, const std::string& origin = "<string>");

/// Applies one "key=value" override (same key set as the config file).
void apply_override(Scenario& sc, const std::string& assignment);

/// Applies a list of overrides, re-deriving tau_c = K when k_users changes
/// without an explicit tau_c, then re-validates.
void apply_overrides(Scenario& sc, const std::vector<std::string>& assignments);

/// Documented list of config keys with a one-line description each.
std::vector<std::pair<std::string, std::string>> config_key_docs();

/// AWGN power sigma^2 in mW: N0 * B * Nf in linear units.
double noise_power(const Scenario& sc);

}  // namespace wbcr
