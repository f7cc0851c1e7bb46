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

#include "wbcr/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace wbcr {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// One config key: how to parse it into a Scenario and how to print it back.
struct KeyDesc {
  std::string key;
  std::string doc;
  std::function<void(Scenario&, const std::string&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

double parse_double(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": cannot parse '" + v + "' as a number");
  }
}

long long parse_int(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": cannot parse '" + v + "' as an integer");
  }
}

const std::vector<KeyDesc>& key_table() {
  auto int_key = [](std::string key, std::string doc, int Scenario::* field) {
    return KeyDesc{key, doc,
                   [field](Scenario& sc, const std::string& v, const std::string& ctx) {
                     sc.*field = static_cast<int>(parse_int(v, ctx));
                   },
                   [field](const Scenario& sc) { return std::to_string(sc.*field); }};
  };
  auto dbl_key = [](std::string key, std::string doc, double Scenario::* field) {
    return KeyDesc{key, doc,
                   [field](Scenario& sc, const std::string& v, const std::string& ctx) {
                     sc.*field = parse_double(v, ctx);
                   },
                   [field](const Scenario& sc) { return fmt_double(sc.*field); }};
  };
  // Fields configured in dB / dBm but stored linear.
  auto db_key = [](std::string key, std::string doc, double Scenario::* field) {
    return KeyDesc{key, doc,
                   [field](Scenario& sc, const std::string& v, const std::string& ctx) {
                     sc.*field = db_to_linear(parse_double(v, ctx));
                   },
                   [field](const Scenario& sc) { return fmt_double(linear_to_db(sc.*field)); }};
  };
  auto geo_key = [](std::string key, std::string doc, double Geometry::* field) {
    return KeyDesc{key, doc,
                   [field](Scenario& sc, const std::string& v, const std::string& ctx) {
                     sc.geometry.*field = parse_double(v, ctx);
                   },
                   [field](const Scenario& sc) { return fmt_double(sc.geometry.*field); }};
  };

  static const std::vector<KeyDesc> table = {
      int_key("m_antennas", "primary BS antennas (M)", &Scenario::M),
      int_key("n_antennas", "secondary BS transmit/receive antennas (N)", &Scenario::N),
      int_key("k_users", "number of users (K)", &Scenario::K),
      int_key("t_targets", "number of targets (T)", &Scenario::T),
      int_key("l_subcarriers", "total sub-carriers (L)", &Scenario::L),
      int_key("l_comm", "comm sub-carriers assigned per user (L_c)", &Scenario::L_c),
      int_key("l_sens", "sensing sub-carriers (L_s)", &Scenario::L_s),
      db_key("p_max_dbm", "primary BS power budget [dBm]", &Scenario::p_max),
      db_key("p_max_prime_dbm", "secondary BS power budget [dBm]", &Scenario::p_max_prime),
      db_key("delta_max_dbm", "max sensing interference per user [dBm]", &Scenario::delta_max),
      int_key("tau", "coherence block length [samples]", &Scenario::tau),
      int_key("tau_c", "channel-estimation duration [samples]; defaults to K", &Scenario::tau_c),
      int_key("tau_d", "detection/selection duration [samples]", &Scenario::tau_d),
      db_key("kappa_db", "Rician factor for comm channels [dB]", &Scenario::kappa),
      db_key("kappa_si_db", "Rician factor for the SI channel [dB]", &Scenario::kappa_si),
      db_key("beta_si_db", "residual self-interference gain [dB]", &Scenario::beta_si),
      dbl_key("beta_t_mag", "target reflection amplitude |beta_t|", &Scenario::beta_t_mag),
      dbl_key("fc_hz", "carrier frequency [Hz]", &Scenario::fc),
      dbl_key("bandwidth_hz", "bandwidth [Hz]", &Scenario::bandwidth),
      db_key("n0_dbm_per_hz", "noise spectral density [dBm/Hz]", &Scenario::n0_mw_per_hz),
      db_key("nf_db", "noise figure [dB]", &Scenario::noise_figure),
      dbl_key("eta", "CSI quality in [0,1]; 1 = perfect", &Scenario::eta),
      dbl_key("delta_1", "manifold solver gradient tolerance", &Scenario::delta_1),
      dbl_key("delta_2", "manifold solver objective tolerance", &Scenario::delta_2),
      dbl_key("epsilon", "alternating-optimization relative tolerance", &Scenario::epsilon),
      KeyDesc{"gr_draws", "Gaussian-randomization candidate draws (D)",
              [](Scenario& sc, const std::string& v, const std::string& ctx) {
                sc.gr_draws = parse_int(v, ctx);
              },
              [](const Scenario& sc) { return std::to_string(sc.gr_draws); }},
      int_key("det_snapshots", "energy-detection snapshots; 0 means tau_d",
              &Scenario::det_snapshots),
      KeyDesc{"csi_error_convention", "'corrected' (error vanishes at eta=1) or 'paper'",
              [](Scenario& sc, const std::string& v, const std::string& ctx) {
                if (v == "corrected")
                  sc.csi_error_convention = CsiErrorConvention::corrected;
                else if (v == "paper")
                  sc.csi_error_convention = CsiErrorConvention::paper;
                else
                  throw ConfigError(ctx + ": expected 'corrected' or 'paper', got '" + v + "'");
              },
              [](const Scenario& sc) {
                return sc.csi_error_convention == CsiErrorConvention::corrected
                           ? std::string("corrected")
                           : std::string("paper");
              }},
      KeyDesc{"manifold_retraction", "'sphere' (global normalization) or 'elementwise'",
              [](Scenario& sc, const std::string& v, const std::string& ctx) {
                if (v == "sphere")
                  sc.manifold_retraction = Retraction::sphere;
                else if (v == "elementwise")
                  sc.manifold_retraction = Retraction::elementwise;
                else
                  throw ConfigError(ctx + ": expected 'sphere' or 'elementwise', got '" + v + "'");
              },
              [](const Scenario& sc) {
                return sc.manifold_retraction == Retraction::sphere ? std::string("sphere")
                                                                    : std::string("elementwise");
              }},
      KeyDesc{"seed", "master RNG seed (64-bit unsigned)",
              [](Scenario& sc, const std::string& v, const std::string& ctx) {
                try {
                  std::size_t pos = 0;
                  sc.seed = std::stoull(v, &pos);
                  if (pos != v.size()) throw std::invalid_argument(v);
                } catch (const std::exception&) {
                  throw ConfigError(ctx + ": cannot parse '" + v + "' as an unsigned integer");
                }
              },
              [](const Scenario& sc) { return std::to_string(sc.seed); }},
      int_key("n_trials", "Monte-Carlo trials per point", &Scenario::n_trials),
      geo_key("primary_bs_x", "primary BS x [m]", &Geometry::primary_bs_x),
      geo_key("primary_bs_y", "primary BS y [m]", &Geometry::primary_bs_y),
      geo_key("secondary_bs_x", "secondary BS x [m]", &Geometry::secondary_bs_x),
      geo_key("secondary_bs_y", "secondary BS y [m]", &Geometry::secondary_bs_y),
      geo_key("user_center_x", "user region center x [m]", &Geometry::user_center_x),
      geo_key("user_center_y", "user region center y [m]", &Geometry::user_center_y),
      geo_key("user_radius", "user region radius [m]", &Geometry::user_radius),
      geo_key("target_center_x", "target region center x [m]", &Geometry::target_center_x),
      geo_key("target_center_y", "target region center y [m]", &Geometry::target_center_y),
      geo_key("target_radius", "target region radius [m]", &Geometry::target_radius),
  };
  return table;
}

const KeyDesc* find_key(const std::string& key) {
  for (const auto& d : key_table())
    if (d.key == key) return &d;
  return nullptr;
}

}  // namespace

void Scenario::validate() const {
  auto fail = [](const std::string& rule) { throw ValidationError("scenario validation: " + rule); };
  if (M < 1) fail("M >= 1 violated");
  if (N < 1) fail("N >= 1 violated");
  if (K < 1) fail("K >= 1 violated");
  if (T < 1) fail("T >= 1 violated");
  if (L < 1) fail("L >= 1 violated");
  if (L_c < 1 || L_c > L) fail("1 <= L_c <= L violated");
  if (L_s < 1 || L_s > L) fail("1 <= L_s <= L violated");
  if (tau < 1 || tau_c < 1 || tau_d < 1) fail("tau, tau_c, tau_d >= 1 violated");
  if (tau_c + tau_d >= tau) fail("tau_c + tau_d < tau violated");
  if (!(p_max > 0)) fail("p_max > 0 violated");
  if (!(p_max_prime > 0)) fail("p_max_prime > 0 violated");
  if (!(delta_max > 0)) fail("delta_max > 0 violated");
  if (kappa < 0 || kappa_si < 0) fail("kappa >= 0 violated");
  if (!(beta_si > 0 && beta_si < 1)) fail("0 < beta_si < 1 violated");
  if (beta_t_mag < 0) fail("beta_t_mag >= 0 violated");
  if (!(fc > 0)) fail("fc > 0 violated");
  if (!(bandwidth > 0)) fail("bandwidth > 0 violated");
  if (!(n0_mw_per_hz > 0)) fail("N0 > 0 violated");
  if (!(noise_figure > 0)) fail("noise figure > 0 violated");
  if (!(eta >= 0 && eta <= 1)) fail("0 <= eta <= 1 violated");
  if (!(delta_1 > 0 && delta_2 > 0 && epsilon > 0)) fail("delta_1, delta_2, epsilon > 0 violated");
  if (gr_draws < 1) fail("gr_draws >= 1 violated");
  if (det_snapshots < 0) fail("det_snapshots >= 0 violated");
  if (n_trials < 1) fail("n_trials >= 1 violated");
  if (!(geometry.user_radius > 0)) fail("user_radius > 0 violated");
  if (!(geometry.target_radius > 0)) fail("target_radius > 0 violated");
}

std::string Scenario::to_config_string() const {
  std::ostringstream os;
  os << "# wbcr-sim scenario\n";
  for (const auto& d : key_table()) os << d.key << " = " << d.get(*this) << "\n";
  return os.str();
}

void Scenario::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << to_config_string();
}

Scenario default_scenario() {
  Scenario sc;
  sc.tau_c = sc.K;
  return sc;
}

Scenario parse_scenario(const std::string& content, const std::string& origin) {
  Scenario sc = default_scenario();
  bool tau_c_seen = false;
  bool k_seen = false;
  std::istringstream is(content);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string ctx = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos)
      throw ConfigError(ctx + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeyDesc* d = find_key(key);
    if (!d) throw ConfigError(ctx + ": unknown key '" + key + "'");
    d->set(sc, value, ctx + " (" + key + ")");
    if (key == "tau_c") tau_c_seen = true;
    if (key == "k_users") k_seen = true;
  }
  if (!tau_c_seen && k_seen) sc.tau_c = sc.K;
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str(), path);
}

void apply_override(Scenario& sc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const KeyDesc* d = find_key(key);
  if (!d) throw ConfigError("override: unknown key '" + key + "'");
  d->set(sc, value, "--set " + key);
}

void apply_overrides(Scenario& sc, const std::vector<std::string>& assignments) {
  bool tau_c_set = false, k_set = false;
  for (const auto& a : assignments) {
    apply_override(sc, a);
    const std::string key = trim(a.substr(0, a.find('=')));
    if (key == "tau_c") tau_c_set = true;
    if (key == "k_users") k_set = true;
  }
  if (k_set && !tau_c_set) sc.tau_c = sc.K;
  sc.validate();
}

std::vector<std::pair<std::string, std::string>> config_key_docs() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& d : key_table()) out.emplace_back(d.key, d.doc);
  return out;
}

double noise_power(const Scenario& sc) {
  return sc.n0_mw_per_hz * sc.bandwidth * sc.noise_figure;
}

}  // namespace wbcr
