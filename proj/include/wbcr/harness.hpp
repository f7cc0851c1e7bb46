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

#include <cstdint>
#include <string>
#include <vector>

#include "wbcr/allocation.hpp"
#include "wbcr/joint_beamformer.hpp"
#include "wbcr/manifold_beamformer.hpp"
#include "wbcr/metrics.hpp"
#include "wbcr/scenario.hpp"

namespace wbcr {

enum class SchemeId { wb_cognitive, non_cooperative, comm_only, sens_only };

std::string to_string(SchemeId s);
SchemeId scheme_from_string(const std::string& name);

struct TrialOptions {
  bool want_patterns = false;
  double grid_step_deg = 0.05;
  std::vector<double> fixed_target_angles;  // radians; empty = sample positions
  bool want_traces = false;
};

/// Detailed per-trial outputs for dumps and trace exports.
struct TrialArtifacts {
  Positions positions;
  ChannelSet true_channels;
  Allocation alloc;
  std::vector<arma::cx_mat> w_det;   // per sub-carrier, M x K
  std::vector<arma::cx_mat> w_sens;  // per sub-carrier, M x K (sensing l only)
  arma::vec energies;
  std::vector<JointSolution> joint;  // aligned with alloc.psi_s
  std::vector<RcgResult> rcg;        // per sub-carrier (want_traces only)
};

/// One Monte-Carlo trial: channels -> allocation -> beamforming -> metrics.
/// Deterministic in (scenario, scheme, trial_seed).
TrialMetrics run_trial(const Scenario& sc, SchemeId scheme, std::uint64_t trial_seed,
                       const TrialOptions& opt = {});

TrialMetrics run_trial_detailed(const Scenario& sc, SchemeId scheme, std::uint64_t trial_seed,
                                const TrialOptions& opt, TrialArtifacts* artifacts);

enum class SweepAxis { antennas, ls, eta, beta_si };

std::string to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& name);

/// Applies one axis value to a scenario copy (antennas sets M = N;
/// beta_si values are given in dB).
Scenario apply_axis(const Scenario& base, SweepAxis axis, double value);

struct SweepSpec {
  SweepAxis axis = SweepAxis::antennas;
  std::vector<double> values;
  std::vector<SchemeId> schemes;
  int n_trials = 1;
  int threads = 1;
  TrialOptions trial_options;
};

struct CellStat {
  double comm_mean = 0.0, comm_se = 0.0;
  double sens_mean = 0.0, sens_se = 0.0;
  double mse_transmit = 0.0, mse_receive = 0.0, mse_combined = 0.0;
  long n = 0;
  long failed = 0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::antennas;
  std::vector<double> values;
  std::vector<SchemeId> schemes;
  std::vector<std::vector<CellStat>> cells;  // [value][scheme]
  double wall_seconds = 0.0;
};

/// Monte-Carlo sweep. Trial seeds derive from the master seed and the trial
/// index only, so schemes and axis values share channel realizations, and
/// aggregation is sorted by seed: serial and parallel runs give identical
/// results. Throws if more than 1% of trials fail.
SweepResult run_sweep(const Scenario& base, const SweepSpec& spec);

/// Deterministic CSV with columns axis,scheme,comm_mean,comm_se,sens_mean,sens_se,n.
std::string sweep_to_csv(const SweepResult& res);
std::string sweep_to_json(const SweepResult& res);
void emit_results(const SweepResult& res, const std::string& path, const std::string& format);

/// Parses sweep_to_csv output back (for round-trip checks and tooling).
SweepResult parse_sweep_csv(const std::string& csv);

/// Caps BLAS threading; call once at process start, before any math.
void pin_blas_single_thread();

}  // namespace wbcr
