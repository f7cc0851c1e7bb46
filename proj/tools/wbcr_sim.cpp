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

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include "wbcr/harness.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CommonOpts {
  std::string config;
  std::vector<std::string> overrides;
  std::string profile = "ci";
  int threads = 0;
};

wbcr::Scenario make_scenario(const CommonOpts& c) {
  wbcr::Scenario sc =
      c.config.empty() ? wbcr::default_scenario() : wbcr::load_scenario(c.config);
  if (c.profile == "ci") {
    sc.n_trials = 50;
    sc.gr_draws = 1000;
  } else if (c.profile == "paper") {
    sc.n_trials = 1000;
    sc.gr_draws = 100000;
  } else {
    throw wbcr::ConfigError("--profile must be 'ci' or 'paper'");
  }
  wbcr::apply_overrides(sc, c.overrides);
  return sc;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void add_common(CLI::App* app, CommonOpts& c) {
  app->add_option("--config", c.config, "scenario config file");
  app->add_option("--set", c.overrides, "override a config key, e.g. --set k_users=5")
      ->take_all();
  app->add_option("--profile", c.profile, "'ci' (fast defaults) or 'paper' (full scale)");
  app->add_option("--threads", c.threads, "worker threads (default: all cores)");
}

std::vector<double> default_axis_values(wbcr::SweepAxis axis) {
  switch (axis) {
    case wbcr::SweepAxis::antennas: return {4, 8, 12, 16};
    case wbcr::SweepAxis::ls: return {1, 2, 3, 4};
    case wbcr::SweepAxis::eta: return {0.25, 0.5, 0.75, 1.0};
    case wbcr::SweepAxis::beta_si: return {-60, -70, -80};
  }
  return {};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << content;
}

}  // namespace

int main(int argc, char** argv) {
  wbcr::pin_blas_single_thread();
  CLI::App app{"wideband cognitive-radio communication and sensing simulator"};
  app.require_subcommand(1);

  // ---- trial ----------------------------------------------------------
  CommonOpts trial_c;
  std::uint64_t trial_index = 0;
  std::string trial_scheme = "wb_cognitive";
  std::string trial_dump, trial_dump_channels;
  auto* trial = app.add_subcommand("trial", "run one trial and print its metrics");
  add_common(trial, trial_c);
  trial->add_option("--seed", trial_index, "trial index under the master seed");
  trial->add_option("--scheme", trial_scheme, "wb_cognitive|non_cooperative|comm_only|sens_only");
  trial->add_option("--dump", trial_dump, "write metrics and allocation as JSON");
  trial->add_option("--dump-channels", trial_dump_channels, "write the channel set as JSON");

  // ---- convergence ----------------------------------------------------
  CommonOpts conv_c;
  std::string conv_out = "convergence";
  std::vector<int> conv_antennas{4, 8, 12, 16};
  auto* conv = app.add_subcommand("convergence", "export solver traces per antenna count");
  add_common(conv, conv_c);
  conv->add_option("--out", conv_out, "output file prefix");
  conv->add_option("--antennas", conv_antennas, "antenna counts")->take_all();

  // ---- beampattern ----------------------------------------------------
  CommonOpts beam_c;
  std::string beam_out = "beampattern.csv";
  std::string beam_scheme = "wb_cognitive";
  std::vector<double> beam_angles{-40, -15, 10, 35};
  std::uint64_t beam_index = 0;
  double beam_grid = 0.5;
  auto* beam = app.add_subcommand("beampattern", "dump p1/p2/p3 over the angle grid");
  add_common(beam, beam_c);
  beam->add_option("--out", beam_out, "output CSV path");
  beam->add_option("--scheme", beam_scheme, "scheme to run");
  beam->add_option("--angles", beam_angles, "target bearings in degrees")->take_all();
  beam->add_option("--seed", beam_index, "trial index");
  beam->add_option("--grid", beam_grid, "grid step in degrees");

  // ---- sweep ----------------------------------------------------------
  CommonOpts sweep_c;
  std::string sweep_axis = "antennas";
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_schemes{"wb_cognitive", "non_cooperative", "comm_only",
                                         "sens_only"};
  int sweep_trials = 0;
  std::string sweep_out = "sweep.csv";
  std::string sweep_format = "csv";
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over a scenario axis");
  add_common(sweep, sweep_c);
  sweep->add_option("--axis", sweep_axis, "antennas|ls|eta|beta-si");
  sweep->add_option("--values", sweep_values, "axis values (default depends on axis)")
      ->take_all();
  sweep->add_option("--schemes", sweep_schemes, "schemes to run")->take_all();
  sweep->add_option("--trials", sweep_trials, "trials per point (default: scenario n_trials)");
  sweep->add_option("--out", sweep_out, "output path");
  sweep->add_option("--format", sweep_format, "csv|json");

  // ---- mse-table ------------------------------------------------------
  CommonOpts mse_c;
  int mse_trials = 0;
  std::string mse_out;
  std::vector<double> mse_angles{-40, -15, 10, 35};
  auto* mse = app.add_subcommand("mse-table", "angle-estimation MSE per scheme");
  add_common(mse, mse_c);
  mse->add_option("--trials", mse_trials, "trials (default: scenario n_trials)");
  mse->add_option("--out", mse_out, "optional CSV path (default: stdout only)");
  mse->add_option("--angles", mse_angles, "target bearings in degrees")->take_all();

  // ---- config-keys ----------------------------------------------------
  auto* keys = app.add_subcommand("config-keys", "list recognized config keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*trial) {
      wbcr::Scenario sc = make_scenario(trial_c);
      const auto scheme = wbcr::scheme_from_string(trial_scheme);
      const std::uint64_t seed = wbcr::derive_seed(sc.seed, "trial", trial_index);
      wbcr::TrialOptions opt;
      opt.want_traces = true;
      wbcr::TrialArtifacts art;
      const wbcr::TrialMetrics tm = wbcr::run_trial_detailed(sc, scheme, seed, opt, &art);
      std::printf("scheme          %s\n", wbcr::to_string(scheme).c_str());
      std::printf("comm sum rate   %.6f bits/s/Hz\n", tm.comm_sum_rate);
      std::printf("sens sum rate   %.6f bits/s/Hz\n", tm.sens_sum_rate);
      std::printf("sensing set     {");
      for (std::size_t i = 0; i < art.alloc.psi_s.size(); ++i)
        std::printf("%s%llu", i ? ", " : "",
                    static_cast<unsigned long long>(art.alloc.psi_s[i] + 1));
      std::printf("}\n");
      if (!trial_dump.empty()) {
        nlohmann::json j;
        j["scheme"] = wbcr::to_string(scheme);
        j["trial_seed"] = seed;
        j["comm_sum_rate"] = tm.comm_sum_rate;
        j["sens_sum_rate"] = tm.sens_sum_rate;
        j["per_user_rates"] =
            std::vector<double>(tm.per_user_rates.begin(), tm.per_user_rates.end());
        j["per_target_rates"] =
            std::vector<double>(tm.per_target_rates.begin(), tm.per_target_rates.end());
        j["energies"] = std::vector<double>(art.energies.begin(), art.energies.end());
        j["psi_s"] = art.alloc.psi_s;
        std::vector<std::vector<int>> alpha(art.alloc.alpha.n_rows);
        for (arma::uword l = 0; l < art.alloc.alpha.n_rows; ++l)
          for (arma::uword k = 0; k < art.alloc.alpha.n_cols; ++k)
            alpha[l].push_back(static_cast<int>(art.alloc.alpha(l, k)));
        j["alpha"] = alpha;
        if (!tm.ao_trace.empty()) j["ao_trace"] = tm.ao_trace;
        write_file(trial_dump, j.dump(2) + "\n");
      }
      if (!trial_dump_channels.empty())
        wbcr::dump_channels_json(art.true_channels, trial_dump_channels);
    }

    if (*conv) {
      wbcr::Scenario base = make_scenario(conv_c);
      for (int m : conv_antennas) {
        wbcr::Scenario sc = wbcr::apply_axis(base, wbcr::SweepAxis::antennas, m);
        wbcr::TrialOptions opt;
        opt.want_traces = true;
        wbcr::TrialArtifacts art;
        wbcr::run_trial_detailed(sc, wbcr::SchemeId::wb_cognitive,
                                 wbcr::derive_seed(sc.seed, "trial", 0ULL), opt, &art);
        {
          std::string csv = "iteration,objective,grad_norm\n";
          const wbcr::RcgResult& r = art.rcg.at(0);
          for (std::size_t i = 0; i < r.trace.objective.size(); ++i) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g\n", i, -r.trace.objective[i],
                          r.trace.grad_norm[i]);
            csv += buf;
          }
          write_file(conv_out + "_alg1_M" + std::to_string(m) + ".csv", csv);
        }
        if (!art.joint.empty()) {
          std::string csv = "iteration,objective\n";
          for (std::size_t i = 0; i < art.joint[0].objective_trace.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i + 1,
                          art.joint[0].objective_trace[i]);
            csv += buf;
          }
          write_file(conv_out + "_alg2_M" + std::to_string(m) + ".csv", csv);
        }
        std::printf("M=%d traces written\n", m);
      }
    }

    if (*beam) {
      wbcr::Scenario sc = make_scenario(beam_c);
      if (static_cast<int>(beam_angles.size()) != sc.T)
        wbcr::apply_overrides(sc, {"t_targets=" + std::to_string(beam_angles.size())});
      wbcr::TrialOptions opt;
      opt.want_patterns = true;
      opt.grid_step_deg = beam_grid;
      for (double a : beam_angles) opt.fixed_target_angles.push_back(a * kPi / 180.0);
      const wbcr::TrialMetrics tm =
          wbcr::run_trial(sc, wbcr::scheme_from_string(beam_scheme),
                          wbcr::derive_seed(sc.seed, "trial", beam_index), opt);
      if (!tm.patterns) throw std::runtime_error("scheme produced no sensing solution");
      const wbcr::Beampatterns& bp = *tm.patterns;
      std::string csv = "theta_deg,p1,p2,p3\n";
      for (arma::uword i = 0; i < bp.theta.n_elem; ++i) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.6g,%.12g,%.12g,%.12g\n", bp.theta(i) * 180.0 / kPi,
                      bp.p1(i), arma::accu(bp.p2.row(i)), arma::accu(bp.p3.row(i)));
        csv += buf;
      }
      write_file(beam_out, csv);
      std::printf("beampattern written to %s (combined angle MSE %.3g rad^2)\n",
                  beam_out.c_str(), tm.mse ? tm.mse->combined : 0.0);
    }

    if (*sweep) {
      wbcr::Scenario sc = make_scenario(sweep_c);
      wbcr::SweepSpec spec;
      spec.axis = wbcr::axis_from_string(sweep_axis);
      spec.values = sweep_values.empty() ? default_axis_values(spec.axis) : sweep_values;
      for (const auto& s : sweep_schemes) spec.schemes.push_back(wbcr::scheme_from_string(s));
      spec.n_trials = sweep_trials > 0 ? sweep_trials : sc.n_trials;
      spec.threads = resolve_threads(sweep_c.threads);
      const wbcr::SweepResult res = wbcr::run_sweep(sc, spec);
      wbcr::emit_results(res, sweep_out, sweep_format);
      std::printf("sweep written to %s (%d trials/point, %.1f s)\n", sweep_out.c_str(),
                  spec.n_trials, res.wall_seconds);
    }

    if (*mse) {
      wbcr::Scenario sc = make_scenario(mse_c);
      if (static_cast<int>(mse_angles.size()) != sc.T)
        wbcr::apply_overrides(sc, {"t_targets=" + std::to_string(mse_angles.size())});
      const int n = mse_trials > 0 ? mse_trials : sc.n_trials;
      wbcr::TrialOptions opt;
      opt.want_patterns = true;
      for (double a : mse_angles) opt.fixed_target_angles.push_back(a * kPi / 180.0);

      std::string csv = "scheme,mse_transmit,mse_receive,mse_combined,n\n";
      for (auto scheme : {wbcr::SchemeId::wb_cognitive, wbcr::SchemeId::sens_only,
                          wbcr::SchemeId::non_cooperative}) {
        double mt = 0, mr = 0, mc = 0;
        long cnt = 0;
        for (int t = 0; t < n; ++t) {
          const wbcr::TrialMetrics tm = wbcr::run_trial(
              sc, scheme, wbcr::derive_seed(sc.seed, "trial", static_cast<std::uint64_t>(t)),
              opt);
          if (!tm.mse) continue;
          ++cnt;
          mt += (tm.mse->transmit - mt) / cnt;
          mr += (tm.mse->receive - mr) / cnt;
          mc += (tm.mse->combined - mc) / cnt;
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%ld\n",
                      wbcr::to_string(scheme).c_str(), mt, mr, mc, cnt);
        csv += buf;
        std::printf("%-16s transmit %.3g  receive %.3g  combined %.3g  (rad^2, n=%ld)\n",
                    wbcr::to_string(scheme).c_str(), mt, mr, mc, cnt);
      }
      if (!mse_out.empty()) write_file(mse_out, csv);
    }

    if (*keys) {
      for (const auto& [key, doc] : wbcr::config_key_docs())
        std::printf("%-24s %s\n", key.c_str(), doc.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
