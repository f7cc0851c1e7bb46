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

#include "wbcr/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <dlfcn.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace wbcr {

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string to_string(SchemeId s) {
  switch (s) {
    case SchemeId::wb_cognitive: return "wb_cognitive";
    case SchemeId::non_cooperative: return "non_cooperative";
    case SchemeId::comm_only: return "comm_only";
    case SchemeId::sens_only: return "sens_only";
  }
  return "?";
}

SchemeId scheme_from_string(const std::string& name) {
  if (name == "wb_cognitive") return SchemeId::wb_cognitive;
  if (name == "non_cooperative") return SchemeId::non_cooperative;
  if (name == "comm_only") return SchemeId::comm_only;
  if (name == "sens_only") return SchemeId::sens_only;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::antennas: return "antennas";
    case SweepAxis::ls: return "ls";
    case SweepAxis::eta: return "eta";
    case SweepAxis::beta_si: return "beta_si";
  }
  return "?";
}

SweepAxis axis_from_string(const std::string& name) {
  if (name == "antennas") return SweepAxis::antennas;
  if (name == "ls") return SweepAxis::ls;
  if (name == "eta") return SweepAxis::eta;
  if (name == "beta_si" || name == "beta-si") return SweepAxis::beta_si;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value) {
  Scenario sc = base;
  switch (axis) {
    case SweepAxis::antennas:
      sc.M = static_cast<int>(value);
      sc.N = static_cast<int>(value);
      break;
    case SweepAxis::ls:
      sc.L_s = static_cast<int>(value);
      break;
    case SweepAxis::eta:
      sc.eta = value;
      break;
    case SweepAxis::beta_si:
      sc.beta_si = db_to_linear(value);
      break;
  }
  sc.validate();
  return sc;
}

TrialMetrics run_trial(const Scenario& sc, SchemeId scheme, std::uint64_t trial_seed,
                       const TrialOptions& opt) {
  return run_trial_detailed(sc, scheme, trial_seed, opt, nullptr);
}

TrialMetrics run_trial_detailed(const Scenario& sc, SchemeId scheme, std::uint64_t trial_seed,
                                const TrialOptions& opt, TrialArtifacts* artifacts) {
  sc.validate();
  const bool comm_active = scheme != SchemeId::sens_only;
  const bool sens_active = scheme != SchemeId::comm_only;

  Stream pos_rng(derive_seed(trial_seed, "pos"));
  const Positions pos = opt.fixed_target_angles.empty()
                            ? sample_positions(sc, pos_rng)
                            : sample_positions_fixed_targets(sc, opt.fixed_target_angles, pos_rng);

  const ChannelSet true_ch = generate_channel_set(sc, pos, derive_seed(trial_seed, "chan"));
  ChannelSet est_storage;
  const ChannelSet* design_ch = &true_ch;
  if (sc.eta < 1.0) {
    Stream csi_rng(derive_seed(trial_seed, "csi"));
    est_storage = inject_csi_error(true_ch, sc.eta, csi_rng, sc.csi_error_convention);
    design_ch = &est_storage;
  }
  const ChannelSet& est_ch = *design_ch;

  Allocation alloc;
  alloc.alpha = comm_active ? allocate_comm(est_ch.h, sc.L_c)
                            : arma::umat(sc.L, sc.K, arma::fill::zeros);

  // Detection-phase precoders: communication-only design on every sub-carrier.
  std::vector<arma::cx_mat> w_det(sc.L, arma::cx_mat(sc.M, sc.K, arma::fill::zeros));
  RcgParams rcg_prm;
  rcg_prm.delta_1 = sc.delta_1;
  rcg_prm.delta_2 = sc.delta_2;
  rcg_prm.retraction = sc.manifold_retraction;
  rcg_prm.rate_weight = static_cast<double>(sc.tau - sc.tau_c) / sc.tau;
  if (comm_active) {
    for (int l = 0; l < sc.L; ++l) {
      std::vector<arma::uword> users;
      for (int k = 0; k < sc.K; ++k)
        if (alloc.alpha(l, k)) users.push_back(k);
      if (users.empty()) continue;
      arma::cx_mat hcols(sc.M, users.size());
      for (std::size_t i = 0; i < users.size(); ++i) hcols.col(i) = est_ch.h[l][users[i]];
      RcgResult res = rcg_solve(lift_channels(hcols, sc.p_max), est_ch.sigma2, rcg_prm);
      const arma::cx_mat w_cols = recover_precoders(res.V_tilde, sc.p_max);
      for (std::size_t i = 0; i < users.size(); ++i) w_det[l].col(users[i]) = w_cols.col(i);
      if (artifacts && opt.want_traces) {
        if (artifacts->rcg.size() < static_cast<std::size_t>(sc.L)) artifacts->rcg.resize(sc.L);
        artifacts->rcg[l] = std::move(res);
      }
    }
  }

  // Energy detection on the air interface (true channels, real noise).
  arma::vec energies(sc.L);
  for (int l = 0; l < sc.L; ++l) {
    Stream e_rng(derive_seed(trial_seed, "energy", static_cast<std::uint64_t>(l)));
    energies(l) = interference_energy(true_ch, w_det, alloc.alpha, l, sc.detection_snapshots(),
                                      e_rng);
  }

  if (sens_active) {
    if (scheme == SchemeId::non_cooperative) {
      Stream psi_rng(derive_seed(trial_seed, "psi"));
      alloc.psi_s = select_sensing_random(sc.L, sc.L_s, psi_rng);
    } else {
      alloc.psi_s = select_sensing(energies, sc.L_s);
    }
  }

  AoMode mode;
  if (scheme != SchemeId::wb_cognitive) {
    mode.comm_terms = false;
    mode.interference_constraint = false;
  }
  const AoParams ao_prm = ao_params_from(sc);

  std::vector<JointSolution> joint;
  std::vector<arma::cx_mat> w_sens(sc.L);
  for (auto l : alloc.psi_s) {
    Stream gr_rng(derive_seed(trial_seed, "gr", static_cast<std::uint64_t>(l)));
    joint.push_back(ao_solve(est_ch, alloc.alpha, l, sc, mode, gr_rng, ao_prm));
    if (scheme == SchemeId::wb_cognitive) {
      // The jointly designed precoders serve the sensing phase.
      arma::cx_mat cols(sc.M, sc.K, arma::fill::zeros);
      const JointSolution& js = joint.back();
      for (std::size_t i = 0; i < js.users.size(); ++i) cols.col(js.users[i]) = js.w[i];
      w_sens[l] = cols;
    } else {
      // No cooperation: the primary keeps its detection-phase precoders.
      w_sens[l] = w_det[l];
    }
  }

  // Performance evaluation against the true channels.
  TrialMetrics tm;
  tm.per_user_rates.zeros(sc.K);
  tm.per_target_rates.zeros(sc.T);

  for (int l = 0; l < sc.L; ++l) {
    int psi_pos = -1;
    for (std::size_t i = 0; i < alloc.psi_s.size(); ++i)
      if (alloc.psi_s[i] == static_cast<arma::uword>(l)) psi_pos = static_cast<int>(i);
    const bool in_psi = psi_pos >= 0;

    if (comm_active) {
      const arma::cx_mat& ws = in_psi ? w_sens[l] : w_det[l];
      const arma::cx_mat S =
          in_psi ? joint[psi_pos].S : arma::cx_mat(sc.N, sc.N, arma::fill::zeros);
      for (int k = 0; k < sc.K; ++k)
        tm.per_user_rates(k) +=
            comm_rate(true_ch, alloc.alpha, w_det[l], ws, S, l, k, sc, in_psi);
    }
    if (in_psi && sens_active) {
      const JointSolution& js = joint[psi_pos];
      arma::cx_mat R_x(sc.M, sc.M, arma::fill::zeros);
      if (comm_active) {
        const arma::cx_mat& ws = w_sens[l];
        for (int k = 0; k < sc.K; ++k)
          if (alloc.alpha(l, k)) R_x += ws.col(k) * ws.col(k).t();
      }
      for (int t = 0; t < sc.T; ++t)
        tm.per_target_rates(t) +=
            sens_rate(true_ch, js.u[t], js.S, R_x, l, t, sc, true);
    }
  }
  tm.comm_sum_rate = arma::accu(tm.per_user_rates);
  tm.sens_sum_rate = arma::accu(tm.per_target_rates);

  if (opt.want_patterns && !joint.empty()) {
    const JointSolution& js = joint.front();
    tm.patterns = beampatterns(js.s, js.u, sc.N, angle_grid(opt.grid_step_deg));
    tm.mse = angle_mse(*tm.patterns, true_ch.theta);
  }
  if (opt.want_traces && !joint.empty()) tm.ao_trace = joint.front().objective_trace;

  if (artifacts) {
    artifacts->positions = pos;
    artifacts->true_channels = true_ch;
    artifacts->alloc = alloc;
    artifacts->w_det = w_det;
    artifacts->w_sens = w_sens;
    artifacts->energies = energies;
    artifacts->joint = joint;
  }
  return tm;
}

SweepResult run_sweep(const Scenario& base, const SweepSpec& spec) {
  base.validate();
  if (spec.values.empty() || spec.schemes.empty() || spec.n_trials < 1)
    throw std::invalid_argument("run_sweep: empty sweep specification");

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t nv = spec.values.size();
  const std::size_t ns = spec.schemes.size();
  const std::size_t nt = static_cast<std::size_t>(spec.n_trials);

  std::vector<Scenario> scenarios;
  scenarios.reserve(nv);
  for (double v : spec.values) scenarios.push_back(apply_axis(base, spec.axis, v));

  struct TaskResult {
    std::uint64_t seed = 0;
    double comm = 0.0, sens = 0.0;
    double mse_t = 0.0, mse_r = 0.0, mse_c = 0.0;
    bool ok = false;
  };
  const std::size_t total = nv * ns * nt;
  std::vector<TaskResult> results(total);

  auto worker_body = [&](std::size_t idx) {
    const std::size_t vi = idx / (ns * nt);
    const std::size_t si = (idx / nt) % ns;
    const std::size_t ti = idx % nt;
    const std::uint64_t seed =
        derive_seed(base.seed, "trial", static_cast<std::uint64_t>(ti));
    TaskResult& out = results[idx];
    out.seed = seed;
    try {
      const TrialMetrics tm =
          run_trial(scenarios[vi], spec.schemes[si], seed, spec.trial_options);
      out.comm = tm.comm_sum_rate;
      out.sens = tm.sens_sum_rate;
      if (tm.mse) {
        out.mse_t = tm.mse->transmit;
        out.mse_r = tm.mse->receive;
        out.mse_c = tm.mse->combined;
      }
      out.ok = true;
    } catch (const std::exception&) {
      out.ok = false;
    }
  };

  const int nthreads = std::max(1, spec.threads);
  if (nthreads == 1) {
    for (std::size_t i = 0; i < total; ++i) worker_body(i);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= total) return;
          worker_body(i);
        }
      });
    for (auto& th : pool) th.join();
  }

  SweepResult res;
  res.axis = spec.axis;
  res.values = spec.values;
  res.schemes = spec.schemes;
  res.cells.assign(nv, std::vector<CellStat>(ns));

  long failed_total = 0;
  for (std::size_t vi = 0; vi < nv; ++vi) {
    for (std::size_t si = 0; si < ns; ++si) {
      // Order-independent reduction: accumulate in seed order.
      std::vector<const TaskResult*> cell;
      cell.reserve(nt);
      for (std::size_t ti = 0; ti < nt; ++ti)
        cell.push_back(&results[vi * ns * nt + si * nt + ti]);
      std::sort(cell.begin(), cell.end(),
                [](const TaskResult* a, const TaskResult* b) { return a->seed < b->seed; });

      CellStat st;
      double mc = 0, m2c = 0, ms = 0, m2s = 0;
      double mt = 0, mr = 0, mcb = 0;
      for (const TaskResult* r : cell) {
        if (!r->ok) {
          ++st.failed;
          ++failed_total;
          continue;
        }
        ++st.n;
        const double dc = r->comm - mc;
        mc += dc / st.n;
        m2c += dc * (r->comm - mc);
        const double ds = r->sens - ms;
        ms += ds / st.n;
        m2s += ds * (r->sens - ms);
        mt += (r->mse_t - mt) / st.n;
        mr += (r->mse_r - mr) / st.n;
        mcb += (r->mse_c - mcb) / st.n;
      }
      st.comm_mean = mc;
      st.sens_mean = ms;
      st.mse_transmit = mt;
      st.mse_receive = mr;
      st.mse_combined = mcb;
      if (st.n >= 2) {
        st.comm_se = std::sqrt(m2c / (st.n - 1) / st.n);
        st.sens_se = std::sqrt(m2s / (st.n - 1) / st.n);
      } else {
        st.comm_se = std::nan("");
        st.sens_se = std::nan("");
      }
      res.cells[vi][si] = st;
    }
  }
  if (failed_total * 100 > static_cast<long>(total))
    throw std::runtime_error("run_sweep: more than 1% of trials failed (" +
                             std::to_string(failed_total) + "/" + std::to_string(total) + ")");

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::string sweep_to_csv(const SweepResult& res) {
  std::ostringstream os;
  os << "axis,scheme,comm_mean,comm_se,sens_mean,sens_se,n\n";
  for (std::size_t vi = 0; vi < res.values.size(); ++vi) {
    for (std::size_t si = 0; si < res.schemes.size(); ++si) {
      const CellStat& c = res.cells[vi][si];
      os << fmt_g(res.values[vi]) << "," << to_string(res.schemes[si]) << ","
         << fmt_g(c.comm_mean) << "," << (std::isnan(c.comm_se) ? "na" : fmt_g(c.comm_se)) << ","
         << fmt_g(c.sens_mean) << "," << (std::isnan(c.sens_se) ? "na" : fmt_g(c.sens_se)) << ","
         << c.n << "\n";
    }
  }
  return os.str();
}

std::string sweep_to_json(const SweepResult& res) {
  nlohmann::json j;
  j["axis"] = to_string(res.axis);
  j["rows"] = nlohmann::json::array();
  for (std::size_t vi = 0; vi < res.values.size(); ++vi) {
    for (std::size_t si = 0; si < res.schemes.size(); ++si) {
      const CellStat& c = res.cells[vi][si];
      nlohmann::json row;
      row["axis"] = res.values[vi];
      row["scheme"] = to_string(res.schemes[si]);
      row["comm_mean"] = c.comm_mean;
      if (std::isnan(c.comm_se))
        row["comm_se"] = "na";
      else
        row["comm_se"] = c.comm_se;
      row["sens_mean"] = c.sens_mean;
      if (std::isnan(c.sens_se))
        row["sens_se"] = "na";
      else
        row["sens_se"] = c.sens_se;
      row["n"] = c.n;
      j["rows"].push_back(row);
    }
  }
  return j.dump(2) + "\n";
}

void emit_results(const SweepResult& res, const std::string& path, const std::string& format) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_results: cannot open '" + path + "'");
  if (format == "csv")
    f << sweep_to_csv(res);
  else if (format == "json")
    f << sweep_to_json(res);
  else
    throw std::invalid_argument("emit_results: unknown format '" + format + "'");
}

SweepResult parse_sweep_csv(const std::string& csv) {
  SweepResult res;
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("parse_sweep_csv: empty input");
  std::vector<double> values;
  std::vector<SchemeId> schemes;
  std::vector<std::tuple<double, SchemeId, CellStat>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ls, tok, ',')) parts.push_back(tok);
    if (parts.size() != 7) throw std::runtime_error("parse_sweep_csv: malformed row '" + line + "'");
    CellStat c;
    const double value = std::stod(parts[0]);
    const SchemeId scheme = scheme_from_string(parts[1]);
    c.comm_mean = std::stod(parts[2]);
    c.comm_se = parts[3] == "na" ? std::nan("") : std::stod(parts[3]);
    c.sens_mean = std::stod(parts[4]);
    c.sens_se = parts[5] == "na" ? std::nan("") : std::stod(parts[5]);
    c.n = std::stol(parts[6]);
    rows.emplace_back(value, scheme, c);
    if (values.empty() || values.back() != value) {
      bool seen = false;
      for (double v : values) seen = seen || v == value;
      if (!seen) values.push_back(value);
    }
    bool s_seen = false;
    for (auto s : schemes) s_seen = s_seen || s == scheme;
    if (!s_seen) schemes.push_back(scheme);
  }
  res.values = values;
  res.schemes = schemes;
  res.cells.assign(values.size(), std::vector<CellStat>(schemes.size()));
  for (auto& [v, s, c] : rows) {
    std::size_t vi = 0, si = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] == v) vi = i;
    for (std::size_t i = 0; i < schemes.size(); ++i)
      if (schemes[i] == s) si = i;
    res.cells[vi][si] = c;
  }
  return res;
}

void pin_blas_single_thread() {
#ifndef _WIN32
  setenv("OPENBLAS_NUM_THREADS", "1", 1);
  setenv("OMP_NUM_THREADS", "1", 1);
  setenv("MKL_NUM_THREADS", "1", 1);
  // The env vars only matter before the BLAS library initializes; reach the
  // runtime switch directly when it exists.
  using SetNumThreads = void (*)(int);
  if (auto* f = reinterpret_cast<SetNumThreads>(dlsym(RTLD_DEFAULT, "openblas_set_num_threads")))
    f(1);
  if (auto* f = reinterpret_cast<SetNumThreads>(dlsym(RTLD_DEFAULT, "omp_set_num_threads")))
    f(1);
#endif
}

}  // namespace wbcr
