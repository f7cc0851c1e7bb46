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

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cmath>

#include "wbcr/harness.hpp"

using namespace wbcr;

int main(int argc, char** argv) {
  pin_blas_single_thread();
  return doctest::Context(argc, argv).run();
}

namespace {

Scenario quick_scenario() {
  Scenario sc = default_scenario();
  sc.gr_draws = 200;
  sc.validate();
  return sc;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (auto s : {SchemeId::wb_cognitive, SchemeId::non_cooperative, SchemeId::comm_only,
                 SchemeId::sens_only})
    CHECK(scheme_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(scheme_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("trials are deterministic in (scenario, scheme, seed)") {
  const Scenario sc = quick_scenario();
  const std::uint64_t seed = derive_seed(sc.seed, "trial", 3ULL);
  const TrialMetrics a = run_trial(sc, SchemeId::wb_cognitive, seed);
  const TrialMetrics b = run_trial(sc, SchemeId::wb_cognitive, seed);
  CHECK(a.comm_sum_rate == b.comm_sum_rate);
  CHECK(a.sens_sum_rate == b.sens_sum_rate);
  CHECK(arma::abs(a.per_user_rates - b.per_user_rates).max() == 0.0);
}

TEST_CASE("scheme contracts: comm-only and sens-only degenerate correctly") {
  const Scenario sc = quick_scenario();
  const std::uint64_t seed = derive_seed(sc.seed, "trial", 1ULL);

  TrialArtifacts art;
  const TrialMetrics co = run_trial_detailed(sc, SchemeId::comm_only, seed, {}, &art);
  CHECK(co.sens_sum_rate == 0.0);
  CHECK(art.alloc.psi_s.empty());
  // Communication metrics equal a pure detection-phase evaluation.
  double manual = 0.0;
  for (int l = 0; l < sc.L; ++l)
    for (int k = 0; k < sc.K; ++k)
      manual += comm_rate(art.true_channels, art.alloc.alpha, art.w_det[l], art.w_det[l],
                          arma::cx_mat(), l, k, sc, false);
  CHECK(co.comm_sum_rate == doctest::Approx(manual).epsilon(1e-12));

  const TrialMetrics so = run_trial(sc, SchemeId::sens_only, seed);
  CHECK(so.comm_sum_rate == 0.0);
  CHECK(so.sens_sum_rate > 0.0);
}

TEST_CASE("non-cooperative selection is random but seeded") {
  const Scenario sc = quick_scenario();
  TrialArtifacts a1, a2;
  run_trial_detailed(sc, SchemeId::non_cooperative, derive_seed(7ULL, "trial", 0ULL), {}, &a1);
  run_trial_detailed(sc, SchemeId::non_cooperative, derive_seed(7ULL, "trial", 0ULL), {}, &a2);
  CHECK(a1.alloc.psi_s == a2.alloc.psi_s);
}

TEST_CASE("axis application and validation") {
  const Scenario sc = quick_scenario();
  CHECK(apply_axis(sc, SweepAxis::antennas, 12).M == 12);
  CHECK(apply_axis(sc, SweepAxis::antennas, 12).N == 12);
  CHECK(apply_axis(sc, SweepAxis::ls, 3).L_s == 3);
  CHECK(apply_axis(sc, SweepAxis::eta, 0.5).eta == doctest::Approx(0.5));
  CHECK(apply_axis(sc, SweepAxis::beta_si, -60).beta_si == doctest::Approx(1e-6));
  CHECK_THROWS_AS(apply_axis(sc, SweepAxis::ls, 99), ValidationError);
}

TEST_CASE("sweep: serial and parallel runs emit byte-identical CSV") {
  Scenario sc = quick_scenario();
  sc.n_trials = 4;
  SweepSpec spec;
  spec.axis = SweepAxis::antennas;
  spec.values = {4, 8};
  spec.schemes = {SchemeId::comm_only, SchemeId::non_cooperative};
  spec.n_trials = 4;

  spec.threads = 1;
  const std::string serial = sweep_to_csv(run_sweep(sc, spec));
  spec.threads = 4;
  const std::string parallel = sweep_to_csv(run_sweep(sc, spec));
  CHECK(serial == parallel);
  CHECK(serial.substr(0, 50) == "axis,scheme,comm_mean,comm_se,sens_mean,sens_se,n\n");
}

TEST_CASE("sweep results round-trip through CSV and match JSON numerically") {
  Scenario sc = quick_scenario();
  SweepSpec spec;
  spec.axis = SweepAxis::ls;
  spec.values = {1, 2};
  spec.schemes = {SchemeId::comm_only};
  spec.n_trials = 3;
  spec.threads = 2;
  const SweepResult res = run_sweep(sc, spec);

  const SweepResult back = parse_sweep_csv(sweep_to_csv(res));
  REQUIRE(back.values.size() == res.values.size());
  REQUIRE(back.schemes.size() == res.schemes.size());
  for (std::size_t v = 0; v < res.values.size(); ++v) {
    for (std::size_t s = 0; s < res.schemes.size(); ++s) {
      const CellStat& x = res.cells[v][s];
      const CellStat& y = back.cells[v][s];
      CHECK(y.comm_mean == doctest::Approx(x.comm_mean).epsilon(1e-10));
      CHECK(y.sens_mean == doctest::Approx(x.sens_mean).epsilon(1e-10));
      CHECK(y.n == x.n);
    }
  }

  const std::string json = sweep_to_json(res);
  for (std::size_t v = 0; v < res.values.size(); ++v)
    CHECK(json.find(to_string(res.schemes[0])) != std::string::npos);
}

TEST_CASE("single-trial cells report the standard error as unavailable") {
  Scenario sc = quick_scenario();
  SweepSpec spec;
  spec.axis = SweepAxis::eta;
  spec.values = {1.0};
  spec.schemes = {SchemeId::comm_only};
  spec.n_trials = 1;
  spec.threads = 1;
  const SweepResult res = run_sweep(sc, spec);
  const std::string csv = sweep_to_csv(res);
  CHECK(csv.find(",na,") != std::string::npos);
}

TEST_CASE("csi imperfection lowers the mean communication rate") {
  Scenario good = quick_scenario();
  Scenario bad = good;
  bad.eta = 0.25;
  double rate_good = 0.0, rate_bad = 0.0;
  for (int t = 0; t < 6; ++t) {
    const std::uint64_t seed = derive_seed(11ULL, "trial", static_cast<std::uint64_t>(t));
    rate_good += run_trial(good, SchemeId::comm_only, seed).comm_sum_rate;
    rate_bad += run_trial(bad, SchemeId::comm_only, seed).comm_sum_rate;
  }
  CHECK(rate_bad < rate_good);
}

TEST_CASE("trial artifacts expose traces and patterns on demand") {
  Scenario sc = quick_scenario();
  TrialOptions opt;
  opt.want_patterns = true;
  opt.want_traces = true;
  opt.grid_step_deg = 0.5;
  TrialArtifacts art;
  const TrialMetrics tm =
      run_trial_detailed(sc, SchemeId::wb_cognitive, derive_seed(3ULL, "trial", 0ULL), opt, &art);
  CHECK(tm.patterns.has_value());
  CHECK(tm.mse.has_value());
  CHECK_FALSE(tm.ao_trace.empty());
  CHECK(art.rcg.size() == static_cast<std::size_t>(sc.L));
  CHECK_FALSE(art.rcg[0].trace.objective.empty());
  CHECK(art.energies.n_elem == static_cast<arma::uword>(sc.L));
}
