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

#include "wbcr/manifold_beamformer.hpp"

#include <cmath>
#include <stdexcept>

namespace wbcr {

namespace {

constexpr double kLn2 = 0.6931471805599453094;

double real_inner(const arma::cx_mat& a, const arma::cx_mat& b) {
  return std::real(arma::accu(arma::conj(a) % b));
}

// Per-user signal power N_k and total-plus-noise power A_k from the
// projection table P = Hhat^H V (row k = hhat_k^H V).
void ratio_terms(const arma::cx_mat& P, double sigma2, arma::vec& N, arma::vec& A) {
  const arma::uword K = P.n_rows;
  N.set_size(K);
  A.set_size(K);
  for (arma::uword k = 0; k < K; ++k) {
    double total = 0.0;
    for (arma::uword i = 0; i < K; ++i) total += std::norm(P(k, i));
    N(k) = std::norm(P(k, k));
    A(k) = total + sigma2;
  }
}

// Recorded objective: negative of the full fractional-programming value.
// At mu = sinr it equals -rate_weight * sum_k log2(1 + sinr_k).
double recorded_objective(double ratio_sum, const arma::vec& mu, double rate_weight) {
  double s = 0.0;
  for (arma::uword k = 0; k < mu.n_elem; ++k) s += std::log1p(mu(k)) - mu(k);
  return -(rate_weight / kLn2) * (s + ratio_sum);
}

}  // namespace

arma::cx_mat lift_channels(const arma::cx_mat& h_cols, double p_max) {
  arma::cx_mat out(h_cols.n_rows + 1, h_cols.n_cols, arma::fill::zeros);
  out.rows(0, h_cols.n_rows - 1) = std::sqrt(p_max) * h_cols;
  return out;
}

double comm_sinr_lifted(const arma::cx_mat& V, const arma::cx_mat& Hhat, arma::uword k,
                        double sigma2) {
  const arma::cx_rowvec row = Hhat.col(k).t() * V;
  double interference = 0.0;
  for (arma::uword i = 0; i < row.n_elem; ++i)
    if (i != k) interference += std::norm(row(i));
  return std::norm(row(k)) / (interference + sigma2);
}

arma::vec fp_update_mu(const arma::cx_mat& V, const arma::cx_mat& Hhat, double sigma2) {
  const arma::uword K = Hhat.n_cols;
  arma::vec mu(K);
  for (arma::uword k = 0; k < K; ++k) mu(k) = comm_sinr_lifted(V, Hhat, k, sigma2);
  return mu;
}

double fp_ratio_sum(const arma::cx_mat& V, const arma::vec& mu_hat, const arma::cx_mat& Hhat,
                    double sigma2) {
  const arma::cx_mat P = Hhat.t() * V;
  arma::vec N, A;
  ratio_terms(P, sigma2, N, A);
  double s = 0.0;
  for (arma::uword k = 0; k < N.n_elem; ++k) s += mu_hat(k) * N(k) / A(k);
  return s;
}

arma::cx_mat euclidean_gradient(const arma::cx_mat& V, const arma::vec& mu_hat,
                                const arma::cx_mat& Hhat, double sigma2) {
  const arma::uword K = Hhat.n_cols;
  const arma::cx_mat P = Hhat.t() * V;
  arma::vec N, A;
  ratio_terms(P, sigma2, N, A);

  // Gradient of -sum_k muhat_k N_k / A_k; column i collects
  // -2 muhat_k [ delta_{ik} P(k,k)/A_k - N_k P(k,i)/A_k^2 ] hhat_k,
  // assembled as Hhat * C.
  arma::cx_mat C(K, K, arma::fill::zeros);
  for (arma::uword k = 0; k < K; ++k) {
    const double w = 2.0 * mu_hat(k);
    for (arma::uword i = 0; i < K; ++i) {
      std::complex<double> c = (N(k) / (A(k) * A(k))) * P(k, i);
      if (i == k) c -= P(k, k) / A(k);
      C(k, i) = w * c;
    }
  }
  return Hhat * C;
}

arma::cx_mat project_tangent(const arma::cx_mat& X, const arma::cx_mat& G) {
  return G - real_inner(X, G) * X;
}

arma::cx_mat retract(const arma::cx_mat& X, double step, const arma::cx_mat& dir,
                     Retraction mode) {
  arma::cx_mat Y = X + step * dir;
  if (mode == Retraction::elementwise) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(Y.n_elem));
    for (auto& v : Y) {
      const double m = std::abs(v);
      v = m > 0 ? v * (scale / m) : std::complex<double>(scale, 0.0);
    }
    return Y;
  }
  const double n = arma::norm(Y, "fro");
  if (!(n > 0)) throw std::runtime_error("retract: zero-norm update");
  return Y / n;
}

RcgResult rcg_solve(const arma::cx_mat& Hhat, double sigma2, const RcgParams& prm) {
  if (!(sigma2 > 0)) throw std::domain_error("rcg_solve: sigma2 > 0 required");
  RcgResult res;
  const arma::uword rows = Hhat.n_rows;
  const arma::uword K = Hhat.n_cols;
  if (K == 0) {
    res.V_tilde.set_size(rows, 0);
    return res;
  }

  // Matched-filter start with a lightly seeded slack row.
  arma::cx_mat V(rows, K, arma::fill::zeros);
  for (arma::uword k = 0; k < K; ++k) {
    const double n = arma::norm(Hhat.col(k));
    if (n > 0) V.col(k) = Hhat.col(k) / n;
  }
  V.row(rows - 1).fill(std::complex<double>(1e-3, 0.0));
  V /= arma::norm(V, "fro");

  arma::vec mu = fp_update_mu(V, Hhat, sigma2);
  arma::vec mu_hat = mu + 1.0;

  auto f5 = [&](const arma::cx_mat& X) { return -fp_ratio_sum(X, mu_hat, Hhat, sigma2); };
  auto record = [&](double f5_val, double gnorm) {
    res.trace.objective.push_back(recorded_objective(-f5_val, mu, prm.rate_weight));
    res.trace.grad_norm.push_back(gnorm);
  };

  double f_outer_prev = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < prm.max_outer; ++outer) {
    arma::cx_mat grad = project_tangent(V, euclidean_gradient(V, mu_hat, Hhat, sigma2));
    double gnorm = arma::norm(grad, "fro");
    double f_cur = f5(V);
    if (outer == 0) record(f_cur, gnorm);

    arma::cx_mat dir = -grad;
    double step_prev = 1.0;
    bool inner_hit_tolerance = gnorm <= prm.delta_1;
    double gnorm_best = gnorm;
    int plateau = 0;  // accepted steps without gradient-norm progress

    for (int r = 0; r < prm.max_inner && !inner_hit_tolerance; ++r) {
      double slope = real_inner(grad, dir);
      if (slope >= 0) {  // not a descent direction: restart
        dir = -grad;
        slope = -gnorm * gnorm;
      }

      // Armijo backtracking; initial step grows from the last accepted one.
      double t = (r == 0) ? 1.0 : std::min(1e6, 2.0 * step_prev);
      bool accepted = false;
      arma::cx_mat V_next;
      double f_next = f_cur;
      for (int bt = 0; bt <= prm.armijo_max_backtracks; ++bt) {
        V_next = retract(V, t, dir, prm.retraction);
        f_next = f5(V_next);
        if (f_next <= f_cur + prm.armijo_c1 * t * slope) {
          accepted = true;
          break;
        }
        t *= prm.armijo_contraction;
      }
      if (accepted) {
        // One quadratic-interpolation refinement sharpens the step, which
        // keeps the conjugate directions well conditioned.
        const double curv = (f_next - f_cur - slope * t) / (t * t);
        if (curv > 0) {
          const double t_q = std::clamp(-slope / (2.0 * curv), 0.1 * t, 4.0 * t);
          if (t_q != t) {
            const arma::cx_mat V_q = retract(V, t_q, dir, prm.retraction);
            const double f_q = f5(V_q);
            if (f_q < f_next) {
              V_next = V_q;
              f_next = f_q;
              t = t_q;
            }
          }
        }
      }
      if (!std::isfinite(f_next))
        throw std::runtime_error("rcg_solve: non-finite objective during line search");
      if (!accepted) {
        // Try once more from steepest descent before declaring a stall.
        if (!arma::approx_equal(dir, -grad, "absdiff", 0.0)) {
          dir = -grad;
          continue;
        }
        break;  // no representable decrease left at this scale
      }

      step_prev = t;
      ++res.inner_iterations_total;

      arma::cx_mat grad_next =
          project_tangent(V_next, euclidean_gradient(V_next, mu_hat, Hhat, sigma2));
      const double gnorm_next = arma::norm(grad_next, "fro");

      // Hestenes-Stiefel coefficient with projection-based transport;
      // periodic restarts keep the directions from degenerating.
      if ((r + 1) % 80 == 0) {
        dir = -grad_next;
      } else {
        const arma::cx_mat grad_t = project_tangent(V_next, grad);
        const arma::cx_mat dir_t = project_tangent(V_next, dir);
        const arma::cx_mat y = grad_next - grad_t;
        const double denom = real_inner(dir_t, y);
        double nu = 0.0;
        if (std::abs(denom) > 1e-300) nu = std::max(0.0, real_inner(grad_next, y) / denom);
        dir = -grad_next + nu * dir_t;
      }

      V = V_next;
      grad = grad_next;
      gnorm = gnorm_next;
      f_cur = f_next;
      record(f_cur, gnorm);
      if (gnorm <= prm.delta_1) inner_hit_tolerance = true;

      // Numerical-floor detector: no meaningful gradient progress for a
      // long stretch of accepted steps.
      if (gnorm < 0.99 * gnorm_best) {
        gnorm_best = gnorm;
        plateau = 0;
      } else if (++plateau >= 60) {
        break;
      }
    }
    if (!inner_hit_tolerance) res.all_inner_converged = false;

    mu = fp_update_mu(V, Hhat, sigma2);
    mu_hat = mu + 1.0;
    const double f_outer = recorded_objective(fp_ratio_sum(V, mu_hat, Hhat, sigma2), mu,
                                              prm.rate_weight);
    res.trace.objective.push_back(f_outer);
    res.trace.grad_norm.push_back(gnorm);
    res.trace.outer_marks.push_back(res.trace.objective.size() - 1);
    res.outer_iterations = outer + 1;

    if (std::abs(f_outer_prev - f_outer) < prm.delta_2) break;
    f_outer_prev = f_outer;
  }

  res.V_tilde = V;
  res.mu = mu;
  res.objective = res.trace.objective.back();
  res.sum_rate = -res.objective;
  return res;
}

arma::cx_mat recover_precoders(const arma::cx_mat& V_tilde, double p_max) {
  if (V_tilde.n_rows < 2) throw std::domain_error("recover_precoders: lifted point too small");
  return std::sqrt(p_max) * V_tilde.rows(0, V_tilde.n_rows - 2);
}

}  // namespace wbcr
