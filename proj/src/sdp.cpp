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

#include "wbcr/sdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wbcr {

namespace {

// ---------------------------------------------------------------------
// Real engine. Standard form after adding one slack per inequality:
//
//   min  sum_b <C_b, X_b>
//   s.t. <A_{j,b}, X_b> + s_j = b_j,  X_b >= 0 (PSD),  s >= 0.
//
// The nonnegative slacks live in a diagonal cone handled alongside the
// PSD blocks. Directions follow the Nesterov-Todd linearization
//   dX + W dZ W = sigma mu Z^{-1} - X
// reduced to an m x m Schur system via the scaled constraint matrices
// Atil_{j,b} = G_b^T A_{j,b} G_b with W_b = G_b G_b^T.
// ---------------------------------------------------------------------

struct RealProblem {
  std::vector<arma::mat> C;               // per block, symmetric (minimize)
  std::vector<std::vector<arma::mat>> A;  // [m][block]
  arma::vec b;                            // m
};

struct RealSolution {
  std::vector<arma::mat> X;
  arma::vec y;
  double pobj = 0.0, dobj = 0.0;
  double rel_gap = 0.0, rel_pinf = 0.0, rel_dinf = 0.0;
  SdpStatus status = SdpStatus::max_iter;
  int iterations = 0;
};

double inner(const arma::mat& a, const arma::mat& b) { return arma::accu(a % b); }

arma::mat chol_lower_jittered(const arma::mat& X) {
  arma::mat L;
  if (arma::chol(L, X, "lower")) return L;
  arma::mat Xj = X;
  double jitter = 1e-14 * (1.0 + std::abs(arma::trace(X)) / X.n_rows);
  for (int tries = 0; tries < 8; ++tries) {
    Xj.diag() += jitter;
    if (arma::chol(L, Xj, "lower")) return L;
    jitter *= 100.0;
  }
  throw std::runtime_error("sdp: Cholesky failed beyond jitter range");
}

// Largest alpha with X + alpha D >= 0, given L = chol(X, lower).
double max_step(const arma::mat& L, const arma::mat& D) {
  arma::mat Y = arma::solve(arma::trimatl(L), D);
  Y = arma::solve(arma::trimatl(L), Y.t());
  arma::vec ev;
  if (!arma::eig_sym(ev, arma::mat(arma::symmatu(0.5 * (Y + Y.t())))) || ev.n_elem == 0)
    throw std::runtime_error("sdp: eigen failure in step computation");
  const double lmin = ev.min();
  if (lmin >= -1e-14) return 1e30;
  return -1.0 / lmin;
}

RealSolution solve_real(const RealProblem& rp, double gap_tol, double feas_tol, int max_iter) {
  const std::size_t nb = rp.C.size();
  const arma::uword m = rp.b.n_elem;
  arma::uvec dims(nb);
  arma::uword n_psd = 0;
  for (std::size_t bb = 0; bb < nb; ++bb) {
    dims(bb) = rp.C[bb].n_rows;
    n_psd += dims(bb);
  }
  const double n_tot = static_cast<double>(n_psd + m);

  std::vector<arma::mat> X(nb), Z(nb);
  for (std::size_t bb = 0; bb < nb; ++bb) {
    X[bb] = arma::eye(dims(bb), dims(bb));
    Z[bb] = arma::eye(dims(bb), dims(bb));
  }
  arma::vec xd(m, arma::fill::ones), zd(m, arma::fill::ones), y(m, arma::fill::zeros);

  double bnorm = 1.0 + arma::norm(rp.b, "inf");
  double cnorm = 1.0;
  for (const auto& C : rp.C) cnorm = std::max(cnorm, arma::abs(C).max());

  RealSolution sol;
  std::vector<arma::mat> G(nb), Zinv(nb), Rd(nb), Rc(nb), dX(nb), dZ(nb), dXc(nb), dZc(nb);
  std::vector<std::vector<arma::mat>> Atil(m, std::vector<arma::mat>(nb));
  arma::vec rp_res(m), rd_diag(m), wd2(m);

  for (int it = 0; it < max_iter; ++it) {
    // Residuals and convergence metrics.
    for (arma::uword j = 0; j < m; ++j) {
      double ax = 0.0;
      for (std::size_t bb = 0; bb < nb; ++bb) ax += inner(rp.A[j][bb], X[bb]);
      rp_res(j) = rp.b(j) - ax - xd(j);
    }
    double rd_max = 0.0;
    for (std::size_t bb = 0; bb < nb; ++bb) {
      Rd[bb] = rp.C[bb] - Z[bb];
      for (arma::uword j = 0; j < m; ++j) Rd[bb] -= y(j) * rp.A[j][bb];
      rd_max = std::max(rd_max, arma::abs(Rd[bb]).max());
    }
    rd_diag = -zd - y;
    rd_max = std::max(rd_max, arma::abs(rd_diag).max());

    double gap = arma::dot(xd, zd);
    for (std::size_t bb = 0; bb < nb; ++bb) gap += inner(X[bb], Z[bb]);
    const double mu = gap / n_tot;

    double pobj = 0.0;
    for (std::size_t bb = 0; bb < nb; ++bb) pobj += inner(rp.C[bb], X[bb]);
    const double dobj = arma::dot(rp.b, y);

    sol.pobj = pobj;
    sol.dobj = dobj;
    sol.rel_pinf = arma::norm(rp_res, "inf") / bnorm;
    sol.rel_dinf = rd_max / cnorm;
    sol.rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.iterations = it;
    if (sol.rel_pinf < feas_tol && sol.rel_dinf < feas_tol && sol.rel_gap < gap_tol) {
      sol.status = SdpStatus::optimal;
      break;
    }
    if (!std::isfinite(mu) || !std::isfinite(pobj) || !std::isfinite(dobj)) break;
    // An unbounded dual certifies primal infeasibility.
    if (dobj > 1e9 * bnorm && sol.rel_dinf < 1e-4 && sol.rel_pinf > feas_tol) {
      sol.status = SdpStatus::infeasible;
      break;
    }

    // Nesterov-Todd scaling: W_b = G_b G_b^T with W Z W = X.
    try {
    for (std::size_t bb = 0; bb < nb; ++bb) {
      const arma::mat Lx = chol_lower_jittered(X[bb]);
      const arma::mat Lz = chol_lower_jittered(Z[bb]);
      arma::mat U, V;
      arma::vec s;
      if (!arma::svd(U, s, V, arma::mat(Lz.t() * Lx)))
        throw std::runtime_error("sdp: SVD failure in NT scaling");
      G[bb] = Lx * V * arma::diagmat(1.0 / arma::sqrt(s));
      Zinv[bb] = arma::solve(arma::trimatl(Lz), arma::eye(dims(bb), dims(bb)));
      Zinv[bb] = arma::solve(arma::trimatu(arma::mat(Lz.t())), Zinv[bb]);
      for (arma::uword j = 0; j < m; ++j)
        Atil[j][bb] = G[bb].t() * rp.A[j][bb] * G[bb];
    }
    wd2 = xd / zd;

    // Schur complement, shared by predictor and corrector.
    arma::mat M(m, m, arma::fill::zeros);
    for (arma::uword j = 0; j < m; ++j) {
      for (arma::uword i = j; i < m; ++i) {
        double v = 0.0;
        for (std::size_t bb = 0; bb < nb; ++bb) v += inner(Atil[j][bb], Atil[i][bb]);
        M(j, i) = v;
        M(i, j) = v;
      }
      M(j, j) += wd2(j);
    }
    arma::mat Lm;
    if (!arma::chol(Lm, M, "lower")) {
      M.diag() += 1e-12 * (1.0 + M.diag().max());
      Lm = chol_lower_jittered(M);
    }

    auto solve_direction = [&](double sigma_mu, std::vector<arma::mat>& DX,
                               std::vector<arma::mat>& DZ, arma::vec& dy, arma::vec& dxd,
                               arma::vec& dzd) {
      arma::vec q(m);
      for (std::size_t bb = 0; bb < nb; ++bb) Rc[bb] = sigma_mu * Zinv[bb] - X[bb];
      const arma::vec rc_d = sigma_mu / zd - xd;
      for (arma::uword j = 0; j < m; ++j) {
        double v = rc_d(j) - wd2(j) * rd_diag(j);
        for (std::size_t bb = 0; bb < nb; ++bb) {
          v += inner(rp.A[j][bb], Rc[bb]);
          v -= inner(Atil[j][bb], arma::mat(G[bb].t() * Rd[bb] * G[bb]));
        }
        q(j) = rp_res(j) - v;
      }
      dy = arma::solve(arma::trimatu(arma::mat(Lm.t())),
                       arma::solve(arma::trimatl(Lm), q));
      for (std::size_t bb = 0; bb < nb; ++bb) {
        DZ[bb] = Rd[bb];
        for (arma::uword j = 0; j < m; ++j) DZ[bb] -= dy(j) * rp.A[j][bb];
        arma::mat WdZW = G[bb] * (G[bb].t() * DZ[bb] * G[bb]) * G[bb].t();
        DX[bb] = Rc[bb] - WdZW;
        DX[bb] = arma::symmatu(0.5 * (DX[bb] + DX[bb].t()));
      }
      dzd = rd_diag - dy;
      dxd = rc_d - wd2 % dzd;
    };

    auto step_lengths = [&](const std::vector<arma::mat>& DX, const std::vector<arma::mat>& DZ,
                            const arma::vec& dxd, const arma::vec& dzd, double& ap, double& ad) {
      ap = 1e30;
      ad = 1e30;
      for (std::size_t bb = 0; bb < nb; ++bb) {
        ap = std::min(ap, max_step(chol_lower_jittered(X[bb]), DX[bb]));
        ad = std::min(ad, max_step(chol_lower_jittered(Z[bb]), DZ[bb]));
      }
      for (arma::uword j = 0; j < m; ++j) {
        if (dxd(j) < 0) ap = std::min(ap, -xd(j) / dxd(j));
        if (dzd(j) < 0) ad = std::min(ad, -zd(j) / dzd(j));
      }
      ap = std::min(1.0, 0.99 * ap);
      ad = std::min(1.0, 0.99 * ad);
    };

    // Predictor fixes the centering weight, corrector takes the step.
    arma::vec dy(m), dxd(m), dzd(m);
    solve_direction(0.0, dX, dZ, dy, dxd, dzd);
    double ap, ad;
    step_lengths(dX, dZ, dxd, dzd, ap, ad);
    double gap_aff = arma::dot(xd + ap * dxd, zd + ad * dzd);
    for (std::size_t bb = 0; bb < nb; ++bb)
      gap_aff += inner(X[bb] + ap * dX[bb], Z[bb] + ad * dZ[bb]);
    const double mu_aff = gap_aff / n_tot;
    double sigma = std::pow(mu_aff / mu, 3);
    sigma = std::min(0.9, std::max(1e-6, sigma));

    solve_direction(sigma * mu, dX, dZ, dy, dxd, dzd);
    step_lengths(dX, dZ, dxd, dzd, ap, ad);

    for (std::size_t bb = 0; bb < nb; ++bb) {
      X[bb] += ap * dX[bb];
      Z[bb] += ad * dZ[bb];
      X[bb] = arma::symmatu(0.5 * (X[bb] + X[bb].t()));
      Z[bb] = arma::symmatu(0.5 * (Z[bb] + Z[bb].t()));
    }
    xd += ap * dxd;
    zd += ad * dzd;
    y += ad * dy;
    } catch (const std::runtime_error&) {
      break;  // numerical breakdown; report the last consistent state
    }
  }

  if (sol.status == SdpStatus::max_iter && arma::dot(rp.b, y) > 1e6 * bnorm &&
      sol.rel_pinf > 1e-4)
    sol.status = SdpStatus::infeasible;
  sol.X = std::move(X);
  sol.y = y;
  return sol;
}

// ---------------------------------------------------------------------
// Complex-to-real embedding helpers.
// ---------------------------------------------------------------------

arma::mat embed_half(const arma::cx_mat& H) {
  const arma::uword n = H.n_rows;
  arma::mat out(2 * n, 2 * n);
  const arma::mat re = arma::real(H), im = arma::imag(H);
  out.submat(0, 0, n - 1, n - 1) = re;
  out.submat(n, n, 2 * n - 1, 2 * n - 1) = re;
  out.submat(0, n, n - 1, 2 * n - 1) = -im;
  out.submat(n, 0, 2 * n - 1, n - 1) = im;
  return 0.5 * out;
}

arma::cx_mat extract_complex(const arma::mat& Xr) {
  const arma::uword n = Xr.n_rows / 2;
  const arma::mat P = Xr.submat(0, 0, n - 1, n - 1);
  const arma::mat S = Xr.submat(n, n, 2 * n - 1, 2 * n - 1);
  const arma::mat Q = Xr.submat(0, n, n - 1, 2 * n - 1);
  const arma::mat R = Xr.submat(n, 0, 2 * n - 1, n - 1);
  arma::cx_mat X(0.5 * (P + S), 0.5 * (R - Q));
  return 0.5 * (X + X.t());  // hermitize
}

void check_hermitian(const arma::cx_mat& A, const char* what) {
  const double scale = 1.0 + arma::abs(A).max();
  if (arma::abs(arma::cx_mat(A - A.t())).max() > 1e-10 * scale)
    throw std::invalid_argument(std::string("sdp: ") + what + " is not Hermitian");
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, double tol) {
  const std::size_t nb = p.block_dims.size();
  if (nb == 0) throw std::invalid_argument("sdp: no blocks");
  if (p.objective.size() != nb) throw std::invalid_argument("sdp: objective/block mismatch");
  for (std::size_t bb = 0; bb < nb; ++bb) {
    if (p.objective[bb].n_rows != p.block_dims[bb])
      throw std::invalid_argument("sdp: objective dimension mismatch");
    check_hermitian(p.objective[bb], "objective");
  }

  // Real embedding (factor 1/2 keeps complex-trace values).
  RealProblem rp;
  rp.C.resize(nb);
  for (std::size_t bb = 0; bb < nb; ++bb) rp.C[bb] = -embed_half(p.objective[bb]);

  std::vector<double> row_scale;
  std::vector<arma::uword> kept;
  std::vector<std::vector<arma::mat>> Areal;
  std::vector<double> brow;
  for (arma::uword j = 0; j < p.constraints.size(); ++j) {
    const auto& con = p.constraints[j];
    std::vector<arma::mat> row(nb);
    double nrm = 0.0;
    for (std::size_t bb = 0; bb < nb; ++bb) {
      if (bb < con.A.size() && con.A[bb].n_elem > 0) {
        if (con.A[bb].n_rows != p.block_dims[bb])
          throw std::invalid_argument("sdp: constraint dimension mismatch");
        check_hermitian(con.A[bb], "constraint");
        row[bb] = embed_half(con.A[bb]);
      } else {
        row[bb] = arma::zeros(2 * p.block_dims[bb], 2 * p.block_dims[bb]);
      }
      nrm = std::hypot(nrm, arma::norm(row[bb], "fro"));
    }
    if (nrm < 1e-300) {
      if (con.b < 0) {  // 0 <= b_j violated outright
        SdpSolution bad;
        bad.status = SdpStatus::infeasible;
        return bad;
      }
      continue;  // vacuous constraint
    }
    const double d = 1.0 / nrm;
    for (auto& A : row) A *= d;
    Areal.push_back(std::move(row));
    brow.push_back(con.b * d);
    row_scale.push_back(d);
    kept.push_back(j);
  }
  if (Areal.empty()) throw std::invalid_argument("sdp: problem has no effective constraints");

  double s_x = 0.0;
  for (double v : brow) s_x = std::max(s_x, v);
  if (!(s_x > 0)) s_x = 1.0;

  double s_c = 0.0;
  for (const auto& C : rp.C) s_c = std::max(s_c, arma::norm(C, "fro"));
  if (!(s_c > 0)) s_c = 1.0;

  rp.A = std::move(Areal);
  rp.b.set_size(brow.size());
  for (arma::uword j = 0; j < rp.b.n_elem; ++j) rp.b(j) = brow[j] / s_x;
  for (auto& C : rp.C) C /= s_c;

  RealSolution rsol = solve_real(rp, tol, std::min(1e-9, tol), 200);

  SdpSolution out;
  out.status = rsol.status;
  out.iterations = rsol.iterations;
  out.duality_gap = rsol.rel_gap;
  out.X.resize(nb);
  double obj = 0.0;
  for (std::size_t bb = 0; bb < nb; ++bb) {
    out.X[bb] = extract_complex(rsol.X[bb]) * s_x;
    obj += std::real(arma::trace(arma::cx_mat(p.objective[bb] * out.X[bb])));
  }
  out.objective_value = obj;

  double maxviol = 0.0;
  for (const auto& con : p.constraints) {
    double ax = 0.0;
    for (std::size_t bb = 0; bb < nb && bb < con.A.size(); ++bb)
      if (con.A[bb].n_elem > 0)
        ax += std::real(arma::trace(arma::cx_mat(con.A[bb] * out.X[bb])));
    maxviol = std::max(maxviol, (ax - con.b) / (1.0 + std::abs(con.b)));
  }
  out.constraint_residual = std::max(0.0, maxviol);
  return out;
}

double psd_residual(const arma::cx_mat& X) {
  arma::vec ev;
  arma::eig_sym(ev, arma::cx_mat(0.5 * (X + X.t())));
  return std::max(0.0, -ev.min());
}

std::string sdp_problem_to_text(const SdpProblem& p) {
  std::ostringstream os;
  os << "blocks " << p.block_dims.size() << "\n";
  for (auto d : p.block_dims) os << d << " ";
  os << "\nobjective\n";
  auto dump = [&os](const arma::cx_mat& A) {
    for (arma::uword r = 0; r < A.n_rows; ++r) {
      for (arma::uword c = 0; c < A.n_cols; ++c)
        os << A(r, c).real() << " " << A(r, c).imag() << "  ";
      os << "\n";
    }
  };
  for (const auto& C : p.objective) dump(C);
  os << "constraints " << p.constraints.size() << "\n";
  for (const auto& con : p.constraints) {
    os << "rhs " << con.b << "\n";
    for (std::size_t bb = 0; bb < p.block_dims.size(); ++bb) {
      if (bb < con.A.size() && con.A[bb].n_elem > 0)
        dump(con.A[bb]);
      else
        os << "zero " << p.block_dims[bb] << "\n";
    }
  }
  return os.str();
}

}  // namespace wbcr
