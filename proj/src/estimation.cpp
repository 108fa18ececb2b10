#include "privsynth/estimation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "privsynth/errors.hpp"
#include "privsynth/linalg.hpp"

namespace privsynth {

using Eigen::Index;
using Eigen::MatrixXd;

namespace {

Index half_of(const MatrixXd& sigma) {
  if (sigma.rows() % 2 != 0) {
    throw DimensionError(fmt::format("extended covariance must have even dimension, got {}", sigma.rows()));
  }
  return sigma.rows() / 2;
}

double lyapunov_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& S) {
  return (A * S * A.transpose() - S + B).norm();
}

}  // namespace

MatrixXd LyapunovSolution::error_block() const {
  const Index n = half_of(sigma);
  return sigma.topLeftCorner(n, n);
}

MatrixXd LyapunovSolution::state_block() const {
  const Index n = half_of(sigma);
  return sigma.bottomRightCorner(n, n);
}

double spectral_radius(const MatrixXd& m) {
  linalg::require_square(m, "spectral_radius argument");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur_stable(const MatrixXd& m) { return spectral_radius(m) < 1.0 - kStabilityMargin; }

KalmanGain steady_state_kalman_gain(const MatrixXd& A, const MatrixXd& sigma_w, const MatrixXd& sigma_h,
                                    const KalmanOptions& options) {
  linalg::require_square(A, "A");
  const Index n = A.rows();
  linalg::require_shape(sigma_w, n, n, "Sigma_w");
  linalg::require_shape(sigma_h, n, n, "Sigma_h");
  const MatrixXd I = MatrixXd::Identity(n, n);

  MatrixXd P = sigma_w;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const MatrixXd P_pred = linalg::symmetrize(A * P * A.transpose() + sigma_w);
    const MatrixXd L = (P_pred + sigma_h).transpose().ldlt().solve(P_pred.transpose()).transpose();
    const MatrixXd P_next = linalg::symmetrize((I - L) * P_pred);
    const double step = (P_next - P).norm();
    P = P_next;
    if (step < options.tolerance * (1.0 + P.norm())) {
      KalmanGain out;
      out.sigma_pred = linalg::symmetrize(A * P * A.transpose() + sigma_w);
      out.L = (out.sigma_pred + sigma_h).transpose().ldlt().solve(out.sigma_pred.transpose()).transpose();
      out.sigma_rho = P;
      out.iterations = it;
      return out;
    }
  }
  throw ConvergenceError(
      fmt::format("Kalman Riccati recursion did not converge in {} iterations", options.max_iterations));
}

LyapunovSolution solve_lyapunov_direct(const MatrixXd& A, const MatrixXd& B) {
  linalg::require_square(A, "Lyapunov A");
  const Index n = A.rows();
  linalg::require_shape(B, n, n, "Lyapunov B");
  const double rho = spectral_radius(A);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(fmt::format("Lyapunov matrix is not Schur stable (spectral radius {:.12g})", rho), rho);
  }

  // Unknowns S_kl for k <= l; one equation per (i <= j):
  //   S_ij - sum_{k,l} A_ik A_jl S_kl = B_ij
  const Index p = n * (n + 1) / 2;
  MatrixXd index = MatrixXd::Constant(n, n, -1);
  {
    Index c = 0;
    for (Index k = 0; k < n; ++k)
      for (Index l = k; l < n; ++l) index(k, l) = static_cast<double>(c++);
  }
  MatrixXd M = MatrixXd::Identity(p, p);
  Eigen::VectorXd rhs(p);
  const MatrixXd Bs = linalg::symmetrize(B);
  Index row = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j, ++row) {
      rhs(row) = Bs(i, j);
      for (Index k = 0; k < n; ++k) {
        for (Index l = k; l < n; ++l) {
          const Index col = static_cast<Index>(index(k, l));
          const double coef = (k == l) ? A(i, k) * A(j, k) : A(i, k) * A(j, l) + A(i, l) * A(j, k);
          M(row, col) -= coef;
        }
      }
    }
  }
  Eigen::PartialPivLU<MatrixXd> lu(M);
  if (!(std::abs(lu.determinant()) > 0.0) || lu.rcond() < 1e-14) {
    throw NumericalError("Lyapunov linear system is singular");
  }
  const Eigen::VectorXd s = lu.solve(rhs);

  LyapunovSolution out;
  out.sigma.resize(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index l = k; l < n; ++l) {
      const double v = s(static_cast<Index>(index(k, l)));
      out.sigma(k, l) = v;
      out.sigma(l, k) = v;
    }
  out.residual = lyapunov_residual(A, Bs, out.sigma);
  return out;
}

IterativeLyapunovResult solve_lyapunov_iterative(const MatrixXd& A, const MatrixXd& B, const MatrixXd& sigma0,
                                                 const IterativeLyapunovOptions& options) {
  linalg::require_square(A, "Lyapunov A");
  const Index n = A.rows();
  linalg::require_shape(B, n, n, "Lyapunov B");
  linalg::require_shape(sigma0, n, n, "initial covariance");
  const double rho = spectral_radius(A);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(fmt::format("Lyapunov matrix is not Schur stable (spectral radius {:.12g})", rho), rho);
  }
  MatrixXd S = sigma0;
  for (int step = 1; step <= options.max_steps; ++step) {
    MatrixXd next = linalg::symmetrize(A * S * A.transpose() + B);
    const double diff = (next - S).norm();
    const double scale = 1.0 + S.norm();
    S = std::move(next);
    if (diff < options.tolerance * scale) {
      IterativeLyapunovResult out;
      out.solution.sigma = S;
      out.solution.residual = lyapunov_residual(A, B, S);
      out.steps = step;
      return out;
    }
  }
  throw ConvergenceError(fmt::format("Lyapunov iteration exceeded {} steps", options.max_steps));
}

}  // namespace privsynth
