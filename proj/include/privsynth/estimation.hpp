#pragma once

#include <Eigen/Dense>

namespace privsynth {

/// Stationary covariance of x_{k+1} = A x_k + noise, noise covariance B:
/// the solution of A S A^T - S + B = 0.
///
/// For the extended closed loop (state zeta = col(e_{k|k-1}, x~_k)) the two
/// diagonal blocks are the prediction-error and distorted-state covariances;
/// error_block() and state_block() extract them and require an even dimension.
struct LyapunovSolution {
  Eigen::MatrixXd sigma;
  double residual = 0.0;  // ||A S A^T - S + B||_F

  Eigen::MatrixXd error_block() const;
  Eigen::MatrixXd state_block() const;
};

struct IterativeLyapunovResult {
  LyapunovSolution solution;
  int steps = 0;
};

struct KalmanGain {
  Eigen::MatrixXd L;           // steady-state gain
  Eigen::MatrixXd sigma_rho;   // filtered error covariance P
  Eigen::MatrixXd sigma_pred;  // one-step prediction covariance P^-
  int iterations = 0;
};

struct KalmanOptions {
  int max_iterations = 100000;
  double tolerance = 1e-12;
};

struct IterativeLyapunovOptions {
  int max_steps = 100000;
  double tolerance = 1e-12;
};

/// Strict stability margin: spectral radius must be below 1 - kStabilityMargin.
inline constexpr double kStabilityMargin = 1e-10;

double spectral_radius(const Eigen::MatrixXd& m);
bool is_schur_stable(const Eigen::MatrixXd& m);

/// Fixed point of the filtering Riccati recursion for a full-state measurement
/// (C = I): P^- = A P A^T + Sigma_w, L = P^-(P^- + Sigma_h)^{-1}, P = (I - L) P^-.
KalmanGain steady_state_kalman_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma_w,
                                    const Eigen::MatrixXd& sigma_h, const KalmanOptions& options = {});

/// Exact solve over the half-vectorized symmetric unknown. Throws UnstableError
/// when A is not Schur stable and NumericalError when the linear system is singular.
LyapunovSolution solve_lyapunov_direct(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Iterates S <- A S A^T + B from sigma0 until the relative step falls below the
/// tolerance. Throws ConvergenceError when the step cap is exceeded.
IterativeLyapunovResult solve_lyapunov_iterative(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                 const Eigen::MatrixXd& sigma0,
                                                 const IterativeLyapunovOptions& options = {});

}  // namespace privsynth
