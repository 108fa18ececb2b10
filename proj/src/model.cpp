#include "privsynth/model.hpp"

#include <fmt/format.h>

#include "privsynth/errors.hpp"
#include "privsynth/linalg.hpp"

namespace privsynth {

using Eigen::MatrixXd;
using linalg::Definiteness;

PlantModel::PlantModel(MatrixXd A, MatrixXd B, MatrixXd K, MatrixXd sigma_w, MatrixXd sigma_h, MatrixXd sigma_x1,
                       MatrixXd Q, MatrixXd R)
    : A_(std::move(A)), B_(std::move(B)), K_(std::move(K)) {
  linalg::require_square(A_, "A");
  const auto n = A_.rows();
  if (n == 0) throw DimensionError("plant must have at least one state");
  if (B_.rows() != n || B_.cols() == 0) {
    throw DimensionError(fmt::format("B must be {}xm with m >= 1, got {}x{}", n, B_.rows(), B_.cols()));
  }
  const auto m = B_.cols();
  linalg::require_shape(K_, m, n, "K");
  linalg::require_shape(sigma_w, n, n, "Sigma_w");
  linalg::require_shape(sigma_h, n, n, "Sigma_h");
  linalg::require_shape(sigma_x1, n, n, "Sigma_x1");
  linalg::require_shape(Q, n, n, "Q");
  linalg::require_shape(R, m, m, "R");
  sigma_w_ = linalg::ingest_covariance(sigma_w, "Sigma_w", Definiteness::PositiveDefinite);
  sigma_h_ = linalg::ingest_covariance(sigma_h, "Sigma_h", Definiteness::PositiveDefinite);
  sigma_x1_ = linalg::ingest_covariance(sigma_x1, "Sigma_x1", Definiteness::PositiveDefinite);
  Q_ = linalg::ingest_covariance(Q, "Q", Definiteness::PositiveDefinite);
  R_ = linalg::ingest_covariance(R, "R", Definiteness::PositiveDefinite);

  const double rho = spectral_radius(A_ + B_ * K_);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(fmt::format("A + B K is not Schur stable (spectral radius {:.12g})", rho), rho);
  }
}

PrivacyMechanism::PrivacyMechanism(const PlantModel& plant, MatrixXd G, MatrixXd sigma_v, MatrixXd sigma_z)
    : G_(std::move(G)) {
  linalg::require_shape(G_, plant.ny(), plant.ny(), "G");
  linalg::require_shape(sigma_v, plant.ny(), plant.ny(), "Sigma_v");
  linalg::require_shape(sigma_z, plant.nu(), plant.nu(), "Sigma_z");
  sigma_v_ = linalg::ingest_covariance(sigma_v, "Sigma_v", Definiteness::PositiveSemidefinite);
  sigma_z_ = linalg::ingest_covariance(sigma_z, "Sigma_z", Definiteness::PositiveSemidefinite);
  sigma_vtilde_ = linalg::symmetrize(G_ * plant.sigma_h() * G_.transpose() + sigma_v_);
}

PrivacyMechanism PrivacyMechanism::identity(const PlantModel& plant) {
  return PrivacyMechanism(plant, MatrixXd::Identity(plant.ny(), plant.ny()), MatrixXd::Zero(plant.ny(), plant.ny()),
                          MatrixXd::Zero(plant.nu(), plant.nu()));
}

bool PrivacyMechanism::is_strict() const {
  return linalg::is_positive_definite(sigma_v_) && linalg::is_positive_definite(sigma_z_);
}

AdversaryFilter::AdversaryFilter(MatrixXd L, MatrixXd sigma_rho) : L_(std::move(L)) {
  linalg::require_square(L_, "L");
  linalg::require_shape(sigma_rho, L_.rows(), L_.rows(), "Sigma_rho");
  sigma_rho_ = linalg::ingest_covariance(sigma_rho, "Sigma_rho", Definiteness::PositiveSemidefinite);
}

AdversaryFilter AdversaryFilter::for_gain(const PlantModel& plant, MatrixXd L) {
  linalg::require_shape(L, plant.nx(), plant.ny(), "L");
  const MatrixXd I = MatrixXd::Identity(plant.nx(), plant.nx());
  const MatrixXd F = (I - L) * plant.A();
  const double rho = spectral_radius(F);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(fmt::format("filter error dynamics (I - L) A unstable (spectral radius {:.12g})", rho), rho);
  }
  // rho_k = (I - L)(A rho_{k-1} + w_{k-1}) - L h_k
  const MatrixXd noise = (I - L) * plant.sigma_w() * (I - L).transpose() + L * plant.sigma_h() * L.transpose();
  auto sol = solve_lyapunov_direct(F, noise);
  return AdversaryFilter(std::move(L), sol.sigma);
}

AdversaryFilter AdversaryFilter::kalman(const PlantModel& plant) {
  auto gain = steady_state_kalman_gain(plant.A(), plant.sigma_w(), plant.sigma_h());
  return AdversaryFilter(std::move(gain.L), std::move(gain.sigma_rho));
}

MatrixXd ClosedLoopMatrices::reconstruct(const MatrixXd& G) const { return Acal0 + Acal1 * G * N_xtilde; }

ClosedLoopMatrices assemble_closed_loop(const PlantModel& plant, const PrivacyMechanism& mech,
                                        const AdversaryFilter& filt) {
  const auto n = plant.nx();
  const auto m = plant.nu();
  linalg::require_shape(mech.G(), n, n, "G");
  linalg::require_shape(filt.L(), n, n, "L");
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd& A = plant.A();
  const MatrixXd& B = plant.B();
  const MatrixXd& K = plant.K();
  const MatrixXd& L = filt.L();
  const MatrixXd& G = mech.G();
  const MatrixXd AL = A * L;

  ClosedLoopMatrices cl;
  cl.Acal = MatrixXd::Zero(2 * n, 2 * n);
  cl.Acal.topLeftCorner(n, n) = A * (I - L);
  cl.Acal.topRightCorner(n, n) = -AL * (G - I);
  cl.Acal.bottomRightCorner(n, n) = A + B * K * G;

  // noise map for col(v~, z, w)
  MatrixXd M = MatrixXd::Zero(2 * n, n + m + n);
  M.block(0, 0, n, n) = -AL;
  M.block(0, n, n, m) = B;
  M.block(0, n + m, n, n) = I;
  M.block(n, 0, n, n) = B * K;
  M.block(n, n, n, m) = B;
  M.block(n, n + m, n, n) = I;
  const MatrixXd D = linalg::block_diagonal(mech.sigma_vtilde(), mech.sigma_z(), plant.sigma_w());
  cl.Bcal = linalg::symmetrize(M * D * M.transpose());

  cl.Acal0 = MatrixXd::Zero(2 * n, 2 * n);
  cl.Acal0.topLeftCorner(n, n) = A * (I - L);
  cl.Acal0.topRightCorner(n, n) = AL;
  cl.Acal0.bottomRightCorner(n, n) = A;
  cl.Acal1 = MatrixXd::Zero(2 * n, n);
  cl.Acal1.topRows(n) = -AL;
  cl.Acal1.bottomRows(n) = B * K;
  cl.N_xtilde = linalg::select_second(n);
  cl.N_e = linalg::select_first(n);
  return cl;
}

LyapunovSolution stationary_extended_covariance(const PlantModel& plant, const PrivacyMechanism& mech,
                                                const AdversaryFilter& filt) {
  const auto cl = assemble_closed_loop(plant, mech, filt);
  return solve_lyapunov_direct(cl.Acal, cl.Bcal);
}

MatrixXd stationary_filtered_error(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                                   const LyapunovSolution& extended) {
  const auto n = plant.nx();
  linalg::require_shape(extended.sigma, 2 * n, 2 * n, "extended covariance");
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd& L = filt.L();
  MatrixXd T(n, 2 * n);
  T.leftCols(n) = I - L;
  T.rightCols(n) = -L * (mech.G() - I);
  return linalg::symmetrize(T * extended.sigma * T.transpose() + L * mech.sigma_vtilde() * L.transpose());
}

CaseStudy load_case_study() {
  MatrixXd A(4, 4);
  A << 0.8353, 0, 0, 0,
       0, 0.8324, 0, 0.0031,
       0, 0.0001, 0.1633, 0,
       0, 0.0280, 0.0172, 0.9320;
  MatrixXd B(4, 3);
  B << 0.0458, 0, 0,
       0, 0.0457, 0,
       0, 0, 0.0231,
       0, 0.0007, 0.0006;
  MatrixXd L(4, 4);
  L << 0.4884, 0, 0, 0,
       0, 0.594, 0, 0.0034,
       0, 0.00007, 0.1226, 0.0001,
       0, 0.0209, 0.013, 0.769;
  MatrixXd K(3, 4);
  K << -0.1237, 0, 0, 0,
       0, -0.1286, -0.0009, -0.0435,
       0, -0.001, -0.004, -0.0073;
  const MatrixXd I4 = MatrixXd::Identity(4, 4);
  PlantModel plant(A, B, K, 0.1 * I4, 0.01 * I4, 10.0 * I4, I4, MatrixXd::Identity(3, 3));
  AdversaryFilter filter = AdversaryFilter::for_gain(plant, L);
  return CaseStudy{std::move(plant), std::move(filter), 4.3615};
}

}  // namespace privsynth
