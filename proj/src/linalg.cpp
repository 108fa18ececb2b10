#include "privsynth/linalg.hpp"

#include <cmath>

#include <fmt/format.h>

#include "privsynth/errors.hpp"

namespace privsynth::linalg {

void require_shape(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols, std::string_view name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(fmt::format("{} must be {}x{}, got {}x{}", name, rows, cols, m.rows(), m.cols()));
  }
}

void require_square(const MatrixXd& m, std::string_view name) {
  if (m.rows() != m.cols()) {
    throw DimensionError(fmt::format("{} must be square, got {}x{}", name, m.rows(), m.cols()));
  }
}

double min_eigenvalue(const MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(symmetric), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(symmetric), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

bool is_positive_definite(const MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  Eigen::LLT<MatrixXd> llt(symmetrize(m));
  return llt.info() == Eigen::Success;
}

bool is_positive_semidefinite(const MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.size() == 0) return true;
  const double norm2 = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -rel_tol * norm2;
}

MatrixXd ingest_covariance(const MatrixXd& m, std::string_view name, Definiteness required) {
  require_square(m, name);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw DimensionError(fmt::format("{} is not symmetric (max |M - M^T| = {:.3g})", name, asym));
  }
  MatrixXd s = symmetrize(m);
  if (required == Definiteness::PositiveDefinite && !is_positive_definite(s)) {
    throw NotPositiveDefiniteError(fmt::format("{} must be positive definite", name));
  }
  if (required == Definiteness::PositiveSemidefinite && !is_positive_semidefinite(s)) {
    throw NotPositiveDefiniteError(fmt::format("{} must be positive semidefinite", name));
  }
  return s;
}

double logdet_spd(const MatrixXd& m, std::string_view what) {
  require_square(m, what);
  Eigen::LLT<MatrixXd> llt(symmetrize(m));
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError(fmt::format("{} is not positive definite", what));
  }
  const auto diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) acc += std::log(diag(i));
  return 2.0 * acc;
}

MatrixXd sqrt_psd(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd block_diagonal(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

MatrixXd block_diagonal(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c) {
  return block_diagonal(block_diagonal(a, b), c);
}

MatrixXd select_first(Eigen::Index n) {
  MatrixXd s = MatrixXd::Zero(n, 2 * n);
  s.leftCols(n).setIdentity();
  return s;
}

MatrixXd select_second(Eigen::Index n) {
  MatrixXd s = MatrixXd::Zero(n, 2 * n);
  s.rightCols(n).setIdentity();
  return s;
}

}  // namespace privsynth::linalg
