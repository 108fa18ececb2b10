#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "privsynth/model.hpp"

namespace testutil {

using Eigen::MatrixXd;

inline MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

inline MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double floor = 0.1) {
  const MatrixXd m = random_matrix(rng, n, n);
  return m * m.transpose() / static_cast<double>(n) + floor * MatrixXd::Identity(n, n);
}

/// Random matrix rescaled to the given spectral radius.
inline MatrixXd random_stable(std::mt19937_64& rng, Eigen::Index n, double radius) {
  const MatrixXd m = random_matrix(rng, n, n);
  const double rho = m.eigenvalues().cwiseAbs().maxCoeff();
  return m * (radius / rho);
}

/// Kronecker oracle: vec(S) = (I - A (x) A)^{-1} vec(B).
inline MatrixXd lyapunov_kronecker(const MatrixXd& A, const MatrixXd& B) {
  const auto n = A.rows();
  MatrixXd K(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K.block(i * n, j * n, n, n) = A(i, j) * A;
  const MatrixXd lhs = MatrixXd::Identity(n * n, n * n) - K;
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(B.data(), n * n);
  const Eigen::VectorXd s = lhs.fullPivLu().solve(b);
  return Eigen::Map<const MatrixXd>(s.data(), n, n);
}

inline MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

inline privsynth::PlantModel scalar_plant(double a, double b, double k, double sw, double sh, double q = 1.0,
                                          double r = 1.0) {
  return privsynth::PlantModel(scalar(a), scalar(b), scalar(k), scalar(sw), scalar(sh), scalar(1.0), scalar(q),
                               scalar(r));
}

inline double log_det(const MatrixXd& m) { return std::log(m.determinant()); }

}  // namespace testutil
