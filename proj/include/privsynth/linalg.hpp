#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace privsynth::linalg {

using Eigen::MatrixXd;

/// Relative asymmetry tolerated on covariance ingestion before it is an error.
inline constexpr double kSymmetryTolerance = 1e-8;
/// PSD acceptance: min eigenvalue >= -kPsdTolerance * ||M||_2.
inline constexpr double kPsdTolerance = 1e-10;

inline MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void require_shape(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols, std::string_view name);
void require_square(const MatrixXd& m, std::string_view name);

double min_eigenvalue(const MatrixXd& symmetric);
double max_eigenvalue(const MatrixXd& symmetric);

/// Cholesky succeeds on the symmetrized matrix.
bool is_positive_definite(const MatrixXd& m);
bool is_positive_semidefinite(const MatrixXd& m, double rel_tol = kPsdTolerance);

enum class Definiteness { PositiveDefinite, PositiveSemidefinite };

/// Validates and symmetrizes a covariance-like input. Throws DimensionError for
/// non-square or asymmetric (beyond kSymmetryTolerance relative) input and
/// NotPositiveDefiniteError when the requested definiteness fails.
MatrixXd ingest_covariance(const MatrixXd& m, std::string_view name, Definiteness required);

/// log det of a symmetric positive definite matrix via Cholesky. Throws
/// NotPositiveDefiniteError (mentioning `what`) instead of returning NaN.
double logdet_spd(const MatrixXd& m, std::string_view what = "logdet argument");

/// Principal square root of a symmetric PSD matrix.
MatrixXd sqrt_psd(const MatrixXd& m);

MatrixXd block_diagonal(const MatrixXd& a, const MatrixXd& b);
MatrixXd block_diagonal(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c);

/// [I 0] and [0 I] selectors onto the halves of a stacked 2n vector.
MatrixXd select_first(Eigen::Index n);
MatrixXd select_second(Eigen::Index n);

}  // namespace privsynth::linalg
