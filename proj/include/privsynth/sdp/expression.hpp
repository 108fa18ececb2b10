#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace privsynth::sdp {

using Eigen::Index;
using Eigen::MatrixXd;

/// Storage pattern of a decision matrix.
enum class Structure {
  Symmetric,
  Full,
  /// Square 2k x 2k with the lower-left k x k block fixed at zero.
  BlockUpperTriangular,
};

/// Handle to a decision matrix declared on a Problem.
struct Variable {
  int id = -1;
  std::string name;
  Index rows = 0;
  Index cols = 0;
  Structure structure = Structure::Full;
};

using ValueMap = std::map<std::string, MatrixXd>;

/// coef * left * X * right, or with X^T when transposed.
struct Term {
  Variable var;
  bool transposed = false;
  MatrixXd left;
  MatrixXd right;
};

/// Affine matrix-valued expression: constant + sum of terms.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(const Variable& v);  // NOLINT: implicit lift is the point
  explicit AffineExpr(MatrixXd constant);

  static AffineExpr zero(Index rows, Index cols);
  static AffineExpr identity(Index n);

  Index rows() const { return constant_.rows(); }
  Index cols() const { return constant_.cols(); }
  const MatrixXd& constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }

  AffineExpr transpose() const;
  MatrixXd evaluate(const ValueMap& values) const;

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);

  friend AffineExpr operator*(const MatrixXd& m, const AffineExpr& e);
  friend AffineExpr operator*(const AffineExpr& e, const MatrixXd& m);
  friend AffineExpr operator*(double s, const AffineExpr& e);

 private:
  MatrixXd constant_;
  std::vector<Term> terms_;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(const AffineExpr& a);
AffineExpr operator+(AffineExpr a, const MatrixXd& b);
AffineExpr operator-(AffineExpr a, const MatrixXd& b);
AffineExpr operator+(const MatrixXd& a, const AffineExpr& b);
AffineExpr operator-(const MatrixXd& a, const AffineExpr& b);
AffineExpr operator*(const AffineExpr& e, double s);

/// 1x1 expression tr(e).
AffineExpr trace(const AffineExpr& e);

/// e placed at (row, col) inside a zero rows x cols matrix.
AffineExpr embed(const AffineExpr& e, Index row, Index col, Index rows, Index cols);

/// Sub-block of e.
AffineExpr block(const AffineExpr& e, Index row, Index col, Index rows, Index cols);

/// [[e11, e12], [e12^T, e22]].
AffineExpr block2x2_symmetric(const AffineExpr& e11, const AffineExpr& e12, const AffineExpr& e22);

/// Structural zero entries of a variable are reported as zero; other entries are free.
bool entry_is_free(const Variable& v, Index r, Index c);

}  // namespace privsynth::sdp
