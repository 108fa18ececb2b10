#include "privsynth/sdp/expression.hpp"

#include <fmt/format.h>

#include "privsynth/errors.hpp"

namespace privsynth::sdp {

namespace {

void require_same_shape(const AffineExpr& a, const AffineExpr& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(fmt::format("shape mismatch in {}: {}x{} vs {}x{}", op, a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

}  // namespace

AffineExpr::AffineExpr(const Variable& v) : constant_(MatrixXd::Zero(v.rows, v.cols)) {
  if (v.id < 0) throw std::invalid_argument("undeclared variable");
  terms_.push_back({v, false, MatrixXd::Identity(v.rows, v.rows), MatrixXd::Identity(v.cols, v.cols)});
}

AffineExpr::AffineExpr(MatrixXd constant) : constant_(std::move(constant)) {}

AffineExpr AffineExpr::zero(Index rows, Index cols) { return AffineExpr(MatrixXd::Zero(rows, cols)); }

AffineExpr AffineExpr::identity(Index n) { return AffineExpr(MatrixXd::Identity(n, n)); }

AffineExpr AffineExpr::transpose() const {
  AffineExpr out(constant_.transpose());
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    out.terms_.push_back({t.var, !t.transposed, t.right.transpose(), t.left.transpose()});
  }
  return out;
}

MatrixXd AffineExpr::evaluate(const ValueMap& values) const {
  MatrixXd out = constant_;
  for (const auto& t : terms_) {
    auto it = values.find(t.var.name);
    if (it == values.end()) throw std::invalid_argument(fmt::format("no value for variable '{}'", t.var.name));
    const MatrixXd& x = it->second;
    if (x.rows() != t.var.rows || x.cols() != t.var.cols) {
      throw DimensionError(fmt::format("value for '{}' has shape {}x{}, expected {}x{}", t.var.name, x.rows(), x.cols(),
                                       t.var.rows, t.var.cols));
    }
    if (t.transposed) {
      out.noalias() += t.left * x.transpose() * t.right;
    } else {
      out.noalias() += t.left * x * t.right;
    }
  }
  return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  require_same_shape(*this, other, "+");
  constant_ += other.constant_;
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) { return *this += -other; }

AffineExpr operator*(const MatrixXd& m, const AffineExpr& e) {
  if (m.cols() != e.rows()) {
    throw DimensionError(fmt::format("cannot multiply {}x{} by {}x{}", m.rows(), m.cols(), e.rows(), e.cols()));
  }
  AffineExpr out(m * e.constant_);
  out.terms_.reserve(e.terms_.size());
  for (const auto& t : e.terms_) out.terms_.push_back({t.var, t.transposed, m * t.left, t.right});
  return out;
}

AffineExpr operator*(const AffineExpr& e, const MatrixXd& m) {
  if (e.cols() != m.rows()) {
    throw DimensionError(fmt::format("cannot multiply {}x{} by {}x{}", e.rows(), e.cols(), m.rows(), m.cols()));
  }
  AffineExpr out(e.constant_ * m);
  out.terms_.reserve(e.terms_.size());
  for (const auto& t : e.terms_) out.terms_.push_back({t.var, t.transposed, t.left, t.right * m});
  return out;
}

AffineExpr operator*(double s, const AffineExpr& e) {
  AffineExpr out(s * e.constant_);
  out.terms_.reserve(e.terms_.size());
  for (const auto& t : e.terms_) out.terms_.push_back({t.var, t.transposed, s * t.left, t.right});
  return out;
}

AffineExpr operator*(const AffineExpr& e, double s) { return s * e; }

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(const AffineExpr& a) { return -1.0 * a; }
AffineExpr operator+(AffineExpr a, const MatrixXd& b) { return a += AffineExpr(b); }
AffineExpr operator-(AffineExpr a, const MatrixXd& b) { return a -= AffineExpr(b); }
AffineExpr operator+(const MatrixXd& a, const AffineExpr& b) { return AffineExpr(a) + b; }
AffineExpr operator-(const MatrixXd& a, const AffineExpr& b) { return AffineExpr(a) - b; }

AffineExpr trace(const AffineExpr& e) {
  if (e.rows() != e.cols()) throw DimensionError("trace of a non-square expression");
  AffineExpr out = AffineExpr::zero(1, 1);
  for (Index i = 0; i < e.rows(); ++i) {
    const MatrixXd ei = MatrixXd::Identity(e.rows(), e.rows()).row(i);
    out += ei * e * ei.transpose();
  }
  return out;
}

AffineExpr embed(const AffineExpr& e, Index row, Index col, Index rows, Index cols) {
  if (row < 0 || col < 0 || row + e.rows() > rows || col + e.cols() > cols) {
    throw DimensionError(fmt::format("cannot embed {}x{} at ({}, {}) in {}x{}", e.rows(), e.cols(), row, col, rows, cols));
  }
  MatrixXd left = MatrixXd::Zero(rows, e.rows());
  left.block(row, 0, e.rows(), e.rows()).setIdentity();
  MatrixXd right = MatrixXd::Zero(e.cols(), cols);
  right.block(0, col, e.cols(), e.cols()).setIdentity();
  return left * e * right;
}

AffineExpr block(const AffineExpr& e, Index row, Index col, Index rows, Index cols) {
  if (row < 0 || col < 0 || row + rows > e.rows() || col + cols > e.cols()) {
    throw DimensionError(fmt::format("block ({}, {}, {}x{}) outside {}x{}", row, col, rows, cols, e.rows(), e.cols()));
  }
  MatrixXd left = MatrixXd::Zero(rows, e.rows());
  left.block(0, row, rows, rows).setIdentity();
  MatrixXd right = MatrixXd::Zero(e.cols(), cols);
  right.block(col, 0, cols, cols).setIdentity();
  return left * e * right;
}

AffineExpr block2x2_symmetric(const AffineExpr& e11, const AffineExpr& e12, const AffineExpr& e22) {
  if (e11.rows() != e11.cols() || e22.rows() != e22.cols() || e12.rows() != e11.rows() || e12.cols() != e22.rows()) {
    throw DimensionError(fmt::format("inconsistent 2x2 block shapes: {}x{}, {}x{}, {}x{}", e11.rows(), e11.cols(),
                                     e12.rows(), e12.cols(), e22.rows(), e22.cols()));
  }
  const Index n1 = e11.rows();
  const Index n = n1 + e22.rows();
  return embed(e11, 0, 0, n, n) + embed(e12, 0, n1, n, n) + embed(e12.transpose(), n1, 0, n, n) +
         embed(e22, n1, n1, n, n);
}

bool entry_is_free(const Variable& v, Index r, Index c) {
  if (v.structure != Structure::BlockUpperTriangular) return true;
  const Index k = v.rows / 2;
  return !(r >= k && c < k);
}

}  // namespace privsynth::sdp
