#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "privsynth/sdp/expression.hpp"

namespace privsynth::sdp {

using Eigen::VectorXd;

struct LmiConstraint {
  std::string name;
  AffineExpr expr;
  /// Strict constraints are enforced as expr >= delta I with delta scaled to the block.
  bool strict = false;
  /// 1x1 linear inequality rather than a matrix cone.
  bool scalar = false;
};

struct LogdetTerm {
  std::string name;
  AffineExpr arg;
  double weight = 1.0;  // contributes weight * (-logdet arg)
};

struct EqualityConstraint {
  std::string name;
  AffineExpr expr;  // every entry == 0
};

/// minimize  tr-linear objective + sum weight_i * (-logdet arg_i)
/// subject to LMIs expr_j >= 0 (>= delta_j I when strict) and affine equalities.
class Problem {
 public:
  Variable add_variable(const std::string& name, Index rows, Index cols, Structure structure);
  void add_linear_objective(const AffineExpr& scalar_expr);
  void add_logdet_objective(const std::string& name, const AffineExpr& arg, double weight);
  void add_lmi(const std::string& name, const AffineExpr& expr, bool strict = false);
  void add_scalar_inequality(const std::string& name, const AffineExpr& expr);
  void add_equality(const std::string& name, const AffineExpr& expr);

  const std::vector<Variable>& variables() const { return variables_; }
  const AffineExpr& linear_objective() const { return linear_objective_; }
  const std::vector<LogdetTerm>& logdet_terms() const { return logdet_terms_; }
  const std::vector<LmiConstraint>& constraints() const { return constraints_; }
  const std::vector<EqualityConstraint>& equalities() const { return equalities_; }

  /// Number of matrix cone constraints (excludes scalar inequalities).
  std::size_t num_psd_blocks() const;
  std::size_t num_scalar_inequalities() const;
  /// Sum of constraint sizes: the barrier parameter.
  Index barrier_order() const;

  /// Objective at the given values; throws NotPositiveDefiniteError outside the logdet domain.
  double objective(const ValueMap& values) const;

  const Variable& variable(const std::string& name) const;

 private:
  void check_declared(const AffineExpr& e, const std::string& where) const;

  std::vector<Variable> variables_;
  AffineExpr linear_objective_ = AffineExpr::zero(1, 1);
  std::vector<LogdetTerm> logdet_terms_;
  std::vector<LmiConstraint> constraints_;
  std::vector<EqualityConstraint> equalities_;
};

/// Number of scalar coordinates of a variable under its structure.
Index coordinate_count(const Variable& v);

/// Scalar coordinates <-> matrix values.
VectorXd pack(const Problem& p, const ValueMap& values);
ValueMap unpack(const Problem& p, const VectorXd& x);

struct ConstraintCheck {
  std::string name;
  double min_eig = 0.0;
  double violation = 0.0;  // max(0, -min_eig)
};

struct CheckReport {
  std::vector<ConstraintCheck> constraints;
  std::vector<ConstraintCheck> logdet_domains;
  std::string worst_constraint;
  double worst_violation = 0.0;
  double min_constraint_eig = 0.0;
  std::string worst_equality;
  double max_equality_residual = 0.0;
  bool ok = false;
};

/// Recomputes each constraint's minimum eigenvalue and equality residual from the
/// expressions; ok when every violation and residual is below tol and every logdet
/// argument is positive definite.
CheckReport check_solution(const Problem& p, const ValueMap& values, double tol = 1e-8);

/// Structured dump of the assembled problem for external cross-checking.
nlohmann::json to_json(const Problem& p);
void write_debug_dump(const Problem& p, const std::string& path);

}  // namespace privsynth::sdp
