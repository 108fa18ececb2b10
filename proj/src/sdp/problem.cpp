#include "privsynth/sdp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "privsynth/errors.hpp"

namespace privsynth::sdp {

namespace {

nlohmann::json matrix_json(const MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json expr_json(const AffineExpr& e) {
  nlohmann::json j;
  j["rows"] = e.rows();
  j["cols"] = e.cols();
  j["constant"] = matrix_json(e.constant());
  auto terms = nlohmann::json::array();
  for (const auto& t : e.terms()) {
    terms.push_back({{"variable", t.var.name},
                     {"transposed", t.transposed},
                     {"left", matrix_json(t.left)},
                     {"right", matrix_json(t.right)}});
  }
  j["terms"] = std::move(terms);
  return j;
}

const char* structure_name(Structure s) {
  switch (s) {
    case Structure::Symmetric:
      return "symmetric";
    case Structure::Full:
      return "full";
    case Structure::BlockUpperTriangular:
      return "block_upper_triangular";
  }
  return "unknown";
}

double min_eig_symmetric(const MatrixXd& m) {
  const MatrixXd s = 0.5 * (m + m.transpose());
  if (s.size() == 1) return s(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

Variable Problem::add_variable(const std::string& name, Index rows, Index cols, Structure structure) {
  if (rows <= 0 || cols <= 0) throw DimensionError(fmt::format("variable '{}' must have positive shape", name));
  for (const auto& v : variables_) {
    if (v.name == name) throw std::invalid_argument(fmt::format("variable '{}' declared twice", name));
  }
  if (structure == Structure::Symmetric && rows != cols) {
    throw DimensionError(fmt::format("symmetric variable '{}' must be square", name));
  }
  if (structure == Structure::BlockUpperTriangular && (rows != cols || rows % 2 != 0)) {
    throw DimensionError(fmt::format("block upper triangular variable '{}' must be square of even size", name));
  }
  Variable v{static_cast<int>(variables_.size()), name, rows, cols, structure};
  variables_.push_back(v);
  return v;
}

void Problem::check_declared(const AffineExpr& e, const std::string& where) const {
  for (const auto& t : e.terms()) {
    const auto id = t.var.id;
    if (id < 0 || id >= static_cast<int>(variables_.size()) || variables_[id].name != t.var.name) {
      throw std::invalid_argument(fmt::format("{} references undeclared variable '{}'", where, t.var.name));
    }
  }
}

void Problem::add_linear_objective(const AffineExpr& scalar_expr) {
  if (scalar_expr.rows() != 1 || scalar_expr.cols() != 1) throw DimensionError("linear objective must be 1x1");
  check_declared(scalar_expr, "objective");
  linear_objective_ += scalar_expr;
}

void Problem::add_logdet_objective(const std::string& name, const AffineExpr& arg, double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument(
        fmt::format("logdet term '{}' has weight {}; only positive weights keep the objective convex", name, weight));
  }
  if (arg.rows() != arg.cols()) throw DimensionError(fmt::format("logdet argument '{}' must be square", name));
  check_declared(arg, "logdet term '" + name + "'");
  logdet_terms_.push_back({name, arg, weight});
}

void Problem::add_lmi(const std::string& name, const AffineExpr& expr, bool strict) {
  if (expr.rows() != expr.cols()) throw DimensionError(fmt::format("LMI '{}' must be square", name));
  check_declared(expr, "LMI '" + name + "'");
  constraints_.push_back({name, expr, strict, false});
}

void Problem::add_scalar_inequality(const std::string& name, const AffineExpr& expr) {
  if (expr.rows() != 1 || expr.cols() != 1) throw DimensionError(fmt::format("inequality '{}' must be 1x1", name));
  check_declared(expr, "inequality '" + name + "'");
  constraints_.push_back({name, expr, false, true});
}

void Problem::add_equality(const std::string& name, const AffineExpr& expr) {
  check_declared(expr, "equality '" + name + "'");
  equalities_.push_back({name, expr});
}

std::size_t Problem::num_psd_blocks() const {
  return static_cast<std::size_t>(
      std::count_if(constraints_.begin(), constraints_.end(), [](const auto& c) { return !c.scalar; }));
}

std::size_t Problem::num_scalar_inequalities() const { return constraints_.size() - num_psd_blocks(); }

Index Problem::barrier_order() const {
  Index m = 0;
  for (const auto& c : constraints_) m += c.expr.rows();
  return m;
}

double Problem::objective(const ValueMap& values) const {
  double f = linear_objective_.evaluate(values)(0, 0);
  for (const auto& t : logdet_terms_) {
    const MatrixXd a = t.arg.evaluate(values);
    Eigen::LLT<MatrixXd> llt(0.5 * (a + a.transpose()));
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefiniteError(fmt::format("logdet argument '{}' is not positive definite", t.name));
    }
    f -= t.weight * 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  return f;
}

const Variable& Problem::variable(const std::string& name) const {
  for (const auto& v : variables_) {
    if (v.name == name) return v;
  }
  throw std::invalid_argument(fmt::format("unknown variable '{}'", name));
}

Index coordinate_count(const Variable& v) {
  switch (v.structure) {
    case Structure::Symmetric:
      return v.rows * (v.rows + 1) / 2;
    case Structure::Full:
      return v.rows * v.cols;
    case Structure::BlockUpperTriangular:
      return v.rows * v.cols - (v.rows / 2) * (v.cols / 2);
  }
  return 0;
}

VectorXd pack(const Problem& p, const ValueMap& values) {
  Index n = 0;
  for (const auto& v : p.variables()) n += coordinate_count(v);
  VectorXd x(n);
  Index k = 0;
  for (const auto& v : p.variables()) {
    auto it = values.find(v.name);
    if (it == values.end()) throw std::invalid_argument(fmt::format("no value for variable '{}'", v.name));
    const MatrixXd& m = it->second;
    if (m.rows() != v.rows || m.cols() != v.cols) {
      throw DimensionError(fmt::format("value for '{}' has shape {}x{}, expected {}x{}", v.name, m.rows(), m.cols(),
                                       v.rows, v.cols));
    }
    for (Index c = 0; c < v.cols; ++c) {
      const Index r0 = v.structure == Structure::Symmetric ? c : 0;
      for (Index r = r0; r < v.rows; ++r) {
        if (!entry_is_free(v, r, c)) continue;
        x(k++) = v.structure == Structure::Symmetric ? 0.5 * (m(r, c) + m(c, r)) : m(r, c);
      }
    }
  }
  return x;
}

ValueMap unpack(const Problem& p, const VectorXd& x) {
  ValueMap out;
  Index k = 0;
  for (const auto& v : p.variables()) {
    MatrixXd m = MatrixXd::Zero(v.rows, v.cols);
    for (Index c = 0; c < v.cols; ++c) {
      const Index r0 = v.structure == Structure::Symmetric ? c : 0;
      for (Index r = r0; r < v.rows; ++r) {
        if (!entry_is_free(v, r, c)) continue;
        m(r, c) = x(k);
        if (v.structure == Structure::Symmetric) m(c, r) = x(k);
        ++k;
      }
    }
    out.emplace(v.name, std::move(m));
  }
  if (k != x.size()) throw DimensionError("coordinate vector length does not match the problem");
  return out;
}

CheckReport check_solution(const Problem& p, const ValueMap& values, double tol) {
  CheckReport report;
  report.min_constraint_eig = std::numeric_limits<double>::infinity();
  for (const auto& c : p.constraints()) {
    const double e = min_eig_symmetric(c.expr.evaluate(values));
    const double viol = std::max(0.0, -e);
    report.constraints.push_back({c.name, e, viol});
    report.min_constraint_eig = std::min(report.min_constraint_eig, e);
    if (report.worst_constraint.empty() || viol > report.worst_violation) {
      report.worst_violation = viol;
      report.worst_constraint = c.name;
    }
  }
  bool domains_ok = true;
  for (const auto& t : p.logdet_terms()) {
    const double e = min_eig_symmetric(t.arg.evaluate(values));
    report.logdet_domains.push_back({t.name, e, e > 0.0 ? 0.0 : -e});
    domains_ok = domains_ok && e > 0.0;
  }
  for (const auto& eq : p.equalities()) {
    const double r = eq.expr.evaluate(values).cwiseAbs().maxCoeff();
    if (report.worst_equality.empty() || r > report.max_equality_residual) {
      report.max_equality_residual = r;
      report.worst_equality = eq.name;
    }
  }
  if (p.constraints().empty()) report.min_constraint_eig = 0.0;
  report.ok = domains_ok && report.worst_violation < tol && report.max_equality_residual < tol;
  return report;
}

nlohmann::json to_json(const Problem& p) {
  nlohmann::json j;
  auto vars = nlohmann::json::array();
  for (const auto& v : p.variables()) {
    vars.push_back({{"name", v.name},
                    {"rows", v.rows},
                    {"cols", v.cols},
                    {"structure", structure_name(v.structure)},
                    {"coordinates", coordinate_count(v)}});
  }
  j["variables"] = std::move(vars);
  j["objective_linear"] = expr_json(p.linear_objective());
  auto logdets = nlohmann::json::array();
  for (const auto& t : p.logdet_terms()) {
    logdets.push_back({{"name", t.name}, {"weight", t.weight}, {"arg", expr_json(t.arg)}});
  }
  j["objective_logdet"] = std::move(logdets);
  auto cons = nlohmann::json::array();
  for (const auto& c : p.constraints()) {
    cons.push_back({{"name", c.name}, {"strict", c.strict}, {"scalar", c.scalar}, {"expr", expr_json(c.expr)}});
  }
  j["lmi_constraints"] = std::move(cons);
  auto eqs = nlohmann::json::array();
  for (const auto& e : p.equalities()) eqs.push_back({{"name", e.name}, {"expr", expr_json(e.expr)}});
  j["equality_constraints"] = std::move(eqs);
  return j;
}

void write_debug_dump(const Problem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  out << to_json(p).dump(2) << '\n';
}

}  // namespace privsynth::sdp
