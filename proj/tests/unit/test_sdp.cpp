#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "privsynth/estimation.hpp"
#include "privsynth/model.hpp"
#include "privsynth/sdp/solver.hpp"

using namespace privsynth;
using namespace privsynth::sdp;
using Eigen::MatrixXd;

namespace {

Problem min_trace_with_floor() {
  Problem p;
  const auto s = p.add_variable("Sigma", 1, 1, Structure::Symmetric);
  p.add_linear_objective(trace(AffineExpr(s)));
  p.add_lmi("floor", AffineExpr(s) - MatrixXd::Identity(1, 1));
  return p;
}

Problem scalar_lyapunov() {
  Problem p;
  const auto s = p.add_variable("sigma", 1, 1, Structure::Symmetric);
  p.add_linear_objective(AffineExpr(s));
  p.add_scalar_inequality("lyapunov", AffineExpr(s) - 0.25 * AffineExpr(s) - MatrixXd::Identity(1, 1));
  return p;
}

Problem maxdet_box() {
  Problem p;
  const auto P = p.add_variable("P", 2, 2, Structure::Symmetric);
  p.add_logdet_objective("P", P, 1.0);
  p.add_lmi("upper", 2.0 * AffineExpr::identity(2) - AffineExpr(P));
  p.add_lmi("lower", P, true);
  return p;
}

Problem lyapunov_lmi(const MatrixXd& A, const MatrixXd& B) {
  Problem p;
  const auto n = A.rows();
  const auto S = p.add_variable("Sigma", n, n, Structure::Symmetric);
  p.add_linear_objective(trace(AffineExpr(S)));
  p.add_lmi("lyapunov", block2x2_symmetric(AffineExpr(S) - B, A * AffineExpr(S), AffineExpr(S)));
  return p;
}

}  // namespace

TEST_CASE("minimum trace above a floor") {
  const auto p = min_trace_with_floor();
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.values.at("Sigma")(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.min_constraint_eig >= -1e-8);
}

TEST_CASE("scalar Lyapunov inequality") {
  const auto p = scalar_lyapunov();
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.values.at("sigma")(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  CHECK(p.num_scalar_inequalities() == 1);
  CHECK(p.num_psd_blocks() == 0);
}

TEST_CASE("determinant maximization in a box") {
  const auto p = maxdet_box();
  ValueMap start{{"P", MatrixXd::Identity(2, 2)}};
  const auto sol = solve(p, {}, start);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK((sol.values.at("P") - 2.0 * MatrixXd::Identity(2, 2)).norm() < 1e-6 * 2.0);
  CHECK(sol.objective == doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-6));
  CHECK_FALSE(sol.used_phase1);
}

TEST_CASE("trace-minimal Lyapunov LMI recovers the Lyapunov solution") {
  const auto cs = load_case_study();
  const PrivacyMechanism mech(cs.plant, MatrixXd::Identity(4, 4), cs.plant.sigma_h(),
                              1e-3 * MatrixXd::Identity(3, 3));
  const auto cl = assemble_closed_loop(cs.plant, mech, cs.filter);
  const auto exact = solve_lyapunov_direct(cl.Acal, cl.Bcal).sigma;
  const auto p = lyapunov_lmi(cl.Acal, cl.Bcal);
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.used_phase1);
  CHECK(std::abs(sol.values.at("Sigma").trace() - exact.trace()) < 1e-6 * exact.trace());
}

TEST_CASE("check_solution on exact and perturbed points") {
  const auto p1 = min_trace_with_floor();
  CHECK(check_solution(p1, {{"Sigma", MatrixXd::Identity(1, 1)}}, 1e-10).ok);
  const auto p2 = scalar_lyapunov();
  CHECK(check_solution(p2, {{"sigma", MatrixXd::Constant(1, 1, 4.0 / 3.0)}}, 1e-10).worst_violation < 1e-10);
  const auto p3 = maxdet_box();
  CHECK(check_solution(p3, {{"P", 2.0 * MatrixXd::Identity(2, 2)}}, 1e-10).worst_violation < 1e-10);

  MatrixXd bumped = 2.0 * MatrixXd::Identity(2, 2);
  bumped(0, 0) += 1e-3;
  const auto rep = check_solution(p3, {{"P", bumped}}, 1e-10);
  CHECK_FALSE(rep.ok);
  CHECK(rep.worst_violation > 1e-4);
  CHECK(rep.worst_constraint == "upper");
}

TEST_CASE("returned point is no worse than hand-built feasible points") {
  const auto p = maxdet_box();
  const auto sol = solve(p, {}, ValueMap{{"P", MatrixXd::Identity(2, 2)}});
  for (double a : {0.5, 1.0, 1.5, 1.9}) {
    MatrixXd P(2, 2);
    P << a, 0.1 * a, 0.1 * a, 2.0 - a / 4.0;
    const ValueMap v{{"P", P}};
    if (!check_solution(p, v).ok) continue;
    CHECK(sol.objective <= p.objective(v) + 1e-8);
  }
}

TEST_CASE("solves are deterministic") {
  const auto cs = load_case_study();
  const auto cl = assemble_closed_loop(cs.plant, PrivacyMechanism(cs.plant, MatrixXd::Identity(4, 4),
                                                                  cs.plant.sigma_h(), 1e-3 * MatrixXd::Identity(3, 3)),
                                       cs.filter);
  const auto p = lyapunov_lmi(cl.Acal, cl.Bcal);
  const auto a = solve(p);
  const auto b = solve(p);
  CHECK(a.newton_steps == b.newton_steps);
  CHECK((a.values.at("Sigma") - b.values.at("Sigma")).norm() == 0.0);
}

TEST_CASE("equality constraints are eliminated") {
  Problem p;
  const auto X = p.add_variable("X", 2, 2, Structure::Full);
  const auto Y = p.add_variable("Y", 2, 2, Structure::Symmetric);
  p.add_linear_objective(trace(AffineExpr(Y)));
  p.add_lmi("Y above I", AffineExpr(Y) - MatrixXd::Identity(2, 2));
  p.add_lmi("X symmetric part", AffineExpr(X) + AffineExpr(X).transpose() - AffineExpr(Y));
  p.add_equality("X equals Y", AffineExpr(X) - AffineExpr(Y));
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK((sol.values.at("X") - sol.values.at("Y")).norm() < 1e-12);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("nonhomogeneous equalities keep their particular solution") {
  Problem p;
  const auto a = p.add_variable("a", 1, 1, Structure::Symmetric);
  const auto b = p.add_variable("b", 1, 1, Structure::Symmetric);
  p.add_linear_objective(AffineExpr(a) + 2.0 * AffineExpr(b));
  p.add_scalar_inequality("a floor", AffineExpr(a) - 0.5 * MatrixXd::Identity(1, 1));
  p.add_scalar_inequality("b floor", AffineExpr(b) - 0.5 * MatrixXd::Identity(1, 1));
  p.add_equality("sum", AffineExpr(a) + AffineExpr(b) - 3.0 * MatrixXd::Identity(1, 1));
  for (const bool warm : {false, true}) {
    const auto sol = warm ? solve(p, {}, ValueMap{{"a", MatrixXd::Constant(1, 1, 1.5)}, {"b", MatrixXd::Constant(1, 1, 1.5)}})
                          : solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.values.at("a")(0, 0) + sol.values.at("b")(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(sol.values.at("b")(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(3.5).epsilon(1e-6));
  }
}

TEST_CASE("block upper triangular variables keep their zero block") {
  Problem p;
  const auto P = p.add_variable("Pi", 4, 4, Structure::BlockUpperTriangular);
  CHECK(coordinate_count(P) == 12);
  MatrixXd v = MatrixXd::Constant(4, 4, 3.0);
  const auto x = pack(p, {{"Pi", v}});
  const auto back = unpack(p, x).at("Pi");
  CHECK(back.bottomLeftCorner(2, 2).norm() == 0.0);
  CHECK(back.topRows(2).minCoeff() == 3.0);
}

TEST_CASE("infeasible problems name the blocking constraint") {
  Problem p;
  const auto s = p.add_variable("s", 1, 1, Structure::Symmetric);
  p.add_linear_objective(AffineExpr(s));
  p.add_lmi("at least two", AffineExpr(s) - 2.0 * MatrixXd::Identity(1, 1));
  p.add_lmi("at most one", MatrixXd::Identity(1, 1) - AffineExpr(s));
  const auto sol = solve(p);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK((sol.failed_constraint == "at least two" || sol.failed_constraint == "at most one"));
}

TEST_CASE("non-convex logdet terms are rejected when built") {
  Problem p;
  const auto P = p.add_variable("P", 2, 2, Structure::Symmetric);
  CHECK_THROWS_AS(p.add_logdet_objective("concave", P, -1.0), std::invalid_argument);
  const auto X = p.add_variable("X", 2, 2, Structure::Full);
  p.add_logdet_objective("asymmetric", X, 1.0);
  p.add_lmi("X pd", AffineExpr(X) + AffineExpr(X).transpose());
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("expressions evaluate like their matrices") {
  std::mt19937_64 rng(31);
  Problem p;
  const auto X = p.add_variable("X", 3, 2, Structure::Full);
  const MatrixXd L = testutil::random_matrix(rng, 4, 3);
  const MatrixXd R = testutil::random_matrix(rng, 2, 5);
  const MatrixXd C = testutil::random_matrix(rng, 4, 5);
  const MatrixXd Xv = testutil::random_matrix(rng, 3, 2);
  const AffineExpr e = 2.0 * (L * AffineExpr(X) * R) + C;
  const ValueMap vals{{"X", Xv}};
  CHECK((e.evaluate(vals) - (2.0 * L * Xv * R + C)).norm() < 1e-12);
  CHECK((e.transpose().evaluate(vals) - (2.0 * L * Xv * R + C).transpose()).norm() < 1e-12);
  const MatrixXd sq = testutil::random_matrix(rng, 3, 3);
  const AffineExpr t = trace(AffineExpr(X) * testutil::random_matrix(rng, 2, 3) + sq);
  CHECK(t.rows() == 1);
  const AffineExpr bl = block(block2x2_symmetric(AffineExpr(sq), AffineExpr(X), AffineExpr::identity(2)), 0, 3, 3, 2);
  CHECK((bl.evaluate(vals) - Xv).norm() == 0.0);
}
