#pragma once

#include <optional>
#include <string>

#include "privsynth/sdp/problem.hpp"

namespace privsynth::sdp {

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double mu = 20.0;               // barrier parameter growth per outer iteration
  double t0 = 1.0;                // initial objective weight
  double gap_tolerance = 1e-8;    // stop when gap <= tol * (1 + |objective|)
  int max_newton_steps = 500;
  double strict_margin = 1e-9;    // strict blocks enforced as >= margin * max(1, ||constant||_F) I
  double armijo = 0.01;
  double backtrack = 0.5;
  double centering_tolerance = 1e-9;  // lambda^2 / 2
  bool allow_phase1 = true;
  double phase1_margin = 1e-6;    // phase I stops once every block clears its floor by this much
  int max_phase1_steps = 500;
};

struct SdpSolution {
  ValueMap values;
  double objective = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double duality_gap_estimate = 0.0;
  double min_constraint_eig = 0.0;
  int newton_steps = 0;
  int phase1_steps = 0;
  bool used_phase1 = false;
  /// Infeasibility certificate or Cholesky breakdown location.
  std::string failed_constraint;
  std::string message;
};

/// Path-following barrier method. Starts from `initial` when it is strictly
/// feasible, otherwise runs a phase-I slack minimization (when allowed).
/// Deterministic for fixed inputs and options.
SdpSolution solve(const Problem& problem, const SolverOptions& options = {},
                  const std::optional<ValueMap>& initial = std::nullopt);

/// Phase-I feasibility only: a strictly feasible point, or status Infeasible
/// naming the constraint that could not be satisfied.
SdpSolution find_feasible_point(const Problem& problem, const SolverOptions& options = {},
                                const std::optional<ValueMap>& initial = std::nullopt);

}  // namespace privsynth::sdp
