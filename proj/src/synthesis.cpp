#include "privsynth/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <Eigen/SVD>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "privsynth/errors.hpp"
#include "privsynth/estimation.hpp"
#include "privsynth/infoflow.hpp"
#include "privsynth/linalg.hpp"
#include "privsynth/perf.hpp"

namespace privsynth {

using Eigen::MatrixXd;
using sdp::AffineExpr;

std::string to_string(MechanismMode m) { return m == MechanismMode::FullG ? "full_G" : "identity_G"; }

MechanismMode parse_mode(const std::string& s) {
  if (s == "full" || s == "full_G") return MechanismMode::FullG;
  if (s == "identity" || s == "identity_G") return MechanismMode::IdentityG;
  throw std::invalid_argument(fmt::format("unknown mechanism mode '{}'", s));
}

std::vector<double> default_alpha_grid(int points, double lo, double hi) {
  if (points < 1 || !(lo > 0.0) || !(hi < 1.0) || !(lo <= hi)) {
    throw std::invalid_argument("alpha grid needs points >= 1 and 0 < lo <= hi < 1");
  }
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double u = points == 1 ? 0.5 : static_cast<double>(i) / (points - 1);
    const double z = logit(lo) + u * (logit(hi) - logit(lo));
    out.push_back(1.0 / (1.0 + std::exp(-z)));
  }
  return out;
}

std::vector<double> default_epsilon_list() {
  std::vector<double> out;
  for (int i = 1; i <= 20; ++i) out.push_back(0.005 * i);
  return out;
}

void SynthesisConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument(fmt::format("epsilon must be finite and nonnegative, got {}", epsilon));
  }
  if (alpha_grid.empty()) throw std::invalid_argument("alpha grid is empty");
  for (double a : alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument(fmt::format("alpha {} is not inside (0, 1)", a));
  }
  if (!(noise_floor > 0.0)) throw std::invalid_argument("noise floor must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

namespace {

void check_filter(const PlantModel& plant, const AdversaryFilter& filt) {
  if (filt.L().size() == 0) throw std::invalid_argument("adversary gain L is missing");
  linalg::require_shape(filt.L(), plant.nx(), plant.ny(), "L");
}

MatrixXd sym(const MatrixXd& m) { return linalg::symmetrize(m); }

}  // namespace

sdp::Problem build_program(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config,
                           double alpha) {
  config.validate();
  check_filter(plant, filt);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const auto n = plant.nx();
  const auto nu = plant.nu();
  const MatrixXd& A = plant.A();
  const MatrixXd& B = plant.B();
  const MatrixXd& K = plant.K();
  const MatrixXd& L = filt.L();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd BK = B * K;

  sdp::Problem p;
  const auto Pi1 = p.add_variable(vars::kPi1, 2 * n, 2 * n, sdp::Structure::BlockUpperTriangular);
  const auto Pi21 = p.add_variable(vars::kPi21, n, n, sdp::Structure::Full);
  const auto Pi3 = p.add_variable(vars::kPi3, n, n, sdp::Structure::Symmetric);
  const auto Pi4 = p.add_variable(vars::kPi4, n, n, sdp::Structure::Symmetric);
  const auto Pi5 = p.add_variable(vars::kPi5, nu, nu, sdp::Structure::Symmetric);
  const auto Sigma = p.add_variable(vars::kSigma, 2 * n, 2 * n, sdp::Structure::Symmetric);
  const auto Svt = p.add_variable(vars::kSigmaVtilde, n, n, sdp::Structure::Symmetric);
  const auto Sz = p.add_variable(vars::kSigmaZ, nu, nu, sdp::Structure::Symmetric);

  const AffineExpr pi13 = sdp::block(Pi1, n, n, n, n);
  const AffineExpr pi13_sym = pi13 + pi13.transpose();
  const AffineExpr sigma_e = sdp::block(Sigma, 0, 0, n, n);
  const AffineExpr sigma_x = sdp::block(Sigma, n, n, n, n);
  const AffineExpr l_svt_l = L * AffineExpr(Svt) * L.transpose();
  const AffineExpr input_noise = B * AffineExpr(Sz) * B.transpose() + plant.sigma_w();
  const AffineExpr control_channel = BK * AffineExpr(Svt) * BK.transpose() + input_noise;

  const double half = 0.5 * alpha;
  p.add_logdet_objective("Pi3", Pi3, half);
  p.add_logdet_objective("L Sigma_vtilde L^T", l_svt_l, half);
  p.add_logdet_objective("Pi4", Pi4, half);
  p.add_logdet_objective("B Sigma_z B^T + Sigma_w", input_noise, half);
  p.add_linear_objective((1.0 - alpha) * sdp::trace(Sigma));

  p.add_lmi(blocks::kUplink,
            sdp::block2x2_symmetric(2.0 * I - AffineExpr(Pi3) - l_svt_l, L * AffineExpr(Pi21), pi13_sym - sigma_e));
  p.add_lmi(blocks::kDownlink, 2.0 * I - AffineExpr(Pi4) - control_channel);

  // Sigma >= Acal Sigma_zeta Acal^T + Bcal through the congruence variables.
  MatrixXd A0 = MatrixXd::Zero(2 * n, 2 * n);
  A0.topLeftCorner(n, n) = A * (I - L);
  A0.topRightCorner(n, n) = A * L;
  A0.bottomRightCorner(n, n) = A;
  MatrixXd A1(2 * n, n);
  A1 << -A * L, BK;
  MatrixXd M2(2 * n, nu);
  M2 << B, B;
  MatrixXd M3(2 * n, n);
  M3 << I, I;
  const AffineExpr bcal = A1 * AffineExpr(Svt) * A1.transpose() + M2 * AffineExpr(Sz) * M2.transpose() +
                          MatrixXd(M3 * plant.sigma_w() * M3.transpose());
  const AffineExpr coupling = A0 * AffineExpr(Pi1) + A1 * AffineExpr(Pi21) * linalg::select_second(n);
  p.add_lmi(blocks::kCovariance, sdp::block2x2_symmetric(AffineExpr(Sigma) - bcal, coupling,
                                                         AffineExpr(Pi1) + AffineExpr(Pi1).transpose() -
                                                             AffineExpr(Sigma)));

  const double baseline = baseline_lqr_cost(plant).cost;
  const MatrixXd KRK = K.transpose() * plant.R() * K;
  const AffineExpr cost = sdp::trace(plant.Q() * sigma_x) + sdp::trace(Pi5) + sdp::trace(KRK * AffineExpr(Svt)) +
                          sdp::trace(plant.R() * AffineExpr(Sz));
  p.add_scalar_inequality(blocks::kBudget, MatrixXd::Constant(1, 1, baseline + config.epsilon) - cost);

  const MatrixXd RhK = linalg::sqrt_psd(plant.R()) * K;
  p.add_lmi(blocks::kControlCost, sdp::block2x2_symmetric(Pi5, RhK * AffineExpr(Pi21), pi13_sym - sigma_x));
  p.add_lmi(blocks::kOutputNoise, sdp::block2x2_symmetric(Svt, Pi21, pi13_sym - plant.sigma_h()), true);
  p.add_lmi(blocks::kInputNoise, Sz, true);
  p.add_lmi(blocks::kSigmaPositive, Sigma, true);

  if (config.mode == MechanismMode::IdentityG) p.add_equality("Pi21 = Pi13", AffineExpr(Pi21) - pi13);
  return p;
}

namespace {

struct StartCandidate {
  sdp::ValueMap values;
};

// G = I start: Sigma solves Sigma = Acal (Sigma + diag(S, 0)) Acal^T + Bcal + eta I with
// S = Sigma_ex Sigma_xx^{-1} Sigma_xe, which makes the covariance block feasible for
// Pi1 = [[Sigma_ee, Sigma_ex], [0, Sigma_xx]], Pi21 = Pi13 = Sigma_xx.
StartCandidate build_start(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config) {
  const auto n = plant.nx();
  const auto nu = plant.nu();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const double d0 = config.noise_floor;
  const double tiny = 1e-6;
  const MatrixXd Sz = d0 * MatrixXd::Identity(nu, nu);
  MatrixXd Svt = plant.sigma_h() + d0 * I;
  MatrixXd Sigma;
  for (int iter = 0; iter < 200; ++iter) {
    const PrivacyMechanism mech(plant, I, sym(Svt - plant.sigma_h()), Sz);
    const auto cl = assemble_closed_loop(plant, mech, filt);
    const double eta = tiny * std::max(1.0, cl.Bcal.norm());
    MatrixXd next = solve_lyapunov_direct(cl.Acal, cl.Bcal + eta * MatrixXd::Identity(2 * n, 2 * n)).sigma;
    for (int inner = 0; inner < 500; ++inner) {
      const MatrixXd Sex = next.topRightCorner(n, n);
      const MatrixXd Sxx = next.bottomRightCorner(n, n);
      MatrixXd aug = MatrixXd::Zero(2 * n, 2 * n);
      aug.topLeftCorner(n, n) = sym(Sex * Sxx.ldlt().solve(Sex.transpose()));
      const MatrixXd rhs = cl.Bcal + sym(cl.Acal * aug * cl.Acal.transpose()) + eta * MatrixXd::Identity(2 * n, 2 * n);
      const MatrixXd again = solve_lyapunov_direct(cl.Acal, sym(rhs)).sigma;
      const double change = (again - next).norm();
      next = again;
      if (change < 1e-13 * (1.0 + next.norm())) break;
    }
    const MatrixXd Sxx = next.bottomRightCorner(n, n);
    const MatrixXd denom = sym(2.0 * Sxx - plant.sigma_h());
    const MatrixXd SvtNext = sym(Sxx * denom.ldlt().solve(Sxx)) + d0 * I;
    const double change = (SvtNext - Svt).norm() + (Sigma.size() ? (next - Sigma).norm() : 1.0);
    Svt = SvtNext;
    Sigma = next;
    if (change < 1e-12 * (1.0 + Sigma.norm())) break;
  }

  const MatrixXd See = Sigma.topLeftCorner(n, n);
  const MatrixXd Sex = Sigma.topRightCorner(n, n);
  const MatrixXd Sxx = Sigma.bottomRightCorner(n, n);
  MatrixXd Pi1 = MatrixXd::Zero(2 * n, 2 * n);
  Pi1.topLeftCorner(n, n) = See;
  Pi1.topRightCorner(n, n) = Sex;
  Pi1.bottomRightCorner(n, n) = Sxx;
  const MatrixXd& L = filt.L();
  const MatrixXd LP = L * Sxx;
  const MatrixXd Xup = sym(L * Svt * L.transpose() + LP * sym(2.0 * Sxx - See).ldlt().solve(LP.transpose()));
  const MatrixXd BK = plant.B() * plant.K();
  const MatrixXd Y = sym(BK * Svt * BK.transpose() + plant.B() * Sz * plant.B().transpose() + plant.sigma_w());
  const MatrixXd RhK = linalg::sqrt_psd(plant.R()) * plant.K();

  StartCandidate c;
  c.values[vars::kPi1] = Pi1;
  c.values[vars::kPi21] = Sxx;
  c.values[vars::kPi3] = 0.5 * (2.0 * I - Xup);
  c.values[vars::kPi4] = 0.5 * (2.0 * I - Y);
  c.values[vars::kPi5] = sym(RhK * Sxx * RhK.transpose()) + tiny * MatrixXd::Identity(nu, nu);
  c.values[vars::kSigma] = Sigma;
  c.values[vars::kSigmaVtilde] = Svt;
  c.values[vars::kSigmaZ] = Sz;
  return c;
}

// Margin of every constraint above its strict floor.
std::optional<std::string> violated_block(const sdp::Problem& p, const sdp::ValueMap& v, double strict_margin) {
  const auto rep = sdp::check_solution(p, v);
  for (const auto& d : rep.logdet_domains) {
    if (!(d.min_eig > 0.0)) return d.name;
  }
  std::optional<std::string> worst;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < rep.constraints.size(); ++i) {
    const auto& c = p.constraints()[i];
    const double floor =
        c.strict ? strict_margin * std::max(1.0, c.expr.constant().norm()) : 0.0;
    const double gap = rep.constraints[i].min_eig - floor;
    if (!(gap > 0.0) && (!worst || gap < worst_gap)) {
      worst = c.name;
      worst_gap = gap;
    }
  }
  return worst;
}

std::optional<sdp::ValueMap> feasible_start(const PlantModel& plant, const AdversaryFilter& filt,
                                            const SynthesisConfig& config, std::string& failure, bool& used_phase1) {
  used_phase1 = false;
  const auto probe = build_program(plant, filt, config, 0.5);
  std::string analytic_failure;
  try {
    return initial_point(plant, filt, config);
  } catch (const InfeasibleError& e) {
    analytic_failure = e.constraint();
    spdlog::debug("analytic start rejected ({}), falling back to phase I", e.what());
  }
  used_phase1 = true;
  std::optional<sdp::ValueMap> seed;
  try {
    seed = build_start(plant, filt, config).values;
  } catch (const std::exception&) {
  }
  const auto p1 = sdp::find_feasible_point(probe, config.solver, seed);
  if (p1.status == sdp::SolveStatus::Optimal) return p1.values;
  // The analytic start differs from a feasible point only in the budget-dependent
  // blocks, so its violation is the more informative certificate.
  failure = !analytic_failure.empty()       ? analytic_failure
            : !p1.failed_constraint.empty() ? p1.failed_constraint
                                            : p1.message;
  spdlog::debug("phase I failed: {} (worst block '{}')", p1.message, p1.failed_constraint);
  return std::nullopt;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Candidate {
  std::optional<SynthesisResult> result;
  AlphaAttempt attempt;
};

Candidate evaluate_alpha(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config,
                         double alpha, const sdp::ValueMap& start, bool used_phase1) {
  Candidate out;
  out.attempt.alpha = alpha;
  const auto problem = build_program(plant, filt, config, alpha);
  const auto sol = sdp::solve(problem, config.solver, start);
  out.attempt.status = sol.status;
  out.attempt.newton_steps = sol.newton_steps;
  if (sol.status != sdp::SolveStatus::Optimal) {
    out.attempt.note = sol.message;
    return out;
  }
  try {
    auto mech = extract_mechanism(plant, sol.values, config.solver.strict_margin);
    const auto ext = stationary_extended_covariance(plant, mech, filt);
    const auto leak = mutual_info_rate(plant, mech, filt, ext.error_block());
    const auto perf = evaluate_performance(plant, mech, config.epsilon);
    const auto cl = assemble_closed_loop(plant, mech, filt);

    SynthesisResult r(std::move(mech));
    r.mode = config.mode;
    r.epsilon = config.epsilon;
    r.alpha = alpha;
    r.bound_nats = leakage_bound(plant, filt, sol.values);
    r.exact_rate_nats = leak.rate_nats;
    r.uplink_nats = leak.uplink_nats;
    r.downlink_nats = leak.downlink_nats;
    r.constraint_slack = perf.slack;
    r.baseline_cost = perf.baseline_cost;
    r.distorted_cost = perf.distorted_cost;
    r.spectral_radius = spectral_radius(cl.Acal);
    r.sigma = sol.values.at(vars::kSigma);
    r.covariance_margin = linalg::min_eigenvalue(sym(r.sigma - ext.sigma));
    r.solver_status = sol.status;
    r.duality_gap = sol.duality_gap_estimate;
    r.min_constraint_eig = sol.min_constraint_eig;
    r.newton_steps = sol.newton_steps;
    r.used_phase1 = used_phase1;
    r.flags.sigma_v_positive = linalg::min_eigenvalue(r.mechanism.sigma_v()) > 0.0;
    r.flags.stable = r.spectral_radius < 1.0;
    r.flags.bound_dominates_rate = r.exact_rate_nats <= r.bound_nats + 1e-6;
    r.flags.covariance_dominates = r.covariance_margin >= -1e-7;
    r.flags.slack_nonnegative = r.constraint_slack >= -1e-6;

    out.attempt.exact_rate_nats = r.exact_rate_nats;
    out.attempt.bound_nats = r.bound_nats;
    out.attempt.slack = r.constraint_slack;
    if (!r.flags.bound_dominates_rate || !r.flags.covariance_dominates) {
      spdlog::warn("alpha {:.6g}: bound validation failed (rate {:.9g}, bound {:.9g}, covariance margin {:.3g})",
                   alpha, r.exact_rate_nats, r.bound_nats, r.covariance_margin);
    }
    if (!r.flags.slack_nonnegative) {
      out.attempt.note = fmt::format("budget exceeded by {:.3g}", -r.constraint_slack);
      return out;
    }
    out.result = std::move(r);
  } catch (const std::exception& e) {
    out.attempt.status = sdp::SolveStatus::NumericalFailure;
    out.attempt.note = e.what();
  }
  return out;
}

bool better(const SynthesisResult& a, const SynthesisResult& b) {
  const double tol = 1e-12 * std::max(1.0, std::abs(b.exact_rate_nats));
  if (a.exact_rate_nats < b.exact_rate_nats - tol) return true;
  if (a.exact_rate_nats > b.exact_rate_nats + tol) return false;
  if (a.constraint_slack != b.constraint_slack) return a.constraint_slack > b.constraint_slack;
  return a.alpha < b.alpha;
}

}  // namespace

sdp::ValueMap initial_point(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config) {
  config.validate();
  check_filter(plant, filt);
  auto c = build_start(plant, filt, config);
  const auto probe = build_program(plant, filt, config, 0.5);
  if (auto bad = violated_block(probe, c.values, config.solver.strict_margin)) {
    throw InfeasibleError(fmt::format("no strictly feasible start at epsilon = {}: '{}' violated", config.epsilon, *bad),
                          *bad);
  }
  return c.values;
}

PrivacyMechanism extract_mechanism(const PlantModel& plant, const sdp::ValueMap& solution, double strict_margin) {
  const auto n = plant.nx();
  const MatrixXd Pi13 = solution.at(vars::kPi1).bottomRightCorner(n, n);
  const MatrixXd& Pi21 = solution.at(vars::kPi21);
  Eigen::JacobiSVD<MatrixXd> svd(Pi13);
  const auto sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) throw NumericalError(fmt::format("Pi13 is ill-conditioned (condition number {:.3g})", cond));
  const MatrixXd G = Pi13.transpose().partialPivLu().solve(Pi21.transpose()).transpose();
  const MatrixXd Sv = sym(solution.at(vars::kSigmaVtilde) - G * plant.sigma_h() * G.transpose());
  const double min_sv = linalg::min_eigenvalue(Sv);
  if (min_sv < 0.5 * strict_margin) {
    throw NumericalError(
        fmt::format("extracted Sigma_v has min eigenvalue {:.3g}; solver tolerance too loose", min_sv));
  }
  return PrivacyMechanism(plant, G, Sv, sym(solution.at(vars::kSigmaZ)));
}

double leakage_bound(const PlantModel& plant, const AdversaryFilter& filt, const sdp::ValueMap& solution) {
  const MatrixXd& L = filt.L();
  const MatrixXd& B = plant.B();
  const MatrixXd& Svt = solution.at(vars::kSigmaVtilde);
  return -0.5 * linalg::logdet_spd(solution.at(vars::kPi3), "Pi3") -
         0.5 * linalg::logdet_spd(sym(L * Svt * L.transpose()), "L Sigma_vtilde L^T") -
         0.5 * linalg::logdet_spd(solution.at(vars::kPi4), "Pi4") -
         0.5 * linalg::logdet_spd(sym(B * solution.at(vars::kSigmaZ) * B.transpose() + plant.sigma_w()),
                                  "B Sigma_z B^T + Sigma_w");
}

SynthesisResult synthesize(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config) {
  config.validate();
  check_filter(plant, filt);
  std::string failure;
  bool used_phase1 = false;
  const auto start = feasible_start(plant, filt, config, failure, used_phase1);
  if (!start) {
    throw InfeasibleError(fmt::format("{} synthesis infeasible at epsilon = {}: no strictly feasible point ('{}')",
                                      to_string(config.mode), config.epsilon, failure),
                          failure);
  }
  std::vector<Candidate> candidates(config.alpha_grid.size());
  parallel_for(candidates.size(), config.threads, [&](std::size_t i) {
    candidates[i] = evaluate_alpha(plant, filt, config, config.alpha_grid[i], *start, used_phase1);
  });

  std::optional<SynthesisResult> best;
  std::vector<AlphaAttempt> attempts;
  for (auto& c : candidates) {
    attempts.push_back(c.attempt);
    spdlog::debug("{} eps {:.6g} alpha {:.6g}: {} rate {} steps {} {}", to_string(config.mode), config.epsilon,
                  c.attempt.alpha, sdp::to_string(c.attempt.status),
                  c.attempt.exact_rate_nats ? fmt::format("{:.9g}", *c.attempt.exact_rate_nats) : "-",
                  c.attempt.newton_steps, c.attempt.note);
    if (c.result && (!best || better(*c.result, *best))) best = std::move(c.result);
  }
  if (!best) {
    std::string detail;
    for (const auto& a : attempts) {
      detail += fmt::format("; alpha {:.4g}: {}{}", a.alpha, sdp::to_string(a.status), a.note.empty() ? "" : " (" + a.note + ")");
    }
    throw InfeasibleError(fmt::format("no alpha produced a valid mechanism{}", detail), "alpha search");
  }
  best->attempts = std::move(attempts);
  spdlog::info("{} eps {:.6g}: alpha {:.6g}, exact rate {:.9g} nats, bound {:.9g}, slack {:.3g}",
               to_string(config.mode), config.epsilon, best->alpha, best->exact_rate_nats, best->bound_nats,
               best->constraint_slack);
  return std::move(*best);
}

bool is_feasible(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config) {
  std::string failure;
  bool used_phase1 = false;
  return feasible_start(plant, filt, config, failure, used_phase1).has_value();
}

std::optional<double> min_feasible_epsilon(const PlantModel& plant, const AdversaryFilter& filt,
                                           const SynthesisConfig& config, double lo, double hi, double tolerance) {
  SynthesisConfig c = config;
  c.epsilon = hi;
  if (!is_feasible(plant, filt, c)) return std::nullopt;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    c.epsilon = mid;
    if (is_feasible(plant, filt, c)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::string SweepPoint::status() const {
  if (result) return "ok";
  std::string s = failure.empty() ? "failed" : failure;
  if (min_feasible_epsilon) s += fmt::format(";min_eps={:.17g}", *min_feasible_epsilon);
  return s;
}

std::vector<SweepPoint> sweep_epsilon(const PlantModel& plant, const AdversaryFilter& filt,
                                      const std::vector<double>& eps_list, const std::vector<MechanismMode>& modes,
                                      const SynthesisConfig& base) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon list is empty");
  if (!std::is_sorted(eps_list.begin(), eps_list.end())) {
    throw std::invalid_argument("epsilon list must be sorted ascending");
  }
  std::vector<SweepPoint> out;
  for (const auto mode : modes) {
    std::vector<SweepPoint> curve;
    for (double eps : eps_list) {
      SynthesisConfig c = base;
      c.epsilon = eps;
      c.mode = mode;
      SweepPoint pt;
      pt.epsilon = eps;
      pt.mode = mode;
      try {
        pt.result = synthesize(plant, filt, c);
      } catch (const InfeasibleError& e) {
        pt.failure = "infeasible";
        spdlog::info("{} eps {:.6g}: {}", to_string(mode), eps, e.what());
      } catch (const std::exception& e) {
        pt.failure = "numerical_failure";
        spdlog::warn("{} eps {:.6g}: {}", to_string(mode), eps, e.what());
      }
      curve.push_back(std::move(pt));
    }
    // Bracket each infeasible point by the next larger budget that succeeded.
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (curve[i].failure != "infeasible") continue;
      double hi = 0.0;
      for (std::size_t j = i + 1; j < curve.size(); ++j) {
        if (curve[j].result) {
          hi = curve[j].epsilon;
          break;
        }
      }
      if (hi <= curve[i].epsilon) hi = std::max(2.0 * curve[i].epsilon, curve[i].epsilon + 0.1);
      SynthesisConfig c = base;
      c.mode = mode;
      curve[i].min_feasible_epsilon = min_feasible_epsilon(plant, filt, c, curve[i].epsilon, hi);
    }
    for (auto& pt : curve) out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace privsynth
