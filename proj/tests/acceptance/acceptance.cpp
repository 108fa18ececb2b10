// Acceptance run: one PASS/FAIL line per criterion; exit status 1 when any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <unistd.h>

#include "../unit/helpers.hpp"
#include "privsynth/config.hpp"
#include "privsynth/estimation.hpp"
#include "privsynth/infoflow.hpp"
#include "privsynth/linalg.hpp"
#include "privsynth/perf.hpp"
#include "privsynth/sdp/solver.hpp"
#include "privsynth/sim.hpp"
#include "privsynth/synthesis.hpp"

using namespace privsynth;
using Eigen::MatrixXd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, const std::function<Outcome()>& run) {
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  if (!o.pass) ++failures;
  std::cout << fmt::format("{} [{}] {}: {}", o.pass ? "PASS" : "FAIL", id, title, o.detail) << std::endl;
}

struct Fixture {
  RunConfig config;
  PlantModel plant;
  AdversaryFilter filter;
};

Fixture load_fixture() {
  auto config = load_config(PRIVSYNTH_CASE_STUDY_CONFIG);
  auto plant = config.build_plant();
  auto filter = config.build_filter(plant);
  return {std::move(config), std::move(plant), std::move(filter)};
}

// Sweep shared by the bound, constraint and curve criteria.
struct SweepRun {
  std::vector<SweepPoint> points;
  double seconds = 0.0;
};

const SynthesisResult* find(const SweepRun& s, MechanismMode mode, double eps) {
  for (const auto& p : s.points) {
    if (p.mode == mode && std::abs(p.epsilon - eps) < 1e-12 && p.result) return &*p.result;
  }
  return nullptr;
}

Outcome lyapunov_equivalence(const Fixture& f, const SweepRun& sweep) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> radius(0.1, 0.95);
  double worst = 0.0;
  auto compare = [&](const MatrixXd& A, const MatrixXd& B) {
    const auto direct = solve_lyapunov_direct(A, B);
    const auto iter = solve_lyapunov_iterative(A, B, MatrixXd::Zero(A.rows(), A.cols()));
    worst = std::max(worst, (direct.sigma - iter.solution.sigma).norm());
  };
  for (int i = 0; i < 50; ++i) {
    const int n = size(rng);
    compare(testutil::random_stable(rng, n, radius(rng)), testutil::random_spd(rng, n));
  }
  const auto base = assemble_closed_loop(f.plant, PrivacyMechanism::identity(f.plant), f.filter);
  compare(base.Acal, base.Bcal);
  if (const auto* r = find(sweep, MechanismMode::FullG, 0.07)) {
    const auto cl = assemble_closed_loop(f.plant, r->mechanism, f.filter);
    compare(cl.Acal, cl.Bcal);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 5.0,
          fmt::format("max ||direct - iterative||_F = {:.3g} (< 1e-9) over 52 systems, {:.2f} s (< 5 s)", worst, secs)};
}

Outcome leakage_equivalence(const Fixture& f, const SweepRun& sweep) {
  const auto t0 = Clock::now();
  std::vector<std::pair<std::string, PrivacyMechanism>> mechs{{"identity", PrivacyMechanism::identity(f.plant)}};
  for (const auto mode : {MechanismMode::FullG, MechanismMode::IdentityG}) {
    const auto* r = find(sweep, mode, 0.07);
    if (!r) return {false, fmt::format("no {} mechanism at epsilon = 0.07", to_string(mode))};
    mechs.emplace_back(to_string(mode), r->mechanism);
  }
  double worst = 0.0;
  std::string parts;
  for (const auto& [name, m] : mechs) {
    const double rate = mutual_info_rate(f.plant, m, f.filter).rate_nats;
    const auto fh = finite_horizon_mutual_info(f.plant, m, f.filter, 500);
    const double rel = std::abs(fh.per_step.back() - rate) / std::abs(rate);
    worst = std::max(worst, rel);
    parts += fmt::format(" {} {:.3g};", name, rel);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 10.0,
          fmt::format("relative error of the k = 500 term:{} max {:.3g} (< 1e-6), {:.2f} s (< 10 s)", parts, worst,
                      secs)};
}

Outcome solver_examples(const Fixture& f) {
  using namespace sdp;
  const auto t0 = Clock::now();
  std::vector<std::string> bad;
  auto rel = [](double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); };

  {
    Problem p;
    const auto s = p.add_variable("Sigma", 1, 1, Structure::Symmetric);
    p.add_linear_objective(trace(AffineExpr(s)));
    p.add_lmi("floor", AffineExpr(s) - MatrixXd::Identity(1, 1));
    const auto sol = solve(p);
    if (sol.status != SolveStatus::Optimal || rel(sol.values.at("Sigma")(0, 0), 1.0) > 1e-6) bad.push_back("floor");
  }
  {
    Problem p;
    const auto s = p.add_variable("sigma", 1, 1, Structure::Symmetric);
    p.add_linear_objective(AffineExpr(s));
    p.add_scalar_inequality("lyapunov", AffineExpr(s) - 0.25 * AffineExpr(s) - MatrixXd::Identity(1, 1));
    const auto sol = solve(p);
    if (sol.status != SolveStatus::Optimal || rel(sol.values.at("sigma")(0, 0), 4.0 / 3.0) > 1e-6) {
      bad.push_back("scalar lyapunov");
    }
  }
  {
    Problem p;
    const auto P = p.add_variable("P", 2, 2, Structure::Symmetric);
    p.add_logdet_objective("P", P, 1.0);
    p.add_lmi("upper", 2.0 * AffineExpr::identity(2) - AffineExpr(P));
    p.add_lmi("lower", P, true);
    const auto sol = solve(p);
    const double err = (sol.values.at("P") - 2.0 * MatrixXd::Identity(2, 2)).norm() / 2.0;
    if (sol.status != SolveStatus::Optimal || err > 1e-6 || rel(sol.objective, -2.0 * std::numbers::ln2) > 1e-6) {
      bad.push_back("maxdet box");
    }
  }
  {
    const PrivacyMechanism m(f.plant, MatrixXd::Identity(4, 4), MatrixXd::Zero(4, 4), 1e-3 * MatrixXd::Identity(3, 3));
    const auto cl = assemble_closed_loop(f.plant, m, f.filter);
    Problem p;
    const auto S = p.add_variable("Sigma", 8, 8, Structure::Symmetric);
    p.add_linear_objective(trace(AffineExpr(S)));
    p.add_lmi("lyapunov", block2x2_symmetric(AffineExpr(S) - cl.Bcal, cl.Acal * AffineExpr(S), AffineExpr(S)));
    const auto sol = solve(p);
    const double exact = solve_lyapunov_direct(cl.Acal, cl.Bcal).sigma.trace();
    if (sol.status != SolveStatus::Optimal || rel(sol.values.at("Sigma").trace(), exact) > 1e-6) {
      bad.push_back("trace-minimal Lyapunov LMI");
    }
  }
  const double secs = seconds_since(t0);
  std::string failed;
  for (const auto& b : bad) failed += " " + b;
  return {bad.empty() && secs < 10.0,
          fmt::format("4 examples, {} off by more than 1e-6{}, {:.2f} s (< 10 s)", bad.size(), failed, secs)};
}

Outcome bound_validity(const Fixture& f, const SweepRun& sweep) {
  int checked = 0;
  double worst_gap = -1e300;
  double worst_cov = 1e300;
  for (const auto& p : sweep.points) {
    if (!p.result) continue;
    const auto& r = *p.result;
    const double rate = mutual_info_rate(f.plant, r.mechanism, f.filter).rate_nats;
    const MatrixXd exact = stationary_extended_covariance(f.plant, r.mechanism, f.filter).sigma;
    worst_gap = std::max(worst_gap, rate - r.bound_nats);
    worst_cov = std::min(worst_cov, linalg::min_eigenvalue(linalg::symmetrize(r.sigma - exact)));
    ++checked;
  }
  return {checked > 0 && worst_gap <= 1e-6 && worst_cov >= -1e-7,
          fmt::format("{} mechanisms: max(rate - bound) = {:.4g} (<= 1e-6), min eig(Sigma - Sigma_zeta) = {:.3g} "
                      "(>= -1e-7)",
                      checked, worst_gap, worst_cov)};
}

Outcome constraint_satisfaction(const Fixture& f, const SweepRun& sweep) {
  const double base = baseline_lqr_cost(f.plant).cost;
  int checked = 0;
  double worst = -1e300;
  for (const auto& p : sweep.points) {
    if (!p.result) continue;
    const double excess = distorted_lqr_cost(f.plant, p.result->mechanism).cost - base - p.epsilon;
    worst = std::max(worst, excess);
    ++checked;
  }
  const auto* r = find(sweep, MechanismMode::FullG, 0.07);
  if (!r) return {false, "no full_G mechanism at epsilon = 0.07"};
  const auto t = simulate(f.plant, r->mechanism, f.filter, 10000, f.config.simulation.seed);
  const auto emp = empirical_lqr_cost(t, f.plant.Q(), f.plant.R());
  const double closed = distorted_lqr_cost(f.plant, r->mechanism).cost;
  const double z = std::abs(emp.mean - closed) / emp.standard_error;
  return {checked > 0 && worst <= 1e-6 && z <= 3.0,
          fmt::format("{} points: max(C~ - C - eps) = {:.3g} (<= 1e-6); Monte-Carlo cost {:.6g} vs closed form "
                      "{:.6g} at N = 1e4 is {:.2f} SE (<= 3)",
                      checked, worst, emp.mean, closed, z)};
}

Outcome curve_shape(const SweepRun& sweep) {
  double worst_increase = -1e300;
  double worst_order = -1e300;
  for (const auto mode : {MechanismMode::FullG, MechanismMode::IdentityG}) {
    std::optional<double> prev;
    for (const auto& p : sweep.points) {
      if (p.mode != mode || !p.result) continue;
      if (prev) worst_increase = std::max(worst_increase, p.result->exact_rate_nats - *prev);
      prev = p.result->exact_rate_nats;
    }
  }
  for (const auto& p : sweep.points) {
    if (p.mode != MechanismMode::FullG || !p.result) continue;
    if (const auto* id = find(sweep, MechanismMode::IdentityG, p.epsilon)) {
      worst_order = std::max(worst_order, p.result->exact_rate_nats - id->exact_rate_nats);
    }
  }
  const auto* r = find(sweep, MechanismMode::FullG, 0.07);
  const double at07 = r ? r->exact_rate_nats : std::numeric_limits<double>::infinity();
  const bool a = worst_increase <= 1e-6;
  const bool b = worst_order <= 1e-6;
  const bool c = at07 <= 0.05;
  const bool fast = sweep.seconds < 300.0;
  return {a && b && c && fast,
          fmt::format("(a) max rate increase {:.3g} <= 1e-6: {}; (b) max full - identity {:.4g} <= 1e-6: {}; "
                      "(c) full_G rate at eps 0.07 = {:.6g} nats <= 0.05: {}; sweep {:.1f} s (< 300 s)",
                      worst_increase, a ? "pass" : "fail", worst_order, b ? "pass" : "fail", at07,
                      c ? "pass" : "fail", sweep.seconds)};
}

Outcome adversary_degradation(const Fixture& f, const SweepRun& sweep) {
  const auto t0 = Clock::now();
  const auto* r = find(sweep, MechanismMode::FullG, 0.07);
  if (!r) return {false, "no full_G mechanism at epsilon = 0.07"};
  const auto seed = f.config.simulation.seed;
  const auto with = summarize_simulation(f.plant, r->mechanism, f.filter, 10000, seed, 10);
  const auto without = summarize_simulation(f.plant, PrivacyMechanism::identity(f.plant), f.filter, 10000, seed, 10);
  const double ratio = with.mse / without.mse;
  const double secs = seconds_since(t0);
  return {ratio >= 2.0 && secs < 120.0,
          fmt::format("MSE {:.5g} with vs {:.5g} without, ratio {:.3g} (>= 2) over 10 x 1e4 steps, {:.2f} s (< 120 s)",
                      with.mse, without.mse, ratio, secs)};
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("privsynth_acceptance_{}", ::getpid());
  fs::remove_all(root);
  auto run = [&](const std::string& args) {
    const auto cmd = fmt::format("\"{}\" {} --config \"{}\" > /dev/null 2>&1", PRIVSYNTH_CLI_PATH, args,
                                 PRIVSYNTH_CASE_STUDY_CONFIG);
    return std::system(cmd.c_str());
  };
  for (const char* tag : {"a", "b"}) {
    const auto dir = (root / tag).string();
    if (run(fmt::format("synth --mode full --epsilon 0.07 --out \"{}\"", dir)) != 0) return {false, "synth failed"};
    if (run(fmt::format("simulate --seed 7 --mechanism \"{}\" --out \"{}\"", (root / tag / "synth_full_G.json").string(),
                        dir)) != 0) {
      return {false, "simulate failed"};
    }
  }
  std::string detail;
  bool same = true;
  for (const char* name : {"synth_full_G.json", "simulate.json"}) {
    const auto a = read_bytes(root / "a" / name);
    const auto b = read_bytes(root / "b" / name);
    const bool eq = !a.empty() && a == b;
    same = same && eq;
    detail += fmt::format(" {} ({} bytes) {};", name, a.size(), eq ? "identical" : "differs");
  }
  fs::remove_all(root);
  return {same, "two runs of synth and simulate:" + detail};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const auto f = load_fixture();

  SweepRun sweep;
  {
    const auto t0 = Clock::now();
    sweep.points = sweep_epsilon(f.plant, f.filter, f.config.synthesis.epsilon_list,
                                 {MechanismMode::FullG, MechanismMode::IdentityG},
                                 f.config.synthesis_config(0.0, MechanismMode::FullG));
    sweep.seconds = seconds_since(t0);
  }

  report("1", "Lyapunov oracle equivalence", [&] { return lyapunov_equivalence(f, sweep); });
  report("2", "Leakage oracle equivalence", [&] { return leakage_equivalence(f, sweep); });
  report("3", "Solver correctness", [&] { return solver_examples(f); });
  report("4", "Bound validity", [&] { return bound_validity(f, sweep); });
  report("5", "Constraint satisfaction", [&] { return constraint_satisfaction(f, sweep); });
  report("6", "Rate curve shape on the case study", [&] { return curve_shape(sweep); });
  report("7", "Adversary degradation", [&] { return adversary_degradation(f, sweep); });
  report("8", "Determinism", [&] { return determinism(); });

  std::cout << fmt::format("{} of 8 criteria passed", 8 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
