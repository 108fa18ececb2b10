#include <doctest.h>

#include <string>

#include "helpers.hpp"
#include "privsynth/errors.hpp"
#include "privsynth/infoflow.hpp"
#include "privsynth/linalg.hpp"
#include "privsynth/perf.hpp"
#include "privsynth/synthesis.hpp"

using namespace privsynth;
using Eigen::MatrixXd;

namespace {

SynthesisConfig short_grid(double eps, MechanismMode mode) {
  SynthesisConfig c;
  c.epsilon = eps;
  c.mode = mode;
  c.alpha_grid = {0.5, 0.99};
  return c;
}

}  // namespace

TEST_CASE("synthesis program has the expected structure") {
  const auto cs = load_case_study();
  const auto full = build_program(cs.plant, cs.filter, short_grid(0.07, MechanismMode::FullG), 0.5);
  CHECK(full.variables().size() == 8);
  CHECK(full.num_psd_blocks() == 7);
  CHECK(full.num_scalar_inequalities() == 1);
  CHECK(full.equalities().empty());
  const auto id = build_program(cs.plant, cs.filter, short_grid(0.07, MechanismMode::IdentityG), 0.5);
  CHECK(id.equalities().size() == 1);
}

TEST_CASE("default grids") {
  const auto a = default_alpha_grid();
  REQUIRE(a.size() == 15);
  CHECK(a.front() == doctest::Approx(0.01));
  CHECK(a.back() == doctest::Approx(0.99));
  CHECK(a[7] == doctest::Approx(0.5));
  const auto e = default_epsilon_list();
  REQUIRE(e.size() == 20);
  CHECK(e.front() == doctest::Approx(0.005));
  CHECK(e.back() == doctest::Approx(0.1));
  CHECK(parse_mode("identity") == MechanismMode::IdentityG);
  CHECK(parse_mode("full_G") == MechanismMode::FullG);
  CHECK_THROWS(parse_mode("diagonal"));
}

TEST_CASE("analytic start point is strictly feasible") {
  const auto cs = load_case_study();
  const auto c = short_grid(0.07, MechanismMode::FullG);
  const auto p = build_program(cs.plant, cs.filter, c, 0.5);
  const auto report = sdp::check_solution(p, initial_point(cs.plant, cs.filter, c));
  CHECK(report.ok);
  CHECK(report.min_constraint_eig > 0.0);
}

TEST_CASE("mechanism extraction from hand-built decision values") {
  const auto cs = load_case_study();
  const MatrixXd I = MatrixXd::Identity(4, 4);
  MatrixXd Pi1 = MatrixXd::Identity(8, 8);
  sdp::ValueMap v{{vars::kPi1, Pi1},
                  {vars::kPi21, 2.0 * I},
                  {vars::kSigmaVtilde, 5.0 * cs.plant.sigma_h()},
                  {vars::kSigmaZ, 0.1 * MatrixXd::Identity(3, 3)}};
  const auto m = extract_mechanism(cs.plant, v);
  CHECK((m.G() - 2.0 * I).norm() < 1e-12);
  CHECK((m.sigma_v() - cs.plant.sigma_h()).norm() < 1e-12);
  CHECK((m.sigma_z() - 0.1 * MatrixXd::Identity(3, 3)).norm() == 0.0);

  v[vars::kSigmaVtilde] = 3.0 * cs.plant.sigma_h();
  CHECK_THROWS_AS(extract_mechanism(cs.plant, v), NumericalError);
}

TEST_CASE("zero budget is infeasible and names the control cost constraint") {
  const auto cs = load_case_study();
  try {
    synthesize(cs.plant, cs.filter, short_grid(0.0, MechanismMode::FullG));
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.constraint() == blocks::kBudget);
  }
  CHECK_FALSE(is_feasible(cs.plant, cs.filter, short_grid(0.0, MechanismMode::FullG)));
}

TEST_CASE("identity mode keeps G = I and certifies its bound") {
  const auto cs = load_case_study();
  const auto r = synthesize(cs.plant, cs.filter, short_grid(0.07, MechanismMode::IdentityG));
  CHECK((r.mechanism.G() - MatrixXd::Identity(4, 4)).norm() < 1e-8);
  CHECK(r.flags.all());
  CHECK(r.exact_rate_nats <= r.bound_nats + 1e-6);
  CHECK(r.constraint_slack >= -1e-6);
}

TEST_CASE("reported metrics agree with the closed forms") {
  const auto cs = load_case_study();
  const auto r = synthesize(cs.plant, cs.filter, short_grid(0.07, MechanismMode::FullG));
  const auto leak = mutual_info_rate(cs.plant, r.mechanism, cs.filter);
  CHECK(r.exact_rate_nats == doctest::Approx(leak.rate_nats).epsilon(1e-12));
  CHECK(r.uplink_nats + r.downlink_nats == doctest::Approx(r.exact_rate_nats).epsilon(1e-12));
  CHECK(r.constraint_slack == doctest::Approx(constraint_slack(cs.plant, r.mechanism, 0.07)).epsilon(1e-10));
  CHECK(r.flags.sigma_v_positive);
}

TEST_CASE("a larger budget never increases the certified rate") {
  const auto cs = load_case_study();
  const auto tight = synthesize(cs.plant, cs.filter, short_grid(0.01, MechanismMode::FullG));
  const auto loose = synthesize(cs.plant, cs.filter, short_grid(10.0, MechanismMode::FullG));
  CHECK(loose.exact_rate_nats <= tight.exact_rate_nats + 1e-6);
  const auto identity = synthesize(cs.plant, cs.filter, short_grid(0.01, MechanismMode::IdentityG));
  CHECK(tight.exact_rate_nats <= identity.exact_rate_nats + 1e-6);
}

TEST_CASE("minimum feasible budget is bracketed") {
  const auto cs = load_case_study();
  const auto c = short_grid(0.0, MechanismMode::IdentityG);
  const auto eps = min_feasible_epsilon(cs.plant, cs.filter, c, 0.0, 0.1, 1e-4);
  REQUIRE(eps.has_value());
  CHECK(*eps > 0.0);
  auto probe = c;
  probe.epsilon = *eps;
  CHECK(is_feasible(cs.plant, cs.filter, probe));
  probe.epsilon = *eps - 2e-4;
  CHECK_FALSE(is_feasible(cs.plant, cs.filter, probe));
}
