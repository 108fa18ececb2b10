#include <doctest.h>

#include "helpers.hpp"
#include "privsynth/errors.hpp"
#include "privsynth/linalg.hpp"
#include "privsynth/perf.hpp"

using namespace privsynth;
using testutil::scalar;
using Eigen::MatrixXd;

TEST_CASE("baseline cost of an uncontrolled white-noise state") {
  const auto plant = testutil::scalar_plant(0.0, 1.0, 0.0, 1.0, 1.0);
  const auto c = baseline_lqr_cost(plant);
  CHECK(c.sigma_x(0, 0) == doctest::Approx(1.0));
  CHECK(c.cost == doctest::Approx(1.0));
}

TEST_CASE("baseline cost of a deadbeat loop") {
  const auto nearly_clean = testutil::scalar_plant(0.5, 1.0, -0.5, 1.0, 1e-12);
  CHECK(baseline_lqr_cost(nearly_clean).cost == doctest::Approx(1.25).epsilon(1e-10));
  // Sigma_x = 1 + 0.25 * 0.2, cost = Sigma_x + 0.25 (Sigma_x + 0.2).
  const auto noisy = testutil::scalar_plant(0.5, 1.0, -0.5, 1.0, 0.2);
  CHECK(baseline_lqr_cost(noisy).cost == doctest::Approx(1.3625).epsilon(1e-12));
}

TEST_CASE("distorted cost of the scalar example") {
  const auto plant = testutil::scalar_plant(0.5, 1.0, -0.5, 1.0, 1e-12);
  const PrivacyMechanism mech(plant, scalar(1.0), scalar(1.0), scalar(0.0));
  const auto d = distorted_lqr_cost(plant, mech);
  CHECK(d.sigma_xtilde(0, 0) == doctest::Approx(1.25).epsilon(1e-10));
  CHECK(d.cost == doctest::Approx(1.8125).epsilon(1e-10));
}

TEST_CASE("identity mechanism reproduces the baseline and keeps the full budget") {
  const auto cs = load_case_study();
  const auto id = PrivacyMechanism::identity(cs.plant);
  const double base = baseline_lqr_cost(cs.plant).cost;
  CHECK(std::abs(distorted_lqr_cost(cs.plant, id).cost - base) < 1e-9);
  CHECK(constraint_slack(cs.plant, id, 0.07) == doctest::Approx(0.07).epsilon(1e-8));
}

TEST_CASE("over-noisy mechanism has negative slack") {
  const auto cs = load_case_study();
  const PrivacyMechanism loud(cs.plant, MatrixXd::Identity(4, 4), MatrixXd::Identity(4, 4),
                              MatrixXd::Identity(3, 3));
  CHECK(constraint_slack(cs.plant, loud, 0.07) < 0.0);
  const auto rep = evaluate_performance(cs.plant, loud, 0.07);
  CHECK(rep.slack == doctest::Approx(0.07 - (rep.distorted_cost - rep.baseline_cost)));
}

TEST_CASE("destabilizing transform is rejected") {
  const auto cs = load_case_study();
  const PrivacyMechanism bad(cs.plant, 1e4 * MatrixXd::Identity(4, 4), 0.01 * MatrixXd::Identity(4, 4),
                             0.01 * MatrixXd::Identity(3, 3));
  CHECK_THROWS_AS(distorted_lqr_cost(cs.plant, bad), UnstableError);
}

TEST_CASE("distorted cost is monotone in the input noise") {
  const auto cs = load_case_study();
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd G = MatrixXd::Identity(4, 4) + 0.1 * testutil::random_matrix(rng, 4, 4);
    const MatrixXd Sv = testutil::random_spd(rng, 4, 0.01) * 0.1;
    const MatrixXd Sz = testutil::random_spd(rng, 3, 0.01) * 0.1;
    const MatrixXd dZ = testutil::random_spd(rng, 3, 0.0) * 0.1;
    const double a = distorted_lqr_cost(cs.plant, PrivacyMechanism(cs.plant, G, Sv, Sz)).cost;
    const double b = distorted_lqr_cost(cs.plant, PrivacyMechanism(cs.plant, G, Sv, Sz + dZ)).cost;
    CHECK(b >= a - 1e-12);
  }
}

TEST_CASE("distorted-state covariance equals the extended-state marginal") {
  const auto cs = load_case_study();
  std::mt19937_64 rng(29);
  const MatrixXd G = MatrixXd::Identity(4, 4) + 0.1 * testutil::random_matrix(rng, 4, 4);
  const PrivacyMechanism mech(cs.plant, G, 0.02 * MatrixXd::Identity(4, 4), 0.01 * MatrixXd::Identity(3, 3));
  const auto ext = stationary_extended_covariance(cs.plant, mech, cs.filter);
  CHECK((ext.state_block() - distorted_lqr_cost(cs.plant, mech).sigma_xtilde).norm() < 1e-9);
}
