#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "privsynth/errors.hpp"
#include "privsynth/perf.hpp"
#include "privsynth/sim.hpp"
#include "privsynth/synthesis.hpp"

using namespace privsynth;
using Eigen::MatrixXd;

TEST_CASE("noiseless loop started at the origin stays at zero") {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  const MatrixXd A = 0.5 * MatrixXd::Identity(2, 2);
  const MatrixXd B = MatrixXd::Identity(2, 2);
  const MatrixXd K = -0.2 * MatrixXd::Identity(2, 2);
  const PlantModel plant(A, B, K, I, I, I, I, I);
  const auto filt = AdversaryFilter::for_gain(plant, 0.5 * MatrixXd::Identity(2, 2));
  const auto t = simulate(plant, PrivacyMechanism::identity(plant), filt, 200, 7, 0, 0.0);
  CHECK(t.states.norm() == 0.0);
  CHECK(t.estimates.norm() == 0.0);
  CHECK(t.outputs.norm() == 0.0);
  CHECK(t.inputs.norm() == 0.0);
  CHECK(adversary_mse(t) == 0.0);
  CHECK(empirical_lqr_cost(t, plant.Q(), plant.R()).mean == 0.0);
}

TEST_CASE("traces are reproducible per seed and replication") {
  const auto cs = load_case_study();
  const auto id = PrivacyMechanism::identity(cs.plant);
  const auto a = simulate(cs.plant, id, cs.filter, 500, 11);
  const auto b = simulate(cs.plant, id, cs.filter, 500, 11);
  CHECK(a.states == b.states);
  CHECK(a.estimates == b.estimates);
  CHECK(a.inputs == b.inputs);
  const auto c = simulate(cs.plant, id, cs.filter, 500, 11, 1);
  CHECK(a.states != c.states);
  CHECK(a.states.cols() == 500);
  CHECK(a.inputs.rows() == 3);
}

TEST_CASE("destabilizing mechanisms are rejected") {
  const auto cs = load_case_study();
  const PrivacyMechanism loud(cs.plant, 1e4 * MatrixXd::Identity(4, 4), MatrixXd::Zero(4, 4), MatrixXd::Zero(3, 3));
  CHECK_THROWS_AS(simulate(cs.plant, loud, cs.filter, 10, 1), UnstableError);
}

TEST_CASE("identity mechanism matches the stationary closed forms") {
  const auto cs = load_case_study();
  const auto id = PrivacyMechanism::identity(cs.plant);
  const auto t = simulate(cs.plant, id, cs.filter, 100000, 1);
  const auto ext = stationary_extended_covariance(cs.plant, id, cs.filter);
  const MatrixXd sx = ext.state_block();
  CHECK((empirical_state_covariance(t) - sx).norm() / sx.norm() < 0.05);

  const MatrixXd ef = stationary_filtered_error(cs.plant, id, cs.filter, ext);
  CHECK(adversary_mse(t) == doctest::Approx(ef.trace()).epsilon(0.05));
  CHECK((empirical_error_covariance(t) - ef).norm() / ef.norm() < 0.05);
  CHECK(prediction_mse(t) == doctest::Approx(ext.error_block().trace()).epsilon(0.05));

  const auto cost = empirical_lqr_cost(t, cs.plant.Q(), cs.plant.R());
  CHECK(cost.batches == 30);
  CHECK(cost.standard_error > 0.0);
  CHECK(std::abs(cost.mean - baseline_lqr_cost(cs.plant).cost) < 3.0 * cost.standard_error);
}

TEST_CASE("sample covariance error shrinks with the horizon") {
  const auto cs = load_case_study();
  const auto id = PrivacyMechanism::identity(cs.plant);
  const MatrixXd sx = stationary_extended_covariance(cs.plant, id, cs.filter).state_block();
  double previous = 1e300;
  for (const int n : {1000, 10000, 100000}) {
    double err = 0.0;
    for (std::uint64_t r = 0; r < 8; ++r) {
      err += (empirical_state_covariance(simulate(cs.plant, id, cs.filter, n, 5, r)) - sx).norm();
    }
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("synthesized mechanism matches its closed-form covariance and cost") {
  const auto cs = load_case_study();
  SynthesisConfig c;
  c.alpha_grid = {0.99};
  const auto r = synthesize(cs.plant, cs.filter, c);
  const auto t = simulate(cs.plant, r.mechanism, cs.filter, 100000, 3);
  const auto d = distorted_lqr_cost(cs.plant, r.mechanism);
  CHECK((empirical_state_covariance(t) - d.sigma_xtilde).norm() / d.sigma_xtilde.norm() < 0.05);
  const auto cost = empirical_lqr_cost(t, cs.plant.Q(), cs.plant.R());
  CHECK(std::abs(cost.mean - d.cost) < 3.0 * cost.standard_error);
}

TEST_CASE("burn-in is validated") {
  const auto cs = load_case_study();
  const auto t = simulate(cs.plant, PrivacyMechanism::identity(cs.plant), cs.filter, 20, 1);
  CHECK(default_burn_in(20) == 2);
  CHECK_THROWS(adversary_mse(t, 20));
  CHECK_THROWS(adversary_mse(t, -1));
  CHECK_NOTHROW(adversary_mse(t, 0));
}

TEST_CASE("replications are ordered and independent of thread count") {
  const auto cs = load_case_study();
  const auto id = PrivacyMechanism::identity(cs.plant);
  const auto one = run_replications(cs.plant, id, cs.filter, 2000, 9, 4, 1);
  const auto many = run_replications(cs.plant, id, cs.filter, 2000, 9, 4, 3);
  REQUIRE(one.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(one[i].replication == i);
    CHECK(one[i].mse == many[i].mse);
    CHECK(one[i].cost.mean == many[i].cost.mean);
  }
  CHECK(one[0].mse != one[1].mse);
}

TEST_CASE("trace export writes one row per step") {
  const auto cs = load_case_study();
  const auto t = simulate(cs.plant, PrivacyMechanism::identity(cs.plant), cs.filter, 25, 1);
  const std::string path = "privsynth_trace_test.csv";
  write_trace_csv(t, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line.rfind("step,x1,x2,x3,x4,xhat1", 0) == 0);
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 25);
  std::remove(path.c_str());
}

TEST_CASE("simulation summary averages replications") {
  const auto cs = load_case_study();
  const auto id = PrivacyMechanism::identity(cs.plant);
  const auto s = summarize_simulation(cs.plant, id, cs.filter, 10000, 1, 4);
  REQUIRE(s.replications.size() == 4);
  double mse = 0.0;
  for (const auto& r : s.replications) mse += r.mse / 4.0;
  CHECK(s.mse == doctest::Approx(mse).epsilon(1e-14));
  CHECK(s.closed_form_cost == doctest::Approx(baseline_lqr_cost(cs.plant).cost).epsilon(1e-9));
  CHECK(s.mse == doctest::Approx(s.closed_form_mse).epsilon(0.1));
  CHECK(s.cost_within_3se());
}
