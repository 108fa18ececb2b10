#include "privsynth/perf.hpp"

#include <fmt/format.h>

#include "privsynth/errors.hpp"
#include "privsynth/estimation.hpp"
#include "privsynth/linalg.hpp"

namespace privsynth {

using Eigen::MatrixXd;

BaselineCost baseline_lqr_cost(const PlantModel& plant) {
  const MatrixXd BK = plant.B() * plant.K();
  const MatrixXd closed = plant.A() + BK;
  const MatrixXd noise = BK * plant.sigma_h() * BK.transpose() + plant.sigma_w();
  BaselineCost out;
  out.sigma_x = solve_lyapunov_direct(closed, linalg::symmetrize(noise)).sigma;
  const MatrixXd KRK = plant.K().transpose() * plant.R() * plant.K();
  out.cost = (plant.Q() * out.sigma_x).trace() + (KRK * (out.sigma_x + plant.sigma_h())).trace();
  return out;
}

DistortedCost distorted_lqr_cost(const PlantModel& plant, const PrivacyMechanism& mech) {
  const MatrixXd BK = plant.B() * plant.K();
  const MatrixXd closed = plant.A() + BK * mech.G();
  const double rho = spectral_radius(closed);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(
        fmt::format("candidate mechanism destabilizes the loop: spectral radius of A + B K G is {:.12g}", rho), rho);
  }
  const MatrixXd noise = BK * mech.sigma_vtilde() * BK.transpose() +
                         plant.B() * mech.sigma_z() * plant.B().transpose() + plant.sigma_w();
  DistortedCost out;
  out.sigma_xtilde = solve_lyapunov_direct(closed, linalg::symmetrize(noise)).sigma;
  const MatrixXd KRK = plant.K().transpose() * plant.R() * plant.K();
  const MatrixXd state_weight = plant.Q() + mech.G().transpose() * KRK * mech.G();
  out.cost = (state_weight * out.sigma_xtilde).trace() + (KRK * mech.sigma_vtilde()).trace() +
             (plant.R() * mech.sigma_z()).trace();
  return out;
}

double constraint_slack(const PlantModel& plant, const PrivacyMechanism& mech, double epsilon) {
  return epsilon - (distorted_lqr_cost(plant, mech).cost - baseline_lqr_cost(plant).cost);
}

PerformanceReport evaluate_performance(const PlantModel& plant, const PrivacyMechanism& mech, double epsilon) {
  auto base = baseline_lqr_cost(plant);
  auto dist = distorted_lqr_cost(plant, mech);
  PerformanceReport r;
  r.baseline_cost = base.cost;
  r.distorted_cost = dist.cost;
  r.slack = epsilon - (dist.cost - base.cost);
  r.sigma_x = std::move(base.sigma_x);
  r.sigma_xtilde = std::move(dist.sigma_xtilde);
  return r;
}

}  // namespace privsynth
