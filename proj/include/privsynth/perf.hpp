#pragma once

#include <Eigen/Dense>

#include "privsynth/model.hpp"

namespace privsynth {

struct BaselineCost {
  double cost = 0.0;
  Eigen::MatrixXd sigma_x;
};

struct DistortedCost {
  double cost = 0.0;
  Eigen::MatrixXd sigma_xtilde;
};

struct PerformanceReport {
  double baseline_cost = 0.0;
  double distorted_cost = 0.0;
  double slack = 0.0;  // epsilon - (distorted - baseline)
  Eigen::MatrixXd sigma_x;
  Eigen::MatrixXd sigma_xtilde;
};

/// Long-run LQR cost of the undistorted loop. The control acts on the noisy
/// output, so C = tr(Q Sx) + tr(K^T R K (Sx + Sh)).
BaselineCost baseline_lqr_cost(const PlantModel& plant);

/// C~ = tr((Q + G^T K^T R K G) Sx~) + tr(K^T R K Sv~) + tr(R Sz), where Sx~ is the
/// stationary covariance of x~+ = (A + BKG) x~ + BK v~ + B z + w.
/// Throws UnstableError when A + B K G is not Schur stable.
DistortedCost distorted_lqr_cost(const PlantModel& plant, const PrivacyMechanism& mech);

double constraint_slack(const PlantModel& plant, const PrivacyMechanism& mech, double epsilon);

PerformanceReport evaluate_performance(const PlantModel& plant, const PrivacyMechanism& mech, double epsilon);

}  // namespace privsynth
