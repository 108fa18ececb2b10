#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "privsynth/model.hpp"

namespace privsynth {

/// Information leakage between the distorted state and the adversary's estimate,
/// in nats per step. rate = uplink + downlink.
struct LeakageReport {
  double rate_nats = 0.0;
  double uplink_nats = 0.0;
  double downlink_nats = 0.0;
  std::optional<double> bound_nats;
};

/// Stationary rate from a prediction-error covariance Sigma_e:
///   uplink   = 1/2 logdet(L G Se G^T L^T + L Sv~ L^T) - 1/2 logdet(L Sv~ L^T)
///   downlink = 1/2 logdet(B K Sv~ K^T B^T + B Sz B^T + Sw) - 1/2 logdet(B Sz B^T + Sw)
/// Throws NotPositiveDefiniteError when L Sv~ L^T is singular (infinite leakage).
LeakageReport mutual_info_rate(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                               const Eigen::MatrixXd& sigma_e);

/// Same, with Sigma_e taken from the exact extended Lyapunov solution.
LeakageReport mutual_info_rate(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt);

struct FiniteHorizonLeakage {
  double total_nats = 0.0;
  std::vector<double> per_step;  // k = 1..N
  /// total / (N + 1), the normalization of the rate definition.
  double normalized_nats = 0.0;
};

/// Sums the per-step leakage along the covariance recursion of the extended state,
/// starting from sigma_zeta_1 (default blockdiag(Sigma_x1, Sigma_x1)).
FiniteHorizonLeakage finite_horizon_mutual_info(const PlantModel& plant, const PrivacyMechanism& mech,
                                                const AdversaryFilter& filt, int horizon,
                                                const std::optional<Eigen::MatrixXd>& sigma_zeta_1 = std::nullopt);

/// The leakage expression evaluated with N_e Sigma N_e^T in place of Sigma_e.
/// An upper bound on the rate whenever Sigma dominates the stationary covariance.
double leakage_upper_bound(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                           const Eigen::MatrixXd& sigma);

}  // namespace privsynth
