#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "privsynth/model.hpp"

namespace privsynth {

/// One sampled trajectory; column k holds step k + 1.
struct SimulationTrace {
  Eigen::MatrixXd states;       // x~_k
  Eigen::MatrixXd estimates;    // filtered x^_k
  Eigen::MatrixXd predictions;  // x^_{k|k-1}
  Eigen::MatrixXd outputs;      // y~_k
  Eigen::MatrixXd inputs;       // u~_k
  int horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
};

/// Noise sources, each drawn from its own generator seeded by (seed, replication, stream).
enum class NoiseStream : std::uint64_t { ProcessW = 1, MeasurementH = 2, OutputV = 3, InputZ = 4, InitialX = 5 };

/// Samples x_1 ~ N(0, Sigma_x1) and runs the distorted loop
///   y~ = G(x~ + h) + v,  u = K y~,  u~ = u + z,  x~+ = A x~ + B u~ + w
/// with the adversary filter x^_{k|k-1} = A x^_{k-1} + B u_{k-1}, x^_k = x^_{k|k-1} + L(y~_k - x^_{k|k-1}).
/// The filter uses the control the station computed (u_{k-1} = K y~_{k-1}); the downlink
/// noise z is unknown to it. noise_scale multiplies every sampled draw (0 gives the noiseless
/// loop from the origin). Throws UnstableError when A + B K G is not Schur stable.
SimulationTrace simulate(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                         int horizon, std::uint64_t seed, std::uint64_t replication = 0, double noise_scale = 1.0);

/// Default burn-in: 10% of the horizon.
int default_burn_in(int horizon);

/// (1 / (N - B)) sum_{k > B} ||x~_k - x^_k||^2.
double adversary_mse(const SimulationTrace& trace, std::optional<int> burn_in = std::nullopt);
/// Same with the one-step prediction x^_{k|k-1}.
double prediction_mse(const SimulationTrace& trace, std::optional<int> burn_in = std::nullopt);

struct EmpiricalCost {
  double mean = 0.0;
  double standard_error = 0.0;  // batch means
  int batches = 0;
};

/// Time average of x~^T Q x~ + u~^T R u~ after burn-in.
EmpiricalCost empirical_lqr_cost(const SimulationTrace& trace, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                 std::optional<int> burn_in = std::nullopt, int batches = 30);

/// Sample second moment of x~ after burn-in.
Eigen::MatrixXd empirical_state_covariance(const SimulationTrace& trace, std::optional<int> burn_in = std::nullopt);
/// Sample second moment of the filtered error x~ - x^ after burn-in.
Eigen::MatrixXd empirical_error_covariance(const SimulationTrace& trace, std::optional<int> burn_in = std::nullopt);

/// Columnar text: step, x~, x^, x^_pred, y~, u~ (one row per step).
void write_trace_csv(const SimulationTrace& trace, const std::string& path);

struct ReplicationMetrics {
  std::uint64_t replication = 0;
  double mse = 0.0;
  double prediction_mse = 0.0;
  EmpiricalCost cost;
};

/// Independent replications 0..count-1 with a shared seed; results ordered by replication.
std::vector<ReplicationMetrics> run_replications(const PlantModel& plant, const PrivacyMechanism& mech,
                                                 const AdversaryFilter& filt, int horizon, std::uint64_t seed,
                                                 int count, int threads = 1);

/// Replication averages next to the closed forms they estimate.
struct SimulationSummary {
  std::vector<ReplicationMetrics> replications;
  double mse = 0.0;             // mean filtered MSE
  double prediction_mse = 0.0;  // mean one-step prediction MSE
  double cost = 0.0;            // mean empirical cost
  double cost_standard_error = 0.0;  // sqrt(sum SE_r^2) / R
  double closed_form_mse = 0.0;             // tr of the stationary filtered error
  double closed_form_prediction_mse = 0.0;  // tr of the stationary prediction error
  double closed_form_cost = 0.0;
  /// |cost - closed_form_cost| <= 3 cost_standard_error.
  bool cost_within_3se() const;
};

SimulationSummary summarize_simulation(const PlantModel& plant, const PrivacyMechanism& mech,
                                       const AdversaryFilter& filt, int horizon, std::uint64_t seed,
                                       int replications, int threads = 1);

}  // namespace privsynth
