#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "privsynth/model.hpp"
#include "privsynth/sdp/solver.hpp"

namespace privsynth {

enum class MechanismMode { FullG, IdentityG };

std::string to_string(MechanismMode m);
/// Accepts "full"/"full_G" and "identity"/"identity_G".
MechanismMode parse_mode(const std::string& s);

/// Logit-spaced points strictly inside (lo, hi).
std::vector<double> default_alpha_grid(int points = 15, double lo = 0.01, double hi = 0.99);
/// 0.005, 0.010, ..., 0.100.
std::vector<double> default_epsilon_list();

/// Names of the decision matrices in the synthesis program.
namespace vars {
inline constexpr const char* kPi1 = "Pi1";
inline constexpr const char* kPi21 = "Pi21";
inline constexpr const char* kPi3 = "Pi3";
inline constexpr const char* kPi4 = "Pi4";
inline constexpr const char* kPi5 = "Pi5";
inline constexpr const char* kSigma = "Sigma";
inline constexpr const char* kSigmaVtilde = "Sigma_vtilde";
inline constexpr const char* kSigmaZ = "Sigma_z";
}  // namespace vars

/// Constraint names as they appear in reports and infeasibility messages.
namespace blocks {
inline constexpr const char* kUplink = "uplink leakage bound";
inline constexpr const char* kDownlink = "downlink leakage bound";
inline constexpr const char* kCovariance = "covariance upper bound";
inline constexpr const char* kBudget = "control cost budget";
inline constexpr const char* kControlCost = "control cost bound";
inline constexpr const char* kOutputNoise = "output noise positivity";
inline constexpr const char* kInputNoise = "input noise positivity";
inline constexpr const char* kSigmaPositive = "covariance positivity";
}  // namespace blocks

struct SynthesisConfig {
  double epsilon = 0.07;
  std::vector<double> alpha_grid = default_alpha_grid();
  MechanismMode mode = MechanismMode::FullG;
  sdp::SolverOptions solver;
  /// Noise floor of the analytic start point (Sigma_z = delta0 I, Sigma_vtilde >= Sigma_h + delta0 I).
  double noise_floor = 1e-3;
  int threads = 1;

  /// epsilon >= 0 (zero is accepted so its infeasibility can be reported), alphas in (0, 1).
  void validate() const;
};

struct ValidationFlags {
  bool sigma_v_positive = false;
  bool stable = false;
  bool bound_dominates_rate = false;      // exact rate <= bound + 1e-6
  bool covariance_dominates = false;      // Sigma >= Sigma_zeta - 1e-7 I
  bool slack_nonnegative = false;         // slack >= -1e-6
  bool all() const {
    return sigma_v_positive && stable && bound_dominates_rate && covariance_dominates && slack_nonnegative;
  }
};

struct AlphaAttempt {
  double alpha = 0.0;
  sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
  std::optional<double> exact_rate_nats;
  std::optional<double> bound_nats;
  std::optional<double> slack;
  int newton_steps = 0;
  std::string note;
};

struct SynthesisResult {
  explicit SynthesisResult(PrivacyMechanism m) : mechanism(std::move(m)) {}

  PrivacyMechanism mechanism;
  MechanismMode mode = MechanismMode::FullG;
  double epsilon = 0.0;
  double alpha = 0.0;
  double bound_nats = 0.0;
  double exact_rate_nats = 0.0;
  double uplink_nats = 0.0;
  double downlink_nats = 0.0;
  double constraint_slack = 0.0;
  double baseline_cost = 0.0;
  double distorted_cost = 0.0;
  double spectral_radius = 0.0;
  /// min eig(Sigma_solver - Sigma_zeta_exact).
  double covariance_margin = 0.0;
  sdp::SolveStatus solver_status = sdp::SolveStatus::NumericalFailure;
  double duality_gap = 0.0;
  double min_constraint_eig = 0.0;
  int newton_steps = 0;
  bool used_phase1 = false;
  ValidationFlags flags;
  Eigen::MatrixXd sigma;
  std::vector<AlphaAttempt> attempts;
};

/// The convex program for one alpha: variables Pi1 (lower-left block fixed at zero),
/// Pi21, Pi3, Pi4, Pi5, Sigma, Sigma_vtilde, Sigma_z; objective
///   alpha * (-1/2 logdet Pi3 - 1/2 logdet(L Sv~ L^T) - 1/2 logdet Pi4 - 1/2 logdet(B Sz B^T + Sw))
///   + (1 - alpha) tr(Sigma).
/// IdentityG mode appends the equality Pi21 = Pi13.
sdp::Problem build_program(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config,
                           double alpha);

/// Strictly feasible start built from the G = I loop (the feasible set does not depend
/// on alpha). Throws InfeasibleError naming the violated block.
sdp::ValueMap initial_point(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config);

/// G = Pi21 Pi13^{-1}, Sigma_v = Sigma_vtilde - G Sigma_h G^T. Throws NumericalError when
/// Pi13 is ill-conditioned or Sigma_v falls below half the strict margin.
PrivacyMechanism extract_mechanism(const PlantModel& plant, const sdp::ValueMap& solution,
                                   double strict_margin = sdp::SolverOptions{}.strict_margin);

/// Leakage part of the objective at a solution.
double leakage_bound(const PlantModel& plant, const AdversaryFilter& filt, const sdp::ValueMap& solution);

/// Line search over alpha, selecting by exact rate (ties: larger slack, then smaller alpha).
/// Throws InfeasibleError when no alpha yields a valid mechanism.
SynthesisResult synthesize(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config);

/// True when a strictly feasible point exists for this budget (phase I only).
bool is_feasible(const PlantModel& plant, const AdversaryFilter& filt, const SynthesisConfig& config);

/// Bisects the smallest feasible budget in [lo, hi]; lo is assumed infeasible.
/// Returns nullopt when hi is infeasible too.
std::optional<double> min_feasible_epsilon(const PlantModel& plant, const AdversaryFilter& filt,
                                           const SynthesisConfig& config, double lo, double hi,
                                           double tolerance = 1e-5);

struct SweepPoint {
  double epsilon = 0.0;
  MechanismMode mode = MechanismMode::FullG;
  std::optional<SynthesisResult> result;
  std::string failure;  // empty on success
  std::optional<double> min_feasible_epsilon;
  std::string status() const;
};

/// One synthesize per (epsilon, mode), modes outermost. Failures are recorded per point;
/// for infeasible points the minimum feasible budget is bisected.
std::vector<SweepPoint> sweep_epsilon(const PlantModel& plant, const AdversaryFilter& filt,
                                      const std::vector<double>& eps_list, const std::vector<MechanismMode>& modes,
                                      const SynthesisConfig& base);

}  // namespace privsynth
