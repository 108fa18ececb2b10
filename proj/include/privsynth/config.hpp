#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "privsynth/model.hpp"
#include "privsynth/synthesis.hpp"

namespace privsynth {

struct PlantConfig {
  int nx = 0;
  int nu = 0;
  Eigen::MatrixXd A, B, K, sigma_w, sigma_h, sigma_x1;
  bool operator==(const PlantConfig& other) const;
};

struct AdversaryConfig {
  /// Absent means the "compute" directive: steady-state Kalman gain of the plant.
  std::optional<Eigen::MatrixXd> L;
  bool operator==(const AdversaryConfig& other) const;
};

struct WeightsConfig {
  Eigen::MatrixXd Q, R;
  bool operator==(const WeightsConfig& other) const;
};

struct SolverConfig {
  double mu = 20.0;
  double gap_tolerance = 1e-8;
  int max_newton_steps = 500;
  double strict_margin = 1e-9;
  bool operator==(const SolverConfig&) const = default;
};

struct SynthesisBlock {
  double epsilon = 0.07;
  std::vector<double> epsilon_list = default_epsilon_list();
  std::vector<double> alpha_grid = default_alpha_grid();
  std::vector<MechanismMode> modes = {MechanismMode::FullG, MechanismMode::IdentityG};
  double noise_floor = 1e-3;
  int threads = 1;
  SolverConfig solver;
  bool operator==(const SynthesisBlock&) const = default;
};

struct SimulationConfig {
  int horizon = 10000;
  std::uint64_t seed = 1;
  int replications = 10;
  bool write_trace = false;
  bool operator==(const SimulationConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  bool operator==(const OutputConfig&) const = default;
};

/// Run configuration. JSON layout (matrices are row-major nested arrays):
///   plant:      {nx, nu, A, B, K, Sigma_w, Sigma_h, Sigma_x1}          required
///   adversary:  {L: matrix | "compute"}                                required
///   weights:    {Q, R}                                                 required
///   synthesis:  {epsilon, epsilon_list, alpha_grid, modes, noise_floor, threads,
///                solver: {mu, gap_tolerance, max_newton_steps, strict_margin}}
///   simulation: {horizon, seed, replications, write_trace}
///   output:     {directory}
/// Unknown keys are rejected at every level.
struct RunConfig {
  PlantConfig plant;
  AdversaryConfig adversary;
  WeightsConfig weights;
  SynthesisBlock synthesis;
  SimulationConfig simulation;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;

  /// Dimension and range checks; throws ConfigError.
  void validate() const;
  /// Throws ConfigError wrapping model errors (definiteness, stability, shapes).
  PlantModel build_plant() const;
  AdversaryFilter build_filter(const PlantModel& plant) const;
  /// Synthesis settings for one budget and mode.
  SynthesisConfig synthesis_config(double epsilon, MechanismMode mode) const;
};

/// Parses and validates; throws ConfigError with the offending key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Pretty-printed JSON that parse_config maps back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Reads {"G", "Sigma_v", "Sigma_z"} or a synthesis report holding them under "mechanism".
PrivacyMechanism load_mechanism(const std::string& path, const PlantModel& plant);

}  // namespace privsynth
