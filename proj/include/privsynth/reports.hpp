#pragma once

#include <optional>
#include <string>
#include <vector>

#include "privsynth/model.hpp"
#include "privsynth/sim.hpp"
#include "privsynth/synthesis.hpp"

namespace privsynth {

/// Mechanism matrices, exact rate (nats and bits), bound, slack, alpha and solver diagnostics.
std::string synthesis_report(const SynthesisResult& result);

/// Closed-form evaluation: rate and its split, costs, slack, spectral radii.
std::string evaluation_report(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                              double epsilon);

/// Header "epsilon,mode,exact_rate,bound,slack,alpha,status"; one row per point, floats with
/// 17 significant digits, empty fields on failed points.
std::string sweep_csv(const std::vector<SweepPoint>& points);

struct SimulationComparison {
  int horizon = 0;
  std::uint64_t seed = 0;
  SimulationSummary without_mechanism;
  std::optional<SimulationSummary> with_mechanism;
};

/// MSE and cost metrics per case plus the MSE ratio when a mechanism is present.
std::string simulation_report(const SimulationComparison& comparison);

void write_file(const std::string& path, const std::string& content);

}  // namespace privsynth
