#include "privsynth/reports.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

#include "privsynth/errors.hpp"
#include "privsynth/estimation.hpp"
#include "privsynth/infoflow.hpp"
#include "privsynth/perf.hpp"

namespace privsynth {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json mechanism_json(const PrivacyMechanism& m) {
  return {{"G", to_json(m.G())}, {"Sigma_v", to_json(m.sigma_v())}, {"Sigma_z", to_json(m.sigma_z())}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double to_bits(double nats) { return nats / std::numbers::ln2; }

std::string csv_number(double v) { return fmt::format("{:.17g}", v); }

json summary_json(const SimulationSummary& s) {
  json reps = json::array();
  for (const auto& r : s.replications) {
    reps.push_back({{"replication", r.replication},
                    {"mse", r.mse},
                    {"prediction_mse", r.prediction_mse},
                    {"cost", r.cost.mean},
                    {"cost_standard_error", r.cost.standard_error}});
  }
  return {{"mse", s.mse},
          {"prediction_mse", s.prediction_mse},
          {"closed_form_mse", s.closed_form_mse},
          {"closed_form_prediction_mse", s.closed_form_prediction_mse},
          {"empirical_cost", s.cost},
          {"empirical_cost_standard_error", s.cost_standard_error},
          {"closed_form_cost", s.closed_form_cost},
          {"cost_within_3se", s.cost_within_3se()},
          {"replications", reps}};
}

}  // namespace

std::string synthesis_report(const SynthesisResult& r) {
  json attempts = json::array();
  for (const auto& a : r.attempts) {
    attempts.push_back({{"alpha", a.alpha},
                        {"status", sdp::to_string(a.status)},
                        {"exact_rate_nats", optional_json(a.exact_rate_nats)},
                        {"bound_nats", optional_json(a.bound_nats)},
                        {"slack", optional_json(a.slack)},
                        {"newton_steps", a.newton_steps},
                        {"note", a.note}});
  }
  const json j = {
      {"mode", to_string(r.mode)},
      {"epsilon", r.epsilon},
      {"alpha", r.alpha},
      {"mechanism", mechanism_json(r.mechanism)},
      {"exact_rate_nats", r.exact_rate_nats},
      {"exact_rate_bits", to_bits(r.exact_rate_nats)},
      {"uplink_nats", r.uplink_nats},
      {"downlink_nats", r.downlink_nats},
      {"bound_nats", r.bound_nats},
      {"baseline_cost", r.baseline_cost},
      {"distorted_cost", r.distorted_cost},
      {"constraint_slack", r.constraint_slack},
      {"spectral_radius", r.spectral_radius},
      {"covariance_margin", r.covariance_margin},
      {"checks",
       {{"sigma_v_positive", r.flags.sigma_v_positive},
        {"stable", r.flags.stable},
        {"bound_dominates_rate", r.flags.bound_dominates_rate},
        {"covariance_dominates", r.flags.covariance_dominates},
        {"slack_nonnegative", r.flags.slack_nonnegative}}},
      {"solver",
       {{"status", sdp::to_string(r.solver_status)},
        {"duality_gap", r.duality_gap},
        {"min_constraint_eig", r.min_constraint_eig},
        {"newton_steps", r.newton_steps},
        {"used_phase1", r.used_phase1}}},
      {"alpha_attempts", attempts},
  };
  return j.dump(2) + "\n";
}

std::string evaluation_report(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                              double epsilon) {
  const double rho = spectral_radius(plant.A() + plant.B() * plant.K() * mech.G());
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(
        fmt::format("mechanism destabilizes the loop: spectral radius of A + B K G is {:.12g}", rho), rho);
  }
  const auto leak = mutual_info_rate(plant, mech, filt);
  const auto perf = evaluate_performance(plant, mech, epsilon);
  const auto cl = assemble_closed_loop(plant, mech, filt);
  const MatrixXd I = MatrixXd::Identity(plant.nx(), plant.nx());
  const json j = {
      {"epsilon", epsilon},
      {"mechanism", mechanism_json(mech)},
      {"exact_rate_nats", leak.rate_nats},
      {"exact_rate_bits", to_bits(leak.rate_nats)},
      {"uplink_nats", leak.uplink_nats},
      {"downlink_nats", leak.downlink_nats},
      {"baseline_cost", perf.baseline_cost},
      {"distorted_cost", perf.distorted_cost},
      {"constraint_slack", perf.slack},
      {"spectral_radius_closed_loop", rho},
      {"spectral_radius_extended", spectral_radius(cl.Acal)},
      {"spectral_radius_filter_error", spectral_radius((I - filt.L()) * plant.A())},
  };
  return j.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "epsilon,mode,exact_rate,bound,slack,alpha,status\n";
  for (const auto& p : points) {
    std::string row = csv_number(p.epsilon) + "," + to_string(p.mode);
    if (p.result) {
      row += "," + csv_number(p.result->exact_rate_nats) + "," + csv_number(p.result->bound_nats) + "," +
             csv_number(p.result->constraint_slack) + "," + csv_number(p.result->alpha);
    } else {
      row += ",,,,";
    }
    std::string status = p.status();
    for (char& c : status) {
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    }
    out += row + "," + status + "\n";
  }
  return out;
}

std::string simulation_report(const SimulationComparison& c) {
  json j = {{"horizon", c.horizon},
            {"seed", c.seed},
            {"burn_in", default_burn_in(c.horizon)},
            {"without_mechanism", summary_json(c.without_mechanism)}};
  if (c.with_mechanism) {
    j["with_mechanism"] = summary_json(*c.with_mechanism);
    j["mse_ratio"] = c.with_mechanism->mse / c.without_mechanism.mse;
  }
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  out << content;
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path));
}

}  // namespace privsynth
