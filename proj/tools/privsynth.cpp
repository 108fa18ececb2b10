#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "privsynth/config.hpp"
#include "privsynth/errors.hpp"
#include "privsynth/reports.hpp"
#include "privsynth/sim.hpp"
#include "privsynth/synthesis.hpp"

using namespace privsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct Options {
  std::string config;
  std::string mode;
  std::optional<double> epsilon;
  std::vector<double> epsilon_list;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string mechanism;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mode", o.mode, "Mechanism family")->check(CLI::IsMember({"full", "identity", "both"}));
  cmd->add_option("--epsilon", o.epsilon, "Cost budget");
  cmd->add_option("--epsilon-list", o.epsilon_list, "Comma-separated cost budgets")->delimiter(',');
  cmd->add_option("--out", o.out, "Output directory (overrides output.directory)");
  cmd->add_option("--seed", o.seed, "Simulation seed");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("privsynth");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PRIVSYNTH_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

RunConfig resolve(const Options& o) {
  RunConfig c = load_config(o.config);
  if (o.mode == "full") c.synthesis.modes = {MechanismMode::FullG};
  if (o.mode == "identity") c.synthesis.modes = {MechanismMode::IdentityG};
  if (o.mode == "both") c.synthesis.modes = {MechanismMode::FullG, MechanismMode::IdentityG};
  if (o.epsilon) c.synthesis.epsilon = *o.epsilon;
  if (!o.epsilon_list.empty()) c.synthesis.epsilon_list = o.epsilon_list;
  if (!o.out.empty()) c.output.directory = o.out;
  if (o.seed) c.simulation.seed = *o.seed;
  if (o.threads) c.synthesis.threads = *o.threads;
  c.validate();
  std::filesystem::create_directories(c.output.directory);
  return c;
}

std::string output_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output.directory) / name).string();
}

int cmd_synth(const Options& o) {
  const auto c = resolve(o);
  const auto plant = c.build_plant();
  const auto filt = c.build_filter(plant);
  int code = kExitOk;
  for (const auto mode : c.synthesis.modes) {
    try {
      const auto r = synthesize(plant, filt, c.synthesis_config(c.synthesis.epsilon, mode));
      const auto path = output_path(c, fmt::format("synth_{}.json", to_string(mode)));
      write_file(path, synthesis_report(r));
      fmt::print("{} epsilon {:.6g}: rate {:.9g} nats ({:.9g} bits), bound {:.9g}, slack {:.6g}, alpha {:.6g} -> {}\n",
                 to_string(mode), r.epsilon, r.exact_rate_nats, r.exact_rate_nats / std::log(2.0), r.bound_nats,
                 r.constraint_slack, r.alpha, path);
    } catch (const InfeasibleError& e) {
      fmt::print(stderr, "infeasible: {} [constraint: {}]\n", e.what(), e.constraint());
      code = std::max(code, kExitInfeasible);
    }
  }
  return code;
}

int cmd_sweep(const Options& o) {
  const auto c = resolve(o);
  const auto plant = c.build_plant();
  const auto filt = c.build_filter(plant);
  const auto points =
      sweep_epsilon(plant, filt, c.synthesis.epsilon_list, c.synthesis.modes, c.synthesis_config(0.0, c.synthesis.modes.front()));
  const auto path = output_path(c, "sweep.csv");
  write_file(path, sweep_csv(points));
  std::size_t ok = 0;
  for (const auto& p : points) ok += p.result.has_value();
  fmt::print("{} of {} sweep points succeeded -> {}\n", ok, points.size(), path);
  return ok > 0 ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const Options& o) {
  const auto c = resolve(o);
  const auto plant = c.build_plant();
  const auto filt = c.build_filter(plant);
  const auto& s = c.simulation;
  SimulationComparison cmp;
  cmp.horizon = s.horizon;
  cmp.seed = s.seed;
  const auto identity = PrivacyMechanism::identity(plant);
  cmp.without_mechanism =
      summarize_simulation(plant, identity, filt, s.horizon, s.seed, s.replications, c.synthesis.threads);
  std::optional<PrivacyMechanism> mech;
  if (!o.mechanism.empty()) {
    mech = load_mechanism(o.mechanism, plant);
    cmp.with_mechanism =
        summarize_simulation(plant, *mech, filt, s.horizon, s.seed, s.replications, c.synthesis.threads);
  }
  const auto path = output_path(c, "simulate.json");
  write_file(path, simulation_report(cmp));
  if (s.write_trace) {
    write_trace_csv(simulate(plant, mech ? *mech : identity, filt, s.horizon, s.seed), output_path(c, "trace.csv"));
  }
  fmt::print("mse without mechanism {:.9g} (closed form {:.9g})\n", cmp.without_mechanism.mse,
             cmp.without_mechanism.closed_form_mse);
  if (cmp.with_mechanism) {
    fmt::print("mse with mechanism {:.9g} (closed form {:.9g}), ratio {:.6g}\n", cmp.with_mechanism->mse,
               cmp.with_mechanism->closed_form_mse, cmp.with_mechanism->mse / cmp.without_mechanism.mse);
  }
  fmt::print("-> {}\n", path);
  return kExitOk;
}

int cmd_eval(const Options& o) {
  const auto c = resolve(o);
  const auto plant = c.build_plant();
  const auto filt = c.build_filter(plant);
  const auto mech = o.mechanism.empty() ? PrivacyMechanism::identity(plant) : load_mechanism(o.mechanism, plant);
  const auto path = output_path(c, "eval.json");
  write_file(path, evaluation_report(plant, mech, filt, c.synthesis.epsilon));
  fmt::print("-> {}\n", path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy mechanism synthesis for networked LQR loops"};
  app.require_subcommand(1);
  Options o;
  auto* synth = app.add_subcommand("synth", "Synthesize a mechanism for one budget");
  auto* sweep = app.add_subcommand("sweep", "Synthesize over a list of budgets and write a CSV curve");
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo MSE and cost with and without a mechanism");
  auto* eval = app.add_subcommand("eval", "Closed-form rate and cost of a mechanism");
  for (auto* cmd : {synth, sweep, simulate, eval}) add_common(cmd, o);
  for (auto* cmd : {simulate, eval}) {
    cmd->add_option("--mechanism", o.mechanism, "Mechanism file or synthesis report")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  setup_logging();
  try {
    if (*synth) return cmd_synth(o);
    if (*sweep) return cmd_sweep(o);
    if (*simulate) return cmd_simulate(o);
    return cmd_eval(o);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    fmt::print(stderr, "infeasible: {} [constraint: {}]\n", e.what(), e.constraint());
    return kExitInfeasible;
  } catch (const UnstableError& e) {
    fmt::print(stderr, "rejected: {}\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  }
}
