#include "privsynth/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "privsynth/errors.hpp"

namespace privsynth {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

bool same(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_keys(const json& j, const std::string& path, const std::set<std::string>& allowed,
                  const std::set<std::string>& required = {}) {
  if (!j.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path.empty() ? "<root>" : path));
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}'", join(path, key)));
  }
  for (const auto& key : required) {
    if (!j.contains(key)) throw ConfigError(fmt::format("missing required key '{}'", join(path, key)));
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(fmt::format("'{}' must be a number", path));
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(fmt::format("'{}' must be an integer", path));
  return j.get<std::int64_t>();
}

MatrixXd matrix(const json& j, const std::string& path, std::int64_t rows, std::int64_t cols) {
  if (!j.is_array() || static_cast<std::int64_t>(j.size()) != rows) {
    throw ConfigError(fmt::format("'{}' must be an array of {} rows", path, rows));
  }
  MatrixXd m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<std::int64_t>(row.size()) != cols) {
      throw ConfigError(fmt::format("'{}' row {} must have {} entries", path, i, cols));
    }
    for (std::int64_t c = 0; c < cols; ++c) {
      m(i, c) = number(row[static_cast<std::size_t>(c)], fmt::format("{}[{}][{}]", path, i, c));
    }
  }
  return m;
}

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(fmt::format("'{}' must be an array of numbers", path));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], fmt::format("{}[{}]", path, i)));
  return out;
}

PlantConfig parse_plant(const json& j) {
  require_keys(j, "plant", {"nx", "nu", "A", "B", "K", "Sigma_w", "Sigma_h", "Sigma_x1"},
               {"nx", "nu", "A", "B", "K", "Sigma_w", "Sigma_h", "Sigma_x1"});
  PlantConfig p;
  const auto nx = integer(j["nx"], "plant.nx");
  const auto nu = integer(j["nu"], "plant.nu");
  if (nx < 1 || nu < 1) throw ConfigError("plant.nx and plant.nu must be >= 1");
  p.nx = static_cast<int>(nx);
  p.nu = static_cast<int>(nu);
  p.A = matrix(j["A"], "plant.A", nx, nx);
  p.B = matrix(j["B"], "plant.B", nx, nu);
  p.K = matrix(j["K"], "plant.K", nu, nx);
  p.sigma_w = matrix(j["Sigma_w"], "plant.Sigma_w", nx, nx);
  p.sigma_h = matrix(j["Sigma_h"], "plant.Sigma_h", nx, nx);
  p.sigma_x1 = matrix(j["Sigma_x1"], "plant.Sigma_x1", nx, nx);
  return p;
}

SolverConfig parse_solver(const json& j) {
  require_keys(j, "synthesis.solver", {"mu", "gap_tolerance", "max_newton_steps", "strict_margin"});
  SolverConfig s;
  if (j.contains("mu")) s.mu = number(j["mu"], "synthesis.solver.mu");
  if (j.contains("gap_tolerance")) s.gap_tolerance = number(j["gap_tolerance"], "synthesis.solver.gap_tolerance");
  if (j.contains("max_newton_steps")) {
    s.max_newton_steps = static_cast<int>(integer(j["max_newton_steps"], "synthesis.solver.max_newton_steps"));
  }
  if (j.contains("strict_margin")) s.strict_margin = number(j["strict_margin"], "synthesis.solver.strict_margin");
  return s;
}

SynthesisBlock parse_synthesis(const json& j) {
  require_keys(j, "synthesis",
               {"epsilon", "epsilon_list", "alpha_grid", "modes", "noise_floor", "threads", "solver"});
  SynthesisBlock s;
  if (j.contains("epsilon")) s.epsilon = number(j["epsilon"], "synthesis.epsilon");
  if (j.contains("epsilon_list")) s.epsilon_list = number_list(j["epsilon_list"], "synthesis.epsilon_list");
  if (j.contains("alpha_grid")) s.alpha_grid = number_list(j["alpha_grid"], "synthesis.alpha_grid");
  if (j.contains("modes")) {
    const auto& m = j["modes"];
    if (!m.is_array()) throw ConfigError("'synthesis.modes' must be an array of strings");
    s.modes.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i].is_string()) throw ConfigError(fmt::format("'synthesis.modes[{}]' must be a string", i));
      try {
        s.modes.push_back(parse_mode(m[i].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("synthesis.modes[{}]: {}", i, e.what()));
      }
    }
  }
  if (j.contains("noise_floor")) s.noise_floor = number(j["noise_floor"], "synthesis.noise_floor");
  if (j.contains("threads")) s.threads = static_cast<int>(integer(j["threads"], "synthesis.threads"));
  if (j.contains("solver")) s.solver = parse_solver(j["solver"]);
  return s;
}

SimulationConfig parse_simulation(const json& j) {
  require_keys(j, "simulation", {"horizon", "seed", "replications", "write_trace"});
  SimulationConfig s;
  if (j.contains("horizon")) s.horizon = static_cast<int>(integer(j["horizon"], "simulation.horizon"));
  if (j.contains("seed")) {
    const auto seed = integer(j["seed"], "simulation.seed");
    if (seed < 0) throw ConfigError("simulation.seed must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("replications")) {
    s.replications = static_cast<int>(integer(j["replications"], "simulation.replications"));
  }
  if (j.contains("write_trace")) {
    if (!j["write_trace"].is_boolean()) throw ConfigError("'simulation.write_trace' must be a boolean");
    s.write_trace = j["write_trace"].get<bool>();
  }
  return s;
}

template <class F>
auto wrap_model_errors(const char* what, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace

bool PlantConfig::operator==(const PlantConfig& o) const {
  return nx == o.nx && nu == o.nu && same(A, o.A) && same(B, o.B) && same(K, o.K) && same(sigma_w, o.sigma_w) &&
         same(sigma_h, o.sigma_h) && same(sigma_x1, o.sigma_x1);
}

bool AdversaryConfig::operator==(const AdversaryConfig& o) const {
  if (L.has_value() != o.L.has_value()) return false;
  return !L || same(*L, *o.L);
}

bool WeightsConfig::operator==(const WeightsConfig& o) const { return same(Q, o.Q) && same(R, o.R); }

void RunConfig::validate() const {
  const auto& s = synthesis;
  if (!(s.epsilon >= 0.0)) throw ConfigError("synthesis.epsilon must be >= 0");
  for (double e : s.epsilon_list) {
    if (!(e >= 0.0)) throw ConfigError("synthesis.epsilon_list entries must be >= 0");
  }
  if (!std::is_sorted(s.epsilon_list.begin(), s.epsilon_list.end())) {
    throw ConfigError("synthesis.epsilon_list must be sorted ascending");
  }
  if (s.alpha_grid.empty()) throw ConfigError("synthesis.alpha_grid must not be empty");
  for (double a : s.alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("synthesis.alpha_grid entries must lie in (0, 1)");
  }
  if (s.modes.empty()) throw ConfigError("synthesis.modes must not be empty");
  if (!(s.noise_floor > 0.0)) throw ConfigError("synthesis.noise_floor must be > 0");
  if (s.threads < 1) throw ConfigError("synthesis.threads must be >= 1");
  if (!(s.solver.mu > 1.0)) throw ConfigError("synthesis.solver.mu must be > 1");
  if (!(s.solver.gap_tolerance > 0.0)) throw ConfigError("synthesis.solver.gap_tolerance must be > 0");
  if (s.solver.max_newton_steps < 1) throw ConfigError("synthesis.solver.max_newton_steps must be >= 1");
  if (!(s.solver.strict_margin > 0.0)) throw ConfigError("synthesis.solver.strict_margin must be > 0");
  if (simulation.horizon < 10) throw ConfigError("simulation.horizon must be >= 10");
  if (simulation.replications < 1) throw ConfigError("simulation.replications must be >= 1");
  if (output.directory.empty()) throw ConfigError("output.directory must not be empty");
  if (weights.Q.rows() != plant.nx || weights.Q.cols() != plant.nx) throw ConfigError("weights.Q must be nx x nx");
  if (weights.R.rows() != plant.nu || weights.R.cols() != plant.nu) throw ConfigError("weights.R must be nu x nu");
  if (adversary.L && (adversary.L->rows() != plant.nx || adversary.L->cols() != plant.nx)) {
    throw ConfigError("adversary.L must be nx x nx");
  }
}

PlantModel RunConfig::build_plant() const {
  return wrap_model_errors("invalid plant", [&] {
    return PlantModel(plant.A, plant.B, plant.K, plant.sigma_w, plant.sigma_h, plant.sigma_x1, weights.Q, weights.R);
  });
}

AdversaryFilter RunConfig::build_filter(const PlantModel& p) const {
  return wrap_model_errors("invalid adversary filter", [&] {
    return adversary.L ? AdversaryFilter::for_gain(p, *adversary.L) : AdversaryFilter::kalman(p);
  });
}

SynthesisConfig RunConfig::synthesis_config(double epsilon, MechanismMode mode) const {
  SynthesisConfig c;
  c.epsilon = epsilon;
  c.mode = mode;
  c.alpha_grid = synthesis.alpha_grid;
  c.noise_floor = synthesis.noise_floor;
  c.threads = synthesis.threads;
  c.solver.mu = synthesis.solver.mu;
  c.solver.gap_tolerance = synthesis.solver.gap_tolerance;
  c.solver.max_newton_steps = synthesis.solver.max_newton_steps;
  c.solver.strict_margin = synthesis.solver.strict_margin;
  return c;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  require_keys(j, "", {"plant", "adversary", "weights", "synthesis", "simulation", "output"},
               {"plant", "adversary", "weights"});
  RunConfig c;
  c.plant = parse_plant(j["plant"]);

  require_keys(j["adversary"], "adversary", {"L"}, {"L"});
  const auto& L = j["adversary"]["L"];
  if (L.is_string()) {
    if (L.get<std::string>() != "compute") throw ConfigError("adversary.L must be a matrix or \"compute\"");
  } else {
    c.adversary.L = matrix(L, "adversary.L", c.plant.nx, c.plant.nx);
  }

  require_keys(j["weights"], "weights", {"Q", "R"}, {"Q", "R"});
  c.weights.Q = matrix(j["weights"]["Q"], "weights.Q", c.plant.nx, c.plant.nx);
  c.weights.R = matrix(j["weights"]["R"], "weights.R", c.plant.nu, c.plant.nu);

  if (j.contains("synthesis")) c.synthesis = parse_synthesis(j["synthesis"]);
  if (j.contains("simulation")) c.simulation = parse_simulation(j["simulation"]);
  if (j.contains("output")) {
    require_keys(j["output"], "output", {"directory"});
    if (j["output"].contains("directory")) {
      if (!j["output"]["directory"].is_string()) throw ConfigError("'output.directory' must be a string");
      c.output.directory = j["output"]["directory"].get<std::string>();
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  json modes = json::array();
  for (const auto m : c.synthesis.modes) modes.push_back(to_string(m));
  json j = {
      {"plant",
       {{"nx", c.plant.nx},
        {"nu", c.plant.nu},
        {"A", to_json(c.plant.A)},
        {"B", to_json(c.plant.B)},
        {"K", to_json(c.plant.K)},
        {"Sigma_w", to_json(c.plant.sigma_w)},
        {"Sigma_h", to_json(c.plant.sigma_h)},
        {"Sigma_x1", to_json(c.plant.sigma_x1)}}},
      {"adversary", {{"L", c.adversary.L ? to_json(*c.adversary.L) : json("compute")}}},
      {"weights", {{"Q", to_json(c.weights.Q)}, {"R", to_json(c.weights.R)}}},
      {"synthesis",
       {{"epsilon", c.synthesis.epsilon},
        {"epsilon_list", c.synthesis.epsilon_list},
        {"alpha_grid", c.synthesis.alpha_grid},
        {"modes", modes},
        {"noise_floor", c.synthesis.noise_floor},
        {"threads", c.synthesis.threads},
        {"solver",
         {{"mu", c.synthesis.solver.mu},
          {"gap_tolerance", c.synthesis.solver.gap_tolerance},
          {"max_newton_steps", c.synthesis.solver.max_newton_steps},
          {"strict_margin", c.synthesis.solver.strict_margin}}}}},
      {"simulation",
       {{"horizon", c.simulation.horizon},
        {"seed", c.simulation.seed},
        {"replications", c.simulation.replications},
        {"write_trace", c.simulation.write_trace}}},
      {"output", {{"directory", c.output.directory}}},
  };
  return j.dump(2) + "\n";
}

PrivacyMechanism load_mechanism(const std::string& path, const PlantModel& plant) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read mechanism '{}'", path));
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed mechanism file '{}': {}", path, e.what()));
  }
  std::string where = "";
  if (j.is_object() && j.contains("mechanism")) {
    j = j["mechanism"];
    where = "mechanism";
  }
  require_keys(j, where, {"G", "Sigma_v", "Sigma_z"}, {"G", "Sigma_v", "Sigma_z"});
  const auto n = plant.nx();
  const auto m = plant.nu();
  const MatrixXd G = matrix(j["G"], join(where, "G"), n, n);
  const MatrixXd Sv = matrix(j["Sigma_v"], join(where, "Sigma_v"), n, n);
  const MatrixXd Sz = matrix(j["Sigma_z"], join(where, "Sigma_z"), m, m);
  return wrap_model_errors("invalid mechanism", [&] { return PrivacyMechanism(plant, G, Sv, Sz); });
}

}  // namespace privsynth
