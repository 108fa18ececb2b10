#include "privsynth/sim.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "privsynth/errors.hpp"
#include "privsynth/estimation.hpp"
#include "privsynth/linalg.hpp"
#include "privsynth/perf.hpp"

namespace privsynth {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

class GaussianSource {
 public:
  GaussianSource(const MatrixXd& cov, double scale, std::uint64_t seed, std::uint64_t replication,
                 NoiseStream stream)
      : factor_(scale * factor(cov)), draw_(cov.rows()) {
    std::seed_seq seq{seed, replication, static_cast<std::uint64_t>(stream)};
    rng_.seed(seq);
  }

  VectorXd sample() {
    for (Eigen::Index i = 0; i < draw_.size(); ++i) draw_(i) = normal_(rng_);
    return factor_ * draw_;
  }

 private:
  static MatrixXd factor(const MatrixXd& cov) {
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    return linalg::sqrt_psd(cov);
  }

  MatrixXd factor_;
  VectorXd draw_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

int resolve_burn_in(const SimulationTrace& t, std::optional<int> burn_in) {
  const int b = burn_in.value_or(default_burn_in(t.horizon));
  if (b < 0 || b >= t.horizon) {
    throw std::invalid_argument(fmt::format("burn-in {} must lie in [0, {})", b, t.horizon));
  }
  return b;
}

double mean_squared(const MatrixXd& a, const MatrixXd& b, int burn_in) {
  const auto n = a.cols() - burn_in;
  return (a.rightCols(n) - b.rightCols(n)).colwise().squaredNorm().sum() / static_cast<double>(n);
}

}  // namespace

SimulationTrace simulate(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                         int horizon, std::uint64_t seed, std::uint64_t replication, double noise_scale) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("noise scale must be >= 0");
  const auto n = plant.nx();
  const auto nu = plant.nu();
  const MatrixXd& A = plant.A();
  const MatrixXd& B = plant.B();
  const MatrixXd& K = plant.K();
  const MatrixXd& G = mech.G();
  const MatrixXd& L = filt.L();
  const double rho = spectral_radius(A + B * K * G);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(fmt::format("mechanism destabilizes the loop: spectral radius of A + B K G is {:.12g}", rho),
                        rho);
  }

  GaussianSource w(plant.sigma_w(), noise_scale, seed, replication, NoiseStream::ProcessW);
  GaussianSource h(plant.sigma_h(), noise_scale, seed, replication, NoiseStream::MeasurementH);
  GaussianSource v(mech.sigma_v(), noise_scale, seed, replication, NoiseStream::OutputV);
  GaussianSource z(mech.sigma_z(), noise_scale, seed, replication, NoiseStream::InputZ);
  GaussianSource x1(plant.sigma_x1(), noise_scale, seed, replication, NoiseStream::InitialX);

  SimulationTrace t;
  t.horizon = horizon;
  t.seed = seed;
  t.replication = replication;
  t.states.resize(n, horizon);
  t.estimates.resize(n, horizon);
  t.predictions.resize(n, horizon);
  t.outputs.resize(n, horizon);
  t.inputs.resize(nu, horizon);

  VectorXd x = x1.sample();
  VectorXd xhat_prev = VectorXd::Zero(n);
  VectorXd u_prev = VectorXd::Zero(nu);
  for (int k = 0; k < horizon; ++k) {
    const VectorXd y_tilde = G * (x + h.sample()) + v.sample();
    const VectorXd u = K * y_tilde;
    const VectorXd u_tilde = u + z.sample();
    const VectorXd pred = k == 0 ? VectorXd::Zero(n) : VectorXd(A * xhat_prev + B * u_prev);
    const VectorXd xhat = pred + L * (y_tilde - pred);

    t.states.col(k) = x;
    t.estimates.col(k) = xhat;
    t.predictions.col(k) = pred;
    t.outputs.col(k) = y_tilde;
    t.inputs.col(k) = u_tilde;

    x = A * x + B * u_tilde + w.sample();
    xhat_prev = xhat;
    u_prev = u;
  }
  return t;
}

int default_burn_in(int horizon) { return horizon / 10; }

double adversary_mse(const SimulationTrace& trace, std::optional<int> burn_in) {
  return mean_squared(trace.states, trace.estimates, resolve_burn_in(trace, burn_in));
}

double prediction_mse(const SimulationTrace& trace, std::optional<int> burn_in) {
  return mean_squared(trace.states, trace.predictions, resolve_burn_in(trace, burn_in));
}

EmpiricalCost empirical_lqr_cost(const SimulationTrace& trace, const MatrixXd& Q, const MatrixXd& R,
                                 std::optional<int> burn_in, int batches) {
  const int b = resolve_burn_in(trace, burn_in);
  linalg::require_shape(Q, trace.states.rows(), trace.states.rows(), "Q");
  linalg::require_shape(R, trace.inputs.rows(), trace.inputs.rows(), "R");
  const int n = trace.horizon - b;
  VectorXd stage(n);
  for (int k = 0; k < n; ++k) {
    const auto x = trace.states.col(b + k);
    const auto u = trace.inputs.col(b + k);
    stage(k) = x.dot(Q * x) + u.dot(R * u);
  }
  EmpiricalCost out;
  out.mean = stage.mean();
  out.batches = std::max(1, std::min(batches, n));
  if (out.batches < 2) return out;
  const int size = n / out.batches;
  VectorXd means(out.batches);
  for (int i = 0; i < out.batches; ++i) means(i) = stage.segment(i * size, size).mean();
  const double m = means.mean();
  const double var = (means.array() - m).square().sum() / (out.batches - 1);
  out.standard_error = std::sqrt(var / out.batches);
  return out;
}

MatrixXd empirical_state_covariance(const SimulationTrace& trace, std::optional<int> burn_in) {
  const int b = resolve_burn_in(trace, burn_in);
  const auto X = trace.states.rightCols(trace.horizon - b);
  return X * X.transpose() / static_cast<double>(X.cols());
}

MatrixXd empirical_error_covariance(const SimulationTrace& trace, std::optional<int> burn_in) {
  const int b = resolve_burn_in(trace, burn_in);
  const MatrixXd E = trace.states.rightCols(trace.horizon - b) - trace.estimates.rightCols(trace.horizon - b);
  return E * E.transpose() / static_cast<double>(E.cols());
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  const auto n = trace.states.rows();
  const auto nu = trace.inputs.rows();
  std::string header = "step";
  for (const char* prefix : {"x", "xhat", "xpred", "y"}) {
    for (Eigen::Index i = 0; i < n; ++i) header += fmt::format(",{}{}", prefix, i + 1);
  }
  for (Eigen::Index i = 0; i < nu; ++i) header += fmt::format(",u{}", i + 1);
  out << header << '\n';
  for (int k = 0; k < trace.horizon; ++k) {
    std::string row = fmt::format("{}", k + 1);
    for (const MatrixXd* m : {&trace.states, &trace.estimates, &trace.predictions, &trace.outputs, &trace.inputs}) {
      for (Eigen::Index i = 0; i < m->rows(); ++i) row += fmt::format(",{:.17g}", (*m)(i, k));
    }
    out << row << '\n';
  }
}

std::vector<ReplicationMetrics> run_replications(const PlantModel& plant, const PrivacyMechanism& mech,
                                                 const AdversaryFilter& filt, int horizon, std::uint64_t seed,
                                                 int count, int threads) {
  if (count < 1) throw std::invalid_argument("replication count must be >= 1");
  std::vector<ReplicationMetrics> out(static_cast<std::size_t>(count));
  auto run = [&](std::size_t i) {
    const auto t = simulate(plant, mech, filt, horizon, seed, i);
    out[i] = {i, adversary_mse(t), prediction_mse(t), empirical_lqr_cost(t, plant.Q(), plant.R())};
  };
  const auto workers = static_cast<std::size_t>(std::max(1, std::min(threads, count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) run(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(out.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < out.size(); i = next++) {
        try {
          run(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

bool SimulationSummary::cost_within_3se() const {
  return std::abs(cost - closed_form_cost) <= 3.0 * cost_standard_error;
}

SimulationSummary summarize_simulation(const PlantModel& plant, const PrivacyMechanism& mech,
                                       const AdversaryFilter& filt, int horizon, std::uint64_t seed,
                                       int replications, int threads) {
  SimulationSummary s;
  s.replications = run_replications(plant, mech, filt, horizon, seed, replications, threads);
  double se2 = 0.0;
  for (const auto& r : s.replications) {
    s.mse += r.mse;
    s.prediction_mse += r.prediction_mse;
    s.cost += r.cost.mean;
    se2 += r.cost.standard_error * r.cost.standard_error;
  }
  const double count = static_cast<double>(s.replications.size());
  s.mse /= count;
  s.prediction_mse /= count;
  s.cost /= count;
  s.cost_standard_error = std::sqrt(se2) / count;

  const auto ext = stationary_extended_covariance(plant, mech, filt);
  s.closed_form_mse = stationary_filtered_error(plant, mech, filt, ext).trace();
  s.closed_form_prediction_mse = ext.error_block().trace();
  s.closed_form_cost = distorted_lqr_cost(plant, mech).cost;
  return s;
}

}  // namespace privsynth
