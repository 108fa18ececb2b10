#include "privsynth/infoflow.hpp"

#include <fmt/format.h>

#include "privsynth/errors.hpp"
#include "privsynth/linalg.hpp"

namespace privsynth {

using Eigen::MatrixXd;

namespace {

struct StepTerms {
  double uplink;
  double downlink;
};

// Parts of the leakage that do not depend on Sigma_e.
struct LeakageFactors {
  MatrixXd LG;
  MatrixXd uplink_noise;   // L Sv~ L^T
  double uplink_noise_logdet;
  double downlink;
};

LeakageFactors leakage_factors(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt) {
  const MatrixXd& L = filt.L();
  const MatrixXd& B = plant.B();
  const MatrixXd& K = plant.K();
  const MatrixXd& Sv = mech.sigma_vtilde();
  LeakageFactors f;
  f.LG = L * mech.G();
  f.uplink_noise = linalg::symmetrize(L * Sv * L.transpose());
  f.uplink_noise_logdet =
      linalg::logdet_spd(f.uplink_noise, "L Sigma_vtilde L^T (singular: leakage would be infinite)");
  const MatrixXd base = linalg::symmetrize(B * mech.sigma_z() * B.transpose() + plant.sigma_w());
  const MatrixXd with_control = linalg::symmetrize(B * K * Sv * K.transpose() * B.transpose()) + base;
  f.downlink = 0.5 * linalg::logdet_spd(with_control, "downlink output covariance") -
               0.5 * linalg::logdet_spd(base, "B Sigma_z B^T + Sigma_w");
  return f;
}

StepTerms step_terms(const LeakageFactors& f, const MatrixXd& sigma_e) {
  const MatrixXd up = linalg::symmetrize(f.LG * sigma_e * f.LG.transpose()) + f.uplink_noise;
  return {0.5 * linalg::logdet_spd(up, "uplink estimate covariance") - 0.5 * f.uplink_noise_logdet, f.downlink};
}

void check_error_covariance(const PlantModel& plant, const MatrixXd& sigma_e) {
  linalg::require_shape(sigma_e, plant.nx(), plant.nx(), "Sigma_e");
  if (!linalg::is_positive_semidefinite(sigma_e)) {
    throw NotPositiveDefiniteError("Sigma_e must be positive semidefinite");
  }
}

}  // namespace

LeakageReport mutual_info_rate(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                               const MatrixXd& sigma_e) {
  check_error_covariance(plant, sigma_e);
  const auto terms = step_terms(leakage_factors(plant, mech, filt), linalg::symmetrize(sigma_e));
  LeakageReport r;
  r.uplink_nats = terms.uplink;
  r.downlink_nats = terms.downlink;
  r.rate_nats = terms.uplink + terms.downlink;
  return r;
}

LeakageReport mutual_info_rate(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt) {
  const auto sol = stationary_extended_covariance(plant, mech, filt);
  return mutual_info_rate(plant, mech, filt, sol.error_block());
}

FiniteHorizonLeakage finite_horizon_mutual_info(const PlantModel& plant, const PrivacyMechanism& mech,
                                                const AdversaryFilter& filt, int horizon,
                                                const std::optional<MatrixXd>& sigma_zeta_1) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const auto n = plant.nx();
  const auto cl = assemble_closed_loop(plant, mech, filt);
  const double rho = spectral_radius(cl.Acal);
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstableError(fmt::format("extended closed loop unstable (spectral radius {:.12g})", rho), rho);
  }
  MatrixXd S = sigma_zeta_1 ? *sigma_zeta_1 : linalg::block_diagonal(plant.sigma_x1(), plant.sigma_x1());
  linalg::require_shape(S, 2 * n, 2 * n, "initial extended covariance");
  S = linalg::ingest_covariance(S, "initial extended covariance", linalg::Definiteness::PositiveSemidefinite);

  const auto factors = leakage_factors(plant, mech, filt);
  FiniteHorizonLeakage out;
  out.per_step.reserve(static_cast<std::size_t>(horizon));
  for (int k = 1; k <= horizon; ++k) {
    const auto t = step_terms(factors, S.topLeftCorner(n, n));
    out.per_step.push_back(t.uplink + t.downlink);
    out.total_nats += t.uplink + t.downlink;
    S = linalg::symmetrize(cl.Acal * S * cl.Acal.transpose() + cl.Bcal);
  }
  out.normalized_nats = out.total_nats / static_cast<double>(horizon + 1);
  return out;
}

double leakage_upper_bound(const PlantModel& plant, const PrivacyMechanism& mech, const AdversaryFilter& filt,
                           const MatrixXd& sigma) {
  const auto n = plant.nx();
  linalg::require_shape(sigma, 2 * n, 2 * n, "Sigma");
  if (!linalg::is_positive_semidefinite(sigma)) {
    throw NotPositiveDefiniteError("Sigma must be positive semidefinite");
  }
  const MatrixXd Ne = linalg::select_first(n);
  return mutual_info_rate(plant, mech, filt, linalg::symmetrize(Ne * sigma * Ne.transpose())).rate_nats;
}

}  // namespace privsynth
