#pragma once

#include <Eigen/Dense>

#include "privsynth/estimation.hpp"

namespace privsynth {

/// LTI plant x+ = A x + B u + w, y = x + h, u = K y, with the LQR weights used
/// to score it. Covariances are symmetrized on construction; Sigma_w, Sigma_h,
/// Sigma_x1, Q and R must be positive definite and A + B K Schur stable.
class PlantModel {
 public:
  PlantModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd K, Eigen::MatrixXd sigma_w,
             Eigen::MatrixXd sigma_h, Eigen::MatrixXd sigma_x1, Eigen::MatrixXd Q, Eigen::MatrixXd R);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& K() const { return K_; }
  const Eigen::MatrixXd& sigma_w() const { return sigma_w_; }
  const Eigen::MatrixXd& sigma_h() const { return sigma_h_; }
  const Eigen::MatrixXd& sigma_x1() const { return sigma_x1_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& R() const { return R_; }

  Eigen::Index nx() const { return A_.rows(); }
  Eigen::Index ny() const { return A_.rows(); }
  Eigen::Index nu() const { return B_.cols(); }

 private:
  Eigen::MatrixXd A_, B_, K_, sigma_w_, sigma_h_, sigma_x1_, Q_, R_;
};

/// Distorting mechanism y~ = G y + v, u~ = u + z. Sigma_vtilde = G Sigma_h G^T + Sigma_v
/// is derived from the parts at construction.
///
/// Construction accepts positive semidefinite noise so the undistorted loop can be
/// evaluated; synthesized mechanisms satisfy is_strict().
class PrivacyMechanism {
 public:
  PrivacyMechanism(const PlantModel& plant, Eigen::MatrixXd G, Eigen::MatrixXd sigma_v, Eigen::MatrixXd sigma_z);

  /// G = I with zero added noise: the loop without any privacy distortion.
  static PrivacyMechanism identity(const PlantModel& plant);

  const Eigen::MatrixXd& G() const { return G_; }
  const Eigen::MatrixXd& sigma_v() const { return sigma_v_; }
  const Eigen::MatrixXd& sigma_z() const { return sigma_z_; }
  const Eigen::MatrixXd& sigma_vtilde() const { return sigma_vtilde_; }

  /// Sigma_v and Sigma_z both positive definite.
  bool is_strict() const;

 private:
  Eigen::MatrixXd G_, sigma_v_, sigma_z_, sigma_vtilde_;
};

/// Adversary's steady-state filter designed for the undistorted loop, and its
/// distortion-free filtered error covariance.
class AdversaryFilter {
 public:
  AdversaryFilter(Eigen::MatrixXd L, Eigen::MatrixXd sigma_rho);

  /// Wraps a given gain after checking (I - L) A is Schur stable; Sigma_rho is the
  /// stationary filtered error covariance of the undistorted loop under that gain.
  static AdversaryFilter for_gain(const PlantModel& plant, Eigen::MatrixXd L);
  /// Uses the steady-state Kalman gain of the plant.
  static AdversaryFilter kalman(const PlantModel& plant);

  const Eigen::MatrixXd& L() const { return L_; }
  const Eigen::MatrixXd& sigma_rho() const { return sigma_rho_; }

 private:
  Eigen::MatrixXd L_, sigma_rho_;
};

/// Extended state zeta = col(e_{k|k-1}, x~_k):
///   zeta+ = Acal zeta + noise,  cov(noise) = Bcal,
///   Acal  = Acal0 + Acal1 G [0 I].
struct ClosedLoopMatrices {
  Eigen::MatrixXd Acal;
  Eigen::MatrixXd Bcal;
  Eigen::MatrixXd Acal0;
  Eigen::MatrixXd Acal1;
  Eigen::MatrixXd N_xtilde;  // [0 I]
  Eigen::MatrixXd N_e;       // [I 0]

  /// Acal0 + Acal1 * G * N_xtilde.
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& G) const;
};

ClosedLoopMatrices assemble_closed_loop(const PlantModel& plant, const PrivacyMechanism& mech,
                                        const AdversaryFilter& filt);

/// Exact stationary covariance of the extended closed loop.
LyapunovSolution stationary_extended_covariance(const PlantModel& plant, const PrivacyMechanism& mech,
                                                const AdversaryFilter& filt);

/// Stationary filtered estimation error covariance E[(x~ - x^)(x~ - x^)^T], derived
/// from the prediction-error machinery: e_k = (I-L) e_{k|k-1} - L(G-I) x~_k - L v~_k.
Eigen::MatrixXd stationary_filtered_error(const PlantModel& plant, const PrivacyMechanism& mech,
                                          const AdversaryFilter& filt, const LyapunovSolution& extended);

struct CaseStudy {
  PlantModel plant;
  AdversaryFilter filter;
  /// Reference baseline LQR cost for this reactor under unknown weights; not
  /// reproduced by the Q = I, R = I weights used here.
  double reported_baseline_cost;
};

/// Four-state stirred-tank reactor with a heat exchanger, Q = I4, R = I3.
CaseStudy load_case_study();

}  // namespace privsynth
