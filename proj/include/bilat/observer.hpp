#ifndef BILAT_OBSERVER_HPP_
#define BILAT_OBSERVER_HPP_

#include "bilat/filters.hpp"
#include "bilat/model.hpp"
#include "bilat/types.hpp"

namespace bilat {

struct ObserverConfig {
  double omega_c = 50.0;  ///< cut-off angular frequency [rad/s]
  double zeta = 1.0;      ///< damping coefficient; 1 gives the double pole
  double dt = 1e-3;       ///< sampling period [s]

  void validate() const;
};

struct ObserverOutput {
  Vec vel_hat;      ///< estimated joint velocity [rad/s]
  Vec tau_ext_hat;  ///< estimated external torque [N*m]
};

/// Minimal-order velocity and external-force observer.
///
/// The velocity estimate combines an integrated-and-high-passed
/// acceleration reference with a pseudo-differentiated angle at cut-off
/// 2*zeta*omega_c (a complementary pair summing to unity). The force
/// estimate passes (s^2 theta - M^{-1} tau_u) through a second-order
/// low-pass of the same poles and rescales by the configuration-dependent
/// inertia. For zeta = 1 the force path runs as three cascaded bilinear
/// first-order sections; other dampings use a direct second-order section,
/// since the double real factorization only exists for zeta >= 1.
///
/// All filter states start at zero; the first-sample transient is the
/// caller's concern. One instance per manipulator, single-threaded.
class VelocityForceObserver {
 public:
  VelocityForceObserver(const ObserverConfig& cfg, int n_joints);

  /// External-force estimate from the angle and input-torque histories.
  /// M is the identified inertia at the current angle, M_inv its inverse.
  Vec force_step(const Vec& theta, const Vec& tau_u, const Mat& M, const Mat& M_inv);

  /// Velocity estimate; accel_ref is the acceleration reference computed
  /// by the controller for this tick.
  Vec velocity_step(const Vec& theta, const Vec& accel_ref);

  /// Both estimates in algorithm order (velocity, then force).
  ObserverOutput update(const Vec& theta, const Vec& tau_u, const Vec& accel_ref, const Mat& M,
                        const Mat& M_inv);

  const ObserverConfig& config() const { return cfg_; }
  int n_joints() const { return n_; }

 private:
  ObserverConfig cfg_;
  int n_;

  // velocity path
  Vec int_hpf_state_;
  Vec lpf_vob_state_;
  Vec prev_accel_ref_;
  Vec prev_theta_vel_;

  // force path, zeta = 1 cascade
  Vec tau_u_lpf_state_;
  Vec lpf_fob_state_;
  Vec temp_prev_;
  Vec temp_lpf_state_;
  Vec prev_tau_u_;
  Vec prev_theta_force_;

  // force path, general zeta
  BilinearSos sos_theta_;
  BilinearSos sos_input_;
};

}  // namespace bilat

#endif  // BILAT_OBSERVER_HPP_
