#ifndef BILAT_FILTERS_HPP_
#define BILAT_FILTERS_HPP_

#include "bilat/model.hpp"
#include "bilat/types.hpp"

namespace bilat {

/// One step of the bilinear-transform discretization of omega/(s+omega):
///   y[k] = (2 - wT)/(2 + wT) y[k-1] + wT/(2 + wT) (x[k] + x[k-1])
/// Unit DC gain. Valid for 0 < omega*dt < 2 (pole well inside the unit
/// circle, warping negligible).
double lpf1_step(double y_prev, double x_k, double x_prev, double omega, double dt);
Vec lpf1_step(const Vec& y_prev, const Vec& x_k, const Vec& x_prev, double omega, double dt);

/// One step of 1/(s+omega) under the same transform:
///   y[k] = (2 - wT)/(2 + wT) y[k-1] + T/(2 + wT) (x[k] + x[k-1])
/// Applied to an acceleration reference this realizes the
/// integral-plus-first-order-HPF term of the velocity estimate.
double integ_hpf_step(double y_prev, double x_k, double x_prev, double omega, double dt);
Vec integ_hpf_step(const Vec& y_prev, const Vec& x_k, const Vec& x_prev, double omega, double dt);

void check_filter_config(double omega, double dt);  // throws UsageError

/// Second-order section obtained by bilinear substitution from
/// (b2 s^2 + b1 s + b0) / (s^2 + a1 s + a0). Direct form I per channel.
/// Used for the general-damping observer path and by test oracles.
class BilinearSos {
 public:
  BilinearSos() = default;
  BilinearSos(double b2, double b1, double b0, double a1, double a0, double dt, int n_channels);

  Vec step(const Vec& x);
  void reset();

  double dz0() const { return bz_[0]; }  // direct feedthrough in z

 private:
  double bz_[3] = {0, 0, 0};  // z^0, z^-1, z^-2 numerator
  double az_[2] = {0, 0};     // z^-1, z^-2 denominator (monic)
  Mat x_hist_;                // n x 2
  Mat y_hist_;
  int n_ = 0;
};

/// Stateful first-order pseudo-differentiator, y = omega (x - LPF(x)),
/// i.e. (omega s)/(s + omega). The classic filtered numeric derivative.
class PseudoDiff {
 public:
  PseudoDiff() = default;
  PseudoDiff(double omega, double dt, int n_channels);

  Vec step(const Vec& x);
  void reset();

 private:
  double omega_ = 0.0;
  double dt_ = 0.0;
  Vec lpf_state_;
  Vec x_prev_;
};

}  // namespace bilat

#endif  // BILAT_FILTERS_HPP_
