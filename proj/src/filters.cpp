#include "bilat/filters.hpp"

#include <cmath>

namespace bilat {

void check_filter_config(double omega, double dt) {
  if (!(omega > 0.0) || !(dt > 0.0) || !std::isfinite(omega) || !std::isfinite(dt)) {
    throw UsageError("filter needs positive finite omega and dt");
  }
  if (omega * dt >= 2.0) {
    throw UsageError("omega*dt >= 2: cut-off too close to Nyquist for the bilinear recurrence");
  }
}

double lpf1_step(double y_prev, double x_k, double x_prev, double omega, double dt) {
  const double wt = omega * dt;
  return (2.0 - wt) / (2.0 + wt) * y_prev + wt / (2.0 + wt) * (x_k + x_prev);
}

Vec lpf1_step(const Vec& y_prev, const Vec& x_k, const Vec& x_prev, double omega, double dt) {
  const double wt = omega * dt;
  return (2.0 - wt) / (2.0 + wt) * y_prev + wt / (2.0 + wt) * (x_k + x_prev);
}

double integ_hpf_step(double y_prev, double x_k, double x_prev, double omega, double dt) {
  const double wt = omega * dt;
  return (2.0 - wt) / (2.0 + wt) * y_prev + dt / (2.0 + wt) * (x_k + x_prev);
}

Vec integ_hpf_step(const Vec& y_prev, const Vec& x_k, const Vec& x_prev, double omega, double dt) {
  const double wt = omega * dt;
  return (2.0 - wt) / (2.0 + wt) * y_prev + dt / (2.0 + wt) * (x_k + x_prev);
}

BilinearSos::BilinearSos(double b2, double b1, double b0, double a1, double a0, double dt,
                         int n_channels)
    : n_(n_channels) {
  if (!(dt > 0.0) || n_channels < 1) throw UsageError("bad BilinearSos config");
  const double K = 2.0 / dt;
  const double d0 = K * K + a1 * K + a0;
  if (d0 == 0.0) throw UsageError("degenerate BilinearSos denominator");
  bz_[0] = (b2 * K * K + b1 * K + b0) / d0;
  bz_[1] = (-2.0 * b2 * K * K + 2.0 * b0) / d0;
  bz_[2] = (b2 * K * K - b1 * K + b0) / d0;
  az_[0] = (-2.0 * K * K + 2.0 * a0) / d0;
  az_[1] = (K * K - a1 * K + a0) / d0;
  x_hist_ = Mat::Zero(n_, 2);
  y_hist_ = Mat::Zero(n_, 2);
}

Vec BilinearSos::step(const Vec& x) {
  if (x.size() != n_) throw UsageError("BilinearSos channel count mismatch");
  Vec y = bz_[0] * x + bz_[1] * x_hist_.col(0) + bz_[2] * x_hist_.col(1) -
          az_[0] * y_hist_.col(0) - az_[1] * y_hist_.col(1);
  x_hist_.col(1) = x_hist_.col(0);
  x_hist_.col(0) = x;
  y_hist_.col(1) = y_hist_.col(0);
  y_hist_.col(0) = y;
  return y;
}

void BilinearSos::reset() {
  x_hist_.setZero();
  y_hist_.setZero();
}

PseudoDiff::PseudoDiff(double omega, double dt, int n_channels) : omega_(omega), dt_(dt) {
  check_filter_config(omega, dt);
  lpf_state_ = Vec::Zero(n_channels);
  x_prev_ = Vec::Zero(n_channels);
}

Vec PseudoDiff::step(const Vec& x) {
  if (x.size() != lpf_state_.size()) throw UsageError("PseudoDiff channel count mismatch");
  lpf_state_ = lpf1_step(lpf_state_, x, x_prev_, omega_, dt_);
  x_prev_ = x;
  return omega_ * (x - lpf_state_);
}

void PseudoDiff::reset() {
  lpf_state_.setZero();
  x_prev_.setZero();
}

}  // namespace bilat
