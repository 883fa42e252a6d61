#ifndef BILAT_IDENTIFY_HPP_
#define BILAT_IDENTIFY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bilat/model.hpp"
#include "bilat/types.hpp"

namespace bilat {

/// Raw sampled trajectory: rows are samples, columns are joints.
struct TrajectoryData {
  double sample_hz = 500.0;
  Mat q;    ///< [rad]
  Mat tau;  ///< motor torque [N*m]

  void validate(int n_joints) const;
};

/// Zero-phase low-pass: a second-order Butterworth biquad run forward and
/// then backward over each column, so the pass band keeps zero phase lag.
/// Ends are padded by reflection to tame the startup transient.
Mat zero_phase_lowpass(const Mat& x, double cutoff_hz, double sample_hz);

/// Filtered, differentiated, decimated data ready for the regressor.
struct IdentDataset {
  double sample_hz = 25.0;
  Mat q, qd, qdd;  ///< derivatives by central differences at the source rate
  Mat tau;
};

/// Anti-alias at 0.4 * target_hz, differentiate at the source rate, then
/// keep every (source/target)-th sample. source/target must be integral.
IdentDataset prepare_dataset(const TrajectoryData& raw, double target_hz);

/// Stacked regressor over all retained samples; y gets the matching
/// stacked torques.
Mat stack_regressor(const ChainModel& model, const IdentDataset& data, Vec* y);

/// Filtered-regression form of the stacking step, the one the identifier
/// uses. The regressor is evaluated at the source rate from raw angles
/// (derivatives by fourth-order central differences), then every regressor
/// column and the torque stream are run through the *same* zero-phase
/// low-pass before decimation. Because the parameter vector is constant,
/// the common filter cancels exactly between Y and tau: torque noise is
/// attenuated without biasing the regression, which separate filtering of
/// angles and torques cannot achieve through the nonlinear dynamics.
Mat stack_filtered_regressor(const ChainModel& model, const TrajectoryData& raw, double target_hz,
                             Vec* y);

struct IdentResult {
  ParamVector phi;                ///< identified values, model ordering
  std::vector<bool> identifiable; ///< per parameter: determined by the data
  int rank = 0;
  double cond = 0.0;              ///< of the retained singular spectrum
  double rms_residual = 0.0;      ///< [N*m]
};

/// Minimum-norm least squares via SVD. Directions with singular values
/// below sv_tol * sv_max are truncated; a parameter counts identifiable
/// when the retained right-singular subspace contains its axis.
IdentResult least_squares_identify(const ChainModel& model, const Mat& Y, const Vec& y,
                                   double sv_tol = 1e-10);

/// Multi-sine excitation for identification experiments. Joint j tracks
///   q_j(t) = offset_j + sum_i A/(i+1) sin(2 pi f_i t + phase_ij)
/// with phases drawn from the seed; torques come from the inverse
/// dynamics of the exact trajectory. Measurement noise is Gaussian:
/// torque_noise is relative to each joint's torque RMS, angle_noise is
/// absolute [rad].
struct ExcitationConfig {
  double duration = 20.0;       ///< [s]
  double sample_hz = 500.0;
  std::vector<double> freqs_hz = {0.3, 0.7, 1.1, 1.7, 2.3, 2.9};
  double amplitude = 0.5;       ///< [rad] of the fundamental
  Vec offset;                   ///< working pose (defaults to zero)
  std::uint64_t seed = 1;
  double torque_noise = 0.0;
  double angle_noise = 0.0;
};

TrajectoryData generate_excitation(const ChainModel& model, const ExcitationConfig& cfg);

}  // namespace bilat

#endif  // BILAT_IDENTIFY_HPP_
