#include "bilat/identify.hpp"

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "bilat/dynamics.hpp"
#include "bilat/filters.hpp"

namespace bilat {

void TrajectoryData::validate(int n_joints) const {
  if (!(sample_hz > 0.0)) throw UsageError("trajectory sample rate must be positive");
  if (q.cols() != n_joints || tau.cols() != n_joints) {
    throw UsageError("trajectory column count does not match chain");
  }
  if (q.rows() != tau.rows() || q.rows() < 3) throw UsageError("trajectory too short");
  if (!q.allFinite() || !tau.allFinite()) throw DomainFault("non-finite trajectory data");
}

namespace {

Mat biquad_lowpass_forward(const Mat& x, double omega, double dt) {
  // Second-order Butterworth: omega^2 / (s^2 + sqrt(2) omega s + omega^2).
  BilinearSos f(0.0, 0.0, omega * omega, std::sqrt(2.0) * omega, omega * omega, dt,
                static_cast<int>(x.cols()));
  Mat y(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    y.row(k) = f.step(x.row(k).transpose()).transpose();
  }
  return y;
}

Mat reverse_rows(const Mat& x) { return x.colwise().reverse(); }

}  // namespace

Mat zero_phase_lowpass(const Mat& x, double cutoff_hz, double sample_hz) {
  if (!(cutoff_hz > 0.0) || !(sample_hz > 0.0) || cutoff_hz >= sample_hz / 2.0) {
    throw UsageError("zero_phase_lowpass needs 0 < cutoff < Nyquist");
  }
  if (x.rows() < 3) throw UsageError("zero_phase_lowpass input too short");
  const double dt = 1.0 / sample_hz;
  const double omega = 2.0 * M_PI * cutoff_hz;

  // Odd reflection padding on both ends, as filtfilt does.
  const Eigen::Index pad =
      std::min<Eigen::Index>(x.rows() - 1,
                             static_cast<Eigen::Index>(std::ceil(3.0 * sample_hz / cutoff_hz)));
  Mat padded(x.rows() + 2 * pad, x.cols());
  for (Eigen::Index i = 0; i < pad; ++i) {
    padded.row(i) = 2.0 * x.row(0) - x.row(pad - i);
    padded.row(padded.rows() - 1 - i) = 2.0 * x.row(x.rows() - 1) - x.row(x.rows() - 2 - (pad - 1 - i));
  }
  padded.middleRows(pad, x.rows()) = x;

  Mat y = biquad_lowpass_forward(padded, omega, dt);
  y = reverse_rows(y);
  y = biquad_lowpass_forward(y, omega, dt);
  y = reverse_rows(y);
  return y.middleRows(pad, x.rows());
}

IdentDataset prepare_dataset(const TrajectoryData& raw, double target_hz) {
  if (!(target_hz > 0.0)) throw UsageError("target rate must be positive");
  const double ratio = raw.sample_hz / target_hz;
  const long factor = std::lround(ratio);
  if (factor < 1 || std::abs(ratio - factor) > 1e-9) {
    throw UsageError("source rate must be an integer multiple of the target rate");
  }
  const double cutoff_hz = 0.4 * target_hz;
  const Mat qf = zero_phase_lowpass(raw.q, cutoff_hz, raw.sample_hz);
  const Mat tauf = zero_phase_lowpass(raw.tau, cutoff_hz, raw.sample_hz);

  const double dt = 1.0 / raw.sample_hz;
  const Eigen::Index rows = qf.rows();

  IdentDataset out;
  out.sample_hz = target_hz;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = factor; k + 1 < rows; k += factor) keep.push_back(k);
  if (keep.empty()) throw UsageError("trajectory too short for the target rate");

  const Eigen::Index n = qf.cols();
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  out.q.resize(m, n);
  out.qd.resize(m, n);
  out.qdd.resize(m, n);
  out.tau.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index k = keep[static_cast<std::size_t>(i)];
    out.q.row(i) = qf.row(k);
    out.qd.row(i) = (qf.row(k + 1) - qf.row(k - 1)) / (2.0 * dt);
    out.qdd.row(i) = (qf.row(k + 1) - 2.0 * qf.row(k) + qf.row(k - 1)) / (dt * dt);
    out.tau.row(i) = tauf.row(k);
  }
  return out;
}

Mat stack_filtered_regressor(const ChainModel& model, const TrajectoryData& raw, double target_hz,
                             Vec* y) {
  const int n = model.n_joints;
  raw.validate(n);
  if (!(target_hz > 0.0)) throw UsageError("target rate must be positive");
  const double ratio = raw.sample_hz / target_hz;
  const long factor = std::lround(ratio);
  if (factor < 1 || std::abs(ratio - factor) > 1e-9) {
    throw UsageError("source rate must be an integer multiple of the target rate");
  }
  const Eigen::Index rows = raw.q.rows();
  if (rows < 5 + 2 * factor) throw UsageError("trajectory too short for the target rate");
  const double dt = 1.0 / raw.sample_hz;
  const int p = model.phi.size();

  // Fourth-order central differences on the raw angle stream; the two
  // samples trimmed at each end keep the stencil interior.
  const Eigen::Index t_rows = rows - 4;
  Mat big(t_rows, static_cast<Eigen::Index>(n) * p);  // time-major channels
  Mat tau_in(t_rows, n);
  Vec q(n), qd(n), qdd(n);
  for (Eigen::Index k = 2; k + 2 < rows; ++k) {
    q = raw.q.row(k).transpose();
    qd = (-raw.q.row(k + 2) + 8.0 * raw.q.row(k + 1) - 8.0 * raw.q.row(k - 1) +
          raw.q.row(k - 2))
             .transpose() /
         (12.0 * dt);
    qdd = (-raw.q.row(k + 2) + 16.0 * raw.q.row(k + 1) - 30.0 * raw.q.row(k) +
           16.0 * raw.q.row(k - 1) - raw.q.row(k - 2))
              .transpose() /
          (12.0 * dt * dt);
    const Mat Yk = regressor(model, q, qd, qdd);
    for (int j = 0; j < n; ++j) {
      big.row(k - 2).segment(static_cast<Eigen::Index>(j) * p, p) = Yk.row(j);
    }
    tau_in.row(k - 2) = raw.tau.row(k);
  }

  const double cutoff_hz = 0.4 * target_hz;
  const Mat big_f = zero_phase_lowpass(big, cutoff_hz, raw.sample_hz);
  const Mat tau_f = zero_phase_lowpass(tau_in, cutoff_hz, raw.sample_hz);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = factor; k < t_rows; k += factor) keep.push_back(k);
  if (keep.empty()) throw UsageError("trajectory too short for the target rate");
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());

  // Per-joint torque scale for row weighting. Sensor noise scales with each
  // joint's own torque level, so equalising the joint rows is the proper
  // generalised-least-squares weighting: without it the noisy proximal
  // joints drown the information the precise wrist rows carry.
  Vec scale(n);
  for (int j = 0; j < n; ++j) {
    scale[j] = std::max(std::sqrt(tau_f.col(j).squaredNorm() / static_cast<double>(t_rows)), 1e-6);
  }

  Mat Y(m * n, p);
  if (y) y->resize(m * n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index k = keep[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      Y.row(i * n + j) = big_f.row(k).segment(static_cast<Eigen::Index>(j) * p, p) / scale[j];
      if (y) (*y)[i * n + j] = tau_f(k, j) / scale[j];
    }
  }
  return Y;
}

Mat stack_regressor(const ChainModel& model, const IdentDataset& data, Vec* y) {
  const int n = model.n_joints;
  if (data.q.cols() != n) throw UsageError("dataset column count does not match chain");
  const Eigen::Index m = data.q.rows();
  const int p = model.phi.size();
  Mat Y(m * n, p);
  if (y) y->resize(m * n);
  for (Eigen::Index i = 0; i < m; ++i) {
    Y.middleRows(i * n, n) = regressor(model, data.q.row(i).transpose(),
                                       data.qd.row(i).transpose(), data.qdd.row(i).transpose());
    if (y) y->segment(i * n, n) = data.tau.row(i).transpose();
  }
  return Y;
}

IdentResult least_squares_identify(const ChainModel& model, const Mat& Y, const Vec& y,
                                   double sv_tol) {
  const int p = model.phi.size();
  if (Y.cols() != p) throw UsageError("regressor width does not match phi");
  if (Y.rows() != y.size()) throw UsageError("regressor/torque row mismatch");
  if (Y.rows() < p) throw UsageError("underdetermined identification problem");

  Eigen::BDCSVD<Mat> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double sv_max = sv[0];
  int rank = 0;
  while (rank < sv.size() && sv[rank] > sv_tol * sv_max) ++rank;
  if (rank == 0) throw DomainFault("regressor has no signal");

  const Mat Ur = svd.matrixU().leftCols(rank);
  const Mat Vr = svd.matrixV().leftCols(rank);
  const Vec phi_hat = Vr * (Ur.transpose() * y).cwiseQuotient(sv.head(rank));

  IdentResult r;
  r.phi.names = model.phi.names;
  r.phi.values = phi_hat;
  r.rank = rank;
  r.cond = sv_max / sv[rank - 1];
  r.rms_residual = std::sqrt((Y * phi_hat - y).squaredNorm() / static_cast<double>(y.size()));
  r.identifiable.resize(p);
  for (int j = 0; j < p; ++j) {
    r.identifiable[j] = Vr.row(j).squaredNorm() > 0.99;
  }
  return r;
}

TrajectoryData generate_excitation(const ChainModel& model, const ExcitationConfig& cfg) {
  const int n = model.n_joints;
  if (!(cfg.duration > 0.0) || !(cfg.sample_hz > 0.0)) throw UsageError("bad excitation config");
  if (cfg.freqs_hz.empty()) throw UsageError("excitation needs at least one frequency");
  const Vec offset = cfg.offset.size() > 0 ? cfg.offset : Vec::Zero(n);
  if (offset.size() != n) throw UsageError("excitation offset length mismatch");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uphase(0.0, 2.0 * M_PI);
  Mat phase(static_cast<Eigen::Index>(cfg.freqs_hz.size()), n);
  for (Eigen::Index i = 0; i < phase.rows(); ++i) {
    for (int j = 0; j < n; ++j) phase(i, j) = uphase(rng);
  }

  const long rows = std::lround(cfg.duration * cfg.sample_hz);
  const double dt = 1.0 / cfg.sample_hz;
  TrajectoryData out;
  out.sample_hz = cfg.sample_hz;
  out.q.resize(rows, n);
  out.tau.resize(rows, n);

  Vec q(n), qd(n), qdd(n);
  for (long k = 0; k < rows; ++k) {
    const double t = k * dt;
    q = offset;
    qd.setZero();
    qdd.setZero();
    for (std::size_t i = 0; i < cfg.freqs_hz.size(); ++i) {
      const double w = 2.0 * M_PI * cfg.freqs_hz[i];
      const double A = cfg.amplitude / static_cast<double>(i + 1);
      for (int j = 0; j < n; ++j) {
        const double arg = w * t + phase(static_cast<Eigen::Index>(i), j);
        q[j] += A * std::sin(arg);
        qd[j] += A * w * std::cos(arg);
        qdd[j] -= A * w * w * std::sin(arg);
      }
    }
    out.q.row(k) = q.transpose();
    out.tau.row(k) = inverse_dynamics(model, q, qd, qdd).transpose();
  }

  if (cfg.torque_noise > 0.0 || cfg.angle_noise > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec tau_rms(n);
    for (int j = 0; j < n; ++j) {
      tau_rms[j] = std::sqrt(out.tau.col(j).squaredNorm() / static_cast<double>(rows));
    }
    for (long k = 0; k < rows; ++k) {
      for (int j = 0; j < n; ++j) {
        if (cfg.torque_noise > 0.0) out.tau(k, j) += cfg.torque_noise * tau_rms[j] * gauss(rng);
        if (cfg.angle_noise > 0.0) out.q(k, j) += cfg.angle_noise * gauss(rng);
      }
    }
  }
  return out;
}

}  // namespace bilat
