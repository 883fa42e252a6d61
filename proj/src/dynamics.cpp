#include "bilat/dynamics.hpp"

#include <cmath>
#include <limits>

namespace bilat {

namespace {

void check_state(const ChainModel& model, const Vec& q, const Vec& qd, const Vec& qdd) {
  if (q.size() != model.n_joints || qd.size() != model.n_joints || qdd.size() != model.n_joints) {
    throw UsageError("joint vector length does not match chain");
  }
}

// Rotation and frame-origin offset of frame i in frame i-1 for the
// modified-DH row (RotX(alpha) TransX(a) RotZ(theta) TransZ(d)).
void frame_transform(const DhRow& row, double q, Mat3& R, Vec3& p) {
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  const double th = row.theta_offset + q;
  const double ct = std::cos(th), st = std::sin(th);
  R << ct, -st, 0.0,
       ca * st, ca * ct, -sa,
       sa * st, sa * ct, ca;
  p << row.a, -sa * row.d, ca * row.d;
}

}  // namespace

Vec inverse_dynamics_with_params(const ChainModel& model, const std::vector<LinkParams>& links,
                                 const Vec& q, const Vec& qd, const Vec& qdd) {
  check_state(model, q, qd, qdd);
  const int n = model.n_joints;
  const Vec3 ez = Vec3::UnitZ();

  std::vector<Mat3> R(n);   // R[i]: frame i+1 -> frame i
  std::vector<Vec3> p(n);   // origin of frame i+1 in frame i
  std::vector<Vec3> omega(n), domega(n), acc(n);
  std::vector<Vec3> F(n), N(n);

  Vec3 w = Vec3::Zero();
  Vec3 dw = Vec3::Zero();
  Vec3 a = -model.gravity;  // base acceleration trick
  for (int i = 0; i < n; ++i) {
    frame_transform(model.frames[i], q[i], R[i], p[i]);
    const Mat3 Rt = R[i].transpose();
    const Vec3 w_in = Rt * w;
    const Vec3 a_in = Rt * (a + dw.cross(p[i]) + w.cross(w.cross(p[i])));
    const Vec3 dw_in = Rt * dw + qdd[i] * ez + w_in.cross(qd[i] * ez);
    w = w_in + qd[i] * ez;
    dw = dw_in;
    a = a_in;
    omega[i] = w;
    domega[i] = dw;
    acc[i] = a;

    const LinkParams& lp = links[i];
    F[i] = lp.mass * a + dw.cross(lp.first_moment) + w.cross(w.cross(lp.first_moment));
    N[i] = lp.inertia * dw + w.cross(lp.inertia * w) + lp.first_moment.cross(a);
  }

  Vec tau(n);
  Vec3 f = Vec3::Zero();
  Vec3 nmom = Vec3::Zero();
  for (int i = n - 1; i >= 0; --i) {
    if (i == n - 1) {
      f = F[i];
      nmom = N[i];
    } else {
      const Vec3 f_child = R[i + 1] * f;
      nmom = N[i] + R[i + 1] * nmom + p[i + 1].cross(f_child);
      f = F[i] + f_child;
    }
    tau[i] = nmom.dot(ez) + links[i].rotor_inertia * qdd[i] + links[i].viscous_friction * qd[i];
  }
  return tau;
}

Vec inverse_dynamics(const ChainModel& model, const Vec& q, const Vec& qd, const Vec& qdd) {
  return inverse_dynamics_with_params(model, model.assemble_links(), q, qd, qdd);
}

Mat mass_matrix(const ChainModel& model, const Vec& q) {
  const int n = model.n_joints;
  const Vec zero = Vec::Zero(n);
  const auto links = model.assemble_links();
  const Vec g = inverse_dynamics_with_params(model, links, q, zero, zero);
  Mat M(n, n);
  Vec ej = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    ej[j] = 1.0;
    M.col(j) = inverse_dynamics_with_params(model, links, q, zero, ej) - g;
    ej[j] = 0.0;
  }
  return M;
}

Vec bias_forces(const ChainModel& model, const Vec& q, const Vec& qd) {
  return inverse_dynamics(model, q, qd, Vec::Zero(model.n_joints));
}

Vec gravity_torque(const ChainModel& model, const Vec& q) {
  const Vec zero = Vec::Zero(model.n_joints);
  return inverse_dynamics(model, q, zero, zero);
}

Mat coriolis_matrix(const ChainModel& model, const Vec& q, const Vec& qd, double fd_step) {
  const int n = model.n_joints;
  // dM/dq_k by central differences.
  std::vector<Mat> dM(n);
  Vec qp = q;
  for (int k = 0; k < n; ++k) {
    qp[k] = q[k] + fd_step;
    const Mat Mp = mass_matrix(model, qp);
    qp[k] = q[k] - fd_step;
    const Mat Mm = mass_matrix(model, qp);
    qp[k] = q[k];
    dM[k] = (Mp - Mm) / (2.0 * fd_step);
  }
  Mat C = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double cij = 0.0;
      for (int k = 0; k < n; ++k) {
        cij += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * qd[k];
      }
      C(i, j) = cij;
    }
  }
  return C;
}

Mat regressor(const ChainModel& model, const Vec& q, const Vec& qd, const Vec& qdd) {
  const int n = model.n_joints;
  const int np = model.phi.size();
  Mat Y(n, np);
  Vec basis = Vec::Zero(np);
  for (int j = 0; j < np; ++j) {
    basis[j] = 1.0;
    Y.col(j) = inverse_dynamics_with_params(model, model.assemble_links(basis), q, qd, qdd);
    basis[j] = 0.0;
  }
  return Y;
}

Vec forward_dynamics(const ChainModel& model, const Vec& q, const Vec& qd, const Vec& tau,
                     double cond_cap) {
  const Mat M = mass_matrix(model, q);
  Eigen::LDLT<Mat> ldlt(M);
  const double rcond = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || 1.0 / rcond > cond_cap) {
    throw DomainFault("singular inertia matrix, condition number " +
                      std::to_string(rcond > 0.0 ? 1.0 / rcond
                                                 : std::numeric_limits<double>::infinity()));
  }
  return ldlt.solve(tau - bias_forces(model, q, qd));
}

std::pair<Vec, Vec> integrate_step(const ChainModel& model, const Vec& q, const Vec& qd,
                                   const Vec& tau, double dt) {
  if (!(dt > 0.0) || dt > 1e-3) throw UsageError("integrate_step needs 0 < dt <= 1 ms");
  const Vec qdd = forward_dynamics(model, q, qd, tau);
  Vec qd_next = qd + qdd * dt;
  Vec q_next = q + qd_next * dt;
  return {std::move(q_next), std::move(qd_next)};
}

}  // namespace bilat
