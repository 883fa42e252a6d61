#ifndef BILAT_DYNAMICS_HPP_
#define BILAT_DYNAMICS_HPP_

#include <utility>

#include "bilat/model.hpp"
#include "bilat/types.hpp"

namespace bilat {

/// tau = M(q) qdd + C(q, qd) qd + D qd + g(q), recursive Newton-Euler.
Vec inverse_dynamics(const ChainModel& model, const Vec& q, const Vec& qd, const Vec& qdd);

/// Same recursion evaluated with explicit link parameters instead of the
/// model's own phi. The dynamics are linear in these parameters.
Vec inverse_dynamics_with_params(const ChainModel& model, const std::vector<LinkParams>& links,
                                 const Vec& q, const Vec& qd, const Vec& qdd);

/// Joint-space inertia matrix, column j = ID(q, 0, e_j) - ID(q, 0, 0).
/// Symmetric positive definite for physically valid parameters.
Mat mass_matrix(const ChainModel& model, const Vec& q);

/// h(q, qd) = C qd + D qd + g = ID(q, qd, 0).
Vec bias_forces(const ChainModel& model, const Vec& q, const Vec& qd);

/// Gravity torque g(q) = ID(q, 0, 0).
Vec gravity_torque(const ChainModel& model, const Vec& q);

/// Coriolis/centrifugal matrix from Christoffel symbols of M, with
/// dM/dq by central differences. Satisfies the skew symmetry of
/// (Mdot - 2C) by construction.
Mat coriolis_matrix(const ChainModel& model, const Vec& q, const Vec& qd, double fd_step = 1e-5);

/// Regressor Y with Y * phi = ID(q, qd, qdd), built column-by-column by
/// evaluating the inverse dynamics on unit-basis parameter vectors.
Mat regressor(const ChainModel& model, const Vec& q, const Vec& qd, const Vec& qdd);

/// qdd = M(q)^{-1} (tau - h(q, qd)). Throws DomainFault when the inertia
/// condition number exceeds cond_cap.
Vec forward_dynamics(const ChainModel& model, const Vec& q, const Vec& qd, const Vec& tau,
                     double cond_cap = 1e8);

/// One semi-implicit Euler step: qd' = qd + qdd dt, q' = q + qd' dt.
std::pair<Vec, Vec> integrate_step(const ChainModel& model, const Vec& q, const Vec& qd,
                                   const Vec& tau, double dt);

}  // namespace bilat

#endif  // BILAT_DYNAMICS_HPP_
