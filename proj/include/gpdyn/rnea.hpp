#pragma once

#include "gpdyn/robot_model.hpp"
#include "gpdyn/types.hpp"

#include <vector>

namespace gpdyn {

/// Barycentric inertial parameters of one link: the quantities the joint
/// torques depend on linearly. The inertia tensor here is expressed about
/// the link-frame origin (not the center of mass).
struct LinkParams {
  double mass = 0.0;
  Vec3 first_moment = Vec3::Zero();      ///< mass * com, link frame
  Mat3 inertia_origin = Mat3::Zero();    ///< inertia about the link-frame origin
};

/// Number of inertial parameters per link (mass, 3 first moments,
/// 6 inertia entries).
inline constexpr int kParamsPerLink = 10;

/// Converts the model's (mass, com, inertia_com) description into
/// barycentric parameters via the parallel-axis theorem.
std::vector<LinkParams> barycentric_params(const RobotModel& model);

/// Stacked parameter vector w of length 10*n, per link:
/// [m, hx, hy, hz, Ixx, Ixy, Ixz, Iyy, Iyz, Izz] with I about the
/// link-frame origin.
Vec inertial_parameter_vector(const RobotModel& model);

/// Unstacks a 10*n vector into per-link barycentric parameters.
std::vector<LinkParams> unstack_params(const Vec& w, int dof);

/// Recursive Newton-Euler over explicit barycentric parameters; friction
/// is never applied on this path. Torques are exactly linear in `params`.
Vec inverse_dynamics_params(const RobotModel& model, const std::vector<LinkParams>& params,
                            const Vec& q, const Vec& qd, const Vec& qdd);

/// Joint torques required to realize (q, qd, qdd); includes friction when
/// the model enables it.
Vec inverse_dynamics(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd);

/// Torques with qd = qdd = 0, friction off. Depends on q only.
Vec gravity_torque(const RobotModel& model, const Vec& q);

/// Configuration-dependent inertia matrix, built column by column from
/// unit-acceleration inverse-dynamics calls. Symmetric positive definite
/// for valid models.
Mat mass_matrix(const RobotModel& model, const Vec& q);

/// Coriolis/centrifugal + gravity (+ friction) torques: inverse dynamics
/// with qdd = 0.
Vec bias_torque(const RobotModel& model, const Vec& q, const Vec& qd);

/// Accelerations produced by applied torques: solves
/// B(q) qdd = tau - n(q, qd) by Cholesky factorization.
Vec forward_dynamics(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& tau);

/// Regressor matrix Phi with tau = Phi * w for the barycentric parameter
/// vector w. Requires friction disabled.
Mat regressor(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd);

}  // namespace gpdyn
