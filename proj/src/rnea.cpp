#include "gpdyn/rnea.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace gpdyn {
namespace {

void check_dims(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd) {
  const int n = model.dof();
  require(q.size() == n, "q dimension does not match robot DoF");
  require(qd.size() == n, "qd dimension does not match robot DoF");
  require(qdd.size() == n, "qdd dimension does not match robot DoF");
  require_finite(q, "q");
  require_finite(qd, "qd");
  require_finite(qdd, "qdd");
}

// Kinematic state of each link, all in world coordinates.
struct LinkState {
  Mat3 rot;       // link frame orientation
  Vec3 origin;    // link frame origin
  Vec3 axis;      // joint axis (z of the parent frame)
  Vec3 omega;     // angular velocity
  Vec3 omega_d;   // angular acceleration
  Vec3 acc;       // linear acceleration of the frame origin
};

// Standard DH link transform: Rz(theta) Tz(d) Tx(a) Rx(alpha).
void dh_transform(const DhParams& dh, JointKind kind, double qi, Mat3& rot, Vec3& trans) {
  const double theta = (kind == JointKind::Revolute) ? qi + dh.theta_offset : dh.theta_offset;
  const double d = (kind == JointKind::Prismatic) ? qi + dh.d : dh.d;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(dh.alpha), sa = std::sin(dh.alpha);
  rot << ct, -st * ca,  st * sa,
         st,  ct * ca, -ct * sa,
         0.0,      sa,       ca;
  trans << dh.a * ct, dh.a * st, d;
}

std::vector<LinkState> propagate(const RobotModel& model, const Vec& q, const Vec& qd,
                                 const Vec& qdd) {
  const int n = model.dof();
  std::vector<LinkState> s(static_cast<size_t>(n));

  Mat3 rot_prev = Mat3::Identity();
  Vec3 org_prev = Vec3::Zero();
  Vec3 omega_prev = Vec3::Zero();
  Vec3 omega_d_prev = Vec3::Zero();
  Vec3 acc_prev = -model.gravity;  // gravity via base acceleration

  for (int i = 0; i < n; ++i) {
    const Joint& joint = model.joints[static_cast<size_t>(i)];
    Mat3 rel_rot;
    Vec3 rel_trans;
    dh_transform(joint.dh, joint.kind, q[i], rel_rot, rel_trans);

    LinkState& li = s[static_cast<size_t>(i)];
    li.axis = rot_prev.col(2);
    li.rot = rot_prev * rel_rot;
    li.origin = org_prev + rot_prev * rel_trans;
    const Vec3 r = li.origin - org_prev;

    if (joint.kind == JointKind::Revolute) {
      li.omega = omega_prev + qd[i] * li.axis;
      li.omega_d = omega_d_prev + qdd[i] * li.axis + omega_prev.cross(qd[i] * li.axis);
      li.acc = acc_prev + li.omega_d.cross(r) + li.omega.cross(li.omega.cross(r));
    } else {
      li.omega = omega_prev;
      li.omega_d = omega_d_prev;
      li.acc = acc_prev + li.omega_d.cross(r) + li.omega.cross(li.omega.cross(r)) +
               2.0 * li.omega.cross(qd[i] * li.axis) + qdd[i] * li.axis;
    }

    rot_prev = li.rot;
    org_prev = li.origin;
    omega_prev = li.omega;
    omega_d_prev = li.omega_d;
    acc_prev = li.acc;
  }
  return s;
}

}  // namespace

std::vector<LinkParams> barycentric_params(const RobotModel& model) {
  std::vector<LinkParams> out;
  out.reserve(model.links.size());
  for (const LinkInertia& l : model.links) {
    LinkParams p;
    p.mass = l.mass;
    p.first_moment = l.mass * l.com;
    // parallel axis: I_origin = I_com + m (|c|^2 I - c c^T)
    p.inertia_origin = l.inertia_com +
        l.mass * (l.com.squaredNorm() * Mat3::Identity() - l.com * l.com.transpose());
    out.push_back(p);
  }
  return out;
}

Vec inertial_parameter_vector(const RobotModel& model) {
  const auto params = barycentric_params(model);
  Vec w(kParamsPerLink * model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    const LinkParams& p = params[static_cast<size_t>(i)];
    const int o = kParamsPerLink * i;
    w[o] = p.mass;
    w.segment<3>(o + 1) = p.first_moment;
    const Mat3& I = p.inertia_origin;
    w[o + 4] = I(0, 0); w[o + 5] = I(0, 1); w[o + 6] = I(0, 2);
    w[o + 7] = I(1, 1); w[o + 8] = I(1, 2); w[o + 9] = I(2, 2);
  }
  return w;
}

std::vector<LinkParams> unstack_params(const Vec& w, int dof) {
  require(w.size() == kParamsPerLink * dof, "parameter vector length must be 10*DoF");
  std::vector<LinkParams> out(static_cast<size_t>(dof));
  for (int i = 0; i < dof; ++i) {
    LinkParams& p = out[static_cast<size_t>(i)];
    const int o = kParamsPerLink * i;
    p.mass = w[o];
    p.first_moment = w.segment<3>(o + 1);
    p.inertia_origin << w[o + 4], w[o + 5], w[o + 6],
                        w[o + 5], w[o + 7], w[o + 8],
                        w[o + 6], w[o + 8], w[o + 9];
  }
  return out;
}

Vec inverse_dynamics_params(const RobotModel& model, const std::vector<LinkParams>& params,
                            const Vec& q, const Vec& qd, const Vec& qdd) {
  check_dims(model, q, qd, qdd);
  const int n = model.dof();
  require(static_cast<int>(params.size()) == n, "one parameter record per link required");

  const auto s = propagate(model, q, qd, qdd);

  // Net inertial wrench of each link: force, and moment about the link origin.
  std::vector<Vec3> force(static_cast<size_t>(n)), moment(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const LinkState& li = s[static_cast<size_t>(i)];
    const LinkParams& p = params[static_cast<size_t>(i)];
    const Vec3 h = li.rot * p.first_moment;
    const Mat3 inertia_w = li.rot * p.inertia_origin * li.rot.transpose();
    force[static_cast<size_t>(i)] =
        p.mass * li.acc + li.omega_d.cross(h) + li.omega.cross(li.omega.cross(h));
    moment[static_cast<size_t>(i)] =
        inertia_w * li.omega_d + li.omega.cross(inertia_w * li.omega) + h.cross(li.acc);
  }

  Vec tau(n);
  Vec3 f_child = Vec3::Zero();   // force transmitted from child subtree
  Vec3 n_child = Vec3::Zero();   // moment about the child's joint point
  for (int i = n - 1; i >= 0; --i) {
    const LinkState& li = s[static_cast<size_t>(i)];
    const Vec3 joint_point = (i == 0) ? Vec3::Zero() : s[static_cast<size_t>(i - 1)].origin;
    const Vec3 r = li.origin - joint_point;

    const Vec3 f = f_child + force[static_cast<size_t>(i)];
    // moment[i] is about li.origin; the child moment is about li.origin too
    // (the child's joint point). Shift both to this link's joint point.
    const Vec3 m_joint = n_child + moment[static_cast<size_t>(i)] + r.cross(f);

    tau[i] = (model.joints[static_cast<size_t>(i)].kind == JointKind::Revolute)
                 ? li.axis.dot(m_joint)
                 : li.axis.dot(f);
    f_child = f;
    n_child = m_joint;
  }
  return tau;
}

Vec inverse_dynamics(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd) {
  Vec tau = inverse_dynamics_params(model, barycentric_params(model), q, qd, qdd);
  if (model.has_friction()) {
    for (int i = 0; i < model.dof(); ++i) {
      const JointFriction& f = (*model.friction)[static_cast<size_t>(i)];
      tau[i] += f.viscous * qd[i];
      if (qd[i] > 0.0) tau[i] += f.coulomb;
      else if (qd[i] < 0.0) tau[i] -= f.coulomb;
    }
  }
  return tau;
}

Vec gravity_torque(const RobotModel& model, const Vec& q) {
  const Vec zero = Vec::Zero(model.dof());
  return inverse_dynamics_params(model, barycentric_params(model), q, zero, zero);
}

Mat mass_matrix(const RobotModel& model, const Vec& q) {
  const int n = model.dof();
  const Vec zero = Vec::Zero(n);
  const Vec g = gravity_torque(model, q);
  const auto params = barycentric_params(model);
  Mat b(n, n);
  for (int j = 0; j < n; ++j) {
    Vec ej = Vec::Zero(n);
    ej[j] = 1.0;
    b.col(j) = inverse_dynamics_params(model, params, q, zero, ej) - g;
  }
  return b;
}

Vec bias_torque(const RobotModel& model, const Vec& q, const Vec& qd) {
  return inverse_dynamics(model, q, qd, Vec::Zero(model.dof()));
}

Vec forward_dynamics(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& tau) {
  require(tau.size() == model.dof(), "tau dimension does not match robot DoF");
  require_finite(tau, "tau");
  const Mat b = mass_matrix(model, q);
  Eigen::LLT<Mat> llt(b);
  if (llt.info() != Eigen::Success)
    throw NumericalError("inertia matrix is not positive definite at this configuration");
  return llt.solve(tau - bias_torque(model, q, qd));
}

Mat regressor(const RobotModel& model, const Vec& q, const Vec& qd, const Vec& qdd) {
  if (model.has_friction())
    throw UnsupportedError("regressor is defined for friction-free models only");
  check_dims(model, q, qd, qdd);
  const int n = model.dof();
  Mat phi(n, kParamsPerLink * n);
  std::vector<LinkParams> basis(static_cast<size_t>(n));  // all zero
  for (int link = 0; link < n; ++link) {
    LinkParams& p = basis[static_cast<size_t>(link)];
    for (int k = 0; k < kParamsPerLink; ++k) {
      Vec e = Vec::Zero(kParamsPerLink);
      e[k] = 1.0;
      p.mass = e[0];
      p.first_moment = e.segment<3>(1);
      p.inertia_origin << e[4], e[5], e[6],
                          e[5], e[7], e[8],
                          e[6], e[8], e[9];
      phi.col(kParamsPerLink * link + k) = inverse_dynamics_params(model, basis, q, qd, qdd);
    }
    p = LinkParams{};  // reset before moving to the next link
  }
  return phi;
}

}  // namespace gpdyn
