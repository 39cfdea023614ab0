#pragma once

#include "gpdyn/robot_model.hpp"
#include "gpdyn/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace gpdyn::test {

inline RobotModel load_builtin(const std::string& name) {
  return resolve_robot(name);
}

/// Deterministic random joint vectors in [-range, range].
class StateSampler {
public:
  explicit StateSampler(uint64_t seed) : rng_(seed) {}

  Vec uniform(int n, double range) {
    Vec v(n);
    std::uniform_real_distribution<double> dist(-range, range);
    for (int i = 0; i < n; ++i) v[i] = dist(rng_);
    return v;
  }

private:
  std::mt19937_64 rng_;
};

/// Independent closed-form Lagrangian dynamics of the planar 2R arm
/// (links in the x-y plane, gravity -g0 along y, COMs on the link x axes).
/// Used as the oracle the recursive implementation is checked against.
struct Planar2Oracle {
  double m1, m2;    // link masses
  double a1, a2;    // link lengths
  double lc1, lc2;  // COM distances from the respective joints
  double iz1, iz2;  // inertias about the COM, z axis
  double g0;        // gravity magnitude

  explicit Planar2Oracle(const RobotModel& model) {
    m1 = model.links[0].mass;
    m2 = model.links[1].mass;
    a1 = model.joints[0].dh.a;
    a2 = model.joints[1].dh.a;
    lc1 = a1 + model.links[0].com[0];
    lc2 = a2 + model.links[1].com[0];
    iz1 = model.links[0].inertia_com(2, 2);
    iz2 = model.links[1].inertia_com(2, 2);
    g0 = -model.gravity[1];
  }

  Mat inertia(const Vec& q) const {
    const double c2 = std::cos(q[1]);
    Mat b(2, 2);
    b(0, 0) = iz1 + m1 * lc1 * lc1 + iz2 +
              m2 * (a1 * a1 + lc2 * lc2 + 2.0 * a1 * lc2 * c2);
    b(0, 1) = iz2 + m2 * (lc2 * lc2 + a1 * lc2 * c2);
    b(1, 0) = b(0, 1);
    b(1, 1) = iz2 + m2 * lc2 * lc2;
    return b;
  }

  Vec coriolis(const Vec& q, const Vec& qd) const {
    const double h = -m2 * a1 * lc2 * std::sin(q[1]);
    Vec c(2);
    c[0] = h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]);
    c[1] = -h * qd[0] * qd[0];
    return c;
  }

  Vec gravity(const Vec& q) const {
    Vec g(2);
    g[0] = (m1 * lc1 + m2 * a1) * g0 * std::cos(q[0]) +
           m2 * lc2 * g0 * std::cos(q[0] + q[1]);
    g[1] = m2 * lc2 * g0 * std::cos(q[0] + q[1]);
    return g;
  }

  Vec torque(const Vec& q, const Vec& qd, const Vec& qdd) const {
    return inertia(q) * qdd + coriolis(q, qd) + gravity(q);
  }
};

}  // namespace gpdyn::test
