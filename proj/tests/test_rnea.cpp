#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpdyn/rnea.hpp"
#include "helpers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace gpdyn;
using gpdyn::test::Planar2Oracle;
using gpdyn::test::StateSampler;

namespace {
const double kPi = 3.14159265358979323846;

Vec vec1(double x) { Vec v(1); v[0] = x; return v; }
}  // namespace

TEST_CASE("pendulum torques match the closed form") {
  const RobotModel pendulum = resolve_robot("pendulum1");
  // tau = m l^2 qdd + m g l sin(q), m = 1, l = 1
  CHECK(inverse_dynamics(pendulum, vec1(kPi / 2), vec1(0), vec1(0))[0] ==
        doctest::Approx(9.81).epsilon(1e-12));
  CHECK(gravity_torque(pendulum, vec1(0))[0] == doctest::Approx(0.0));
  CHECK(gravity_torque(pendulum, vec1(kPi / 2))[0] == doctest::Approx(9.81));
  CHECK(mass_matrix(pendulum, vec1(0.3))(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  StateSampler sampler(11);
  for (int k = 0; k < 50; ++k) {
    const Vec q = sampler.uniform(1, kPi);
    const Vec qd = sampler.uniform(1, 3.0);
    const Vec qdd = sampler.uniform(1, 10.0);
    const double expected = qdd[0] + 9.81 * std::sin(q[0]);
    CHECK(inverse_dynamics(pendulum, q, qd, qdd)[0] == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("pendulum with no gravity is torque free at rest") {
  RobotModel model = resolve_robot("pendulum1");
  model.gravity.setZero();
  StateSampler sampler(5);
  for (int k = 0; k < 20; ++k) {
    const Vec q = sampler.uniform(1, kPi);
    CHECK(inverse_dynamics(model, q, vec1(0), vec1(0))[0] == doctest::Approx(0.0));
  }
}

TEST_CASE("planar 2R arm matches the closed-form Lagrangian oracle") {
  const RobotModel arm = resolve_robot("planar2");
  const Planar2Oracle oracle(arm);
  StateSampler sampler(17);
  for (int k = 0; k < 1000; ++k) {
    const Vec q = sampler.uniform(2, kPi);
    const Vec qd = sampler.uniform(2, 4.0);
    const Vec qdd = sampler.uniform(2, 20.0);
    const Vec tau = inverse_dynamics(arm, q, qd, qdd);
    const Vec expected = oracle.torque(q, qd, qdd);
    CHECK((tau - expected).cwiseAbs().maxCoeff() <= 1e-9);
  }
  // individual components
  for (int k = 0; k < 100; ++k) {
    const Vec q = sampler.uniform(2, kPi);
    const Vec qd = sampler.uniform(2, 4.0);
    CHECK((mass_matrix(arm, q) - oracle.inertia(q)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((gravity_torque(arm, q) - oracle.gravity(q)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((bias_torque(arm, q, qd) - oracle.coriolis(q, qd) - oracle.gravity(q))
              .cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("mass matrix is symmetric positive definite on all built-in robots") {
  for (const char* name : {"pendulum1", "planar2", "spatial3", "chain6", "chain7"}) {
    const RobotModel model = resolve_robot(name);
    StateSampler sampler(23);
    for (int k = 0; k < 25; ++k) {
      const Vec q = sampler.uniform(model.dof(), kPi);
      const Mat b = mass_matrix(model, q);
      CHECK((b - b.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      Eigen::SelfAdjointEigenSolver<Mat> es(b);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("inverse dynamics decomposes exactly into B qdd + n") {
  for (const char* name : {"pendulum1", "planar2", "spatial3", "chain6", "chain7"}) {
    const RobotModel model = resolve_robot(name);
    StateSampler sampler(31);
    for (int k = 0; k < 40; ++k) {
      const Vec q = sampler.uniform(model.dof(), kPi);
      const Vec qd = sampler.uniform(model.dof(), 4.0);
      const Vec qdd = sampler.uniform(model.dof(), 20.0);
      const Vec lhs = inverse_dynamics(model, q, qd, qdd);
      const Vec rhs = mass_matrix(model, q) * qdd + bias_torque(model, q, qd);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("inverse dynamics is linear in acceleration") {
  const RobotModel model = resolve_robot("spatial3");
  StateSampler sampler(37);
  const Vec zero = Vec::Zero(3);
  for (int k = 0; k < 50; ++k) {
    const Vec q = sampler.uniform(3, kPi);
    const Vec a1 = sampler.uniform(3, 10.0);
    const Vec a2 = sampler.uniform(3, 10.0);
    const Vec g = gravity_torque(model, q);
    const Vec lhs = inverse_dynamics(model, q, zero, a1 + a2) - g;
    const Vec rhs = (inverse_dynamics(model, q, zero, a1) - g) +
                    (inverse_dynamics(model, q, zero, a2) - g);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("forward and inverse dynamics round-trip") {
  for (const char* name : {"planar2", "spatial3", "chain6"}) {
    const RobotModel model = resolve_robot(name);
    StateSampler sampler(41);
    const int n = model.dof();
    for (int k = 0; k < 1000 / n; ++k) {
      const Vec q = sampler.uniform(n, kPi);
      const Vec qd = sampler.uniform(n, 4.0);
      const Vec qdd = sampler.uniform(n, 20.0);
      const Vec tau = inverse_dynamics(model, q, qd, qdd);
      CHECK((forward_dynamics(model, q, qd, tau) - qdd).cwiseAbs().maxCoeff() <= 1e-9);
      // and the other direction
      const Vec acc = forward_dynamics(model, q, qd, qd /* reuse as torque */);
      const Vec tau2 = inverse_dynamics(model, q, qd, acc);
      CHECK((tau2 - qd).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("static equilibrium: gravity torque produces zero acceleration") {
  const RobotModel model = resolve_robot("spatial3");
  StateSampler sampler(43);
  const Vec zero = Vec::Zero(3);
  for (int k = 0; k < 20; ++k) {
    const Vec q = sampler.uniform(3, kPi);
    const Vec acc = forward_dynamics(model, q, zero, gravity_torque(model, q));
    CHECK(acc.cwiseAbs().maxCoeff() <= 1e-10);
  }
  // pendulum at rest, unit inertia: torque 2 -> acceleration 2
  const RobotModel pendulum = resolve_robot("pendulum1");
  CHECK(forward_dynamics(pendulum, vec1(0), vec1(0), vec1(2.0))[0] ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("regressor reproduces inverse dynamics via the parameter vector") {
  const RobotModel model = resolve_robot("planar2");
  const Vec w_true = inertial_parameter_vector(model);
  StateSampler sampler(47);
  for (int k = 0; k < 100; ++k) {
    const Vec q = sampler.uniform(2, kPi);
    const Vec qd = sampler.uniform(2, 4.0);
    const Vec qdd = sampler.uniform(2, 20.0);
    const Mat phi = regressor(model, q, qd, qdd);
    CHECK((phi * w_true - inverse_dynamics(model, q, qd, qdd)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("regressor is linear for arbitrary parameter vectors") {
  const RobotModel model = resolve_robot("spatial3");
  StateSampler sampler(53);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Vec w(kParamsPerLink * model.dof());
    for (int i = 0; i < w.size(); ++i) w[i] = dist(rng);
    const Vec q = sampler.uniform(3, kPi);
    const Vec qd = sampler.uniform(3, 4.0);
    const Vec qdd = sampler.uniform(3, 20.0);
    const Mat phi = regressor(model, q, qd, qdd);
    const Vec direct =
        inverse_dynamics_params(model, unstack_params(w, model.dof()), q, qd, qdd);
    CHECK((phi * w - direct).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("regressor vanishes for a static zero-gravity state") {
  RobotModel model = resolve_robot("planar2");
  model.gravity.setZero();
  const Vec zero = Vec::Zero(2);
  Vec q(2); q << 0.7, -0.4;
  CHECK(regressor(model, q, zero, zero).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("pendulum regressor matches the hand-computed 1-DoF row") {
  const RobotModel pendulum = resolve_robot("pendulum1");
  const double q = 0.6, qd = 1.1, qdd = 2.5, g0 = 9.81, a = 1.0;
  const Mat phi = regressor(pendulum, vec1(q), vec1(qd), vec1(qdd));
  // Hand computation, single planar joint with link frame at the rod tip:
  //   tau = (Izz_o + 2 a hx + a^2 m) qdd + g0 (m a + hx) sin q + g0 hy cos q
  // so the basis columns are:
  CHECK(phi(0, 0) == doctest::Approx(a * a * qdd + g0 * a * std::sin(q)).epsilon(1e-12));
  CHECK(phi(0, 1) == doctest::Approx(2.0 * a * qdd + g0 * std::sin(q)).epsilon(1e-10));
  CHECK(phi(0, 2) == doctest::Approx(g0 * std::cos(q)).epsilon(1e-10));
  // hz and the inertia products do not act on a planar joint, Izz does:
  CHECK(phi(0, 3) == doctest::Approx(0.0));
  CHECK(phi(0, 9) == doctest::Approx(qdd).epsilon(1e-12));
}

TEST_CASE("friction model adds viscous and Coulomb terms") {
  RobotModel model = resolve_robot("pendulum1");
  model.friction = std::vector<JointFriction>{{0.5, 0.2}};
  const Vec q = vec1(0.3), qd = vec1(2.0), qdd = vec1(0.0);
  RobotModel frictionless = model;
  frictionless.friction.reset();
  const double base = inverse_dynamics(frictionless, q, qd, qdd)[0];
  CHECK(inverse_dynamics(model, q, qd, qdd)[0] ==
        doctest::Approx(base + 0.5 * 2.0 + 0.2).epsilon(1e-12));
  CHECK(inverse_dynamics(model, q, vec1(-2.0), qdd)[0] ==
        doctest::Approx(inverse_dynamics(frictionless, q, vec1(-2.0), qdd)[0] - 1.0 - 0.2)
            .epsilon(1e-12));
  CHECK_THROWS_AS(regressor(model, q, qd, qdd), UnsupportedError);
}

TEST_CASE("dimension mismatches are contract errors") {
  const RobotModel model = resolve_robot("planar2");
  CHECK_THROWS_AS(inverse_dynamics(model, Vec::Zero(3), Vec::Zero(2), Vec::Zero(2)),
                  ContractError);
  CHECK_THROWS_AS(forward_dynamics(model, Vec::Zero(2), Vec::Zero(2), Vec::Zero(1)),
                  ContractError);
}

TEST_CASE("robot file validation rejects bad models") {
  {
    std::istringstream bad("name x\ngravity 0 0 0\n"
                           "joint revolute a=1 alpha=0 d=0 theta=0\n"
                           "link mass=-1 com=0,0,0 inertia=0,0,0,0,0,0\n");
    CHECK_THROWS_AS(parse_robot(bad, "bad"), ConfigError);
  }
  {
    std::istringstream bad("name x\ngravity 0 0 0\n"
                           "joint revolute a=1 alpha=0 d=0 theta=0\n");
    CHECK_THROWS_AS(parse_robot(bad, "bad"), ConfigError);
  }
  CHECK_THROWS_AS(resolve_robot("no_such_robot"), ConfigError);
}
