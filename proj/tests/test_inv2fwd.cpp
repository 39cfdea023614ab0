#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpdyn/inv2fwd.hpp"
#include "gpdyn/rnea.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <vector>

using namespace gpdyn;
using gpdyn::test::StateSampler;

namespace {

class ZeroEnsemble : public TorqueEnsemble {
 public:
  explicit ZeroEnsemble(int n) : n_(n) {}
  int dof() const override { return n_; }
  Vec torque(const Vec&, const Vec&, const Vec&) const override { return Vec::Zero(n_); }

 private:
  int n_;
};

// Wraps an ensemble with a joint permutation: joint i of this ensemble is
// joint perm[i] of the base.
class PermutedEnsemble : public TorqueEnsemble {
 public:
  PermutedEnsemble(const TorqueEnsemble& base, std::vector<int> perm)
      : base_(base), perm_(std::move(perm)) {}
  int dof() const override { return base_.dof(); }
  Vec torque(const Vec& q, const Vec& qd, const Vec& qdd) const override {
    const int n = dof();
    Vec qb(n), qdb(n), qddb(n);
    for (int i = 0; i < n; ++i) {
      qb[perm_[static_cast<size_t>(i)]] = q[i];
      qdb[perm_[static_cast<size_t>(i)]] = qd[i];
      qddb[perm_[static_cast<size_t>(i)]] = qdd[i];
    }
    const Vec tau = base_.torque(qb, qdb, qddb);
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = tau[perm_[static_cast<size_t>(i)]];
    return out;
  }

 private:
  const TorqueEnsemble& base_;
  std::vector<int> perm_;
};

}  // namespace

TEST_CASE("oracle-backed ensemble reproduces the true dynamics components") {
  for (const char* name : {"planar2", "spatial3"}) {
    const RobotModel model = resolve_robot(name);
    const OracleEnsemble ens(model);
    const int n = ens.dof();
    StateSampler sampler(4);
    for (int k = 0; k < 200; ++k) {
      const Vec q = sampler.uniform(n, 3.0);
      const Vec qd = sampler.uniform(n, 2.0);

      CHECK((estimate_gravity(ens, q) - gravity_torque(model, q)).cwiseAbs().maxCoeff() <=
            1e-9);
      CHECK((estimate_bias(ens, q, qd) - bias_torque(model, q, qd)).cwiseAbs().maxCoeff() <=
            1e-9);

      EstimatedComponents parts;
      const Mat b = estimate_inertia(ens, q, {}, nullptr, &parts);
      CHECK((b - mass_matrix(model, q)).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(parts.regularization_added == 0.0);  // true inertia is SPD
      CHECK(parts.raw_asymmetry <= 1e-12);
    }
  }
}

TEST_CASE("oracle-backed acceleration prediction matches forward dynamics") {
  const RobotModel model = resolve_robot("planar2");
  const OracleEnsemble ens(model);
  StateSampler sampler(8);
  for (int k = 0; k < 1000; ++k) {
    const Vec q = sampler.uniform(2, 3.0);
    const Vec qd = sampler.uniform(2, 2.0);
    const Vec tau = sampler.uniform(2, 10.0);
    const Vec qdd = predict_acceleration(ens, q, qd, tau);
    CHECK((qdd - forward_dynamics(model, q, qd, tau)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("zero predictor: zero gravity, inertia repaired to the floor") {
  const ZeroEnsemble ens(3);
  const Vec q = Vec::Zero(3);
  CHECK(estimate_gravity(ens, q).cwiseAbs().maxCoeff() == 0.0);

  EstimatedComponents parts;
  const Mat b = estimate_inertia(ens, q, {}, nullptr, &parts);
  // raw B = 0; the floor is spd_floor_scale * max(trace/n, 1) = 1e-6
  CHECK(parts.regularization_added == doctest::Approx(1e-6));
  CHECK((b - 1e-6 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-18);
  // prediction still completes (huge accelerations, but no failure)
  Vec tau(3);
  tau << 1.0, 0.0, -1.0;
  const Vec qdd = predict_acceleration(ens, q, Vec::Zero(3), tau);
  CHECK(qdd[0] == doctest::Approx(1e6));
}

TEST_CASE("consistency and reconstruction identities") {
  const RobotModel model = resolve_robot("spatial3");
  const OracleEnsemble ens(model);
  StateSampler sampler(15);
  for (int k = 0; k < 50; ++k) {
    const Vec q = sampler.uniform(3, 3.0);
    // gravity is the zero-velocity bias, exactly
    CHECK((estimate_gravity(ens, q) - estimate_bias(ens, q, Vec::Zero(3)))
              .cwiseAbs().maxCoeff() == 0.0);
    // raw B_ij + g_i reconstructs the probe response exactly
    const Vec g = estimate_gravity(ens, q);
    EstimateOptions raw;
    raw.symmetrize = false;
    raw.spd_floor_scale = 0.0;
    const Mat b = estimate_inertia(ens, q, raw, &g);
    for (int j = 0; j < 3; ++j) {
      Vec probe = Vec::Zero(3);
      probe[j] = 1.0;
      const Vec f = ens.torque(q, Vec::Zero(3), probe);
      CHECK((b.col(j) + g - f).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("torque equal to the bias estimate yields zero acceleration") {
  const RobotModel model = resolve_robot("planar2");
  const OracleEnsemble ens(model);
  StateSampler sampler(21);
  for (int k = 0; k < 50; ++k) {
    const Vec q = sampler.uniform(2, 3.0);
    const Vec qd = sampler.uniform(2, 2.0);
    const Vec tau = estimate_bias(ens, q, qd);
    CHECK(predict_acceleration(ens, q, qd, tau).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("acceleration prediction is equivariant to joint reordering") {
  const RobotModel model = resolve_robot("spatial3");
  const OracleEnsemble base(model);
  const std::vector<int> perm{2, 0, 1};
  const PermutedEnsemble permuted(base, perm);
  StateSampler sampler(27);
  for (int k = 0; k < 30; ++k) {
    const Vec q = sampler.uniform(3, 3.0);
    const Vec qd = sampler.uniform(3, 2.0);
    const Vec tau = sampler.uniform(3, 10.0);
    Vec qp(3), qdp(3), taup(3);
    for (int i = 0; i < 3; ++i) {
      // inputs of the permuted ensemble: slot i corresponds to base joint perm[i]
      qp[i] = q[perm[static_cast<size_t>(i)]];
      qdp[i] = qd[perm[static_cast<size_t>(i)]];
      taup[i] = tau[perm[static_cast<size_t>(i)]];
    }
    const Vec qdd = predict_acceleration(base, q, qd, tau);
    const Vec qddp = predict_acceleration(permuted, qp, qdp, taup);
    for (int i = 0; i < 3; ++i)
      CHECK(qddp[i] == doctest::Approx(qdd[perm[static_cast<size_t>(i)]]).epsilon(1e-8));
  }
}

TEST_CASE("batched prediction matches the per-row path and fills diagnostics") {
  const RobotModel model = resolve_robot("planar2");
  const OracleEnsemble ens(model);
  StateSampler sampler(33);
  const int rows = 40;
  Mat q(rows, 2), qd(rows, 2), tau(rows, 2);
  for (int i = 0; i < rows; ++i) {
    // repeat configurations to exercise the per-q reuse path
    if (i % 2 == 1)
      q.row(i) = q.row(i - 1);
    else
      q.row(i) = sampler.uniform(2, 3.0).transpose();
    qd.row(i) = sampler.uniform(2, 2.0).transpose();
    tau.row(i) = sampler.uniform(2, 10.0).transpose();
  }
  BatchDiagnostics diag;
  const Mat qdd = predict_acceleration_batch(ens, q, qd, tau, {}, &diag);
  for (int i = 0; i < rows; ++i) {
    const Vec single = predict_acceleration(ens, q.row(i).transpose(),
                                            qd.row(i).transpose(), tau.row(i).transpose());
    CHECK((qdd.row(i).transpose() - single).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(diag.evaluations == rows / 2);  // each config evaluated once
  CHECK(diag.repairs == 0);
  CHECK(diag.min_eigenvalue > 0.0);
  CHECK(diag.to_json().find("\"repairs\": 0") != std::string::npos);
}
