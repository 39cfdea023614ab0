#include "gpdyn/inv2fwd.hpp"

#include "json.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstring>
#include <utility>

namespace gpdyn {

Mat TorqueEnsemble::torque_batch(const Mat& q, const Mat& qd, const Mat& qdd) const {
  require(q.rows() == qd.rows() && q.rows() == qdd.rows(),
          "torque_batch: row count mismatch");
  Mat tau(q.rows(), dof());
  for (int i = 0; i < q.rows(); ++i)
    tau.row(i) = torque(q.row(i).transpose(), qd.row(i).transpose(),
                        qdd.row(i).transpose()).transpose();
  return tau;
}

GpEnsemble::GpEnsemble(std::vector<GPModel> models) : models_(std::move(models)) {
  require(!models_.empty(), "GpEnsemble: at least one joint model required");
  const int n = static_cast<int>(models_.size());
  for (const GPModel& m : models_) {
    require(m.kernel.layout.kind == InputKind::InverseDynamics,
            "GpEnsemble: all models must use the inverse-dynamics input layout");
    require(m.kernel.layout.dof == n,
            "GpEnsemble: model DoF does not match the ensemble size");
  }
}

Vec GpEnsemble::torque(const Vec& q, const Vec& qd, const Vec& qdd) const {
  const int n = dof();
  require(q.size() == n && qd.size() == n && qdd.size() == n,
          "GpEnsemble::torque: state dimension mismatch");
  Vec x(3 * n);
  x << q, qd, qdd;
  Vec tau(n);
  for (int i = 0; i < n; ++i) tau[i] = predict(models_[static_cast<size_t>(i)], x);
  return tau;
}

Mat GpEnsemble::torque_batch(const Mat& q, const Mat& qd, const Mat& qdd) const {
  require(q.rows() == qd.rows() && q.rows() == qdd.rows(),
          "torque_batch: row count mismatch");
  const int n = dof();
  Mat x(q.rows(), 3 * n);
  x << q, qd, qdd;
  Mat tau(q.rows(), n);
  for (int i = 0; i < n; ++i)
    tau.col(i) = predict_batch(models_[static_cast<size_t>(i)], x);
  return tau;
}

std::string GpEnsemble::provenance() const { return models_.front().data_fingerprint; }

OracleEnsemble::OracleEnsemble(RobotModel model) : model_(std::move(model)) {
  model_.validate();
}

Vec OracleEnsemble::torque(const Vec& q, const Vec& qd, const Vec& qdd) const {
  return inverse_dynamics(model_, q, qd, qdd);
}

Vec estimate_gravity(const TorqueEnsemble& ens, const Vec& q) {
  require(q.size() == ens.dof(), "estimate_gravity: dimension mismatch");
  const Vec zero = Vec::Zero(ens.dof());
  return ens.torque(q, zero, zero);
}

Mat estimate_inertia(const TorqueEnsemble& ens, const Vec& q, const EstimateOptions& options,
                     const Vec* g_hat, EstimatedComponents* components) {
  const int n = ens.dof();
  require(q.size() == n, "estimate_inertia: dimension mismatch");
  require(options.probe > 0.0, "estimate_inertia: probe magnitude must be positive");
  const Vec zero = Vec::Zero(n);
  const Vec g = g_hat ? *g_hat : estimate_gravity(ens, q);

  Mat b_raw(n, n);
  for (int j = 0; j < n; ++j) {
    Vec probe = Vec::Zero(n);
    probe[j] = options.probe;
    b_raw.col(j) = (ens.torque(q, zero, probe) - g) / options.probe;
  }

  const double b_norm = b_raw.norm();
  const double asymmetry = b_norm > 0.0 ? (b_raw - b_raw.transpose()).norm() / b_norm : 0.0;
  Mat b = options.symmetrize ? Mat(0.5 * (b_raw + b_raw.transpose())) : b_raw;

  // SPD repair: shift all eigenvalues so the minimum reaches the floor.
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (b + b.transpose()));
  const double min_eig = es.eigenvalues().minCoeff();
  const double max_eig = es.eigenvalues().maxCoeff();
  const double floor = options.spd_floor_scale * std::max(b.trace() / n, 1.0);
  double lambda = 0.0;
  if (min_eig < floor) {
    lambda = floor - min_eig;
    b.diagonal().array() += lambda;
  }

  if (components) {
    components->B_hat = b;
    components->g_hat = g;
    components->q = q;
    components->symmetrized = options.symmetrize;
    components->regularization_added = lambda;
    components->raw_asymmetry = asymmetry;
    components->raw_min_eigenvalue = min_eig;
    components->raw_max_eigenvalue = max_eig;
  }
  return b;
}

Vec estimate_bias(const TorqueEnsemble& ens, const Vec& q, const Vec& qd) {
  require(q.size() == ens.dof() && qd.size() == ens.dof(),
          "estimate_bias: dimension mismatch");
  return ens.torque(q, qd, Vec::Zero(ens.dof()));
}

namespace {

Vec solve_acceleration(const Mat& b, const Vec& rhs, const EstimatedComponents& parts) {
  Eigen::LDLT<Mat> ldlt(b);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    std::string eigs;
    Eigen::SelfAdjointEigenSolver<Mat> es(b);
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      eigs += (i ? ", " : "") + std::to_string(es.eigenvalues()[i]);
    throw NumericalError(
        "acceleration estimation failed: inertia estimate not positive definite "
        "even after repair (lambda=" + std::to_string(parts.regularization_added) +
        ", eigenvalues [" + eigs + "])");
  }
  return ldlt.solve(rhs);
}

}  // namespace

Vec predict_acceleration(const TorqueEnsemble& ens, const Vec& q, const Vec& qd,
                         const Vec& tau, const EstimateOptions& options,
                         EstimatedComponents* components) {
  const int n = ens.dof();
  require(tau.size() == n, "predict_acceleration: torque dimension mismatch");
  EstimatedComponents local;
  EstimatedComponents& parts = components ? *components : local;
  estimate_inertia(ens, q, options, nullptr, &parts);
  parts.n_hat = estimate_bias(ens, q, qd);
  parts.qd = qd;
  return solve_acceleration(parts.B_hat, tau - parts.n_hat, parts);
}

Mat predict_acceleration_batch(const TorqueEnsemble& ens, const Mat& q, const Mat& qd,
                               const Mat& tau, const EstimateOptions& options,
                               BatchDiagnostics* diagnostics) {
  const int n = ens.dof();
  require(q.rows() == qd.rows() && q.rows() == tau.rows(),
          "predict_acceleration_batch: row count mismatch");
  require(q.cols() == n && qd.cols() == n && tau.cols() == n,
          "predict_acceleration_batch: column dimension mismatch");

  Mat qdd(q.rows(), n);
  EstimatedComponents parts;
  bool have_cache = false;
  Vec cached_q;
  for (int i = 0; i < q.rows(); ++i) {
    const Vec qi = q.row(i).transpose();
    // reuse B_hat/g_hat across identical configurations (exact bit match)
    const bool hit = have_cache && cached_q.size() == qi.size() &&
                     std::memcmp(cached_q.data(), qi.data(),
                                 sizeof(double) * static_cast<size_t>(qi.size())) == 0;
    if (!hit) {
      estimate_inertia(ens, qi, options, nullptr, &parts);
      cached_q = qi;
      have_cache = true;
      if (diagnostics) {
        ++diagnostics->evaluations;
        if (parts.regularization_added > 0.0) ++diagnostics->repairs;
        diagnostics->max_regularization =
            std::max(diagnostics->max_regularization, parts.regularization_added);
        diagnostics->max_asymmetry =
            std::max(diagnostics->max_asymmetry, parts.raw_asymmetry);
        if (diagnostics->evaluations == 1) {
          diagnostics->min_eigenvalue = parts.raw_min_eigenvalue;
          diagnostics->max_eigenvalue = parts.raw_max_eigenvalue;
        } else {
          diagnostics->min_eigenvalue =
              std::min(diagnostics->min_eigenvalue, parts.raw_min_eigenvalue);
          diagnostics->max_eigenvalue =
              std::max(diagnostics->max_eigenvalue, parts.raw_max_eigenvalue);
        }
        diagnostics->probe = options.probe;
      }
    }
    const Vec bias = estimate_bias(ens, qi, qd.row(i).transpose());
    parts.n_hat = bias;
    qdd.row(i) =
        solve_acceleration(parts.B_hat, tau.row(i).transpose() - bias, parts).transpose();
  }
  return qdd;
}

std::string BatchDiagnostics::to_json() const {
  nlohmann::json j;
  j["evaluations"] = evaluations;
  j["repairs"] = repairs;
  j["max_regularization"] = max_regularization;
  j["max_asymmetry"] = max_asymmetry;
  j["min_eigenvalue"] = min_eigenvalue;
  j["max_eigenvalue"] = max_eigenvalue;
  j["probe"] = probe;
  return j.dump(2);
}

}  // namespace gpdyn
