#pragma once

#include "gpdyn/gp.hpp"
#include "gpdyn/rnea.hpp"
#include "gpdyn/robot_model.hpp"
#include "gpdyn/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gpdyn {

/// A joint-torque predictor ensemble: one scalar model per joint, all
/// sharing the inverse-dynamics input layout [q | qd | qdd]. Implementations
/// must be immutable after construction; concurrent torque() calls are safe.
class TorqueEnsemble {
 public:
  virtual ~TorqueEnsemble() = default;
  virtual int dof() const = 0;
  virtual Vec torque(const Vec& q, const Vec& qd, const Vec& qdd) const = 0;
  /// Batched evaluation; rows of q/qd/qdd are states, returns samples x dof.
  virtual Mat torque_batch(const Mat& q, const Mat& qd, const Mat& qdd) const;
  virtual std::string provenance() const { return {}; }
};

/// Ensemble backed by per-joint GP regressors.
class GpEnsemble : public TorqueEnsemble {
 public:
  explicit GpEnsemble(std::vector<GPModel> models);
  int dof() const override { return static_cast<int>(models_.size()); }
  Vec torque(const Vec& q, const Vec& qd, const Vec& qdd) const override;
  Mat torque_batch(const Mat& q, const Mat& qd, const Mat& qdd) const override;
  std::string provenance() const override;
  const std::vector<GPModel>& models() const { return models_; }

 private:
  std::vector<GPModel> models_;
};

/// Ensemble backed by the exact rigid-body engine — the testing seam for
/// the perfect-predictor exactness properties.
class OracleEnsemble : public TorqueEnsemble {
 public:
  explicit OracleEnsemble(RobotModel model);
  int dof() const override { return static_cast<int>(model_.joints.size()); }
  Vec torque(const Vec& q, const Vec& qd, const Vec& qdd) const override;
  std::string provenance() const override { return "oracle:" + model_.name; }
  const RobotModel& model() const { return model_; }

 private:
  RobotModel model_;
};

struct EstimateOptions {
  bool symmetrize = true;
  /// SPD floor = spd_floor_scale * max(trace(B)/n, 1).
  double spd_floor_scale = 1e-6;
  /// Acceleration probe magnitude used for the inertia columns.
  double probe = 1.0;
};

/// The extracted dynamics components at one evaluation point.
struct EstimatedComponents {
  Mat B_hat;      // n x n, post symmetrization/repair
  Vec g_hat;      // gravity torque estimate
  Vec n_hat;      // bias torque estimate (velocity + gravity terms)
  Vec q, qd;
  bool symmetrized = true;
  double regularization_added = 0.0;   // eigenvalue shift applied, 0 if none
  double raw_asymmetry = 0.0;          // ||B - B^T||_F / ||B||_F before symmetrization
  double raw_min_eigenvalue = 0.0;
  double raw_max_eigenvalue = 0.0;
};

/// Aggregated diagnostics over a batch of predictions.
struct BatchDiagnostics {
  int evaluations = 0;
  int repairs = 0;
  double max_regularization = 0.0;
  double max_asymmetry = 0.0;
  double min_eigenvalue = 0.0;  // over all raw (symmetrized) inertia estimates
  double max_eigenvalue = 0.0;
  double probe = 1.0;
  std::string to_json() const;
};

/// g_hat_i = f_i(q, 0, 0).
Vec estimate_gravity(const TorqueEnsemble& ens, const Vec& q);

/// Probes each acceleration direction: raw B_ij = (f_i(q,0,probe*1_j) - g_i)
/// / probe, then symmetrizes and repairs per the options. g_hat may be
/// passed to avoid recomputation; components (if given) records diagnostics.
Mat estimate_inertia(const TorqueEnsemble& ens, const Vec& q,
                     const EstimateOptions& options = {},
                     const Vec* g_hat = nullptr, EstimatedComponents* components = nullptr);

/// n_hat_i = f_i(q, qd, 0). Covers velocity, gravity, and friction effects.
Vec estimate_bias(const TorqueEnsemble& ens, const Vec& q, const Vec& qd);

/// Solves B_hat qdd = tau - n_hat via an SPD factorization of the
/// symmetrized, repaired inertia estimate.
Vec predict_acceleration(const TorqueEnsemble& ens, const Vec& q, const Vec& qd,
                         const Vec& tau, const EstimateOptions& options = {},
                         EstimatedComponents* components = nullptr);

/// Batched prediction over rows of q/qd/tau. Reuses B_hat and g_hat across
/// consecutive rows with bit-identical q; results match the per-row path
/// exactly. Diagnostics (if given) are accumulated over the batch.
Mat predict_acceleration_batch(const TorqueEnsemble& ens, const Mat& q, const Mat& qd,
                               const Mat& tau, const EstimateOptions& options = {},
                               BatchDiagnostics* diagnostics = nullptr);

}  // namespace gpdyn
