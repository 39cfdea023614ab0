#pragma once

#include "gpdyn/gp.hpp"
#include "gpdyn/inv2fwd.hpp"
#include "gpdyn/trajectory.hpp"
#include "gpdyn/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gpdyn {

/// Direct forward-dynamics regressors: one GP per joint mapping
/// (q, qd, tau) -> qdd_i.
struct ForwardEnsemble {
  std::vector<GPModel> models;
  int dof() const { return static_cast<int>(models.size()); }
  Mat predict(const Mat& q, const Mat& qd, const Mat& tau) const;
};

struct FitOptions {
  int budget = 40;          ///< optimizer evaluation budget per joint
  int restarts = 2;
  uint64_t seed = 0;
  double init_noise = 1e-2;
  /// Hyperparameters are optimized on the first `optimize_subset` training
  /// points (cubic-cost control); the final model is fit on all points.
  int optimize_subset = 600;
};

/// Fits the direct forward-dynamics baseline. Only the squared-exponential
/// family is supported on the forward layout: the structured kernels encode
/// inverse-dynamics inputs and have no meaning over (q, qd, tau).
ForwardEnsemble fit_forward_direct(const Dataset& train, KernelFamily family,
                                   const FitOptions& options = {});

/// Fits one inverse-dynamics GP per joint ((q, qd, qdd) -> tau_i).
/// `model` is required for the semiparametric family (regressor source).
GpEnsemble fit_inverse(const Dataset& train, KernelFamily family,
                       const FitOptions& options = {}, const RobotModel* model = nullptr);

/// Per-joint absolute acceleration errors |qdd - qdd_hat|, elementwise.
Mat acceleration_error_modules(const Mat& predicted, const Mat& truth);

struct RmseReport {
  Vec per_joint;
  double aggregate = 0.0;  ///< RMSE over all joints and samples pooled
};

/// RMSE of the ensemble's torque predictions against the recorded torques.
RmseReport inverse_rmse(const TorqueEnsemble& ens, const Dataset& test);

struct ExperimentConfig {
  std::vector<std::string> robots;   ///< one per DoF cell; data-efficiency uses the first
  double train_duration = 10.0;      ///< [s]
  double test_duration = 5.0;        ///< [s]
  double rate = 100.0;               ///< [Hz]
  double cutoff = 1.0;               ///< [Hz]
  double noise_std = 0.01;           ///< training torque noise [N·m]
  std::vector<std::string> estimators{"se_fd", "se", "gip"};
  std::vector<double> train_seconds; ///< data-efficiency schedule
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  int budget = 40;
  std::string out_dir;
  std::string source_text;           ///< config bytes, hashed into reports

  void validate() const;
};

/// Parses the key = value experiment-config text. Unknown keys are
/// configuration errors (fail-closed). `#` starts a comment.
ExperimentConfig parse_experiment_config(const std::string& text);

/// For each robot and seed: generate train/test data, fit the requested
/// estimators, and write metrics.json plus errors_<estimator>_<dof>.csv
/// under config.out_dir. Per-cell failures are recorded and the sweep
/// continues; returns the number of failed cells.
int run_dof_sweep(const ExperimentConfig& config);

/// Prefix-retraining protocol on the first robot: for each entry of
/// train_seconds, refit all estimators on that prefix and evaluate on the
/// full test set. Writes metrics.json and curves.csv; returns failed cells.
int run_data_efficiency(const ExperimentConfig& config);

}  // namespace gpdyn
