#pragma once

#include "gpdyn/robot_model.hpp"
#include "gpdyn/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gpdyn {

enum class KernelFamily { SquaredExponential, Gip, Semiparametric };

/// What a GP input row contains. Both layouts are [q | qd | third] with
/// third = qdd for inverse-dynamics models and third = tau for the direct
/// forward-dynamics baseline.
enum class InputKind { InverseDynamics, ForwardDynamics };

struct InputLayout {
  int dof = 0;
  InputKind kind = InputKind::InverseDynamics;
  int dim() const { return 3 * dof; }
};

/// Named positive parameters stored in log-domain.
struct HyperparameterVector {
  std::vector<std::string> names;
  Vec log_values;

  int size() const { return static_cast<int>(names.size()); }
  int index(const std::string& name) const;
  double value(const std::string& name) const { return std::exp(log_values[index(name)]); }
  double value(int i) const { return std::exp(log_values[i]); }
  void set(const std::string& name, double v);
  void push(const std::string& name, double v);
};

/// A parameterized covariance function. Immutable value type; the GP layer
/// treats it as opaque apart from the hyperparameter vector.
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  InputLayout layout;
  std::vector<JointKind> joint_kinds;  // GIP only
  int regressor_joint = -1;            // Semiparametric only
  /// Semiparametric only: maps a GP input row to the regressor row
  /// phi^(i)(x) of the chosen joint.
  std::function<Vec(const Vec&)> regressor_row;
  HyperparameterVector params;
  std::vector<char> trainable;  // parallel to params; empty = all trainable

  bool is_trainable(int i) const { return trainable.empty() || trainable[i] != 0; }
};

// ---- free kernel functions ----

double se_kernel(const Vec& x, const Vec& y, double scale, const Vec& lengthscales);

/// Inhomogeneous polynomial kernel (bias + sum_d w_d x_d y_d)^degree,
/// degree in {1, 2}.
double poly_kernel(const Vec& x, const Vec& y, int degree, const Vec& weights, double bias);

/// Maps q to the transformed configuration: prismatic coordinates pass
/// through, each revolute q_i becomes (cos q_i, sin q_i).
Vec gip_transform(const Vec& q, const std::vector<JointKind>& kinds);

double gip_kernel(const Vec& x, const Vec& y, const KernelSpec& spec);

double sp_kernel(const Vec& x, const Vec& y, const KernelSpec& spec);

/// Dispatches on spec.family.
double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y);

// ---- batched evaluation (inputs are rows) ----

Mat gram(const KernelSpec& spec, const Mat& a, const Mat& b);
Mat gram_sym(const KernelSpec& spec, const Mat& a);

/// For each hyperparameter t (in params order), returns
///   g[t] = sum_{j,l} weight(j,l) * d K(j,l) / d log theta_t
/// over the symmetric training gram of `a`. Used for marginal-likelihood
/// gradients without materializing per-parameter gram derivatives.
Vec gram_weighted_gradient(const KernelSpec& spec, const Mat& a, const Mat& weight);

// ---- spec factories ----

KernelSpec make_se_spec(const InputLayout& layout, double scale, const Vec& lengthscales);

KernelSpec make_gip_spec(const InputLayout& layout, const std::vector<JointKind>& kinds);

KernelSpec make_sp_spec(const InputLayout& layout, int joint,
                        std::function<Vec(const Vec&)> regressor_row, const Vec& param_var,
                        double se_scale, const Vec& se_lengthscales);

/// Regressor row provider for the semiparametric kernel, backed by the
/// rigid-body regressor of the given model.
std::function<Vec(const Vec&)> regressor_row_source(const RobotModel& model, int joint);

/// Data-driven initializations (moment-matching heuristics).
KernelSpec se_spec_from_data(const InputLayout& layout, const Mat& x, const Vec& y);
KernelSpec gip_spec_from_data(const InputLayout& layout, const std::vector<JointKind>& kinds,
                              const Mat& x, const Vec& y);

}  // namespace gpdyn
