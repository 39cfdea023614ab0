#pragma once

#include "gpdyn/kernels.hpp"
#include "gpdyn/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gpdyn {

/// Exact GP regressors are capped at this many training points.
inline constexpr int kMaxTrainingPoints = 4000;

/// Noise standard deviations below this floor are clamped during
/// hyperparameter optimization (Gram matrices of the structured kernels
/// are rank-deficient on smooth trajectories).
inline constexpr double kNoiseFloor = 1e-4;

/// A fitted zero-mean GP for one scalar output. Immutable after fit();
/// concurrent predict calls are safe.
struct GPModel {
  KernelSpec kernel;
  Mat inputs;        // N x dim, training inputs as rows
  Vec targets;       // stored for persistence and diagnostics
  Vec alpha;         // (K + sigma^2 I + jitter I)^{-1} y
  Mat chol_lower;    // L with L L^T = K + sigma^2 I + jitter I
  double noise_std = 0.0;
  double jitter = 0.0;            // jitter actually added to the diagonal
  std::string data_fingerprint;   // provenance of the training set
};

/// Cholesky-based fit. Escalates diagonal jitter from 1e-10 to 1e-4 times
/// the mean Gram diagonal before giving up.
GPModel fit(const Mat& x, const Vec& y, const KernelSpec& kernel, double noise_std);

double predict(const GPModel& model, const Vec& x_star);

/// Posterior mean and variance (variance clamped at zero).
double predict(const GPModel& model, const Vec& x_star, double* variance);

/// Posterior mean at many points (rows of x_star).
Vec predict_batch(const GPModel& model, const Mat& x_star);

double neg_log_marginal_likelihood(const Mat& x, const Vec& y, const KernelSpec& kernel,
                                   double noise_std);

/// Value and gradient w.r.t. [kernel log-params..., log noise_std].
double nll_with_gradient(const Mat& x, const Vec& y, const KernelSpec& kernel,
                         double noise_std, Vec* grad);

struct OptimizeOptions {
  int budget = 200;       ///< max objective evaluations (total, across restarts)
  int max_iterations = 60;
  int restarts = 3;       ///< 1 = no restart perturbations
  uint64_t seed = 0;      ///< restart perturbation stream
  double grad_tol = 1e-5;
  double rel_f_tol = 1e-9;
  bool train_noise = true;
};

struct OptimizeResult {
  KernelSpec kernel;
  double noise_std = 0.0;
  double nll = 0.0;
  int evaluations = 0;
  std::vector<double> best_trace;  ///< best-so-far NLL after each evaluation
};

/// Marginal-likelihood minimization over the trainable log-hyperparameters
/// (L-BFGS with backtracking, deterministic restarts). Never returns a
/// point worse than the initialization.
OptimizeResult optimize_hyperparameters(const Mat& x, const Vec& y, const KernelSpec& init,
                                        double init_noise_std,
                                        const OptimizeOptions& options = {});

}  // namespace gpdyn
