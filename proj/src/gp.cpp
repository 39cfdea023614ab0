#include "gpdyn/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <random>

namespace gpdyn {

namespace {

void check_training_inputs(const Mat& x, const Vec& y, const KernelSpec& kernel,
                           double noise_std) {
  require(x.rows() >= 1, "fit: at least one training point required");
  require(x.rows() == y.size(), "fit: inputs and targets must have matching counts");
  require(x.cols() == kernel.layout.dim(), "fit: input dimension mismatch");
  require(noise_std >= 0.0, "fit: noise std must be nonnegative");
  if (x.rows() > kMaxTrainingPoints)
    throw ContractError("training set exceeds the exact-GP cap of " +
                        std::to_string(kMaxTrainingPoints) + " points");
}

// Cholesky with escalating jitter; returns the jitter actually used.
double robust_llt(const Mat& k_noisy, double mean_diag, Eigen::LLT<Mat>& llt) {
  double jitter = 0.0;
  llt.compute(k_noisy);
  if (llt.info() == Eigen::Success) return jitter;
  jitter = 1e-10 * mean_diag;
  const double max_jitter = 1e-4 * mean_diag;
  while (jitter <= max_jitter) {
    Mat attempt = k_noisy;
    attempt.diagonal().array() += jitter;
    llt.compute(attempt);
    if (llt.info() == Eigen::Success) return jitter;
    jitter *= 10.0;
  }
  throw NumericalError("kernel matrix is too ill-conditioned even with maximal jitter");
}

}  // namespace

GPModel fit(const Mat& x, const Vec& y, const KernelSpec& kernel, double noise_std) {
  check_training_inputs(x, y, kernel, noise_std);
  Mat k = gram_sym(kernel, x);
  const double mean_diag = k.diagonal().mean();
  k.diagonal().array() += noise_std * noise_std;
  Eigen::LLT<Mat> llt;
  const double jitter = robust_llt(k, std::max(mean_diag, 1e-12), llt);

  GPModel model;
  model.kernel = kernel;
  model.inputs = x;
  model.targets = y;
  model.alpha = llt.solve(y);
  model.chol_lower = llt.matrixL();
  model.noise_std = noise_std;
  model.jitter = jitter;
  return model;
}

double predict(const GPModel& model, const Vec& x_star) {
  require(x_star.size() == model.kernel.layout.dim(), "predict: input dimension mismatch");
  const Mat k_star = gram(model.kernel, x_star.transpose(), model.inputs);
  return k_star.row(0).dot(model.alpha);
}

double predict(const GPModel& model, const Vec& x_star, double* variance) {
  require(x_star.size() == model.kernel.layout.dim(), "predict: input dimension mismatch");
  const Mat k_star = gram(model.kernel, x_star.transpose(), model.inputs);
  if (variance) {
    const Vec v =
        model.chol_lower.triangularView<Eigen::Lower>().solve(k_star.row(0).transpose());
    const double prior = kernel_eval(model.kernel, x_star, x_star);
    *variance = std::max(0.0, prior - v.squaredNorm());
  }
  return k_star.row(0).dot(model.alpha);
}

Vec predict_batch(const GPModel& model, const Mat& x_star) {
  require(x_star.cols() == model.kernel.layout.dim(),
          "predict_batch: input dimension mismatch");
  return gram(model.kernel, x_star, model.inputs) * model.alpha;
}

double neg_log_marginal_likelihood(const Mat& x, const Vec& y, const KernelSpec& kernel,
                                   double noise_std) {
  check_training_inputs(x, y, kernel, noise_std);
  Mat k = gram_sym(kernel, x);
  const double mean_diag = k.diagonal().mean();
  k.diagonal().array() += noise_std * noise_std;
  Eigen::LLT<Mat> llt;
  robust_llt(k, std::max(mean_diag, 1e-12), llt);
  const Vec alpha = llt.solve(y);
  const double log_det = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
  const double n = static_cast<double>(y.size());
  return 0.5 * y.dot(alpha) + 0.5 * log_det + 0.5 * n * std::log(2.0 * M_PI);
}

double nll_with_gradient(const Mat& x, const Vec& y, const KernelSpec& kernel,
                         double noise_std, Vec* grad) {
  check_training_inputs(x, y, kernel, noise_std);
  Mat k = gram_sym(kernel, x);
  const double mean_diag = k.diagonal().mean();
  k.diagonal().array() += noise_std * noise_std;
  Eigen::LLT<Mat> llt;
  robust_llt(k, std::max(mean_diag, 1e-12), llt);
  const Vec alpha = llt.solve(y);
  const double log_det = 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
  const double n = static_cast<double>(y.size());
  const double nll = 0.5 * y.dot(alpha) + 0.5 * log_det + 0.5 * n * std::log(2.0 * M_PI);

  if (grad) {
    // dNLL/dtheta = 0.5 tr(K^-1 dK) - 0.5 alpha^T dK alpha
    //             = 0.5 <K^-1 - alpha alpha^T, dK>
    Mat weight = llt.solve(Mat::Identity(x.rows(), x.rows()));
    weight.noalias() -= alpha * alpha.transpose();
    weight *= 0.5;
    grad->resize(kernel.params.size() + 1);
    grad->head(kernel.params.size()) = gram_weighted_gradient(kernel, x, weight);
    // d(sigma^2 I)/dlog sigma = 2 sigma^2 I
    (*grad)[kernel.params.size()] = 2.0 * noise_std * noise_std * weight.trace();
  }
  return nll;
}

namespace {

// Objective over the packed vector of trainable log-parameters.
struct Packed {
  const Mat& x;
  const Vec& y;
  KernelSpec spec;       // mutated in place during evaluation
  bool train_noise;
  double noise_std;
  std::vector<int> kernel_indices;  // trainable kernel params

  int dim() const {
    return static_cast<int>(kernel_indices.size()) + (train_noise ? 1 : 0);
  }

  Vec pack() const {
    Vec theta(dim());
    for (size_t i = 0; i < kernel_indices.size(); ++i)
      theta[static_cast<long>(i)] = spec.params.log_values[kernel_indices[i]];
    if (train_noise) theta[dim() - 1] = std::log(std::max(noise_std, kNoiseFloor));
    return theta;
  }

  void unpack(const Vec& theta) {
    for (size_t i = 0; i < kernel_indices.size(); ++i)
      spec.params.log_values[kernel_indices[i]] = theta[static_cast<long>(i)];
    if (train_noise) noise_std = std::exp(std::max(theta[dim() - 1], std::log(kNoiseFloor)));
  }

  double eval(const Vec& theta, Vec* grad) {
    unpack(theta);
    Vec full_grad;
    const double nll =
        nll_with_gradient(x, y, spec, noise_std, grad ? &full_grad : nullptr);
    if (grad) {
      grad->resize(dim());
      for (size_t i = 0; i < kernel_indices.size(); ++i)
        (*grad)[static_cast<long>(i)] = full_grad[kernel_indices[i]];
      if (train_noise) (*grad)[dim() - 1] = full_grad[full_grad.size() - 1];
    }
    return nll;
  }
};

struct LbfgsMemory {
  std::vector<Vec> s, y;
  std::vector<double> rho;
  static constexpr int kCapacity = 8;

  void push(const Vec& step, const Vec& grad_diff) {
    const double sy = step.dot(grad_diff);
    if (sy <= 1e-12) return;  // skip non-curvature pairs
    if (static_cast<int>(s.size()) == kCapacity) {
      s.erase(s.begin());
      y.erase(y.begin());
      rho.erase(rho.begin());
    }
    s.push_back(step);
    y.push_back(grad_diff);
    rho.push_back(1.0 / sy);
  }

  Vec direction(const Vec& grad) const {
    Vec q = -grad;
    const int m = static_cast<int>(s.size());
    std::vector<double> a(static_cast<size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      a[static_cast<size_t>(i)] = rho[static_cast<size_t>(i)] * s[static_cast<size_t>(i)].dot(q);
      q -= a[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
    }
    if (m > 0) {
      const Vec& sl = s[static_cast<size_t>(m - 1)];
      const Vec& yl = y[static_cast<size_t>(m - 1)];
      q *= sl.dot(yl) / yl.squaredNorm();
    }
    for (int i = 0; i < m; ++i) {
      const double b = rho[static_cast<size_t>(i)] * y[static_cast<size_t>(i)].dot(q);
      q += (a[static_cast<size_t>(i)] - b) * s[static_cast<size_t>(i)];
    }
    return q;
  }
};

}  // namespace

OptimizeResult optimize_hyperparameters(const Mat& x, const Vec& y, const KernelSpec& init,
                                        double init_noise_std,
                                        const OptimizeOptions& options) {
  require(options.budget >= 1, "optimize: budget must be at least one evaluation");
  require(options.restarts >= 1, "optimize: at least one start required");

  std::vector<int> trainable;
  for (int i = 0; i < init.params.size(); ++i)
    if (init.is_trainable(i)) trainable.push_back(i);

  OptimizeResult result;
  result.kernel = init;
  result.noise_std = init_noise_std;
  result.nll = std::numeric_limits<double>::infinity();
  bool any_success = false;

  Packed obj{x, y, init, options.train_noise, init_noise_std, trainable};
  const Vec theta_init = obj.pack();

  auto record_eval = [&](double value, const Vec& theta) {
    ++result.evaluations;
    if (value < result.nll) {
      obj.unpack(theta);
      result.nll = value;
      result.kernel = obj.spec;
      result.noise_std = obj.noise_std;
    }
    result.best_trace.push_back(result.nll);
  };

  std::mt19937_64 restart_rng(options.seed);
  std::normal_distribution<double> perturb(0.0, 0.5);
  const int per_start = std::max(1, options.budget / options.restarts);

  for (int start = 0; start < options.restarts; ++start) {
    if (result.evaluations >= options.budget) break;
    Vec theta = theta_init;
    if (start > 0)
      for (int i = 0; i < theta.size(); ++i) theta[i] += perturb(restart_rng);

    int evals_left = std::min(per_start, options.budget - result.evaluations);
    Vec grad;
    double f;
    try {
      f = obj.eval(theta, &grad);
    } catch (const NumericalError&) {
      continue;  // this start is unusable
    }
    any_success = true;
    record_eval(f, theta);
    --evals_left;

    LbfgsMemory memory;
    for (int iter = 0; iter < options.max_iterations && evals_left > 0; ++iter) {
      if (grad.norm() <= options.grad_tol * std::max(1.0, std::abs(f))) break;
      Vec dir = memory.direction(grad);
      if (dir.dot(grad) >= 0.0) dir = -grad;  // fall back to steepest descent

      // backtracking Armijo line search
      double step = 1.0;
      const double slope = dir.dot(grad);
      bool accepted = false;
      Vec theta_new;
      double f_new = f;
      Vec grad_new;
      while (evals_left > 0) {
        theta_new = theta + step * dir;
        double trial;
        bool ok = true;
        try {
          trial = obj.eval(theta_new, &grad_new);
        } catch (const NumericalError&) {
          ok = false;
          trial = std::numeric_limits<double>::infinity();
        }
        if (ok) record_eval(trial, theta_new);
        --evals_left;
        if (ok && trial <= f + 1e-4 * step * slope) {
          f_new = trial;
          accepted = true;
          break;
        }
        step *= 0.5;
        if (step < 1e-12) break;
      }
      if (!accepted) break;

      memory.push(theta_new - theta, grad_new - grad);
      const double improvement = f - f_new;
      theta = theta_new;
      grad = grad_new;
      f = f_new;
      if (improvement <= options.rel_f_tol * std::max(1.0, std::abs(f))) break;
    }
  }

  if (!any_success)
    throw NumericalError("hyperparameter optimization failed on every start "
                         "(ill-conditioned kernel)");
  return result;
}

}  // namespace gpdyn
