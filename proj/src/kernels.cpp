#include "gpdyn/kernels.hpp"

#include "gpdyn/rnea.hpp"

#include <algorithm>
#include <cmath>

namespace gpdyn {

int HyperparameterVector::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  require(it != names.end(), "unknown hyperparameter '" + name + "'");
  return static_cast<int>(it - names.begin());
}

void HyperparameterVector::set(const std::string& name, double v) {
  require(v > 0.0, "hyperparameter '" + name + "' must be positive");
  log_values[index(name)] = std::log(v);
}

void HyperparameterVector::push(const std::string& name, double v) {
  require(v > 0.0, "hyperparameter '" + name + "' must be positive");
  names.push_back(name);
  log_values.conservativeResize(log_values.size() + 1);
  log_values[log_values.size() - 1] = std::log(v);
}

// ---------------------------------------------------------------- SE

double se_kernel(const Vec& x, const Vec& y, double scale, const Vec& lengthscales) {
  require(x.size() == y.size() && x.size() == lengthscales.size(),
          "se_kernel: dimension mismatch");
  const double d2 = ((x - y).array() / lengthscales.array()).square().sum();
  return scale * std::exp(-d2);
}

double poly_kernel(const Vec& x, const Vec& y, int degree, const Vec& weights, double bias) {
  require(degree == 1 || degree == 2, "poly_kernel: degree must be 1 or 2");
  require(x.size() == y.size() && x.size() == weights.size(),
          "poly_kernel: dimension mismatch");
  require(bias >= 0.0 && (weights.array() >= 0.0).all(),
          "poly_kernel: weights and bias must be nonnegative");
  const double u = bias + (weights.array() * x.array() * y.array()).sum();
  return degree == 1 ? u : u * u;
}

// ---------------------------------------------------------------- GIP

Vec gip_transform(const Vec& q, const std::vector<JointKind>& kinds) {
  require(q.size() == static_cast<long>(kinds.size()), "gip_transform: dimension mismatch");
  int out_dim = 0;
  for (JointKind k : kinds) out_dim += (k == JointKind::Revolute) ? 2 : 1;
  Vec out(out_dim);
  int o = 0;
  for (int i = 0; i < q.size(); ++i) {
    if (kinds[static_cast<size_t>(i)] == JointKind::Revolute) {
      out[o++] = std::cos(q[i]);
      out[o++] = std::sin(q[i]);
    } else {
      out[o++] = q[i];
    }
  }
  return out;
}

namespace {

// Cached view of GIP parameters in their canonical order:
//   accel_bias, accel_w_*, vel_bias, vel_w_*, then per joint
//   cfg_bias_i, cfg_w_i_* (two weights for revolute, one for prismatic).
struct GipParams {
  double accel_bias;
  Vec accel_w;
  double vel_bias;
  Vec vel_w;
  Vec cfg_bias;                 // per joint
  std::vector<Vec> cfg_w;       // per joint, block-sized

  explicit GipParams(const KernelSpec& spec) {
    const int n = spec.layout.dof;
    const Vec v = spec.params.log_values.array().exp();
    int p = 0;
    accel_bias = v[p++];
    accel_w = v.segment(p, n); p += n;
    vel_bias = v[p++];
    vel_w = v.segment(p, n); p += n;
    cfg_bias.resize(n);
    cfg_w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int block = spec.joint_kinds[static_cast<size_t>(i)] == JointKind::Revolute ? 2 : 1;
      cfg_bias[i] = v[p++];
      cfg_w[static_cast<size_t>(i)] = v.segment(p, block);
      p += block;
    }
    require(p == v.size(), "GIP parameter vector has unexpected length");
  }
};

struct GipPieces {
  double u_accel;    // degree-1 factor argument (already the kernel value)
  double u_vel;      // degree-2 factor argument
  Vec u_cfg;         // per-joint degree-2 factor arguments
  double cfg_prod;   // prod u_cfg^2
  double value;
};

GipPieces gip_pieces(const GipParams& p, const std::vector<JointKind>& kinds,
                     const Vec& x, const Vec& y, int n) {
  GipPieces out;
  const auto qx = x.head(n), qy = y.head(n);
  const auto qdx = x.segment(n, n), qdy = y.segment(n, n);
  const auto qddx = x.tail(n), qddy = y.tail(n);

  out.u_accel = p.accel_bias + (p.accel_w.array() * qddx.array() * qddy.array()).sum();
  out.u_vel = p.vel_bias + (p.vel_w.array() * qdx.array() * qdy.array()).sum();

  const Vec tx = gip_transform(qx, kinds);
  const Vec ty = gip_transform(qy, kinds);
  out.u_cfg.resize(n);
  out.cfg_prod = 1.0;
  int o = 0;
  for (int i = 0; i < n; ++i) {
    const int block = kinds[static_cast<size_t>(i)] == JointKind::Revolute ? 2 : 1;
    double u = p.cfg_bias[i];
    for (int d = 0; d < block; ++d)
      u += p.cfg_w[static_cast<size_t>(i)][d] * tx[o + d] * ty[o + d];
    o += block;
    out.u_cfg[i] = u;
    out.cfg_prod *= u * u;
  }
  out.value = (out.u_accel + out.u_vel * out.u_vel) * out.cfg_prod;
  return out;
}

}  // namespace

double gip_kernel(const Vec& x, const Vec& y, const KernelSpec& spec) {
  require(spec.family == KernelFamily::Gip, "gip_kernel: spec is not a GIP spec");
  require(spec.layout.kind == InputKind::InverseDynamics,
          "gip_kernel: requires the inverse-dynamics input layout");
  require(x.size() == spec.layout.dim() && y.size() == spec.layout.dim(),
          "gip_kernel: input dimension mismatch");
  const GipParams p(spec);
  return gip_pieces(p, spec.joint_kinds, x, y, spec.layout.dof).value;
}

// ---------------------------------------------------------------- SP

namespace {

struct SpParams {
  Vec param_var;  // diagonal prior covariance of the inertial parameters
  double se_scale;
  Vec se_ls;

  SpParams(const KernelSpec& spec, int phi_dim) {
    const Vec v = spec.params.log_values.array().exp();
    param_var = v.head(phi_dim);
    se_scale = v[phi_dim];
    se_ls = v.tail(spec.layout.dim());
  }
};

}  // namespace

double sp_kernel(const Vec& x, const Vec& y, const KernelSpec& spec) {
  require(spec.family == KernelFamily::Semiparametric, "sp_kernel: spec is not an SP spec");
  if (!spec.regressor_row)
    throw ConfigError("semiparametric kernel needs a regressor source");
  const Vec phi_x = spec.regressor_row(x);
  const Vec phi_y = spec.regressor_row(y);
  const SpParams p(spec, static_cast<int>(phi_x.size()));
  return (p.param_var.array() * phi_x.array() * phi_y.array()).sum() +
         se_kernel(x, y, p.se_scale, p.se_ls);
}

// ---------------------------------------------------------------- dispatch

double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y) {
  switch (spec.family) {
    case KernelFamily::SquaredExponential: {
      const Vec v = spec.params.log_values.array().exp();
      return se_kernel(x, y, v[0], v.tail(spec.layout.dim()));
    }
    case KernelFamily::Gip:
      return gip_kernel(x, y, spec);
    case KernelFamily::Semiparametric:
      return sp_kernel(x, y, spec);
  }
  throw ContractError("unknown kernel family");
}

Mat gram(const KernelSpec& spec, const Mat& a, const Mat& b) {
  require(a.cols() == spec.layout.dim() && b.cols() == spec.layout.dim(),
          "gram: input dimension mismatch");
  if (spec.family == KernelFamily::Semiparametric) {
    // precompute regressor rows once per input
    if (!spec.regressor_row)
      throw ConfigError("semiparametric kernel needs a regressor source");
    Mat phi_a(a.rows(), spec.regressor_row(a.row(0).transpose()).size());
    for (int j = 0; j < a.rows(); ++j)
      phi_a.row(j) = spec.regressor_row(a.row(j).transpose()).transpose();
    Mat phi_b(b.rows(), phi_a.cols());
    for (int l = 0; l < b.rows(); ++l)
      phi_b.row(l) = spec.regressor_row(b.row(l).transpose()).transpose();
    const SpParams p(spec, static_cast<int>(phi_a.cols()));
    Mat g = phi_a * p.param_var.asDiagonal() * phi_b.transpose();
    for (int j = 0; j < a.rows(); ++j)
      for (int l = 0; l < b.rows(); ++l)
        g(j, l) += se_kernel(a.row(j).transpose(), b.row(l).transpose(), p.se_scale, p.se_ls);
    return g;
  }
  Mat g(a.rows(), b.rows());
  for (int j = 0; j < a.rows(); ++j)
    for (int l = 0; l < b.rows(); ++l)
      g(j, l) = kernel_eval(spec, a.row(j).transpose(), b.row(l).transpose());
  return g;
}

Mat gram_sym(const KernelSpec& spec, const Mat& a) {
  if (spec.family == KernelFamily::Semiparametric) {
    Mat g = gram(spec, a, a);
    return 0.5 * (g + g.transpose());  // exact symmetry
  }
  Mat g(a.rows(), a.rows());
  for (int j = 0; j < a.rows(); ++j)
    for (int l = 0; l <= j; ++l) {
      const double v = kernel_eval(spec, a.row(j).transpose(), a.row(l).transpose());
      g(j, l) = v;
      g(l, j) = v;
    }
  return g;
}

// ---------------------------------------------------------------- gradients

namespace {

Vec se_weighted_gradient(const KernelSpec& spec, const Mat& a, const Mat& weight) {
  const int dim = spec.layout.dim();
  const Vec v = spec.params.log_values.array().exp();
  const double scale = v[0];
  const Vec ls = v.tail(dim);
  Vec g = Vec::Zero(spec.params.size());
  for (int j = 0; j < a.rows(); ++j)
    for (int l = 0; l < a.rows(); ++l) {
      const Vec diff = (a.row(j) - a.row(l)).transpose();
      const Vec scaled2 = (diff.array() / ls.array()).square();
      const double k = scale * std::exp(-scaled2.sum());
      const double w = weight(j, l);
      g[0] += w * k;  // d/dlog scale
      for (int d = 0; d < dim; ++d) g[1 + d] += w * k * 2.0 * scaled2[d];
    }
  return g;
}

Vec gip_weighted_gradient(const KernelSpec& spec, const Mat& a, const Mat& weight) {
  const int n = spec.layout.dof;
  const GipParams p(spec);
  const int n_params = spec.params.size();
  Vec g = Vec::Zero(n_params);

  // precompute transforms
  Mat t(a.rows(), gip_transform(a.row(0).head(n).transpose(), spec.joint_kinds).size());
  for (int j = 0; j < a.rows(); ++j)
    t.row(j) = gip_transform(a.row(j).head(n).transpose(), spec.joint_kinds).transpose();

  Vec prefix(n + 1), suffix(n + 1);
  for (int j = 0; j < a.rows(); ++j) {
    const Vec x = a.row(j).transpose();
    for (int l = 0; l < a.rows(); ++l) {
      const Vec y = a.row(l).transpose();
      const double w = weight(j, l);
      if (w == 0.0) continue;
      const GipPieces pc = gip_pieces(p, spec.joint_kinds, x, y, n);

      // products of u_cfg^2 excluding one joint
      prefix[0] = 1.0;
      for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * pc.u_cfg[i] * pc.u_cfg[i];
      suffix[n] = 1.0;
      for (int i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * pc.u_cfg[i] * pc.u_cfg[i];

      int idx = 0;
      // accel factor (degree 1)
      g[idx++] += w * p.accel_bias * pc.cfg_prod;
      for (int d = 0; d < n; ++d)
        g[idx++] += w * p.accel_w[d] * x[2 * n + d] * y[2 * n + d] * pc.cfg_prod;
      // vel factor (degree 2)
      g[idx++] += w * p.vel_bias * 2.0 * pc.u_vel * pc.cfg_prod;
      for (int d = 0; d < n; ++d)
        g[idx++] += w * p.vel_w[d] * x[n + d] * y[n + d] * 2.0 * pc.u_vel * pc.cfg_prod;
      // configuration factors
      const double head = pc.u_accel + pc.u_vel * pc.u_vel;
      int o = 0;
      for (int i = 0; i < n; ++i) {
        const int block =
            spec.joint_kinds[static_cast<size_t>(i)] == JointKind::Revolute ? 2 : 1;
        const double rest = head * prefix[i] * suffix[i + 1] * 2.0 * pc.u_cfg[i];
        g[idx++] += w * p.cfg_bias[i] * rest;
        for (int d = 0; d < block; ++d)
          g[idx++] += w * p.cfg_w[static_cast<size_t>(i)][d] * t(j, o + d) * t(l, o + d) * rest;
        o += block;
      }
    }
  }
  return g;
}

Vec sp_weighted_gradient(const KernelSpec& spec, const Mat& a, const Mat& weight) {
  Mat phi(a.rows(), spec.regressor_row(a.row(0).transpose()).size());
  for (int j = 0; j < a.rows(); ++j)
    phi.row(j) = spec.regressor_row(a.row(j).transpose()).transpose();
  const int phi_dim = static_cast<int>(phi.cols());
  const SpParams p(spec, phi_dim);

  Vec g = Vec::Zero(spec.params.size());
  // linear part: d/dlog w_k = w_k phi_k phi_k^T
  for (int k = 0; k < phi_dim; ++k)
    g[k] = p.param_var[k] * phi.col(k).dot(weight * phi.col(k));
  // SE part reuses the SE path with a shifted index base
  KernelSpec se;
  se.family = KernelFamily::SquaredExponential;
  se.layout = spec.layout;
  se.params.names.assign(spec.params.names.begin() + phi_dim, spec.params.names.end());
  se.params.log_values = spec.params.log_values.tail(spec.params.size() - phi_dim);
  g.tail(spec.params.size() - phi_dim) = se_weighted_gradient(se, a, weight);
  return g;
}

}  // namespace

Vec gram_weighted_gradient(const KernelSpec& spec, const Mat& a, const Mat& weight) {
  require(weight.rows() == a.rows() && weight.cols() == a.rows(),
          "gram_weighted_gradient: weight shape mismatch");
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return se_weighted_gradient(spec, a, weight);
    case KernelFamily::Gip:
      return gip_weighted_gradient(spec, a, weight);
    case KernelFamily::Semiparametric:
      return sp_weighted_gradient(spec, a, weight);
  }
  throw ContractError("unknown kernel family");
}

// ---------------------------------------------------------------- factories

KernelSpec make_se_spec(const InputLayout& layout, double scale, const Vec& lengthscales) {
  require(lengthscales.size() == layout.dim(), "make_se_spec: one lengthscale per dimension");
  KernelSpec spec;
  spec.family = KernelFamily::SquaredExponential;
  spec.layout = layout;
  spec.params.push("scale", scale);
  for (int d = 0; d < layout.dim(); ++d)
    spec.params.push("ls_" + std::to_string(d), lengthscales[d]);
  return spec;
}

KernelSpec make_gip_spec(const InputLayout& layout, const std::vector<JointKind>& kinds) {
  require(layout.kind == InputKind::InverseDynamics,
          "GIP kernel requires the inverse-dynamics input layout");
  require(static_cast<int>(kinds.size()) == layout.dof,
          "make_gip_spec: one joint kind per joint");
  KernelSpec spec;
  spec.family = KernelFamily::Gip;
  spec.layout = layout;
  spec.joint_kinds = kinds;
  const int n = layout.dof;
  spec.params.push("accel_bias", 1.0);
  for (int d = 0; d < n; ++d) spec.params.push("accel_w_" + std::to_string(d), 1.0);
  spec.params.push("vel_bias", 1.0);
  for (int d = 0; d < n; ++d) spec.params.push("vel_w_" + std::to_string(d), 1.0);
  for (int i = 0; i < n; ++i) {
    const int block = kinds[static_cast<size_t>(i)] == JointKind::Revolute ? 2 : 1;
    spec.params.push("cfg_bias_" + std::to_string(i), 1.0);
    for (int d = 0; d < block; ++d)
      spec.params.push("cfg_w_" + std::to_string(i) + "_" + std::to_string(d), 1.0);
  }
  return spec;
}

KernelSpec make_sp_spec(const InputLayout& layout, int joint,
                        std::function<Vec(const Vec&)> regressor_row, const Vec& param_var,
                        double se_scale, const Vec& se_lengthscales) {
  require(layout.kind == InputKind::InverseDynamics,
          "semiparametric kernel requires the inverse-dynamics input layout");
  require((param_var.array() > 0.0).all(),
          "make_sp_spec: parameter variances must be positive (use the free "
          "sp_kernel for degenerate values)");
  KernelSpec spec;
  spec.family = KernelFamily::Semiparametric;
  spec.layout = layout;
  spec.regressor_joint = joint;
  spec.regressor_row = std::move(regressor_row);
  for (int k = 0; k < param_var.size(); ++k)
    spec.params.push("w_var_" + std::to_string(k), param_var[k]);
  spec.params.push("se_scale", se_scale);
  for (int d = 0; d < layout.dim(); ++d)
    spec.params.push("se_ls_" + std::to_string(d), se_lengthscales[d]);
  return spec;
}

std::function<Vec(const Vec&)> regressor_row_source(const RobotModel& model, int joint) {
  require(joint >= 0 && joint < model.dof(), "regressor joint index out of range");
  const int n = model.dof();
  return [model, joint, n](const Vec& x) -> Vec {
    require(x.size() == 3 * n, "regressor source: input dimension mismatch");
    return regressor(model, x.head(n), x.segment(n, n), x.tail(n)).row(joint).transpose();
  };
}

namespace {

Vec column_stds(const Mat& x) {
  Vec out(x.cols());
  for (int d = 0; d < x.cols(); ++d) {
    const double mean = x.col(d).mean();
    out[d] = std::sqrt((x.col(d).array() - mean).square().sum() /
                       std::max<long>(1, x.rows() - 1));
  }
  return out;
}

}  // namespace

KernelSpec se_spec_from_data(const InputLayout& layout, const Mat& x, const Vec& y) {
  const double y_var = std::max(1e-8, (y.array() - y.mean()).square().sum() /
                                          std::max<long>(1, y.size() - 1));
  const Vec stds = column_stds(x);
  Vec ls(layout.dim());
  const double spread = std::sqrt(static_cast<double>(layout.dim()));
  for (int d = 0; d < layout.dim(); ++d) ls[d] = std::max(stds[d], 1e-3) * spread;
  return make_se_spec(layout, y_var, ls);
}

KernelSpec gip_spec_from_data(const InputLayout& layout, const std::vector<JointKind>& kinds,
                              const Mat& x, const Vec& y) {
  KernelSpec spec = make_gip_spec(layout, kinds);
  const int n = layout.dof;
  const double y_var = std::max(1e-8, (y.array() - y.mean()).square().sum() /
                                          std::max<long>(1, y.size() - 1));
  const Vec stds = column_stds(x);
  // scale the sum factor to the target variance and keep each
  // configuration factor near unity
  spec.params.set("accel_bias", y_var);
  spec.params.set("vel_bias", std::sqrt(y_var));
  for (int d = 0; d < n; ++d) {
    const double vel_var = std::max(1e-6, stds[n + d] * stds[n + d]);
    const double acc_var = std::max(1e-6, stds[2 * n + d] * stds[2 * n + d]);
    spec.params.set("accel_w_" + std::to_string(d), y_var / (n * acc_var));
    spec.params.set("vel_w_" + std::to_string(d), std::sqrt(y_var) / (n * vel_var));
  }
  for (int i = 0; i < n; ++i) {
    const int block = kinds[static_cast<size_t>(i)] == JointKind::Revolute ? 2 : 1;
    spec.params.set("cfg_bias_" + std::to_string(i), 0.5);
    for (int d = 0; d < block; ++d)
      spec.params.set("cfg_w_" + std::to_string(i) + "_" + std::to_string(d), 0.5 / block);
  }
  return spec;
}

}  // namespace gpdyn
