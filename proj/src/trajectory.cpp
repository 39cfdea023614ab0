#include "gpdyn/trajectory.hpp"

#include "gpdyn/rnea.hpp"
#include "gpdyn/signal.hpp"

#include <cmath>

namespace gpdyn {

namespace {
constexpr int kOversample = 10;
}

void TrajectoryConfig::validate(int dof) const {
  if (!(duration > 0.0)) throw ConfigError("trajectory duration must be positive");
  if (!(rate > 2.0 * cutoff))
    throw ConfigError("sample rate must exceed twice the filter cutoff");
  if (amplitude.size() != dof)
    throw ConfigError("trajectory amplitude list must have one entry per joint");
  if ((amplitude.array() < 0.0).any())
    throw ConfigError("trajectory amplitudes must be nonnegative");
}

JointTrajectory filtered_noise_trajectory(const TrajectoryConfig& cfg, int dof) {
  cfg.validate(dof);
  const double fs = kOversample * cfg.rate;
  const int n_out = static_cast<int>(std::llround(cfg.duration * cfg.rate));
  const int n_int = n_out * kOversample;
  // padding absorbs the filter transient and feeds the end-point differences
  const int pad = static_cast<int>(std::ceil(6.0 / cfg.cutoff * fs));
  const int n_total = n_int + 2 * pad;
  const BiquadCoeffs coeffs = butterworth_lowpass(cfg.cutoff, fs);

  JointTrajectory traj;
  traj.t = Vec::LinSpaced(n_out, 0.0, static_cast<double>(n_out - 1) / cfg.rate);
  traj.q.resize(n_out, dof);
  traj.qd.resize(n_out, dof);
  traj.qdd.resize(n_out, dof);

  const double h = 1.0 / fs;
  for (int j = 0; j < dof; ++j) {
    GaussianSampler noise(cfg.seed ^ static_cast<uint64_t>(j));
    Vec raw(n_total);
    for (int i = 0; i < n_total; ++i) raw[i] = cfg.amplitude[j] * noise.next();
    const Vec smooth = filtfilt(coeffs, raw);
    for (int k = 0; k < n_out; ++k) {
      const int i = pad + k * kOversample;
      traj.q(k, j) = smooth[i];
      traj.qd(k, j) = (smooth[i + 1] - smooth[i - 1]) / (2.0 * h);
      traj.qdd(k, j) = (smooth[i + 1] - 2.0 * smooth[i] + smooth[i - 1]) / (h * h);
    }
  }
  return traj;
}

Dataset generate_dataset(const RobotModel& model, const TrajectoryConfig& cfg,
                         double torque_noise_std, uint64_t noise_seed) {
  model.validate();
  if (torque_noise_std < 0.0) throw ConfigError("torque noise std must be nonnegative");
  const int n = model.dof();
  const JointTrajectory traj = filtered_noise_trajectory(cfg, n);

  Dataset ds;
  ds.robot_name = model.name;
  ds.rate = cfg.rate;
  ds.noise_std = torque_noise_std;
  ds.seed = noise_seed;
  ds.traj_seed = cfg.seed;
  ds.t = traj.t;
  ds.q = traj.q;
  ds.qd = traj.qd;
  ds.qdd = traj.qdd;
  ds.tau.resize(traj.samples(), n);

  GaussianSampler noise(noise_seed);
  for (int k = 0; k < traj.samples(); ++k) {
    const Vec tau = inverse_dynamics(model, traj.q.row(k).transpose(),
                                     traj.qd.row(k).transpose(),
                                     traj.qdd.row(k).transpose());
    for (int j = 0; j < n; ++j)
      ds.tau(k, j) = tau[j] + torque_noise_std * noise.next();
  }
  return ds;
}

namespace {

Dataset slice(const Dataset& ds, int begin, int count) {
  Dataset out = ds;
  out.t = ds.t.segment(begin, count);
  out.q = ds.q.middleRows(begin, count);
  out.qd = ds.qd.middleRows(begin, count);
  out.qdd = ds.qdd.middleRows(begin, count);
  out.tau = ds.tau.middleRows(begin, count);
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_seconds) {
  const double duration = dataset.size() / dataset.rate;
  if (!(train_seconds > 0.0) || train_seconds > duration + 1e-12)
    throw ConfigError("split point must lie in (0, dataset duration]");
  const int n_train =
      std::min(dataset.size(),
               static_cast<int>(std::llround(train_seconds * dataset.rate)));
  return {slice(dataset, 0, n_train), slice(dataset, n_train, dataset.size() - n_train)};
}

Dataset head(const Dataset& dataset, int count) {
  require(count > 0 && count <= dataset.size(), "head count out of range");
  return slice(dataset, 0, count);
}

}  // namespace gpdyn
