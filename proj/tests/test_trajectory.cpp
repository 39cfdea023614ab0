#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpdyn/dataset_io.hpp"
#include "gpdyn/rnea.hpp"
#include "gpdyn/signal.hpp"
#include "gpdyn/trajectory.hpp"
#include "helpers.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

using namespace gpdyn;

namespace {

TrajectoryConfig small_cfg(int dof, uint64_t seed) {
  TrajectoryConfig cfg;
  cfg.duration = 20.0;
  cfg.rate = 100.0;
  cfg.cutoff = 1.0;
  cfg.amplitude = Vec::Constant(dof, 18.0);
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("butterworth filter has unity DC gain and attenuates high frequencies") {
  const BiquadCoeffs c = butterworth_lowpass(1.0, 100.0);
  // step response settles at 1
  Vec step = Vec::Ones(2000);
  const Vec y = filter_forward(c, step);
  CHECK(y[1999] == doctest::Approx(1.0).epsilon(1e-6));
  // sinusoid at 10x the cutoff is strongly attenuated
  Vec hi(4000);
  for (int i = 0; i < hi.size(); ++i) hi[i] = std::sin(2.0 * M_PI * 10.0 * i / 100.0);
  const Vec z = filtfilt(c, hi);
  CHECK(z.segment(1000, 2000).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("zero amplitude produces the zero trajectory") {
  TrajectoryConfig cfg = small_cfg(2, 7);
  cfg.amplitude.setZero();
  const JointTrajectory traj = filtered_noise_trajectory(cfg, 2);
  CHECK(traj.q.cwiseAbs().maxCoeff() == 0.0);
  CHECK(traj.qd.cwiseAbs().maxCoeff() == 0.0);
  CHECK(traj.qdd.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trajectories are deterministic in the seed") {
  const TrajectoryConfig cfg = small_cfg(3, 42);
  const JointTrajectory a = filtered_noise_trajectory(cfg, 3);
  const JointTrajectory b = filtered_noise_trajectory(cfg, 3);
  CHECK(a.q == b.q);
  CHECK(a.qd == b.qd);
  CHECK(a.qdd == b.qdd);
  TrajectoryConfig other = cfg;
  other.seed = 43;
  CHECK(filtered_noise_trajectory(other, 3).q != a.q);
}

TEST_CASE("power above three times the cutoff is below one percent") {
  TrajectoryConfig cfg = small_cfg(1, 3);
  cfg.duration = 100.0;
  const JointTrajectory traj = filtered_noise_trajectory(cfg, 1);
  const int n = traj.samples();
  Vec x = traj.q.col(0);
  x.array() -= x.mean();
  const double total_power = x.squaredNorm();
  // sum DFT power over bins up to 3*cutoff only (the band that should
  // hold essentially all of the signal)
  const double bin_hz = cfg.rate / n;
  const int cut_bin = static_cast<int>(3.0 * cfg.cutoff / bin_hz);
  double low_power = 0.0;
  for (int k = 1; k <= cut_bin; ++k) {
    std::complex<double> acc = 0.0;
    const double w = -2.0 * M_PI * k / n;
    for (int i = 0; i < n; ++i)
      acc += x[i] * std::complex<double>(std::cos(w * i), std::sin(w * i));
    low_power += 2.0 * std::norm(acc) / n;  // one-sided
  }
  CHECK((total_power - low_power) / total_power <= 0.01);
}

TEST_CASE("central differences are mutually consistent") {
  // trapezoid integration of qdd recovers qd; the integration error grows
  // linearly with the excitation amplitude, so check the absolute bound at
  // unit amplitude and a relative bound at the default amplitude
  auto integration_rms = [](const TrajectoryConfig& cfg, int joint, double* qd_rms) {
    const JointTrajectory traj = filtered_noise_trajectory(cfg, 2);
    const double h = 1.0 / cfg.rate;
    double v = traj.qd(0, joint);
    double sq_err = 0.0;
    for (int k = 1; k < traj.samples(); ++k) {
      v += 0.5 * h * (traj.qdd(k - 1, joint) + traj.qdd(k, joint));
      sq_err += std::pow(v - traj.qd(k, joint), 2);
    }
    *qd_rms = std::sqrt(traj.qd.col(joint).squaredNorm() / traj.samples());
    return std::sqrt(sq_err / traj.samples());
  };

  TrajectoryConfig unit = small_cfg(2, 9);
  unit.amplitude.setConstant(1.0);
  double qd_rms = 0.0;
  for (int j = 0; j < 2; ++j) CHECK(integration_rms(unit, j, &qd_rms) <= 1e-3);

  const TrajectoryConfig full = small_cfg(2, 9);
  for (int j = 0; j < 2; ++j) {
    const double err = integration_rms(full, j, &qd_rms);
    CHECK(err / qd_rms <= 5e-3);
  }
}

TEST_CASE("noiseless datasets satisfy the dynamics exactly") {
  const RobotModel model = resolve_robot("planar2");
  TrajectoryConfig cfg = small_cfg(2, 12);
  cfg.duration = 5.0;
  const Dataset ds = generate_dataset(model, cfg, 0.0, 99);
  for (int k = 0; k < ds.size(); ++k) {
    const Vec tau = inverse_dynamics(model, ds.q.row(k).transpose(),
                                     ds.qd.row(k).transpose(), ds.qdd.row(k).transpose());
    CHECK((ds.tau.row(k).transpose() - tau).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("torque noise has the requested standard deviation") {
  const RobotModel model = resolve_robot("pendulum1");
  TrajectoryConfig cfg = small_cfg(1, 5);
  cfg.duration = 100.0;
  const Dataset noisy = generate_dataset(model, cfg, 0.01, 77);
  const Dataset clean = generate_dataset(model, cfg, 0.0, 77);
  CHECK(noisy.size() == 10000);
  const Vec residual = noisy.tau.col(0) - clean.tau.col(0);
  const double std = std::sqrt(residual.squaredNorm() / residual.size());
  CHECK(std == doctest::Approx(0.01).epsilon(0.10));
}

TEST_CASE("split is a nested prefix split") {
  const RobotModel model = resolve_robot("planar2");
  TrajectoryConfig cfg = small_cfg(2, 21);
  const Dataset ds = generate_dataset(model, cfg, 0.0, 1);
  auto [train, rest] = split(ds, 6.0);
  CHECK(train.size() == 600);
  CHECK(rest.size() == ds.size() - 600);
  CHECK(train.q == ds.q.topRows(600));
  CHECK(rest.t[0] == ds.t[600]);
  auto [train10, rest10] = split(ds, 10.0);
  CHECK(train10.q.topRows(600) == train.q);
  auto [all, none] = split(ds, 20.0);
  CHECK(all.size() == ds.size());
  CHECK(none.size() == 0);
  CHECK_THROWS_AS(split(ds, 0.0), ConfigError);
  CHECK_THROWS_AS(split(ds, 21.0), ConfigError);
}

TEST_CASE("invalid trajectory configurations are rejected") {
  TrajectoryConfig cfg = small_cfg(2, 0);
  cfg.rate = 1.5;  // below 2x cutoff
  CHECK_THROWS_AS(filtered_noise_trajectory(cfg, 2), ConfigError);
  cfg = small_cfg(2, 0);
  cfg.duration = 0.0;
  CHECK_THROWS_AS(filtered_noise_trajectory(cfg, 2), ConfigError);
  cfg = small_cfg(2, 0);
  cfg.amplitude = Vec::Constant(1, 1.0);
  CHECK_THROWS_AS(filtered_noise_trajectory(cfg, 2), ConfigError);
}

TEST_CASE("dataset files round-trip and are byte-stable") {
  namespace fs = std::filesystem;
  const RobotModel model = resolve_robot("planar2");
  TrajectoryConfig cfg = small_cfg(2, 33);
  cfg.duration = 2.0;
  const Dataset ds = generate_dataset(model, cfg, 0.01, 8);
  const fs::path dir = fs::temp_directory_path() / "gpdyn_test_io";
  fs::create_directories(dir);
  const std::string path = (dir / "ds.csv").string();
  const std::string fp1 = write_dataset(ds, path);
  const Dataset back = read_dataset(path);
  CHECK(back.size() == ds.size());
  CHECK(back.robot_name == ds.robot_name);
  CHECK(back.noise_std == ds.noise_std);
  CHECK((back.q - ds.q).cwiseAbs().maxCoeff() == 0.0);   // 17 digits round-trips
  CHECK((back.tau - ds.tau).cwiseAbs().maxCoeff() == 0.0);
  const std::string fp2 = write_dataset(back, path);
  CHECK(fp1 == fp2);
  CHECK(fp1 == dataset_fingerprint(ds));
  fs::remove_all(dir);
}
