#pragma once

#include "gpdyn/robot_model.hpp"
#include "gpdyn/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

namespace gpdyn {

/// Deterministic standard-normal sampler (Box-Muller over the raw 64-bit
/// stream), so generated data are bit-identical across standard libraries.
class GaussianSampler {
public:
  explicit GaussianSampler(uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct TrajectoryConfig {
  double duration = 100.0;  ///< [s]
  double rate = 100.0;      ///< output sample rate [Hz]
  double cutoff = 1.0;      ///< low-pass cutoff [Hz]
  Vec amplitude;            ///< per-joint noise std before filtering
  uint64_t seed = 0;

  void validate(int dof) const;
};

/// One trajectory: samples are rows, joints are columns.
struct JointTrajectory {
  Vec t;
  Mat q, qd, qdd;
  int samples() const { return static_cast<int>(t.size()); }
};

/// Per joint, white Gaussian noise with the configured amplitude is
/// low-passed with a zero-phase second-order Butterworth filter on a
/// 10x-oversampled grid; velocities and accelerations come from central
/// differences on that grid before decimation to the output rate.
/// Joint j draws from a stream seeded with cfg.seed XOR j.
JointTrajectory filtered_noise_trajectory(const TrajectoryConfig& cfg, int dof);

struct Dataset {
  std::string robot_name;
  double rate = 0.0;
  double noise_std = 0.0;
  uint64_t seed = 0;      ///< torque-noise seed
  uint64_t traj_seed = 0;
  Vec t;
  Mat q, qd, qdd, tau;    // samples x dof

  int size() const { return static_cast<int>(t.size()); }
  int dof() const { return static_cast<int>(q.cols()); }
};

/// Evaluates the model's inverse dynamics along a generated trajectory and
/// adds i.i.d. Gaussian torque noise with the given standard deviation.
/// The kinematic channels are stored noiseless.
Dataset generate_dataset(const RobotModel& model, const TrajectoryConfig& cfg,
                         double torque_noise_std, uint64_t noise_seed);

/// Prefix split on the time grid: the first train_seconds go left,
/// the remainder right.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_seconds);

/// First `count` samples of the dataset.
Dataset head(const Dataset& dataset, int count);

}  // namespace gpdyn
