#pragma once

#include "gpdyn/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gpdyn {

enum class JointKind { Revolute, Prismatic };

/// Standard (distal) Denavit-Hartenberg parameters of one joint.
/// The joint variable is theta for revolute joints and d for prismatic
/// joints; the stored value acts as a constant offset in both cases.
struct DhParams {
  double a = 0.0;             ///< link length [m]
  double alpha = 0.0;         ///< link twist [rad]
  double d = 0.0;             ///< link offset [m]
  double theta_offset = 0.0;  ///< joint angle offset [rad]
};

struct Joint {
  JointKind kind = JointKind::Revolute;
  DhParams dh;
};

/// Inertial description of one link. The inertia tensor is expressed
/// about the center of mass, in the link frame.
struct LinkInertia {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia_com = Mat3::Zero();
};

struct JointFriction {
  double viscous = 0.0;  ///< [N·m·s/rad]
  double coulomb = 0.0;  ///< [N·m]
};

/// Kinematic + inertial description of a serial manipulator.
struct RobotModel {
  std::string name;
  std::vector<Joint> joints;
  std::vector<LinkInertia> links;
  Vec3 gravity = Vec3::Zero();  ///< gravity acceleration vector [m/s²]
  std::optional<std::vector<JointFriction>> friction;
  Vec default_amplitude;  ///< per-joint excitation amplitude hint

  int dof() const { return static_cast<int>(joints.size()); }
  bool has_friction() const { return friction.has_value(); }

  /// Throws ConfigError if the model violates its invariants
  /// (positive masses, PSD inertia tensors, matching array lengths).
  void validate() const;
};

/// Parses the robot description text format. See data/robots/*.robot
/// for examples; the schema is documented in the README.
RobotModel parse_robot(std::istream& in, const std::string& origin);

RobotModel load_robot_file(const std::string& path);

/// Resolves a robot by file path or by built-in name
/// (looked up under the data/robots directory shipped with the project).
RobotModel resolve_robot(const std::string& name_or_path);

/// Directory that holds the built-in robot files.
std::string builtin_robot_dir();

}  // namespace gpdyn
