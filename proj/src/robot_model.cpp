#include "gpdyn/robot_model.hpp"

#include <Eigen/Eigenvalues>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gpdyn {
namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

double parse_num(const std::string& s, const std::string& ctx) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError(ctx + ": expected a number, got '" + s + "'");
  return v;
}

// Splits "key=v1,v2,..." into key and numeric values.
bool split_kv(const std::string& tok, std::string& key, std::vector<double>& vals,
              const std::string& ctx) {
  const auto eq = tok.find('=');
  if (eq == std::string::npos) return false;
  key = tok.substr(0, eq);
  vals.clear();
  std::string rest = tok.substr(eq + 1);
  std::istringstream ss(rest);
  std::string piece;
  while (std::getline(ss, piece, ','))
    vals.push_back(parse_num(piece, ctx + " " + key));
  return true;
}

Mat3 inertia_from_upper(const std::vector<double>& u) {
  Mat3 m;
  m << u[0], u[1], u[2],
       u[1], u[3], u[4],
       u[2], u[4], u[5];
  return m;
}

}  // namespace

void RobotModel::validate() const {
  if (joints.empty()) throw ConfigError("robot '" + name + "': needs at least one joint");
  if (joints.size() != links.size())
    throw ConfigError("robot '" + name + "': joint and link counts differ");
  if (friction && friction->size() != joints.size())
    throw ConfigError("robot '" + name + "': friction entries must match joint count");
  if (!gravity.allFinite()) throw ConfigError("robot '" + name + "': gravity not finite");
  for (size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    if (!(l.mass > 0.0))
      throw ConfigError("robot '" + name + "': link " + std::to_string(i + 1) +
                        " mass must be positive");
    if ((l.inertia_com - l.inertia_com.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw ConfigError("robot '" + name + "': link " + std::to_string(i + 1) +
                        " inertia tensor not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(l.inertia_com);
    if (es.eigenvalues().minCoeff() < -1e-12)
      throw ConfigError("robot '" + name + "': link " + std::to_string(i + 1) +
                        " inertia tensor has negative eigenvalues");
  }
  if (default_amplitude.size() != 0 && default_amplitude.size() != dof())
    throw ConfigError("robot '" + name + "': amplitude list length must equal DoF");
}

RobotModel parse_robot(std::istream& in, const std::string& origin) {
  RobotModel model;
  std::vector<JointFriction> friction;
  bool friction_seen = false;
  std::vector<double> amplitudes;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string ctx = origin + ":" + std::to_string(lineno);
    const std::string& kw = toks[0];

    if (kw == "name") {
      if (toks.size() != 2) throw ConfigError(ctx + ": name takes one token");
      model.name = toks[1];
    } else if (kw == "gravity") {
      if (toks.size() != 4) throw ConfigError(ctx + ": gravity takes three numbers");
      for (int k = 0; k < 3; ++k) model.gravity[k] = parse_num(toks[k + 1], ctx);
    } else if (kw == "joint") {
      Joint j;
      bool kind_set = false;
      for (size_t t = 1; t < toks.size(); ++t) {
        if (toks[t] == "revolute") { j.kind = JointKind::Revolute; kind_set = true; continue; }
        if (toks[t] == "prismatic") { j.kind = JointKind::Prismatic; kind_set = true; continue; }
        std::string key; std::vector<double> vals;
        if (!split_kv(toks[t], key, vals, ctx) || vals.size() != 1)
          throw ConfigError(ctx + ": bad joint token '" + toks[t] + "'");
        if (key == "a") j.dh.a = vals[0];
        else if (key == "alpha") j.dh.alpha = vals[0];
        else if (key == "d") j.dh.d = vals[0];
        else if (key == "theta") j.dh.theta_offset = vals[0];
        else throw ConfigError(ctx + ": unknown joint key '" + key + "'");
      }
      if (!kind_set) throw ConfigError(ctx + ": joint needs a kind (revolute|prismatic)");
      model.joints.push_back(j);
    } else if (kw == "link") {
      LinkInertia l;
      bool mass_set = false, com_set = false, inertia_set = false;
      for (size_t t = 1; t < toks.size(); ++t) {
        std::string key; std::vector<double> vals;
        if (!split_kv(toks[t], key, vals, ctx))
          throw ConfigError(ctx + ": bad link token '" + toks[t] + "'");
        if (key == "mass" && vals.size() == 1) { l.mass = vals[0]; mass_set = true; }
        else if (key == "com" && vals.size() == 3) {
          l.com = Vec3(vals[0], vals[1], vals[2]); com_set = true;
        } else if (key == "inertia" && vals.size() == 6) {
          l.inertia_com = inertia_from_upper(vals); inertia_set = true;
        } else throw ConfigError(ctx + ": bad link key '" + key + "'");
      }
      if (!mass_set || !com_set || !inertia_set)
        throw ConfigError(ctx + ": link needs mass=, com=x,y,z and inertia=6 upper-tri entries");
      model.links.push_back(l);
    } else if (kw == "friction") {
      JointFriction f;
      for (size_t t = 1; t < toks.size(); ++t) {
        std::string key; std::vector<double> vals;
        if (!split_kv(toks[t], key, vals, ctx) || vals.size() != 1)
          throw ConfigError(ctx + ": bad friction token '" + toks[t] + "'");
        if (key == "viscous") f.viscous = vals[0];
        else if (key == "coulomb") f.coulomb = vals[0];
        else throw ConfigError(ctx + ": unknown friction key '" + key + "'");
      }
      friction.push_back(f);
      friction_seen = true;
    } else if (kw == "amplitude") {
      for (size_t t = 1; t < toks.size(); ++t)
        amplitudes.push_back(parse_num(toks[t], ctx));
    } else {
      throw ConfigError(ctx + ": unknown keyword '" + kw + "'");
    }
  }

  if (friction_seen) model.friction = friction;
  if (!amplitudes.empty())
    model.default_amplitude = Eigen::Map<const Vec>(amplitudes.data(),
                                                    static_cast<long>(amplitudes.size()));
  if (model.name.empty()) model.name = origin;
  model.validate();
  return model;
}

RobotModel load_robot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot file '" + path + "'");
  return parse_robot(in, path);
}

std::string builtin_robot_dir() {
#ifdef GPDYN_DATA_DIR
  return std::string(GPDYN_DATA_DIR) + "/robots";
#else
  return "data/robots";
#endif
}

RobotModel resolve_robot(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_path)) return load_robot_file(name_or_path);
  const std::string candidate = builtin_robot_dir() + "/" + name_or_path + ".robot";
  if (fs::exists(candidate)) return load_robot_file(candidate);
  throw ConfigError("robot '" + name_or_path + "' is neither a file nor a built-in name");
}

}  // namespace gpdyn
