#include "gpdyn/model_io.hpp"

#include "gpdyn/robot_model.hpp"
#include "json.hpp"

#include <fstream>
#include <sstream>

namespace gpdyn {

namespace {

std::string family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "se";
    case KernelFamily::Gip: return "gip";
    case KernelFamily::Semiparametric: return "sp";
  }
  throw ContractError("unknown kernel family");
}

KernelFamily family_from_name(const std::string& name) {
  if (name == "se") return KernelFamily::SquaredExponential;
  if (name == "gip") return KernelFamily::Gip;
  if (name == "sp") return KernelFamily::Semiparametric;
  throw ConfigError("model file: unknown kernel family '" + name + "'");
}

nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const nlohmann::json& rows) {
  const int r = static_cast<int>(rows.size());
  if (r == 0) return Mat(0, 0);
  const int c = static_cast<int>(rows[0].size());
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
  return m;
}

}  // namespace

std::string gp_to_json(const GPModel& model, const std::string& robot_name) {
  const KernelSpec& k = model.kernel;
  nlohmann::json j;
  j["format"] = "gpdyn-model";
  j["version"] = 1;
  j["family"] = family_name(k.family);
  j["layout"]["dof"] = k.layout.dof;
  j["layout"]["kind"] =
      k.layout.kind == InputKind::InverseDynamics ? "inverse" : "forward";
  std::string kinds;
  for (JointKind jk : k.joint_kinds) kinds += jk == JointKind::Revolute ? 'R' : 'P';
  j["joint_kinds"] = kinds;
  j["regressor_joint"] = k.regressor_joint;
  if (k.family == KernelFamily::Semiparametric) {
    if (robot_name.empty())
      throw ContractError("persisting a semiparametric model requires the robot name");
    j["robot"] = robot_name;
  }
  j["param_names"] = k.params.names;
  std::vector<double> logv(k.params.log_values.data(),
                           k.params.log_values.data() + k.params.log_values.size());
  j["log_values"] = logv;
  j["trainable"] = std::vector<int>(k.trainable.begin(), k.trainable.end());
  j["noise_std"] = model.noise_std;
  j["data_fingerprint"] = model.data_fingerprint;
  j["inputs"] = matrix_to_json(model.inputs);
  std::vector<double> targets(model.targets.data(),
                              model.targets.data() + model.targets.size());
  j["targets"] = targets;
  return j.dump(2) + "\n";
}

GPModel gp_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model file: invalid JSON: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != "gpdyn-model")
    throw ConfigError("model file: missing gpdyn-model format marker");

  KernelSpec spec;
  spec.family = family_from_name(j.at("family").get<std::string>());
  spec.layout.dof = j.at("layout").at("dof").get<int>();
  spec.layout.kind = j.at("layout").at("kind").get<std::string>() == "inverse"
                         ? InputKind::InverseDynamics
                         : InputKind::ForwardDynamics;
  for (char c : j.at("joint_kinds").get<std::string>())
    spec.joint_kinds.push_back(c == 'R' ? JointKind::Revolute : JointKind::Prismatic);
  spec.regressor_joint = j.at("regressor_joint").get<int>();
  if (spec.family == KernelFamily::Semiparametric) {
    const RobotModel robot = resolve_robot(j.at("robot").get<std::string>());
    spec.regressor_row = regressor_row_source(robot, spec.regressor_joint);
  }
  spec.params.names = j.at("param_names").get<std::vector<std::string>>();
  const auto logv = j.at("log_values").get<std::vector<double>>();
  if (logv.size() != spec.params.names.size())
    throw ConfigError("model file: parameter name/value count mismatch");
  spec.params.log_values =
      Eigen::Map<const Vec>(logv.data(), static_cast<long>(logv.size()));
  const auto trainable = j.at("trainable").get<std::vector<int>>();
  spec.trainable.assign(trainable.begin(), trainable.end());

  const Mat inputs = matrix_from_json(j.at("inputs"));
  const auto targets_v = j.at("targets").get<std::vector<double>>();
  const Vec targets =
      Eigen::Map<const Vec>(targets_v.data(), static_cast<long>(targets_v.size()));

  GPModel model = fit(inputs, targets, spec, j.at("noise_std").get<double>());
  model.data_fingerprint = j.at("data_fingerprint").get<std::string>();
  return model;
}

std::vector<std::string> save_models(const std::vector<GPModel>& models,
                                     const std::string& prefix,
                                     const std::string& robot_name) {
  std::vector<std::string> paths;
  for (size_t i = 0; i < models.size(); ++i) {
    const std::string path = prefix + "_joint" + std::to_string(i + 1) + ".json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write model file " + path);
    out << gp_to_json(models[i], robot_name);
    paths.push_back(path);
  }
  return paths;
}

std::vector<GPModel> load_models(const std::vector<std::string>& paths) {
  std::vector<GPModel> models;
  for (const std::string& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read model file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    models.push_back(gp_from_json(buffer.str()));
  }
  return models;
}

}  // namespace gpdyn
