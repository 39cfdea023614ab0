#include "gpdyn/cli.hpp"

#include "gpdyn/dataset_io.hpp"
#include "gpdyn/experiments.hpp"
#include "gpdyn/model_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace gpdyn {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_path, const std::string& config_bytes,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["config_path"] = config_path;
  j["config_hash"] = fnv1a_hex(config_bytes);
  j["timestamp"] = iso_timestamp();
  j["code_version"] = "1";
  j["outputs"] = outputs;
  // write-then-rename so a crash never leaves a truncated manifest
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest " + path);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

std::string join_args(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

Vec parse_point(const std::string& text, int dof) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(std::stod(item));
  if (static_cast<int>(values.size()) != dof)
    throw ConfigError("point '" + text + "' has " + std::to_string(values.size()) +
                      " entries, expected " + std::to_string(dof));
  return Eigen::Map<const Vec>(values.data(), static_cast<long>(values.size()));
}

KernelFamily parse_family(const std::string& name) {
  if (name == "se") return KernelFamily::SquaredExponential;
  if (name == "gip") return KernelFamily::Gip;
  if (name == "sp") return KernelFamily::Semiparametric;
  throw ConfigError("unknown kernel '" + name + "' (expected se, gip, or sp)");
}

// ---- subcommand payloads ----

struct GenerateArgs {
  std::string robot, out;
  double duration = 100.0, rate = 100.0, cutoff = 1.0, noise_std = 0.01;
  uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& a, const std::string& command) {
  const RobotModel model = resolve_robot(a.robot);
  TrajectoryConfig cfg;
  cfg.duration = a.duration;
  cfg.rate = a.rate;
  cfg.cutoff = a.cutoff;
  cfg.amplitude = model.default_amplitude;
  cfg.seed = a.seed;
  const Dataset ds = generate_dataset(model, cfg, a.noise_std, a.seed + 1000000);
  const std::string fingerprint = write_dataset(ds, a.out);
  write_manifest(a.out + ".manifest.json", command, a.robot, dataset_to_csv(ds),
                 {a.out, a.out + ".meta.json"});
  std::cout << "wrote " << ds.size() << " samples to " << a.out << " (fingerprint "
            << fingerprint << ")\n";
  return 0;
}

struct FitArgs {
  std::string dataset, kernel = "se", target = "inverse", out;
  int budget = 40;
  uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a, const std::string& command) {
  const Dataset ds = read_dataset(a.dataset);
  const KernelFamily family = parse_family(a.kernel);
  FitOptions options;
  options.budget = a.budget;
  options.seed = a.seed;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<GPModel> models;
  std::string robot_name;
  if (a.target == "forward") {
    models = fit_forward_direct(ds, family, options).models;
  } else if (a.target == "inverse") {
    const RobotModel robot = resolve_robot(ds.robot_name);
    robot_name = ds.robot_name;
    models = fit_inverse(ds, family, options, &robot).models();
  } else {
    throw ConfigError("unknown fit target '" + a.target +
                      "' (expected inverse or forward)");
  }
  const double wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::vector<std::string> paths = save_models(models, a.out, robot_name);

  nlohmann::json log;
  log["dataset"] = a.dataset;
  log["kernel"] = a.kernel;
  log["target"] = a.target;
  log["wall_seconds"] = wall_seconds;
  for (size_t i = 0; i < models.size(); ++i) {
    nlohmann::json m;
    m["path"] = paths[i];
    m["noise_std"] = models[i].noise_std;
    m["nll"] = neg_log_marginal_likelihood(models[i].inputs, models[i].targets,
                                           models[i].kernel, models[i].noise_std);
    for (int p = 0; p < models[i].kernel.params.size(); ++p)
      m["hyperparameters"][models[i].kernel.params.names[static_cast<size_t>(p)]] =
          models[i].kernel.params.value(p);
    log["models"].push_back(m);
  }
  std::ofstream(a.out + "_fitlog.json", std::ios::binary) << log.dump(2) << "\n";

  std::vector<std::string> outputs = paths;
  outputs.push_back(a.out + "_fitlog.json");
  write_manifest(a.out + ".manifest.json", command, a.dataset, read_file(a.dataset),
                 outputs);
  std::cout << "fitted " << models.size() << " " << a.kernel << " model(s) in "
            << wall_seconds << " s\n";
  return 0;
}

struct EvalArgs {
  std::vector<std::string> models;
  std::string oracle, dataset, mode = "inverse-rmse", out;
  std::vector<std::string> at;
};

int cmd_eval(const EvalArgs& a, const std::string& command) {
  const Dataset ds = read_dataset(a.dataset);

  std::unique_ptr<TorqueEnsemble> ens;
  if (!a.oracle.empty()) {
    ens = std::make_unique<OracleEnsemble>(resolve_robot(a.oracle));
  } else {
    if (a.models.empty())
      throw ConfigError("eval: provide either --models or --oracle");
    ens = std::make_unique<GpEnsemble>(load_models(a.models));
  }
  if (ens->dof() != ds.dof())
    throw ConfigError("eval: model DoF " + std::to_string(ens->dof()) +
                      " does not match dataset DoF " + std::to_string(ds.dof()));

  std::filesystem::create_directories(a.out);
  nlohmann::json j;
  j["mode"] = a.mode;
  j["dataset"] = a.dataset;
  j["dataset_fingerprint"] = dataset_fingerprint(ds);
  std::vector<std::string> outputs;

  if (a.mode == "inverse-rmse") {
    const RmseReport r = inverse_rmse(*ens, ds);
    j["rmse_per_joint"] = std::vector<double>(r.per_joint.data(),
                                              r.per_joint.data() + r.per_joint.size());
    j["rmse_aggregate"] = r.aggregate;
  } else if (a.mode == "fd-errors") {
    BatchDiagnostics diag;
    const Mat qdd_hat = predict_acceleration_batch(*ens, ds.q, ds.qd, ds.tau, {}, &diag);
    const Mat err = acceleration_error_modules(qdd_hat, ds.qdd);
    std::string csv = "joint,sample_idx,abs_error\n";
    char buf[64];
    for (int joint = 0; joint < ds.dof(); ++joint)
      for (int i = 0; i < err.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", joint + 1, i, err(i, joint));
        csv += buf;
      }
    const std::string err_path =
        (std::filesystem::path(a.out) / "fd_errors.csv").string();
    std::ofstream(err_path, std::ios::binary) << csv;
    outputs.push_back(err_path);
    j["max_abs_error"] = err.maxCoeff();
    j["mean_abs_error"] = err.mean();
    j["diagnostics"] = nlohmann::json::parse(diag.to_json());
  } else if (a.mode == "components") {
    std::vector<Vec> points;
    if (a.at.empty())
      points.push_back(Vec::Zero(ds.dof()));
    else
      for (const std::string& p : a.at) points.push_back(parse_point(p, ds.dof()));
    for (const Vec& q : points) {
      EstimatedComponents parts;
      estimate_inertia(*ens, q, {}, nullptr, &parts);
      parts.n_hat = estimate_bias(*ens, q, Vec::Zero(ds.dof()));
      nlohmann::json c;
      c["q"] = std::vector<double>(q.data(), q.data() + q.size());
      nlohmann::json rows = nlohmann::json::array();
      for (int r = 0; r < parts.B_hat.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int col = 0; col < parts.B_hat.cols(); ++col)
          row.push_back(parts.B_hat(r, col));
        rows.push_back(row);
      }
      c["B_hat"] = rows;
      c["g_hat"] = std::vector<double>(parts.g_hat.data(),
                                       parts.g_hat.data() + parts.g_hat.size());
      c["n_hat"] = std::vector<double>(parts.n_hat.data(),
                                       parts.n_hat.data() + parts.n_hat.size());
      c["regularization_added"] = parts.regularization_added;
      c["raw_asymmetry"] = parts.raw_asymmetry;
      j["components"].push_back(c);
    }
  } else {
    throw ConfigError("unknown eval mode '" + a.mode +
                      "' (expected inverse-rmse, fd-errors, or components)");
  }

  const std::string metrics_path =
      (std::filesystem::path(a.out) / ("eval_" + a.mode + ".json")).string();
  std::ofstream(metrics_path, std::ios::binary) << j.dump(2) << "\n";
  outputs.push_back(metrics_path);
  write_manifest((std::filesystem::path(a.out) / "run_manifest.json").string(), command,
                 a.dataset, read_file(a.dataset), outputs);
  std::cout << "wrote " << metrics_path << "\n";
  return 0;
}

struct SweepArgs {
  std::string config, kind = "dof", out;
  bool force = false;
};

int cmd_sweep(const SweepArgs& a, const std::string& command) {
  const std::string config_bytes = read_file(a.config);
  ExperimentConfig cfg = parse_experiment_config(config_bytes);
  if (!a.out.empty()) cfg.out_dir = a.out;
  cfg.validate();

  if (std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "metrics.json") &&
      !a.force)
    throw ConfigError("output directory " + cfg.out_dir +
                      " already holds results; pass --force to overwrite");

  int failures = 0;
  if (a.kind == "dof")
    failures = run_dof_sweep(cfg);
  else if (a.kind == "data-efficiency")
    failures = run_data_efficiency(cfg);
  else
    throw ConfigError("unknown sweep kind '" + a.kind +
                      "' (expected dof or data-efficiency)");

  write_manifest((std::filesystem::path(cfg.out_dir) / "run_manifest.json").string(),
                 command, a.config, config_bytes,
                 {(std::filesystem::path(cfg.out_dir) / "metrics.json").string()});
  if (failures > 0)
    std::cout << "sweep finished with " << failures
              << " failed cell(s); see metrics.json for details\n";
  else
    std::cout << "sweep finished; results in " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"GP-based robot dynamics learning: data generation, model fitting,"
               " forward-dynamics estimation, and benchmark sweeps"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Generate a simulated dataset");
  generate->add_option("--robot", gen.robot, "Robot name or file")->required();
  generate->add_option("--duration", gen.duration, "Trajectory length [s]");
  generate->add_option("--rate", gen.rate, "Sample rate [Hz]");
  generate->add_option("--cutoff", gen.cutoff, "Excitation low-pass cutoff [Hz]");
  generate->add_option("--noise-std", gen.noise_std, "Torque noise std [N·m]");
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--out", gen.out, "Output CSV path")->required();

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit per-joint GP models");
  fit_cmd->add_option("--dataset", fit_args.dataset, "Dataset CSV")->required();
  fit_cmd->add_option("--kernel", fit_args.kernel, "Kernel family: se, gip, sp");
  fit_cmd->add_option("--target", fit_args.target, "inverse or forward");
  fit_cmd->add_option("--budget", fit_args.budget, "Optimizer evaluation budget");
  fit_cmd->add_option("--seed", fit_args.seed, "Optimizer seed");
  fit_cmd->add_option("--out", fit_args.out, "Output file prefix")->required();

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate models on a dataset");
  eval_cmd->add_option("--models", eval_args.models, "Model JSON files (one per joint)");
  eval_cmd->add_option("--oracle", eval_args.oracle,
                       "Use the exact rigid-body engine of this robot instead of models");
  eval_cmd->add_option("--dataset", eval_args.dataset, "Dataset CSV")->required();
  eval_cmd->add_option("--mode", eval_args.mode,
                       "inverse-rmse, fd-errors, or components");
  eval_cmd->add_option("--at", eval_args.at,
                       "Configuration(s) for components mode, e.g. --at 0.1,0.2");
  eval_cmd->add_option("--out", eval_args.out, "Output directory")->required();

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a benchmark sweep");
  sweep_cmd->add_option("--config", sweep_args.config, "Experiment config file")
      ->required();
  sweep_cmd->add_option("--kind", sweep_args.kind, "dof or data-efficiency");
  sweep_cmd->add_option("--out", sweep_args.out, "Override the configured output dir");
  sweep_cmd->add_flag("--force", sweep_args.force, "Overwrite existing results");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0, bad flags exit 2
  }

  const std::string command = join_args(argc, argv);
  try {
    if (generate->parsed()) return cmd_generate(gen, command);
    if (fit_cmd->parsed()) return cmd_fit(fit_args, command);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, command);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, command);
    std::cerr << "error: no subcommand given\n";
    return 2;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 3;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gpdyn
