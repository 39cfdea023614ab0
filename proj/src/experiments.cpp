#include "gpdyn/experiments.hpp"

#include "gpdyn/dataset_io.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gpdyn {

namespace {

double median(std::vector<double> v) {
  require(!v.empty(), "median of an empty sample");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quartile(std::vector<double> v, double p) {
  require(!v.empty(), "quartile of an empty sample");
  std::sort(v.begin(), v.end());
  const double idx = p * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return (1.0 - frac) * v[lo] + frac * v[hi];
}

std::vector<double> column(const Mat& m, int j) {
  std::vector<double> v(static_cast<size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) v[static_cast<size_t>(i)] = m(i, j);
  return v;
}

Mat stack_inputs(const Dataset& ds, InputKind kind) {
  Mat x(ds.size(), 3 * ds.dof());
  if (kind == InputKind::InverseDynamics)
    x << ds.q, ds.qd, ds.qdd;
  else
    x << ds.q, ds.qd, ds.tau;
  return x;
}

// Optimize hyperparameters on a prefix subset, then fit on all points.
GPModel fit_one(const Mat& x, const Vec& y, const KernelSpec& init,
                const FitOptions& options, const std::string& fingerprint) {
  const int n_opt = std::min<int>(x.rows(), std::max(options.optimize_subset, 2));
  OptimizeOptions opt;
  opt.budget = options.budget;
  opt.restarts = options.restarts;
  opt.seed = options.seed;
  // Scale-aware starting noise: a fixed absolute value puts targets with a
  // large spread into a basin where "everything is noise" wins the NLL race.
  const double y_std = std::sqrt(std::max((y.array() - y.mean()).square().mean(), 1e-12));
  const double init_noise = std::max(options.init_noise, 0.05 * y_std);
  const OptimizeResult res = optimize_hyperparameters(
      x.topRows(n_opt), y.head(n_opt), init, init_noise, opt);
  GPModel model = fit(x, y, res.kernel, res.noise_std);
  model.data_fingerprint = fingerprint;
  return model;
}

KernelSpec initial_spec(KernelFamily family, const InputLayout& layout,
                        const std::vector<JointKind>& kinds, const Mat& x, const Vec& y,
                        const RobotModel* model, int joint) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return se_spec_from_data(layout, x, y);
    case KernelFamily::Gip:
      return gip_spec_from_data(layout, kinds, x, y);
    case KernelFamily::Semiparametric: {
      require(model != nullptr,
              "semiparametric fits need a robot model for the regressor");
      const int p = kParamsPerLink * model->dof();
      const double var = std::max((y.array() - y.mean()).square().mean(), 1e-6);
      return make_sp_spec(layout, joint, regressor_row_source(*model, joint),
                          Vec::Constant(p, 1.0), var,
                          se_spec_from_data(layout, x, y).params.log_values.array()
                              .exp().tail(3 * layout.dof).matrix());
    }
  }
  throw ContractError("unknown kernel family");
}

}  // namespace

Mat ForwardEnsemble::predict(const Mat& q, const Mat& qd, const Mat& tau) const {
  require(!models.empty(), "ForwardEnsemble: no models fitted");
  const int n = dof();
  require(q.cols() == n && qd.cols() == n && tau.cols() == n,
          "ForwardEnsemble::predict: dimension mismatch");
  Mat x(q.rows(), 3 * n);
  x << q, qd, tau;
  Mat qdd(q.rows(), n);
  for (int i = 0; i < n; ++i)
    qdd.col(i) = predict_batch(models[static_cast<size_t>(i)], x);
  return qdd;
}

ForwardEnsemble fit_forward_direct(const Dataset& train, KernelFamily family,
                                   const FitOptions& options) {
  if (family != KernelFamily::SquaredExponential)
    throw UnsupportedError(
        "direct forward-dynamics learning supports only the squared-exponential "
        "kernel: the structured kernels are defined over inverse-dynamics inputs "
        "(q, qd, qdd), not (q, qd, tau)");
  const InputLayout layout{train.dof(), InputKind::ForwardDynamics};
  const Mat x = stack_inputs(train, layout.kind);
  const std::string fp = dataset_fingerprint(train);
  ForwardEnsemble ens;
  for (int i = 0; i < train.dof(); ++i) {
    const Vec y = train.qdd.col(i);
    FitOptions per = options;
    per.seed = options.seed ^ static_cast<uint64_t>(i);
    ens.models.push_back(
        fit_one(x, y, se_spec_from_data(layout, x, y), per, fp));
  }
  return ens;
}

GpEnsemble fit_inverse(const Dataset& train, KernelFamily family, const FitOptions& options,
                       const RobotModel* model) {
  const InputLayout layout{train.dof(), InputKind::InverseDynamics};
  const Mat x = stack_inputs(train, layout.kind);
  const std::string fp = dataset_fingerprint(train);
  std::vector<JointKind> kinds;
  if (family == KernelFamily::Gip) {
    require(model != nullptr, "GIP fits need the robot model for the joint kinds");
    for (const Joint& j : model->joints) kinds.push_back(j.kind);
  }
  std::vector<GPModel> models;
  for (int i = 0; i < train.dof(); ++i) {
    const Vec y = train.tau.col(i);
    FitOptions per = options;
    per.seed = options.seed ^ static_cast<uint64_t>(i);
    models.push_back(
        fit_one(x, y, initial_spec(family, layout, kinds, x, y, model, i), per, fp));
  }
  return GpEnsemble(std::move(models));
}

Mat acceleration_error_modules(const Mat& predicted, const Mat& truth) {
  require(predicted.rows() == truth.rows() && predicted.cols() == truth.cols(),
          "acceleration_error_modules: shape mismatch");
  return (predicted - truth).cwiseAbs();
}

RmseReport inverse_rmse(const TorqueEnsemble& ens, const Dataset& test) {
  require(ens.dof() == test.dof(), "inverse_rmse: DoF mismatch");
  const Mat tau_hat = ens.torque_batch(test.q, test.qd, test.qdd);
  const Mat err = tau_hat - test.tau;
  RmseReport report;
  report.per_joint = err.array().square().colwise().mean().sqrt().matrix().transpose();
  report.aggregate = std::sqrt(err.array().square().mean());
  return report;
}

void ExperimentConfig::validate() const {
  if (robots.empty()) throw ConfigError("experiment config: no robots listed");
  if (estimators.empty()) throw ConfigError("experiment config: no estimators listed");
  if (seeds.empty()) throw ConfigError("experiment config: no seeds listed");
  if (train_duration <= 0.0 || test_duration <= 0.0 || rate <= 0.0 || cutoff <= 0.0)
    throw ConfigError("experiment config: durations, rate, and cutoff must be positive");
  if (noise_std < 0.0) throw ConfigError("experiment config: noise_std must be >= 0");
  if (budget < 1) throw ConfigError("experiment config: budget must be >= 1");
  for (const std::string& e : estimators)
    if (e != "se_fd" && e != "se" && e != "gip")
      throw ConfigError("experiment config: unknown estimator '" + e +
                        "' (expected se_fd, se, or gip)");
  if (out_dir.empty()) throw ConfigError("experiment config: output directory not set");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.source_text = text;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  auto split_list = [](const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream iss(s);
    while (std::getline(iss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty value for '" +
                        key + "'");
    try {
      if (key == "robots") cfg.robots = split_list(value);
      else if (key == "train_duration") cfg.train_duration = std::stod(value);
      else if (key == "test_duration") cfg.test_duration = std::stod(value);
      else if (key == "rate") cfg.rate = std::stod(value);
      else if (key == "cutoff") cfg.cutoff = std::stod(value);
      else if (key == "noise_std") cfg.noise_std = std::stod(value);
      else if (key == "budget") cfg.budget = std::stoi(value);
      else if (key == "out_dir") cfg.out_dir = value;
      else if (key == "estimators") cfg.estimators = split_list(value);
      else if (key == "train_seconds") {
        cfg.train_seconds.clear();
        for (const std::string& s : split_list(value))
          cfg.train_seconds.push_back(std::stod(s));
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const std::string& s : split_list(value))
          cfg.seeds.push_back(std::stoull(s));
      } else {
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                          key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("config line " + std::to_string(line_no) + ": bad value for '" +
                        key + "'");
    }
  }
  return cfg;
}

namespace {

struct SeedData {
  Dataset train;
  Dataset test;
};

SeedData make_seed_data(const RobotModel& model, const ExperimentConfig& cfg,
                        uint64_t seed, double train_duration) {
  TrajectoryConfig traj;
  traj.rate = cfg.rate;
  traj.cutoff = cfg.cutoff;
  traj.amplitude = model.default_amplitude;
  traj.duration = train_duration;
  traj.seed = seed;
  SeedData data;
  data.train = generate_dataset(model, traj, cfg.noise_std, seed + 1000000);
  // Held-out test trajectory from an independent stream; recorded torques
  // are kept noiseless so metrics reflect model error only.
  traj.duration = cfg.test_duration;
  traj.seed = seed + 500000;
  data.test = generate_dataset(model, traj, 0.0, seed + 1500000);
  return data;
}

KernelFamily family_of(const std::string& estimator) {
  return estimator == "gip" ? KernelFamily::Gip : KernelFamily::SquaredExponential;
}

struct CellResult {
  Mat accel_errors;        // samples x dof
  Vec rmse_per_joint;      // empty for se_fd
  double rmse_aggregate = 0.0;
  int repairs = 0;
};

CellResult evaluate_estimator(const std::string& estimator, const RobotModel& model,
                              const Dataset& train, const Dataset& test,
                              const FitOptions& fit_options) {
  CellResult cell;
  if (estimator == "se_fd") {
    const ForwardEnsemble ens =
        fit_forward_direct(train, KernelFamily::SquaredExponential, fit_options);
    cell.accel_errors =
        acceleration_error_modules(ens.predict(test.q, test.qd, test.tau), test.qdd);
    return cell;
  }
  const GpEnsemble ens = fit_inverse(train, family_of(estimator), fit_options, &model);
  BatchDiagnostics diag;
  const Mat qdd_hat = predict_acceleration_batch(ens, test.q, test.qd, test.tau, {}, &diag);
  cell.accel_errors = acceleration_error_modules(qdd_hat, test.qdd);
  const RmseReport rmse = inverse_rmse(ens, test);
  cell.rmse_per_joint = rmse.per_joint;
  cell.rmse_aggregate = rmse.aggregate;
  cell.repairs = diag.repairs;
  return cell;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Raw per-sample error dump: columns joint,sample_idx,abs_error; samples
// from successive seeds are concatenated with a running index.
std::string errors_csv(const std::vector<Mat>& per_seed_errors) {
  std::string csv = "joint,sample_idx,abs_error\n";
  const int dof = per_seed_errors.empty() ? 0 : static_cast<int>(per_seed_errors[0].cols());
  for (int j = 0; j < dof; ++j) {
    int idx = 0;
    for (const Mat& errors : per_seed_errors)
      for (int i = 0; i < errors.rows(); ++i)
        csv += std::to_string(j + 1) + "," + std::to_string(idx++) + "," +
               format_g17(errors(i, j)) + "\n";
  }
  return csv;
}

nlohmann::json seed_median_stats(const std::vector<CellResult>& cells, int dof) {
  nlohmann::json j;
  std::vector<double> med(static_cast<size_t>(dof)), q1(med.size()), q3(med.size());
  for (int joint = 0; joint < dof; ++joint) {
    std::vector<double> med_s, q1_s, q3_s;
    for (const CellResult& c : cells) {
      med_s.push_back(median(column(c.accel_errors, joint)));
      q1_s.push_back(quartile(column(c.accel_errors, joint), 0.25));
      q3_s.push_back(quartile(column(c.accel_errors, joint), 0.75));
    }
    med[static_cast<size_t>(joint)] = median(med_s);
    q1[static_cast<size_t>(joint)] = median(q1_s);
    q3[static_cast<size_t>(joint)] = median(q3_s);
  }
  j["accel_median_per_joint"] = med;
  j["accel_q1_per_joint"] = q1;
  j["accel_q3_per_joint"] = q3;

  if (cells.front().rmse_per_joint.size() > 0) {
    std::vector<double> agg;
    std::vector<double> per(static_cast<size_t>(dof));
    for (int joint = 0; joint < dof; ++joint) {
      std::vector<double> s;
      for (const CellResult& c : cells) s.push_back(c.rmse_per_joint[joint]);
      per[static_cast<size_t>(joint)] = median(s);
    }
    for (const CellResult& c : cells) agg.push_back(c.rmse_aggregate);
    j["rmse_per_joint"] = per;
    j["rmse_aggregate"] = median(agg);
  }
  int repairs = 0;
  for (const CellResult& c : cells) repairs += c.repairs;
  j["repairs"] = repairs;
  j["seeds_used"] = cells.size();
  return j;
}

}  // namespace

int run_dof_sweep(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);

  nlohmann::json report;
  report["protocol"] = "dof_sweep";
  report["config_hash"] = fnv1a_hex(config.source_text);
  report["code_version"] = "1";
  int failures = 0;

  for (const std::string& robot_name : config.robots) {
    const RobotModel model = resolve_robot(robot_name);
    const int dof = model.dof();
    nlohmann::json& robot_json = report["robots"][robot_name];
    robot_json["dof"] = dof;

    std::vector<SeedData> data;
    for (uint64_t seed : config.seeds) {
      data.push_back(make_seed_data(model, config, seed, config.train_duration));
      robot_json["train_fingerprints"].push_back(dataset_fingerprint(data.back().train));
      robot_json["test_fingerprints"].push_back(dataset_fingerprint(data.back().test));
    }

    for (const std::string& estimator : config.estimators) {
      std::vector<CellResult> cells;
      std::vector<Mat> per_seed_errors;
      for (size_t s = 0; s < config.seeds.size(); ++s) {
        FitOptions fit_options;
        fit_options.budget = config.budget;
        fit_options.seed = config.seeds[s];
        try {
          cells.push_back(evaluate_estimator(estimator, model, data[s].train,
                                             data[s].test, fit_options));
          per_seed_errors.push_back(cells.back().accel_errors);
        } catch (const std::exception& e) {
          ++failures;
          robot_json["estimators"][estimator]["failures"].push_back(
              {{"seed", config.seeds[s]}, {"error", e.what()}});
        }
      }
      if (cells.empty()) continue;
      robot_json["estimators"][estimator].update(seed_median_stats(cells, dof));
      write_text_file(std::filesystem::path(config.out_dir) /
                          ("errors_" + estimator + "_" + std::to_string(dof) + ".csv"),
                      errors_csv(per_seed_errors));
    }
  }

  write_text_file(std::filesystem::path(config.out_dir) / "metrics.json",
                  report.dump(2) + "\n");
  return failures;
}

int run_data_efficiency(const ExperimentConfig& config) {
  config.validate();
  if (config.train_seconds.empty())
    throw ConfigError("data-efficiency run: train_seconds schedule is empty");
  std::filesystem::create_directories(config.out_dir);

  const RobotModel model = resolve_robot(config.robots.front());
  const int dof = model.dof();
  const double max_seconds =
      *std::max_element(config.train_seconds.begin(), config.train_seconds.end());

  nlohmann::json report;
  report["protocol"] = "data_efficiency";
  report["config_hash"] = fnv1a_hex(config.source_text);
  report["code_version"] = "1";
  report["robot"] = config.robots.front();
  report["dof"] = dof;
  int failures = 0;

  // One long trajectory per seed; prefixes share their leading samples.
  std::vector<SeedData> data;
  for (uint64_t seed : config.seeds) {
    data.push_back(make_seed_data(model, config, seed, max_seconds));
    report["train_fingerprints"].push_back(dataset_fingerprint(data.back().train));
    report["test_fingerprints"].push_back(dataset_fingerprint(data.back().test));
  }

  std::string curves = "estimator,joint,train_seconds,median_error\n";
  for (const std::string& estimator : config.estimators) {
    nlohmann::json& est_json = report["estimators"][estimator];
    for (double seconds : config.train_seconds) {
      std::vector<CellResult> cells;
      for (size_t s = 0; s < config.seeds.size(); ++s) {
        const Dataset prefix = split(data[s].train, seconds).first;
        FitOptions fit_options;
        fit_options.budget = config.budget;
        fit_options.seed = config.seeds[s];
        try {
          cells.push_back(evaluate_estimator(estimator, model, prefix, data[s].test,
                                             fit_options));
        } catch (const std::exception& e) {
          ++failures;
          est_json["failures"].push_back({{"seed", config.seeds[s]},
                                          {"train_seconds", seconds},
                                          {"error", e.what()}});
        }
      }
      if (cells.empty()) continue;
      nlohmann::json stats = seed_median_stats(cells, dof);
      est_json["points"].push_back(
          {{"train_seconds", seconds}, {"stats", stats}});
      const auto& med = stats["accel_median_per_joint"];
      for (int joint = 0; joint < dof; ++joint)
        curves += estimator + "," + std::to_string(joint + 1) + "," +
                  format_g17(seconds) + "," +
                  format_g17(med[static_cast<size_t>(joint)].get<double>()) + "\n";
    }
  }

  write_text_file(std::filesystem::path(config.out_dir) / "curves.csv", curves);
  write_text_file(std::filesystem::path(config.out_dir) / "metrics.json",
                  report.dump(2) + "\n");
  return failures;
}

}  // namespace gpdyn
