#include "gpdyn/dataset_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gpdyn {

namespace {

const char* kGeneratorVersion = "1";

void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dataset_to_csv(const Dataset& ds) {
  const int n = ds.dof();
  std::string out = "t";
  for (const char* prefix : {"q", "dq", "ddq", "tau"})
    for (int j = 1; j <= n; ++j) out += "," + std::string(prefix) + std::to_string(j);
  out += "\n";
  for (int k = 0; k < ds.size(); ++k) {
    append_num(out, ds.t[k]);
    for (const Mat* m : {&ds.q, &ds.qd, &ds.qdd, &ds.tau})
      for (int j = 0; j < n; ++j) {
        out += ',';
        append_num(out, (*m)(k, j));
      }
    out += '\n';
  }
  return out;
}

std::string dataset_fingerprint(const Dataset& ds) {
  return fnv1a_hex(dataset_to_csv(ds));
}

std::string write_dataset(const Dataset& ds, const std::string& csv_path) {
  const std::string csv = dataset_to_csv(ds);
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write dataset file '" + csv_path + "'");
    out << csv;
  }
  const std::string fingerprint = fnv1a_hex(csv);
  nlohmann::json meta;
  meta["robot"] = ds.robot_name;
  meta["rate_hz"] = ds.rate;
  meta["noise_std"] = ds.noise_std;
  meta["noise_seed"] = ds.seed;
  meta["trajectory_seed"] = ds.traj_seed;
  meta["samples"] = ds.size();
  meta["dof"] = ds.dof();
  meta["fingerprint"] = fingerprint;
  meta["generator_version"] = kGeneratorVersion;
  std::ofstream meta_out(csv_path + ".meta.json");
  if (!meta_out) throw ConfigError("cannot write dataset metadata for '" + csv_path + "'");
  meta_out << meta.dump(2) << "\n";
  return fingerprint;
}

Dataset read_dataset(const std::string& csv_path) {
  std::ifstream meta_in(csv_path + ".meta.json");
  if (!meta_in)
    throw ConfigError("missing dataset metadata '" + csv_path + ".meta.json'");
  nlohmann::json meta = nlohmann::json::parse(meta_in);

  Dataset ds;
  ds.robot_name = meta.at("robot").get<std::string>();
  ds.rate = meta.at("rate_hz").get<double>();
  ds.noise_std = meta.at("noise_std").get<double>();
  ds.seed = meta.at("noise_seed").get<uint64_t>();
  ds.traj_seed = meta.at("trajectory_seed").get<uint64_t>();
  const int samples = meta.at("samples").get<int>();
  const int n = meta.at("dof").get<int>();

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset file '" + csv_path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset file '" + csv_path + "' is empty");

  ds.t.resize(samples);
  ds.q.resize(samples, n);
  ds.qd.resize(samples, n);
  ds.qdd.resize(samples, n);
  ds.tau.resize(samples, n);

  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= samples)
      throw ConfigError("dataset '" + csv_path + "' has more rows than its metadata says");
    std::istringstream ss(line);
    std::string cell;
    auto next = [&]() {
      if (!std::getline(ss, cell, ','))
        throw ConfigError("dataset '" + csv_path + "': short row " + std::to_string(row + 2));
      return std::strtod(cell.c_str(), nullptr);
    };
    ds.t[row] = next();
    for (Mat* m : {&ds.q, &ds.qd, &ds.qdd, &ds.tau})
      for (int j = 0; j < n; ++j) (*m)(row, j) = next();
    ++row;
  }
  if (row != samples)
    throw ConfigError("dataset '" + csv_path + "' has fewer rows than its metadata says");
  return ds;
}

}  // namespace gpdyn
