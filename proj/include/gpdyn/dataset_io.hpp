#pragma once

#include "gpdyn/trajectory.hpp"

#include <string>

namespace gpdyn {

/// 64-bit FNV-1a hash of a byte string, as a hex string.
std::string fnv1a_hex(const std::string& bytes);

/// Serializes the dataset as CSV with header
/// t,q1..qn,dq1..dqn,ddq1..ddqn,tau1..taun and 17 significant digits.
std::string dataset_to_csv(const Dataset& ds);

/// Writes <path> (CSV) and the <path>.meta.json sidecar; returns the
/// dataset fingerprint (hash of the CSV bytes).
std::string write_dataset(const Dataset& ds, const std::string& csv_path);

/// Reads a dataset written by write_dataset. The sidecar is required.
Dataset read_dataset(const std::string& csv_path);

/// Fingerprint of an in-memory dataset (hash of its CSV serialization).
std::string dataset_fingerprint(const Dataset& ds);

}  // namespace gpdyn
