#pragma once

#include "gpdyn/gp.hpp"
#include "gpdyn/inv2fwd.hpp"

#include <string>
#include <vector>

namespace gpdyn {

/// Serializes one fitted GP to JSON. Semiparametric kernels additionally
/// record the robot they were built against (the regressor source), which
/// must be resolvable at load time.
std::string gp_to_json(const GPModel& model, const std::string& robot_name = {});

/// Rebuilds a GP from gp_to_json output. The Cholesky factor and alpha are
/// recomputed by refitting on the stored training data, so a round trip is
/// bit-reproducible.
GPModel gp_from_json(const std::string& json_text);

/// Writes one <prefix>_joint<k>.json file per model; returns the paths.
std::vector<std::string> save_models(const std::vector<GPModel>& models,
                                     const std::string& prefix,
                                     const std::string& robot_name = {});

std::vector<GPModel> load_models(const std::vector<std::string>& paths);

}  // namespace gpdyn
