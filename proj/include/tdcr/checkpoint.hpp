#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tdcr/core_math.hpp"

namespace tdcr {

// Versioned binary container for model parameters. The standardizer fitted at
// training time travels with the parameters; `meta` holds the architecture
// descriptor and role-specific settings as JSON.
struct Checkpoint {
  std::string role;  // "dynamics" or "policy"
  nlohmann::json meta;
  Standardizer obs_std;
  Standardizer act_std;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a of the raw file bytes, as a hex string; used in run manifests.
std::string file_digest(const std::string& path);

}  // namespace tdcr
