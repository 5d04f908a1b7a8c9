#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "tdcr/autodiff.hpp"
#include "tdcr/core_math.hpp"
#include "tdcr/plant.hpp"
#include "tdcr/surrogate.hpp"

namespace tdcr {

// Closed-loop dynamics under test: either the simulated plant or the learned
// surrogate free-running on its own predictions.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Observation current() const = 0;
  virtual Observation apply(const Eigen::VectorXd& action_lengths) = 0;
  // Pose used for error metrics: the plant's noise-free pose, or the
  // surrogate's predicted pose.
  virtual Pose6 metric_pose() const = 0;
  virtual Eigen::VectorXd current_command() const = 0;
  virtual std::unique_ptr<Backend> clone() const = 0;
  virtual const char* name() const = 0;
};

class PlantBackend : public Backend {
 public:
  PlantBackend(const PlantConfig& cfg, uint64_t noise_seed);

  Observation current() const override { return obs_; }
  Observation apply(const Eigen::VectorXd& action) override;
  Pose6 metric_pose() const override { return state_.true_pose; }
  Eigen::VectorXd current_command() const override { return state_.l_cmd; }
  std::unique_ptr<Backend> clone() const override;
  const char* name() const override { return "plant"; }

  const PlantConfig& config() const { return cfg_; }

 private:
  PlantConfig cfg_;
  PlantState state_;
  Observation obs_;
};

class SurrogateBackend : public Backend {
 public:
  // Starts from the given raw observation (typically the plant's neutral
  // observation) with a zero hidden state.
  SurrogateBackend(std::shared_ptr<const SurrogateModel> model,
                   const Observation& initial);

  Observation current() const override { return obs_; }
  Observation apply(const Eigen::VectorXd& action) override;
  Pose6 metric_pose() const override { return obs_.pose; }
  Eigen::VectorXd current_command() const override { return last_action_; }
  std::unique_ptr<Backend> clone() const override;
  const char* name() const override { return "surrogate"; }

 private:
  std::shared_ptr<const SurrogateModel> model_;
  HiddenState hidden_;
  Observation obs_;
  Eigen::VectorXd last_action_;
};

struct ClosedLoopResult {
  std::vector<double> pos_err;  // mm per step
  std::vector<double> ori_err;  // rad per step
  std::vector<Pose6> executed;
  std::vector<Pose6> reference;
  std::vector<Eigen::VectorXd> commands;
  bool aborted = false;
  int abort_step = -1;

  double mean_pos_err() const;
  double mean_ori_err() const;
};

}  // namespace tdcr
