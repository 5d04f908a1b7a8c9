#include "tdcr/backend.hpp"

#include <numeric>

#include "tdcr/errors.hpp"

namespace tdcr {

PlantBackend::PlantBackend(const PlantConfig& cfg, uint64_t noise_seed) : cfg_(cfg) {
  PlantStepResult r = reset_plant(cfg, noise_seed);
  state_ = r.state;
  obs_ = r.obs;
}

Observation PlantBackend::apply(const Eigen::VectorXd& action) {
  PlantStepResult r = plant_step(state_, action, cfg_);
  state_ = r.state;
  obs_ = r.obs;
  return obs_;
}

std::unique_ptr<Backend> PlantBackend::clone() const {
  return std::make_unique<PlantBackend>(*this);
}

SurrogateBackend::SurrogateBackend(std::shared_ptr<const SurrogateModel> model,
                                   const Observation& initial)
    : model_(std::move(model)),
      hidden_(zero_hidden(model_->params.arch)),
      obs_(initial),
      last_action_(initial.l) {}

Observation SurrogateBackend::apply(const Eigen::VectorXd& action) {
  hidden_ = transition(*model_, hidden_, obs_.flat(), action);
  const Eigen::VectorXd next = predict_observation(*model_, obs_.flat(), hidden_);
  if (!next.allFinite())
    fail(ErrorKind::numeric, "surrogate backend produced a non-finite observation");
  obs_ = Observation::from_flat(next);
  obs_.pose.phi = wrap_angles(obs_.pose.phi);
  last_action_ = action;
  return obs_;
}

std::unique_ptr<Backend> SurrogateBackend::clone() const {
  return std::make_unique<SurrogateBackend>(*this);
}

double ClosedLoopResult::mean_pos_err() const {
  if (pos_err.empty()) return 0.0;
  return std::accumulate(pos_err.begin(), pos_err.end(), 0.0) /
         static_cast<double>(pos_err.size());
}

double ClosedLoopResult::mean_ori_err() const {
  if (ori_err.empty()) return 0.0;
  return std::accumulate(ori_err.begin(), ori_err.end(), 0.0) /
         static_cast<double>(ori_err.size());
}

}  // namespace tdcr
