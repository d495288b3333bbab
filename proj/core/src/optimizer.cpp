#include "rumi/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace rumi {

AdaDelta::AdaDelta(std::vector<ad::Parameter*> params, double rho, double eps)
    : params_(std::move(params)), rho_(rho), eps_(eps) {
  for (const auto* p : params_) {
    grad_sq_.emplace_back(p->value.shape(), 0.0);
    update_sq_.emplace_back(p->value.shape(), 0.0);
  }
}

void AdaDelta::step(const std::vector<ad::Tensor>& grads, double lr) {
  if (grads.size() != params_.size()) throw std::invalid_argument("adadelta: gradient count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Parameter& p = *params_[i];
    if (!grads[i].same_shape(p.value))
      throw ad::ShapeError("adadelta: gradient shape mismatch for " + p.name);
    auto& x = p.value.data();
    const auto& g = grads[i].data();
    auto& eg = grad_sq_[i].data();
    auto& ex = update_sq_[i].data();
    for (std::size_t k = 0; k < x.size(); ++k) {
      eg[k] = rho_ * eg[k] + (1.0 - rho_) * g[k] * g[k];
      const double u = std::sqrt(ex[k] + eps_) / std::sqrt(eg[k] + eps_) * g[k];
      ex[k] = rho_ * ex[k] + (1.0 - rho_) * u * u;
      x[k] -= lr * u;
    }
  }
  ++steps_;
}

LrSchedule::LrSchedule(double initial, double decayed, std::size_t patience, double min_improvement)
    : initial_(initial), decayed_rate_(decayed), patience_(patience), min_improvement_(min_improvement) {}

bool LrSchedule::observe(double dev_f1) {
  if (!has_reference_ || dev_f1 >= reference_ + min_improvement_) {
    has_reference_ = true;
    reference_ = dev_f1;
    stale_ = 0;
    return false;
  }
  ++stale_;
  if (!decayed_ && stale_ >= patience_) {
    decayed_ = true;
    return true;
  }
  return false;
}

}  // namespace rumi
