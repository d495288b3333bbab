#pragma once

#include <vector>

#include "rumi/ad/params.hpp"

namespace rumi {

/// AdaDelta with the learning rate applied as a multiplier on the update:
///   Eg  <- rho Eg  + (1 - rho) g^2
///   u    = sqrt(Edx + eps) / sqrt(Eg + eps) * g
///   Edx <- rho Edx + (1 - rho) u^2
///   x   <- x - lr * u
class AdaDelta {
 public:
  AdaDelta(std::vector<ad::Parameter*> params, double rho = 0.95, double eps = 1e-6);

  /// grads[i] belongs to params()[i]; shapes must match.
  void step(const std::vector<ad::Tensor>& grads, double lr);

  const std::vector<ad::Parameter*>& params() const noexcept { return params_; }
  std::size_t steps() const noexcept { return steps_; }

 private:
  std::vector<ad::Parameter*> params_;
  std::vector<ad::Tensor> grad_sq_;
  std::vector<ad::Tensor> update_sq_;
  double rho_;
  double eps_;
  std::size_t steps_ = 0;
};

/// Two-level rate: `initial` until dev F1 has gone `patience` evaluations
/// without improving by at least `min_improvement` over the reference
/// score, then `decayed` for good.
class LrSchedule {
 public:
  LrSchedule(double initial, double decayed, std::size_t patience, double min_improvement);

  /// Records one evaluation; returns true when this call triggered the decay.
  bool observe(double dev_f1);

  double rate() const noexcept { return decayed_ ? decayed_rate_ : initial_; }
  bool decayed() const noexcept { return decayed_; }
  std::size_t stale() const noexcept { return stale_; }

 private:
  double initial_;
  double decayed_rate_;
  std::size_t patience_;
  double min_improvement_;
  bool has_reference_ = false;
  double reference_ = 0.0;
  std::size_t stale_ = 0;
  bool decayed_ = false;
};

}  // namespace rumi
