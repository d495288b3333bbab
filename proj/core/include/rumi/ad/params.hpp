#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumi/ad/tensor.hpp"

namespace rumi::ad {

/// A named trainable (or frozen) tensor that outlives any single tape.
struct Parameter {
  std::string name;
  Tensor value;
  bool frozen = false;
  // Weight matrices participate in the L2 penalty; biases and frozen tables do not.
  bool regularized = false;
};

/// Insertion-ordered owner of parameters. Addresses are stable for the
/// lifetime of the store, so layers may hold raw Parameter pointers.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Parameter& add(std::string name, Tensor value, bool frozen = false, bool regularized = false);

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  Parameter& at(std::string_view name);

  std::size_t size() const noexcept { return params_.size(); }
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::vector<Parameter*> trainable();

  /// Sum of squares over regularized parameters.
  double squared_norm() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> index_;
};

/// Seeded generator threaded through initialization and dropout.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  bool bernoulli(double p);
  std::uint64_t next() { return engine_(); }
  std::size_t index(std::size_t n);
  std::mt19937_64& engine() noexcept { return engine_; }

  /// Independent stream derived from (seed material, stream id) with splitmix64.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)); rows = fan_out, cols = fan_in.
Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace rumi::ad
