#include "rumi/ad/params.hpp"

#include <cmath>
#include <stdexcept>

namespace rumi::ad {

Parameter& ParamStore::add(std::string name, Tensor value, bool frozen, bool regularized) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>(Parameter{name, std::move(value), frozen, regularized});
  Parameter* raw = p.get();
  params_.push_back(std::move(p));
  index_.emplace(std::move(name), raw);
  return *raw;
}

Parameter* ParamStore::find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : it->second;
}

const Parameter* ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : it->second;
}

Parameter& ParamStore::at(std::string_view name) {
  Parameter* p = find(name);
  if (!p) throw std::out_of_range("unknown parameter: " + std::string(name));
  return *p;
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParamStore::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (!p->frozen) out.push_back(p.get());
  return out;
}

double ParamStore::squared_norm() const {
  double total = 0.0;
  for (const auto& p : params_) {
    if (!p->regularized || p->frozen) continue;
    for (double v : p->value.data()) total += v * v;
  }
  return total;
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(engine_);
}

bool Rng::bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

std::size_t Rng::index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL)));
}

Tensor xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = rng.uniform(-r, r);
  return t;
}

}  // namespace rumi::ad
