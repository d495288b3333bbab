#pragma once

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"
#include "rumi/batch.hpp"
#include "rumi/model.hpp"

namespace rumi::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(RUMI_TEST_DATA_DIR) / name;
}

inline ad::Tensor random_tensor(std::size_t rows, std::size_t cols, ad::Rng& rng, double lo = -1.0,
                                double hi = 1.0) {
  ad::Tensor t = ad::Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline void randomize(ad::ParamStore& store, ad::Rng& rng, double scale = 0.5, bool include_frozen = true) {
  for (ad::Parameter* p : store.all()) {
    if (p->frozen && !include_frozen) continue;
    for (double& v : p->value.data()) v = rng.uniform(-scale, scale);
  }
}

inline SequenceInput random_sequence(std::size_t len, std::size_t vocab, std::size_t charset, ad::Rng& rng,
                                     std::size_t valid = 0, std::size_t max_word_len = 4) {
  if (valid == 0) valid = len;
  SequenceInput s;
  for (std::size_t i = 0; i < len; ++i) {
    s.word_ids.push_back(rng.index(vocab));
    std::vector<std::size_t> word;
    const std::size_t n = 1 + rng.index(max_word_len);
    for (std::size_t k = 0; k < n; ++k) word.push_back(2 + rng.index(charset - 2));
    s.char_ids.push_back(word);
    s.mask.push_back(i < valid ? 1 : 0);
  }
  return s;
}

inline ad::Mask random_mask(std::size_t n, ad::Rng& rng) {
  ad::Mask m(n);
  for (auto& b : m) b = rng.bernoulli(0.7) ? 1 : 0;
  m[rng.index(n)] = 1;
  return m;
}

/// d=2 toy dimensions used by the gradient suite.
inline ModelDims toy_dims() { return {2, 3, 2, 2, 2}; }

inline double column_sum(const ad::Tensor& t, std::size_t c) {
  double s = 0;
  for (std::size_t r = 0; r < t.rows(); ++r) s += t.at(r, c);
  return s;
}

inline double row_sum(const ad::Tensor& t, std::size_t r) {
  double s = 0;
  for (std::size_t c = 0; c < t.cols(); ++c) s += t.at(r, c);
  return s;
}

inline bool bitwise_equal(const ad::Tensor& a, const ad::Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::memcmp(a.data().data() + i, b.data().data() + i, sizeof(double)) != 0) return false;
  return true;
}

}  // namespace rumi::testing
