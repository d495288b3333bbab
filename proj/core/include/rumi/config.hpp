#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rumi/model.hpp"
#include "rumi/output.hpp"

namespace rumi {

/// Every knob of a run. Keys in config files and CLI flags use the field
/// names below (see kConfigKeys).
struct RunConfig {
  // model
  std::size_t d = 100;
  std::size_t word_dim = 100;
  std::size_t char_dim = 8;
  std::size_t filters = 100;
  std::size_t filter_width = 5;
  std::size_t max_word_len = 16;
  std::size_t max_context_len = 0;  // 0 = no cap
  std::string variant = "full";

  // training
  std::size_t batch_size = 30;
  double lr = 0.5;
  double lr_decayed = 0.2;
  std::size_t patience = 3;
  double min_improvement = 0.1;  // dev F1 points
  double l2 = 1e-4;
  double aqsl = 1.0;
  double dropout = 0.2;
  double rho = 0.95;
  double eps = 1e-6;
  std::size_t steps = 40000;
  std::size_t eval_every = 1000;
  std::uint64_t seed = 1;

  // decoding
  std::size_t window = 15;

  // paths; relative ones resolve against data_dir
  std::string data_dir;
  std::string train;
  std::string dev;
  std::string glove;
  std::string checkpoint_dir = "checkpoints";

  /// Keys assigned through set(); lets commands tell defaults from requests.
  std::set<std::string> explicit_keys;

  /// "standard" (the defaults above) or "desk" (d=20, f=20, small budget).
  static RunConfig profile(std::string_view name);

  /// Assigns one key from its text form. Throws std::invalid_argument on an
  /// unknown key or a value that does not parse.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;

  ModelDims model_dims() const;
  LossWeights loss_weights() const;
  VariantConfig variant_config() const;
  /// Decoding window for the configured variant (unbounded without local search).
  std::size_t decode_window() const;

  std::filesystem::path resolve(const std::string& path) const;

  /// All keys as "key=value" lines, in kConfigKeys order.
  std::string dump() const;
};

extern const std::vector<std::string> kConfigKeys;

/// Applies "key = value" lines; '#' starts a comment, blank lines are
/// ignored. Errors name the line number.
void apply_config_text(RunConfig& cfg, std::string_view text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Environment variable consulted for data_dir when it is not set otherwise.
inline constexpr const char* kDataDirEnv = "RUMI_DATA_DIR";

}  // namespace rumi
