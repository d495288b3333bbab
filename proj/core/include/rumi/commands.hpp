#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rumi/config.hpp"
#include "rumi/metrics.hpp"
#include "rumi/trainer.hpp"

namespace rumi {

/// Trains on cfg.train, evaluating on cfg.dev when set. Writes
/// <checkpoint_dir>/best.ckpt, train.log and config.txt.
TrainSummary cmd_train(const RunConfig& cfg, std::ostream& out);

/// Output files of eval/predict; empty paths are skipped.
struct EvalFiles {
  std::filesystem::path predictions;
  std::filesystem::path report_csv;
};

/// Decodes and scores `data` with the checkpointed model, prints the
/// breakdown report to `out`.
EvalReport cmd_eval(const RunConfig& requested, const std::filesystem::path& checkpoint,
                    const std::filesystem::path& data, const EvalFiles& files, std::ostream& out);

/// id -> answer for every question in `input` (answers optional).
std::map<std::string, std::string> cmd_predict(const RunConfig& requested, const std::filesystem::path& checkpoint,
                                               const std::filesystem::path& input,
                                               const std::filesystem::path& output);

/// Writes one directory per known question id under `out_dir` holding CSV
/// matrices (interaction, c2q and q2c weights per hop), gate norms and the
/// predicted and gold spans. Unknown ids are skipped with a warning on `err`.
/// Returns every file written.
std::vector<std::filesystem::path> cmd_trace(const RunConfig& requested, const std::filesystem::path& checkpoint,
                                             const std::filesystem::path& data, const std::vector<std::string>& ids,
                                             const std::filesystem::path& out_dir, std::ostream& err);

struct AblationRow {
  VariantConfig variant;
  double f1 = 0.0;
  double em = 0.0;
};

/// "all" or a comma separated list of "full" and 1..12.
std::vector<VariantConfig> parse_variant_list(const std::string& text);

/// Trains and evaluates every variant under the same config and budget.
std::vector<AblationRow> cmd_ablate(const RunConfig& cfg, const std::vector<VariantConfig>& variants,
                                    std::ostream& out);

/// One line per variant: id, description, dev F1, dev EM.
std::string format_ablation_table(const std::vector<AblationRow>& rows);

/// RFC 4180 style field quoting.
std::string csv_field(const std::string& text);
/// Matrix with a header row of column labels and a label leading each row.
std::string matrix_csv(const ad::Tensor& m, const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels);

}  // namespace rumi
