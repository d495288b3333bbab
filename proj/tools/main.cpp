#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rumi/commands.hpp"
#include "rumi/config.hpp"

namespace {

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (char& c : out)
    if (c == '_') c = '-';
  return "--" + out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rumi: extractive question answering reader"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string profile = "standard";
  std::string config_file;
  app.add_option("--profile", profile, "Default set: standard or desk")->capture_default_str();
  app.add_option("--config", config_file, "key=value config file");

  std::map<std::string, std::string> flags;
  for (const auto& key : rumi::kConfigKeys) app.add_option(flag_name(key), flags[key], "config key " + key);

  auto* train = app.add_subcommand("train", "Train a model and keep the best dev checkpoint");

  std::string checkpoint, data, predictions, report_csv, input, output, out_dir = "trace", variants = "all";
  std::vector<std::string> ids;

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a SQuAD-format file");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file (default <checkpoint_dir>/best.ckpt)");
  eval->add_option("--data", data, "Data file (default: dev)");
  eval->add_option("--predictions", predictions, "Write {id: answer} JSON here");
  eval->add_option("--report-csv", report_csv, "Write the breakdown tables as CSV here");

  auto* predict = app.add_subcommand("predict", "Answer every question in a file");
  predict->add_option("--checkpoint", checkpoint, "Checkpoint file");
  predict->add_option("--input", input, "SQuAD-format questions")->required();
  predict->add_option("--output", output, "Predictions JSON (default: stdout)");

  auto* trace = app.add_subcommand("trace", "Export attention and gate values as CSV");
  trace->add_option("--checkpoint", checkpoint, "Checkpoint file");
  trace->add_option("--data", data, "Data file holding the questions (default: dev)");
  trace->add_option("--ids", ids, "Question ids")->required();
  trace->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* ablate = app.add_subcommand("ablate", "Train and score ablation variants");
  ablate->add_option("--variants", variants, "\"all\" or a list like full,1,2")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    rumi::RunConfig cfg = rumi::RunConfig::profile(profile);
    if (const char* env = std::getenv(rumi::kDataDirEnv); env && *env) cfg.data_dir = env;
    if (!config_file.empty()) rumi::apply_config_file(cfg, config_file);
    for (const auto& key : rumi::kConfigKeys)
      if (app.count(flag_name(key)) > 0) cfg.set(key, flags[key]);
    cfg.validate();

    const std::filesystem::path default_ckpt = cfg.resolve(cfg.checkpoint_dir) / "best.ckpt";
    const std::filesystem::path ckpt = checkpoint.empty() ? default_ckpt : std::filesystem::path(checkpoint);
    const std::string data_file = data.empty() ? cfg.dev : data;

    if (*train) {
      rumi::cmd_train(cfg, std::cout);
    } else if (*eval) {
      if (data_file.empty()) throw std::invalid_argument("eval: no data file (use --data or dev=...)");
      rumi::cmd_eval(cfg, ckpt, data_file, {predictions, report_csv}, std::cout);
    } else if (*predict) {
      const auto answers = rumi::cmd_predict(cfg, ckpt, input, output);
      if (output.empty()) std::cout << rumi::predictions_json(answers);
    } else if (*trace) {
      if (data_file.empty()) throw std::invalid_argument("trace: no data file (use --data or dev=...)");
      const auto files = rumi::cmd_trace(cfg, ckpt, data_file, ids, out_dir, std::cerr);
      for (const auto& f : files) std::cout << f.string() << "\n";
    } else if (*ablate) {
      rumi::cmd_ablate(cfg, rumi::parse_variant_list(variants), std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "rumi: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
