#include "rumi/commands.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rumi/ad/checkpoint.hpp"

namespace rumi {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<QAExample> load_data(const RunConfig& cfg, const std::string& path, bool require_answers = true) {
  LoadStats stats;
  auto examples = load_squad(cfg.resolve(path), &stats, require_answers);
  if (examples.empty()) throw DataError("no usable examples in " + cfg.resolve(path).string());
  return examples;
}

std::size_t effective_window(const RunConfig& requested, const Session& session) {
  RunConfig cfg = session.config();
  if (requested.explicit_keys.contains("window")) cfg.window = requested.window;
  return cfg.decode_window();
}

std::unique_ptr<Session> open_checkpoint(const RunConfig& requested, const std::filesystem::path& checkpoint) {
  auto session = Session::load(requested.resolve(checkpoint.string()));
  check_compatible(requested, *session);
  return session;
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::string> token_texts(const std::vector<Token>& tokens, std::size_t cap) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (cap != 0 && out.size() == cap) break;
    out.push_back(t.text);
  }
  return out;
}

std::string safe_name(const std::string& id) {
  std::string out;
  for (unsigned char c : id) out += std::isalnum(c) || c == '-' || c == '_' || c == '.' ? static_cast<char>(c) : '_';
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string matrix_csv(const ad::Tensor& m, const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels) {
  if (row_labels.size() != m.rows() || col_labels.size() != m.cols())
    throw ad::ShapeError("matrix_csv: labels do not match " + ad::shape_string(m.shape()));
  std::string out;
  for (const auto& c : col_labels) out += "," + csv_field(c);
  out += "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += csv_field(row_labels[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) out += "," + number(m.at(r, c));
    out += "\n";
  }
  return out;
}

TrainSummary cmd_train(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  if (cfg.train.empty()) throw std::invalid_argument("train: no training file (set train=...)");
  const auto train = load_data(cfg, cfg.train);
  const std::vector<QAExample> dev = cfg.dev.empty() ? std::vector<QAExample>{} : load_data(cfg, cfg.dev);

  GloveStats glove;
  auto session = new_session(cfg, train, &glove);
  out << "train " << train.size() << " examples, dev " << dev.size() << ", vocab " << session->vocab().size()
      << " (" << glove.loaded << " with vectors), variant " << cfg.variant_config().description << "\n";

  const std::filesystem::path dir = cfg.resolve(cfg.checkpoint_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "config.txt", cfg.dump());
  std::ofstream log(dir / "train.log", std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + (dir / "train.log").string());

  TrainSummary summary = train_loop(*session, cfg, train, dev, dir / "best.ckpt", &log, &out);
  out << "done: " << summary.steps << " steps, loss " << summary.first_loss << " -> " << summary.last_loss;
  if (summary.best_f1 >= 0) out << ", best dev F1 " << summary.best_f1 << " EM " << summary.best_em;
  if (summary.decay_step) out << ", lr decayed at step " << *summary.decay_step;
  out << "\ncheckpoint " << summary.checkpoint.string() << "\n";
  return summary;
}

EvalReport cmd_eval(const RunConfig& requested, const std::filesystem::path& checkpoint,
                    const std::filesystem::path& data, const EvalFiles& files, std::ostream& out) {
  auto session = open_checkpoint(requested, checkpoint);
  const auto examples = load_data(requested, data.string());
  EvalOutput eval = evaluate(*session, examples, effective_window(requested, *session));
  out << format_report(eval.report);
  if (!files.predictions.empty()) write_file(files.predictions, predictions_json(eval.predictions));
  if (!files.report_csv.empty()) write_file(files.report_csv, report_csv(eval.report));
  return eval.report;
}

std::map<std::string, std::string> cmd_predict(const RunConfig& requested, const std::filesystem::path& checkpoint,
                                               const std::filesystem::path& input,
                                               const std::filesystem::path& output) {
  auto session = open_checkpoint(requested, checkpoint);
  const auto examples = load_data(requested, input.string(), false);
  const std::size_t window = effective_window(requested, *session);
  std::map<std::string, std::string> predictions;
  for (const auto& ex : examples) predictions[ex.id] = predict_one(*session, ex, window).text;
  if (!output.empty()) write_file(output, predictions_json(predictions));
  return predictions;
}

std::vector<std::filesystem::path> cmd_trace(const RunConfig& requested, const std::filesystem::path& checkpoint,
                                             const std::filesystem::path& data, const std::vector<std::string>& ids,
                                             const std::filesystem::path& out_dir, std::ostream& err) {
  auto session = open_checkpoint(requested, checkpoint);
  const auto examples = load_data(requested, data.string(), false);
  const std::size_t window = effective_window(requested, *session);
  const std::size_t cap = session->config().max_context_len;

  std::vector<std::filesystem::path> written;
  for (const auto& id : ids) {
    auto it = std::find_if(examples.begin(), examples.end(), [&](const QAExample& ex) { return ex.id == id; });
    if (it == examples.end()) {
      err << "warning: question id '" << id << "' not found, skipped\n";
      continue;
    }
    const QAExample& ex = *it;
    ad::Tape tape;
    ForwardResult fwd;
    const SpanPrediction pred = predict_one(*session, ex, window, &fwd, &tape);

    const auto ctx = token_texts(ex.context_tokens, cap);
    const auto qry = token_texts(ex.question_tokens, 0);
    const std::filesystem::path dir = out_dir / safe_name(id);
    auto emit = [&](const std::string& name, const std::string& content) {
      write_file(dir / name, content);
      written.push_back(dir / name);
    };
    auto emit_hop = [&](const AttentionFlow& flow) {
      const AttentionTrace t = flow.trace();
      const std::string prefix = "hop" + std::to_string(t.hop) + "_";
      emit(prefix + "interaction.csv", matrix_csv(t.interaction, ctx, qry));
      emit(prefix + "c2q.csv", matrix_csv(t.c2q, ctx, qry));
      emit(prefix + "q2c.csv", matrix_csv(t.q2c, ctx, {"b"}));
    };
    emit_hop(fwd.hop1);
    if (fwd.hop2) emit_hop(*fwd.hop2);

    auto emit_gate = [&](const std::string& name, const ad::Var& gate, const std::vector<std::string>& tokens) {
      const auto norms = gate_norms(gate.value());
      emit(name, matrix_csv(ad::Tensor({norms.size(), 1}, norms), tokens, {"gate_l2"}));
    };
    if (fwd.query_gate) emit_gate("query_gate.csv", *fwd.query_gate, qry);
    if (fwd.context_gate) emit_gate("context_gate.csv", *fwd.context_gate, ctx);

    std::string spans = "kind,start,end,text\n";
    spans += "predicted," + std::to_string(pred.start) + "," + std::to_string(pred.end) + "," +
             csv_field(pred.text) + "\n";
    for (const auto& g : ex.gold_spans)
      spans += "gold," + std::to_string(g.begin) + "," + std::to_string(g.end) + "," + csv_field(ex.span_text(g)) +
               "\n";
    emit("spans.csv", spans);
  }
  return written;
}

std::vector<VariantConfig> parse_variant_list(const std::string& text) {
  if (text == "all") return all_variants();
  std::vector<VariantConfig> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) continue;
    out.push_back(VariantConfig::parse(item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw std::invalid_argument("ablate: empty variant list");
  return out;
}

std::vector<AblationRow> cmd_ablate(const RunConfig& cfg, const std::vector<VariantConfig>& variants,
                                    std::ostream& out) {
  cfg.validate();
  if (cfg.train.empty() || cfg.dev.empty()) throw std::invalid_argument("ablate: needs both train and dev files");
  const auto train = load_data(cfg, cfg.train);
  const auto dev = load_data(cfg, cfg.dev);
  const std::filesystem::path dir = cfg.resolve(cfg.checkpoint_dir) / "ablate";

  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    RunConfig run = cfg;
    run.variant = v.name();
    auto session = new_session(run, train);
    std::ostringstream quiet;
    const TrainSummary summary = train_loop(*session, run, train, dev, dir / (v.name() + ".ckpt"), nullptr, &quiet);
    rows.push_back({v, summary.best_f1, summary.best_em});
    out << "variant " << v.name() << ": F1 " << summary.best_f1 << " EM " << summary.best_em << "\n";
  }
  out << "\n" << format_ablation_table(rows);
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-4s  %-44s  %6s  %6s\n", "#", "Model", "F1", "EM");
  out += line;
  for (const auto& r : rows) {
    const std::string id = r.variant.id == VariantConfig::kFull ? "-" : std::to_string(r.variant.id);
    std::snprintf(line, sizeof(line), "%-4s  %-44s  %6.1f  %6.1f\n", id.c_str(), r.variant.description.c_str(),
                  r.f1, r.em);
    out += line;
  }
  return out;
}

}  // namespace rumi
