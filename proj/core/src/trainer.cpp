#include "rumi/trainer.hpp"

#include <cmath>
#include <cstring>
#include <ostream>

#include <json.hpp>

#include "rumi/ad/checkpoint.hpp"

namespace rumi {

namespace {

constexpr const char* kModelKeys[] = {"d", "word_dim", "char_dim", "filters", "filter_width", "max_word_len",
                                      "variant"};

std::vector<Token> truncated(const std::vector<Token>& tokens, std::size_t cap) {
  if (cap == 0 || tokens.size() <= cap) return tokens;
  return {tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(cap)};
}

}  // namespace

Session::Session(RunConfig config, Vocab vocab, Charset chars, ad::Tensor word_table)
    : config_(std::move(config)), vocab_(std::move(vocab)), chars_(std::move(chars)) {
  config_.validate();
  if (word_table.rows() != vocab_.size() || word_table.cols() != config_.word_dim)
    throw ad::ShapeError("session: word table " + ad::shape_string(word_table.shape()) + " does not match " +
                         std::to_string(vocab_.size()) + " words of dim " + std::to_string(config_.word_dim));
  model_ = std::make_unique<ReaderModel>(config_.model_dims(), config_.variant_config(), std::move(word_table),
                                         chars_.size(), config_.seed);
}

std::string Session::meta() const {
  nlohmann::json j;
  j["format"] = "rumi-reader";
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& k : kConfigKeys) cfg[k] = config_.get(k);
  j["config"] = cfg;
  j["vocab"] = vocab_.tokens();
  std::vector<std::uint32_t> cps(chars_.codepoints().begin(), chars_.codepoints().end());
  j["chars"] = cps;
  return j.dump();
}

void Session::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  ad::save_checkpoint(path, model_->params(), meta());
}

std::unique_ptr<Session> Session::load(const std::filesystem::path& path) {
  const ad::Checkpoint ckpt = ad::load_checkpoint(path);
  RunConfig cfg;
  Vocab vocab;
  Charset chars;
  try {
    const auto j = nlohmann::json::parse(ckpt.meta);
    if (j.at("format").get<std::string>() != "rumi-reader")
      throw ad::CheckpointError("checkpoint: unknown metadata format");
    for (const auto& [k, v] : j.at("config").items()) cfg.set(k, v.get<std::string>());
    cfg.explicit_keys.clear();
    vocab = Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    std::vector<char32_t> cps;
    for (auto cp : j.at("chars").get<std::vector<std::uint32_t>>()) cps.push_back(static_cast<char32_t>(cp));
    chars = Charset::from_codepoints(cps);
  } catch (const nlohmann::json::exception& e) {
    throw ad::CheckpointError(std::string("checkpoint: bad metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ad::CheckpointError(std::string("checkpoint: bad metadata: ") + e.what());
  } catch (const DataError& e) {
    throw ad::CheckpointError(std::string("checkpoint: bad metadata: ") + e.what());
  }
  const std::size_t words = vocab.size();
  auto session = std::make_unique<Session>(cfg, std::move(vocab), std::move(chars),
                                           ad::Tensor::matrix(words, cfg.word_dim));
  ad::restore(session->model().params(), ckpt);
  return session;
}

SequenceInput Session::encode_context(const QAExample& ex) const {
  return encode_sequence(truncated(ex.context_tokens, config_.max_context_len), vocab_, chars_,
                         config_.max_word_len);
}

SequenceInput Session::encode_question(const QAExample& ex) const {
  return encode_sequence(ex.question_tokens, vocab_, chars_, config_.max_word_len);
}

std::optional<EncodedExample> Session::encode(const QAExample& ex) const {
  if (ex.gold_spans.empty()) return std::nullopt;
  return encode_example(ex, vocab_, chars_, {config_.max_word_len, config_.max_context_len});
}

std::unique_ptr<Session> new_session(const RunConfig& cfg, const std::vector<QAExample>& train,
                                     GloveStats* stats) {
  Vocab vocab = Vocab::build(train);
  Charset chars = Charset::build(train);
  ad::Tensor table = ad::Tensor::matrix(vocab.size(), cfg.word_dim);
  if (!cfg.glove.empty()) table = load_glove(cfg.resolve(cfg.glove), vocab, cfg.word_dim, stats).matrix;
  return std::make_unique<Session>(cfg, std::move(vocab), std::move(chars), std::move(table));
}

void check_compatible(const RunConfig& requested, const Session& session) {
  for (const char* key : kModelKeys) {
    if (!requested.explicit_keys.contains(key)) continue;
    const std::string want = requested.get(key);
    const std::string have = session.config().get(key);
    if (want != have)
      throw ad::CheckpointError(std::string("checkpoint was built with ") + key + "=" + have + ", requested " +
                                key + "=" + want);
  }
}

std::uint64_t tensor_hash(const ad::Tensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : t.data()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t frozen_table_hash(const Session& session) {
  return tensor_hash(session.model().params().find("embed.words")->value);
}

Trainer::Trainer(Session& session, const RunConfig& cfg)
    : session_(session),
      cfg_(cfg),
      optimizer_(session.model().params().trainable(), cfg.rho, cfg.eps),
      schedule_(cfg.lr, cfg.lr_decayed, cfg.patience, cfg.min_improvement) {}

BatchGradients Trainer::compute(const std::vector<const EncodedExample*>& batch) {
  if (batch.empty()) throw std::invalid_argument("trainer: empty batch");
  ReaderModel& model = session_.model();
  ad::Tape tape;
  ad::Rng rng = ad::Rng::derive(cfg_.seed, 0x10000 + step_);
  const ForwardOptions opts{true, cfg_.dropout, &rng};
  std::vector<ExampleLoss> losses;
  losses.reserve(batch.size());
  for (const EncodedExample* ex : batch) {
    ForwardResult fwd = model.forward(tape, ex->context, ex->question, opts);
    losses.push_back({nll_loss(fwd.start, fwd.end, ex->gold),
                      aqs_loss(fwd.start, fwd.end, fwd.context_enc, fwd.query_enc, ex->question.mask)});
  }
  const LossParts parts = total_loss(tape, losses, model.params(), cfg_.loss_weights());

  BatchGradients out;
  out.stats.step = step_ + 1;
  out.stats.nll = parts.nll.value().item();
  out.stats.l2 = parts.l2.value().item();
  out.stats.aqsl = parts.aqsl.value().item();
  out.stats.total = parts.total.value().item();
  out.stats.lr = schedule_.rate();
  if (!std::isfinite(out.stats.total))
    throw TrainingError("non-finite loss at step " + std::to_string(out.stats.step));

  const ad::Gradients grads = tape.backward(parts.total);
  for (const ad::Parameter* p : optimizer_.params()) {
    const ad::Tensor* g = grads.of(*p);
    out.grads.push_back(g ? *g : ad::Tensor(p->value.shape(), 0.0));
  }
  return out;
}

StepStats Trainer::step(const std::vector<const EncodedExample*>& batch) {
  BatchGradients bg = compute(batch);
  for (const auto& g : bg.grads)
    for (double v : g.data())
      if (!std::isfinite(v)) throw TrainingError("non-finite gradient at step " + std::to_string(bg.stats.step));
  optimizer_.step(bg.grads, schedule_.rate());
  ++step_;
  return bg.stats;
}

SpanPrediction predict_one(const Session& session, const QAExample& ex, std::size_t window, ForwardResult* keep,
                           ad::Tape* tape) {
  ad::Tape local;
  ad::Tape& t = tape ? *tape : local;
  const SequenceInput context = session.encode_context(ex);
  const SequenceInput question = session.encode_question(ex);
  ForwardResult fwd = session.model().forward(t, context, question);
  SpanPrediction pred = decode_span(fwd.start.value().data(), fwd.end.value().data(), window);
  pred.text = ex.span_text({pred.start, pred.end});
  if (keep && tape) *keep = fwd;
  return pred;
}

EvalOutput evaluate(const Session& session, const std::vector<QAExample>& examples, std::size_t window) {
  EvalOutput out;
  std::vector<QuestionRecord> records;
  for (const auto& ex : examples) {
    SpanPrediction pred = predict_one(session, ex, window);
    out.predictions[ex.id] = pred.text;
    if (!ex.gold_texts.empty()) {
      const QuestionScore score = score_question(pred.text, ex.gold_texts);
      QuestionRecord r;
      r.id = ex.id;
      r.prediction = pred.text;
      r.f1 = score.f1;
      r.em = score.em;
      r.answer_length = ex.gold_spans.empty() ? tokenize(ex.gold_texts.front()).size()
                                              : ex.gold_spans.front().end - ex.gold_spans.front().begin + 1;
      r.wh = wh_word(ex.question);
      records.push_back(std::move(r));
    }
    out.spans.push_back(std::move(pred));
  }
  out.report = breakdown(std::move(records));
  return out;
}

std::string predictions_json(const std::map<std::string, std::string>& predictions) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, text] : predictions) j[id] = text;
  return j.dump(2) + "\n";
}

TrainSummary train_loop(Session& session, const RunConfig& cfg, const std::vector<QAExample>& train,
                        const std::vector<QAExample>& dev, const std::filesystem::path& checkpoint,
                        std::ostream* log, std::ostream* progress) {
  TrainSummary summary;
  summary.checkpoint = checkpoint;
  summary.table_hash_before = frozen_table_hash(session);

  std::vector<EncodedExample> encoded;
  for (const auto& ex : train)
    if (auto e = session.encode(ex)) encoded.push_back(std::move(*e));
  if (encoded.empty()) throw TrainingError("no usable training examples");

  Trainer trainer(session, cfg);
  ad::Rng order_rng = ad::Rng::derive(cfg.seed, 1);
  std::vector<std::vector<std::size_t>> batches;
  std::size_t cursor = 0;
  if (log) *log << "step,nll,l2,aqsl,total,lr\n";

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    if (cursor == batches.size()) {
      batches = bucket_batches(encoded, cfg.batch_size, order_rng);
      cursor = 0;
    }
    std::vector<const EncodedExample*> batch;
    for (std::size_t i : batches[cursor]) batch.push_back(&encoded[i]);
    ++cursor;

    StepStats stats;
    try {
      stats = trainer.step(batch);
    } catch (const TrainingError& e) {
      std::string msg = std::string(e.what()) + "; training aborted";
      if (std::filesystem::exists(checkpoint)) msg += ", last good checkpoint kept at " + checkpoint.string();
      throw TrainingError(msg);
    }
    if (step == 1) summary.first_loss = stats.total;
    summary.last_loss = stats.total;
    summary.steps = step;
    if (log)
      *log << stats.step << ',' << stats.nll << ',' << stats.l2 << ',' << stats.aqsl << ',' << stats.total << ','
           << stats.lr << '\n';

    if (!dev.empty() && (step % cfg.eval_every == 0 || step == cfg.steps)) {
      const EvalOutput eval = evaluate(session, dev, cfg.decode_window());
      if (eval.report.f1 > summary.best_f1) {
        summary.best_f1 = eval.report.f1;
        summary.best_em = eval.report.em;
        session.save(checkpoint);
      }
      if (trainer.schedule().observe(eval.report.f1)) summary.decay_step = step;
      if (progress)
        *progress << "step " << step << "  loss " << stats.total << "  dev F1 " << eval.report.f1 << "  EM "
                  << eval.report.em << "  lr " << trainer.schedule().rate() << '\n';
    }
  }
  if (dev.empty()) session.save(checkpoint);

  summary.table_hash_after = frozen_table_hash(session);
  if (summary.table_hash_after != summary.table_hash_before)
    throw TrainingError("frozen word table changed during training");
  return summary;
}

}  // namespace rumi
