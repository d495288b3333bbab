#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rumi/batch.hpp"
#include "rumi/config.hpp"
#include "rumi/decode.hpp"
#include "rumi/metrics.hpp"
#include "rumi/model.hpp"
#include "rumi/optimizer.hpp"
#include "rumi/squad.hpp"
#include "rumi/vocab.hpp"

namespace rumi {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model together with the vocabulary, charset and config it was built
/// from. This is what a checkpoint stores.
class Session {
 public:
  Session(RunConfig config, Vocab vocab, Charset chars, ad::Tensor word_table);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Throws ad::CheckpointError on a malformed file or a layout mismatch.
  static std::unique_ptr<Session> load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string meta() const;

  const RunConfig& config() const noexcept { return config_; }
  const Vocab& vocab() const noexcept { return vocab_; }
  const Charset& chars() const noexcept { return chars_; }
  ReaderModel& model() noexcept { return *model_; }
  const ReaderModel& model() const noexcept { return *model_; }

  SequenceInput encode_context(const QAExample& ex) const;
  SequenceInput encode_question(const QAExample& ex) const;
  /// nullopt when context truncation loses the gold span.
  std::optional<EncodedExample> encode(const QAExample& ex) const;

 private:
  RunConfig config_;
  Vocab vocab_;
  Charset chars_;
  std::unique_ptr<ReaderModel> model_;
};

/// Vocabulary and charset over the training examples, with word vectors
/// read from cfg.glove (rows of words without a vector stay zero). Words
/// outside the training vocabulary map to UNK.
std::unique_ptr<Session> new_session(const RunConfig& cfg, const std::vector<QAExample>& train,
                                     GloveStats* stats = nullptr);

/// Throws ad::CheckpointError when an explicitly requested model setting
/// differs from the one stored in the session.
void check_compatible(const RunConfig& requested, const Session& session);

/// 64-bit FNV-1a over the raw bytes of a tensor.
std::uint64_t tensor_hash(const ad::Tensor& t);
std::uint64_t frozen_table_hash(const Session& session);

struct StepStats {
  std::size_t step = 0;
  double nll = 0.0;
  double l2 = 0.0;
  double aqsl = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

/// Gradients of the batch loss for every trainable parameter, in
/// ParamStore::trainable() order; parameters off the loss path get zeros.
struct BatchGradients {
  StepStats stats;
  std::vector<ad::Tensor> grads;
};

class Trainer {
 public:
  Trainer(Session& session, const RunConfig& cfg);

  /// Loss and gradients for one batch without touching the parameters.
  BatchGradients compute(const std::vector<const EncodedExample*>& batch);
  /// compute + one optimizer update. Throws TrainingError on a non-finite loss
  /// before any parameter changes.
  StepStats step(const std::vector<const EncodedExample*>& batch);

  LrSchedule& schedule() noexcept { return schedule_; }
  std::size_t steps_done() const noexcept { return step_; }

 private:
  Session& session_;
  RunConfig cfg_;
  AdaDelta optimizer_;
  LrSchedule schedule_;
  std::size_t step_ = 0;
};

struct EvalOutput {
  EvalReport report;
  std::map<std::string, std::string> predictions;  // id -> answer text
  std::vector<SpanPrediction> spans;               // in input order
};

SpanPrediction predict_one(const Session& session, const QAExample& ex, std::size_t window,
                           ForwardResult* keep = nullptr, ad::Tape* tape = nullptr);

/// Decodes every example and scores those carrying gold answers.
EvalOutput evaluate(const Session& session, const std::vector<QAExample>& examples, std::size_t window);

/// {"id": "answer", ...} with keys sorted.
std::string predictions_json(const std::map<std::string, std::string>& predictions);

struct TrainSummary {
  std::size_t steps = 0;
  double first_loss = 0.0;
  double last_loss = 0.0;
  double best_f1 = -1.0;
  double best_em = 0.0;
  std::optional<std::size_t> decay_step;
  std::uint64_t table_hash_before = 0;
  std::uint64_t table_hash_after = 0;
  std::filesystem::path checkpoint;
};

/// Full training loop: epochs of bucketed batches, one log line per step
/// ("step,nll,l2,aqsl,total,lr"), dev evaluation every eval_every steps with
/// lr decay, and the best-dev checkpoint written to `checkpoint`. Without a
/// dev set the final parameters are saved.
TrainSummary train_loop(Session& session, const RunConfig& cfg, const std::vector<QAExample>& train,
                        const std::vector<QAExample>& dev, const std::filesystem::path& checkpoint,
                        std::ostream* log = nullptr, std::ostream* progress = nullptr);

}  // namespace rumi
