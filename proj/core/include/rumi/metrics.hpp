#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rumi {

/// Lower-case, drop ASCII punctuation, drop the articles a/an/the as whole
/// words, collapse whitespace.
std::string normalize_answer(std::string_view text);
std::vector<std::string> normalized_tokens(std::string_view text);

/// Token-multiset F1 after normalization. Both sides empty scores 1.
double f1_score(std::string_view prediction, std::string_view gold);
/// 1 when the normalized strings are equal.
double em_score(std::string_view prediction, std::string_view gold);

struct QuestionScore {
  double f1 = 0.0;
  double em = 0.0;
};

/// Max over golds, independently per metric. Throws on an empty gold list.
QuestionScore score_question(std::string_view prediction, const std::vector<std::string>& golds);

/// First of what/which/when/who/why/how in the question, else "other".
std::string wh_word(std::string_view question);

struct QuestionRecord {
  std::string id;
  std::string prediction;
  double f1 = 0.0;
  double em = 0.0;
  std::size_t answer_length = 0;  // gold answer length in tokens
  std::string wh = "other";
};

struct Bucket {
  std::string key;
  std::size_t count = 0;
  double mean_f1 = 0.0;
  double mean_em = 0.0;
};

/// Failure = F1 0, success = F1 1 (within 1e-9), partial = the rest.
struct OutcomeSplit {
  std::size_t failure = 0;
  std::size_t partial = 0;
  std::size_t success = 0;
  double failure_pct = 0.0;
  double partial_pct = 0.0;
  double success_pct = 0.0;
  std::optional<double> partial_mean_f1;  // absent when no partial records
};

struct EvalReport {
  double f1 = 0.0;  // percent
  double em = 0.0;  // percent
  std::vector<QuestionRecord> records;
  std::vector<Bucket> by_length;
  std::vector<Bucket> by_wh;
  OutcomeSplit outcome;
};

EvalReport breakdown(std::vector<QuestionRecord> records);

std::string format_report(const EvalReport& report);
/// Rows "table,bucket,count,mean_f1,mean_em" for length, wh and outcome tables.
std::string report_csv(const EvalReport& report);

}  // namespace rumi
