#include "rumi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "rumi/text.hpp"

namespace rumi {

namespace {

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

// Approximates Python's \w: letters, digits and underscore. Outside ASCII we
// only know the common punctuation and symbol blocks; everything else counts
// as a word character.
bool is_word_char(char32_t cp) {
  if (cp < 0x80)
    return in(cp, U'a', U'z') || in(cp, U'A', U'Z') || in(cp, U'0', U'9') || cp == U'_';
  if (is_space(cp)) return false;
  if (in(cp, 0xA0, 0xBF))  // Latin-1 punctuation, except the letter/number ones
    return cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 || cp == 0xB9 || cp == 0xBA || in(cp, 0xBC, 0xBE);
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (in(cp, 0x300, 0x36F)) return false;  // combining marks
  if (in(cp, 0x2000, 0x206F) || in(cp, 0x20A0, 0x20CF) || in(cp, 0x2190, 0x2BFF)) return false;
  if (in(cp, 0x3000, 0x303F)) return in(cp, 0x3005, 0x3007);
  if (in(cp, 0xFE30, 0xFE4F) || in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
      in(cp, 0xFF5B, 0xFF65))
    return false;
  if (in(cp, 0x1F000, 0x1FAFF)) return false;  // emoji and pictographs
  return true;
}

// Lowercases ASCII, Latin-1, Greek and basic Cyrillic capitals.
char32_t lower(char32_t cp) {
  if (in(cp, U'A', U'Z')) return cp + 0x20;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  return cp;
}

std::u32string to_u32(std::string_view text) {
  std::u32string out;
  for (const auto& cp : decode_utf8(text)) out.push_back(cp.value);
  return out;
}

std::string to_utf8(const std::u32string& text) {
  std::string out;
  for (char32_t cp : text) out += encode_utf8(cp);
  return out;
}

}  // namespace

std::vector<std::string> normalized_tokens(std::string_view text) {
  std::u32string s;
  for (char32_t cp : to_u32(text)) {
    if (cp < 0x80 && is_punct(cp)) continue;
    s.push_back(lower(cp));
  }

  static const std::u32string articles[] = {U"a", U"an", U"the"};
  std::u32string stripped;
  std::size_t i = 0;
  while (i < s.size()) {
    bool matched = false;
    const bool left_edge = i == 0 || !is_word_char(s[i - 1]);
    if (left_edge) {
      for (const auto& art : articles) {
        if (s.compare(i, art.size(), art) != 0) continue;
        const std::size_t after = i + art.size();
        if (after < s.size() && is_word_char(s[after])) continue;
        stripped.push_back(U' ');
        i = after;
        matched = true;
        break;
      }
    }
    if (!matched) stripped.push_back(s[i++]);
  }

  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t cp : stripped) {
    if (is_space(cp)) {
      if (!current.empty()) tokens.push_back(to_utf8(current));
      current.clear();
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) tokens.push_back(to_utf8(current));
  return tokens;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  for (const auto& t : normalized_tokens(text)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

double f1_score(std::string_view prediction, std::string_view gold) {
  const auto pred = normalized_tokens(prediction);
  const auto ref = normalized_tokens(gold);
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;
  std::unordered_map<std::string, long> counts;
  for (const auto& t : ref) ++counts[t];
  long same = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return 0.0;
  const double precision = static_cast<double>(same) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(same) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

double em_score(std::string_view prediction, std::string_view gold) {
  return normalize_answer(prediction) == normalize_answer(gold) ? 1.0 : 0.0;
}

QuestionScore score_question(std::string_view prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) throw std::invalid_argument("score_question: no gold answers");
  QuestionScore best;
  for (const auto& g : golds) {
    best.f1 = std::max(best.f1, f1_score(prediction, g));
    best.em = std::max(best.em, em_score(prediction, g));
  }
  return best;
}

std::string wh_word(std::string_view question) {
  static const char* kWords[] = {"what", "which", "when", "who", "why", "how"};
  for (const auto& tok : tokenize(question)) {
    const std::string lower = ascii_lower(tok.text);
    for (const char* w : kWords)
      if (lower == w) return w;
  }
  return "other";
}

namespace {

std::vector<Bucket> group(const std::vector<QuestionRecord>& records,
                          const std::vector<std::string>& order, auto key_of) {
  std::map<std::string, Bucket> buckets;
  for (const auto& r : records) {
    Bucket& b = buckets[key_of(r)];
    ++b.count;
    b.mean_f1 += r.f1;
    b.mean_em += r.em;
  }
  std::vector<Bucket> out;
  for (const auto& key : order) {
    auto it = buckets.find(key);
    if (it == buckets.end()) continue;
    Bucket b = it->second;
    b.key = key;
    b.mean_f1 /= static_cast<double>(b.count);
    b.mean_em /= static_cast<double>(b.count);
    out.push_back(b);
  }
  return out;
}

// Buckets "1".."9" and "10+"; an empty answer counts as length 1.
std::string length_key(std::size_t n) { return n >= 10 ? "10+" : std::to_string(std::max<std::size_t>(n, 1)); }

}  // namespace

EvalReport breakdown(std::vector<QuestionRecord> records) {
  EvalReport rep;
  const double n = static_cast<double>(records.size());
  double partial_f1 = 0.0;
  for (const auto& r : records) {
    rep.f1 += r.f1;
    rep.em += r.em;
    if (r.f1 == 0.0) {
      ++rep.outcome.failure;
    } else if (std::abs(r.f1 - 1.0) <= 1e-9) {
      ++rep.outcome.success;
    } else {
      ++rep.outcome.partial;
      partial_f1 += r.f1;
    }
  }
  if (!records.empty()) {
    rep.f1 = 100.0 * rep.f1 / n;
    rep.em = 100.0 * rep.em / n;
    rep.outcome.failure_pct = 100.0 * static_cast<double>(rep.outcome.failure) / n;
    rep.outcome.partial_pct = 100.0 * static_cast<double>(rep.outcome.partial) / n;
    rep.outcome.success_pct = 100.0 * static_cast<double>(rep.outcome.success) / n;
  }
  if (rep.outcome.partial > 0) rep.outcome.partial_mean_f1 = partial_f1 / static_cast<double>(rep.outcome.partial);

  std::vector<std::string> lengths;
  for (std::size_t k = 1; k <= 10; ++k) lengths.push_back(length_key(k));
  rep.by_length = group(records, lengths, [](const QuestionRecord& r) { return length_key(r.answer_length); });
  rep.by_wh = group(records, {"what", "which", "when", "who", "why", "how", "other"},
                    [](const QuestionRecord& r) { return r.wh; });
  rep.records = std::move(records);
  return rep;
}

namespace {
std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}
}  // namespace

std::string format_report(const EvalReport& rep) {
  std::ostringstream out;
  out << "questions " << rep.records.size() << "  F1 " << fixed(rep.f1) << "  EM " << fixed(rep.em) << "\n\n";
  auto table = [&](const char* title, const std::vector<Bucket>& buckets) {
    out << title << "\n";
    out << "  bucket   count    F1      EM\n";
    for (const auto& b : buckets) {
      char line[128];
      std::snprintf(line, sizeof(line), "  %-7s %6zu  %6.2f  %6.2f\n", b.key.c_str(), b.count, 100.0 * b.mean_f1,
                    100.0 * b.mean_em);
      out << line;
    }
    out << "\n";
  };
  table("by answer length (tokens)", rep.by_length);
  table("by question word", rep.by_wh);
  out << "outcome\n";
  out << "  failure  " << fixed(rep.outcome.failure_pct) << "%\n";
  out << "  partial  " << fixed(rep.outcome.partial_pct) << "%";
  if (rep.outcome.partial_mean_f1) out << "  (mean F1 " << fixed(100.0 * *rep.outcome.partial_mean_f1) << "%)";
  out << "\n";
  out << "  success  " << fixed(rep.outcome.success_pct) << "%\n";
  return out.str();
}

std::string report_csv(const EvalReport& rep) {
  std::ostringstream out;
  out << "table,bucket,count,mean_f1,mean_em\n";
  out << "overall,all," << rep.records.size() << "," << fixed(rep.f1 / 100.0, 6) << "," << fixed(rep.em / 100.0, 6)
      << "\n";
  for (const auto& b : rep.by_length)
    out << "length," << b.key << "," << b.count << "," << fixed(b.mean_f1, 6) << "," << fixed(b.mean_em, 6) << "\n";
  for (const auto& b : rep.by_wh)
    out << "wh," << b.key << "," << b.count << "," << fixed(b.mean_f1, 6) << "," << fixed(b.mean_em, 6) << "\n";
  out << "outcome,failure," << rep.outcome.failure << ",0.000000,0.000000\n";
  out << "outcome,partial," << rep.outcome.partial << ","
      << (rep.outcome.partial_mean_f1 ? fixed(*rep.outcome.partial_mean_f1, 6) : std::string()) << ",0.000000\n";
  out << "outcome,success," << rep.outcome.success << ",1.000000,1.000000\n";
  return out.str();
}

}  // namespace rumi
