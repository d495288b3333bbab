#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "rumi/squad.hpp"
#include "rumi/text.hpp"
#include "test_support.hpp"

namespace rumi::testing {
namespace {

std::vector<std::string> texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

std::string without_spaces(std::string_view s) {
  std::string out;
  for (const auto& cp : decode_utf8(s))
    if (!is_space(cp.value)) out += encode_utf8(cp.value);
  return out;
}

const char* kFumbleContext =
    "The Broncos took an early lead in Super Bowl 50 and never trailed. Newton was limited by Denver's defense, "
    "which sacked him seven times and forced him into three turnovers, including a fumble which they recovered for "
    "a touchdown. Denver linebacker Von Miller was named Super Bowl MVP, recording five solo tackles, 2½ sacks, and "
    "two forced fumbles.";

TEST(Tokenize, RuleCases) {
  EXPECT_EQ(texts(tokenize("Super Bowl 50.")), (std::vector<std::string>{"Super", "Bowl", "50", "."}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n").empty());
  EXPECT_EQ(texts(tokenize("2½ sacks,")), (std::vector<std::string>{"2½", "sacks", ","}));
  EXPECT_EQ(texts(tokenize("(Denver's) \"MVP\"!")),
            (std::vector<std::string>{"(", "Denver's", ")", "\"", "MVP", "\"", "!"}));
  EXPECT_EQ(texts(tokenize("U.S. e.g.")), (std::vector<std::string>{"U.S", ".", "e.g", "."}));
}

TEST(Tokenize, OffsetsReproduceTextAndIncrease) {
  for (const char* text : {kFumbleContext, "  “Quoted” \u2014 dash…  ", "a b  c", "¿Qué? ¡Sí!"}) {
    const auto tokens = tokenize(text);
    const std::string_view s(text);
    std::string joined;
    std::size_t prev_end = 0;
    for (const auto& t : tokens) {
      EXPECT_LT(t.begin, t.end);
      EXPECT_GE(t.begin, prev_end);
      EXPECT_EQ(s.substr(t.begin, t.end - t.begin), t.text);
      prev_end = t.end;
      joined += t.text;
    }
    EXPECT_EQ(joined, without_spaces(text)) << text;
  }
}

TEST(Align, CoveringTokens) {
  const auto tokens = tokenize("Denver linebacker Von Miller was named MVP.");
  // Exactly one token.
  EXPECT_EQ(align_answer(7, 10, tokens), (Span{1, 1}));
  // Starts mid-token and ends mid-token.
  EXPECT_EQ(align_answer(9, 14, tokens), (Span{1, 3}));
  EXPECT_EQ(align_answer(9, 12, tokens), (Span{1, 2}));
  // Ends inside "Miller".
  EXPECT_EQ(align_answer(18, 7, tokens), (Span{2, 3}));
  // Only whitespace covered.
  EXPECT_EQ(align_answer(6, 1, tokens), std::nullopt);
}

TEST(Align, FumbleAnswerIndependentCount) {
  const auto tokens = tokenize(kFumbleContext);
  const std::size_t start = std::string_view(kFumbleContext).find("a fumble");
  const auto span = align_answer(start, 8, tokens);
  ASSERT_TRUE(span.has_value());
  // Counted by hand-rolling the same split/peel rule over the context.
  EXPECT_EQ(*span, (Span{34, 35}));
  EXPECT_EQ(tokens[34].text, "a");
  EXPECT_EQ(tokens[35].text, "fumble");
}

std::string squad_doc(const std::string& context, const std::string& qas) {
  return R"({"version":"1.1","data":[{"title":"t","paragraphs":[{"context":)" + context + R"(,"qas":[)" + qas +
         "]}]}]}";
}

TEST(ParseSquad, MinimalFile) {
  LoadStats stats;
  auto ex = parse_squad(squad_doc(R"("Super Bowl 50 was played.")",
                                  R"({"id":"q1","question":"Which game?","answers":[{"text":"Super Bowl 50","answer_start":0}]})"),
                        &stats);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].id, "q1");
  EXPECT_EQ(ex[0].gold_spans, (std::vector<Span>{{0, 2}}));
  EXPECT_EQ(ex[0].span_text(ex[0].gold_spans[0]), "Super Bowl 50");
  EXPECT_EQ(stats.loaded, 1u);
  EXPECT_EQ(stats.dropped, 0u);
}

TEST(ParseSquad, ThreeAnswersRetained) {
  auto ex = parse_squad(squad_doc(R"("It was a fumble, Fumble indeed.")",
                                  R"({"id":"q","question":"What?","answers":[)"
                                  R"({"text":"a fumble","answer_start":7},{"text":"a fumble","answer_start":7},)"
                                  R"({"text":"Fumble","answer_start":17}]})"));
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].gold_texts, (std::vector<std::string>{"a fumble", "a fumble", "Fumble"}));
  EXPECT_EQ(ex[0].gold_spans, (std::vector<Span>{{2, 3}, {5, 5}}));  // duplicates collapse
}

TEST(ParseSquad, AnswerStartCountsCodePoints) {
  auto ex = parse_squad(squad_doc(R"("Café Zürich won 2½ sacks.")",
                                  R"({"id":"q","question":"How many?","answers":[{"text":"2½ sacks","answer_start":16}]})"));
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].span_text(ex[0].gold_spans[0]), "2½ sacks");
}

TEST(ParseSquad, MidTokenStartExpands) {
  auto ex = parse_squad(squad_doc(R"("The linebacker Von Miller.")",
                                  R"({"id":"q","question":"Who?","answers":[{"text":"backer Von","answer_start":8}]})"));
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].gold_spans[0], (Span{1, 2}));
  EXPECT_NE(ex[0].span_text(ex[0].gold_spans[0]).find("backer Von"), std::string::npos);
}

TEST(ParseSquad, UnalignedDroppedAndCounted) {
  LoadStats stats;
  auto ex = parse_squad(squad_doc(R"("Short context.")",
                                  R"({"id":"a","question":"Q?","answers":[{"text":"missing","answer_start":0}]},)"
                                  R"({"id":"b","question":"Q?","answers":[{"text":"context","answer_start":6}]},)"
                                  R"({"id":"c","question":"  ","answers":[{"text":"Short","answer_start":0}]})"),
                        &stats);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].id, "b");
  EXPECT_EQ(stats.questions, 3u);
  EXPECT_EQ(stats.dropped, 2u);
  EXPECT_EQ(stats.unaligned_answers, 1u);
}

TEST(ParseSquad, PredictionInputWithoutAnswers) {
  auto ex = parse_squad(squad_doc(R"("Short context.")", R"({"id":"a","question":"Q?"})"), nullptr, false);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_TRUE(ex[0].gold_spans.empty());
  EXPECT_THROW(parse_squad(squad_doc(R"("Short context.")", R"({"id":"a","question":"Q?"})")), DataError);
}

TEST(ParseSquad, MalformedJsonNamesLine) {
  try {
    parse_squad("{\n  \"data\": [\n    {,\n  ]\n}");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_squad(R"({"version":"1.1"})"), DataError);
  EXPECT_THROW(load_squad("/nonexistent/squad.json"), DataError);
}

TEST(LoadSquad, ToyCorpusInvariants) {
  LoadStats stats;
  auto examples = load_squad(data_path("toy_squad.json"), &stats);
  EXPECT_EQ(examples.size(), 16u);
  EXPECT_EQ(stats.dropped, 0u);
  for (const auto& ex : examples) {
    std::size_t prev = 0;
    for (const auto& t : ex.context_tokens) {
      EXPECT_GE(t.begin, prev);
      prev = t.end;
    }
    ASSERT_FALSE(ex.gold_spans.empty());
    for (const auto& span : ex.gold_spans) {
      EXPECT_LE(span.begin, span.end);
      EXPECT_LT(span.end, ex.context_tokens.size());
    }
    // The first gold span covers the first annotated answer.
    EXPECT_NE(without_spaces(ex.span_text(ex.gold_spans[0])).find(without_spaces(ex.gold_texts[0])), std::string::npos)
        << ex.id;
  }
}

}  // namespace
}  // namespace rumi::testing
