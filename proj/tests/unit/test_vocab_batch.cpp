#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "rumi/batch.hpp"
#include "rumi/squad.hpp"
#include "rumi/vocab.hpp"
#include "test_support.hpp"

namespace rumi::testing {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rumi_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(dir);
  return dir / name;
}

TEST(Vocab, CaseInsensitiveWithUnk) {
  Vocab v;
  EXPECT_EQ(v.size(), 1u);
  const auto id = v.add("Denver");
  EXPECT_EQ(v.add("DENVER"), id);
  EXPECT_EQ(v.id_of("denver"), id);
  EXPECT_EQ(v.id_of("Miller"), Vocab::kUnk);
  EXPECT_EQ(Vocab::from_tokens(v.tokens()).tokens(), v.tokens());
  EXPECT_THROW(Vocab::from_tokens({"<unk>", "a", "A"}), DataError);
}

TEST(Vocab, BuiltFromExamples) {
  auto train = load_squad(data_path("toy_squad.json"));
  Vocab v = Vocab::build(train);
  for (const auto& ex : train)
    for (const auto& t : ex.question_tokens) EXPECT_NE(v.id_of(t.text), Vocab::kUnk) << t.text;
}

TEST(Charset, EncodeTruncatesAndMarksUnknown) {
  Charset c;
  EXPECT_EQ(c.size(), 2u);
  const auto a = c.add(U'a');
  const auto e = c.add(U'é');
  EXPECT_EQ(c.encode("aéa", 16), (std::vector<std::size_t>{a, e, a}));
  EXPECT_EQ(c.encode("aéa", 2), (std::vector<std::size_t>{a, e}));
  EXPECT_EQ(c.encode("ab", 16), (std::vector<std::size_t>{a, Charset::kUnk}));
  EXPECT_EQ(Charset::from_codepoints(c.codepoints()).codepoints(), c.codepoints());
}

TEST(Glove, ThreeLineRoundTripIsBitExact) {
  Vocab v;
  for (const char* w : {"alpha", "beta", "gamma"}) v.add(w);
  EmbeddingTable t;
  ad::Rng rng(51);
  t.matrix = random_tensor(4, 5, rng, -3, 3);
  for (std::size_t k = 0; k < 5; ++k) t.matrix.at(0, k) = 0.0;
  t.matrix.at(2, 3) = 1e-300;
  t.matrix.at(3, 1) = -0.1;
  t.found = {0, 1, 1, 1};
  const auto path = temp_file("round.txt");
  save_glove(path, v, t);
  GloveStats stats;
  auto back = load_glove(path, v, 5, &stats);
  EXPECT_EQ(stats.lines, 3u);
  EXPECT_EQ(stats.loaded, 3u);
  EXPECT_TRUE(bitwise_equal(back.matrix, t.matrix));
  EXPECT_EQ(back.found, t.found);
}

TEST(Glove, SkipsMalformedAndZeroFillsMissing) {
  Vocab v;
  for (const char* w : {"alpha", "beta", "gamma", "delta"}) v.add(w);
  const auto path = temp_file("mixed.txt");
  {
    std::ofstream out(path);
    out << "Alpha 1 2 3\n"     // case-insensitive match
        << "beta 1 2\n"        // wrong dimension
        << "gamma 1 x 3\n"     // not a number
        << "\n"                // empty
        << " 1 2 3\n"          // no token
        << "outside 4 5 6\n"   // not in vocabulary
        << "alpha 9 9 9\r\n"   // duplicate: first wins
        << "delta -1.5 0 2e-3\r\n";
  }
  GloveStats stats;
  auto t = load_glove(path, v, 3, &stats);
  EXPECT_EQ(stats.lines, 8u);
  EXPECT_EQ(stats.malformed, 4u);
  EXPECT_EQ(stats.loaded, 2u);
  const auto alpha = v.id_of("alpha"), beta = v.id_of("beta"), delta = v.id_of("delta");
  EXPECT_EQ(t.matrix.at(alpha, 0), 1.0);
  EXPECT_EQ(t.matrix.at(alpha, 2), 3.0);
  EXPECT_EQ(t.matrix.at(delta, 2), 2e-3);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(t.matrix.at(beta, k), 0.0);
    EXPECT_EQ(t.matrix.at(Vocab::kUnk, k), 0.0);
  }
  EXPECT_EQ(t.found[beta], 0);
  EXPECT_EQ(t.found[alpha], 1);
  EXPECT_THROW(load_glove(temp_file("absent.txt"), v, 3), DataError);
}

TEST(Glove, ToyFileLoads) {
  auto train = load_squad(data_path("toy_squad.json"));
  Vocab v = Vocab::build(train);
  GloveStats stats;
  auto t = load_glove(data_path("toy_glove.100d.txt"), v, 100, &stats);
  EXPECT_EQ(stats.malformed, 0u);
  EXPECT_GT(stats.loaded, 50u);
  EXPECT_EQ(t.matrix.rows(), v.size());
}

struct Encoded {
  std::vector<QAExample> raw;
  Vocab vocab;
  Charset chars;
  std::vector<EncodedExample> examples;
};

Encoded encode_toy() {
  Encoded e;
  e.raw = load_squad(data_path("toy_squad.json"));
  e.vocab = Vocab::build(e.raw);
  e.chars = Charset::build(e.raw);
  for (const auto& ex : e.raw) e.examples.push_back(*encode_example(ex, e.vocab, e.chars, {}));
  return e;
}

TEST(Encode, TruncationKeepsOrDropsByGold) {
  auto e = encode_toy();
  const QAExample& ex = e.raw[0];
  const Span gold = ex.gold_spans[0];
  auto kept = encode_example(ex, e.vocab, e.chars, {16, gold.end + 1});
  ASSERT_TRUE(kept.has_value());
  EXPECT_EQ(kept->context.length(), gold.end + 1);
  if (gold.end > 0) EXPECT_FALSE(encode_example(ex, e.vocab, e.chars, {16, gold.end}).has_value());
  auto full = encode_example(ex, e.vocab, e.chars, {4, 0});
  for (const auto& word : full->context.char_ids) EXPECT_LE(word.size(), 4u);
}

TEST(Batch, SingleExampleHasNoPadding) {
  auto e = encode_toy();
  Batch b = make_batch(std::vector<EncodedExample>{e.examples[0]});
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.context[0], e.examples[0].context);
  EXPECT_EQ(b.question[0], e.examples[0].question);
}

TEST(Batch, PadsToLongestAndRoundTrips) {
  auto e = encode_toy();
  EncodedExample a = e.examples[0], c = e.examples[1];
  a.context.word_ids.resize(3);
  a.context.char_ids.resize(3);
  a.context.mask.resize(3);
  c.context.word_ids.resize(5);
  c.context.char_ids.resize(5);
  c.context.mask.resize(5);
  a.gold = c.gold = {0, 1};
  Batch b = make_batch(std::vector<EncodedExample>{a, c});
  EXPECT_EQ(b.context[0].length(), 5u);
  EXPECT_EQ(b.context[1].length(), 5u);
  EXPECT_EQ(b.context[0].valid_length(), 3u);
  EXPECT_EQ(b.context[1].valid_length(), 5u);
  EXPECT_EQ(b.context[0].word_ids[4], Vocab::kUnk);
  EXPECT_EQ(b.context[0].char_ids[4], (std::vector<std::size_t>{Charset::kPad}));

  auto back = unbatch(make_batch(e.examples));
  ASSERT_EQ(back.size(), e.examples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].context, e.examples[i].context);
    EXPECT_EQ(back[i].question, e.examples[i].question);
    EXPECT_EQ(back[i].gold, e.examples[i].gold);
    EXPECT_EQ(back[i].source, e.examples[i].source);
  }
}

TEST(Batch, BucketingIsSeededAndCoversEveryExample) {
  auto e = encode_toy();
  ad::Rng r1(61), r2(61), r3(62);
  const auto b1 = bucket_batches(e.examples, 5, r1);
  EXPECT_EQ(b1, bucket_batches(e.examples, 5, r2));
  std::multiset<std::size_t> seen;
  for (const auto& batch : b1) {
    EXPECT_LE(batch.size(), 5u);
    for (auto i : batch) seen.insert(i);
  }
  EXPECT_EQ(seen.size(), e.examples.size());
  EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), e.examples.size());
  // Different seeds eventually give a different order.
  bool differs = false;
  for (int k = 0; k < 5 && !differs; ++k) differs = bucket_batches(e.examples, 5, r3) != b1;
  EXPECT_TRUE(differs);
  EXPECT_THROW(bucket_batches(e.examples, 0, r1), DataError);
}

}  // namespace
}  // namespace rumi::testing
