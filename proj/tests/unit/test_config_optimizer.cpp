#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "rumi/commands.hpp"
#include "rumi/config.hpp"
#include "rumi/decode.hpp"
#include "rumi/optimizer.hpp"

namespace rumi {
namespace {

std::string error_of(RunConfig& cfg, std::string_view text) {
  try {
    apply_config_text(cfg, text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ParsesKeyValueLinesWithCommentsAndBlanks) {
  RunConfig cfg;
  apply_config_text(cfg, "# run\n\n d = 40 \nlr=0.25  # faster\nvariant = 7\r\ntrain=train.json\n");
  EXPECT_EQ(cfg.d, 40u);
  EXPECT_EQ(cfg.lr, 0.25);
  EXPECT_EQ(cfg.variant, "7");
  EXPECT_EQ(cfg.train, "train.json");
  EXPECT_EQ(cfg.explicit_keys, (std::set<std::string>{"d", "lr", "variant", "train"}));
}

TEST(Config, ErrorsNameTheLine) {
  RunConfig cfg;
  EXPECT_NE(error_of(cfg, "d=4\n\nwhat=1\n").find("config line 3"), std::string::npos);
  EXPECT_NE(error_of(cfg, "d=4\nno equals sign\n").find("config line 2"), std::string::npos);
  EXPECT_NE(error_of(cfg, "lr=fast").find("config line 1"), std::string::npos);
  EXPECT_NE(error_of(cfg, "d=-3").find("config line 1"), std::string::npos);
  EXPECT_NE(error_of(cfg, "d=3.5").find("config line 1"), std::string::npos);
  EXPECT_NE(error_of(cfg, "lr=inf").find("config line 1"), std::string::npos);
  EXPECT_NE(error_of(cfg, "variant=13").find("config line 1"), std::string::npos);
  EXPECT_THROW(apply_config_file(cfg, "/nonexistent/rumi.cfg"), std::invalid_argument);
}

TEST(Config, EveryKeyRoundTripsThroughGetAndSet) {
  RunConfig a = RunConfig::profile("desk");
  a.lr = 0.123456789012345;
  a.l2 = 3e-7;
  a.seed = 18446744073709551615ull;
  a.data_dir = "/data";
  RunConfig b;
  apply_config_text(b, a.dump());
  for (const auto& key : kConfigKeys) EXPECT_EQ(a.get(key), b.get(key)) << key;
  EXPECT_EQ(b.lr, a.lr);
  EXPECT_EQ(b.explicit_keys.size(), kConfigKeys.size());
  EXPECT_THROW(a.get("nope"), std::invalid_argument);
}

TEST(Config, ProfilesAndValidation) {
  const RunConfig standard = RunConfig::profile("standard");
  EXPECT_EQ(standard.d, 100u);
  EXPECT_EQ(standard.batch_size, 30u);
  EXPECT_EQ(standard.lr, 0.5);
  EXPECT_EQ(standard.lr_decayed, 0.2);
  EXPECT_EQ(standard.window, 15u);
  EXPECT_NO_THROW(standard.validate());
  const RunConfig desk = RunConfig::profile("desk");
  EXPECT_EQ(desk.d, 20u);
  EXPECT_NO_THROW(desk.validate());
  EXPECT_THROW(RunConfig::profile("huge"), std::invalid_argument);

  RunConfig bad;
  bad.dropout = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = RunConfig{};
  bad.rho = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = RunConfig{};
  bad.d = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Config, VariantControlsLossWeightsAndWindow) {
  RunConfig cfg;
  cfg.l2 = 0.5;
  cfg.aqsl = 2.0;
  EXPECT_EQ(cfg.loss_weights().l2, 0.5);
  EXPECT_EQ(cfg.loss_weights().aqsl, 2.0);
  EXPECT_EQ(cfg.decode_window(), 15u);
  cfg.set("variant", "1");
  EXPECT_EQ(cfg.loss_weights().l2, 0.0);
  EXPECT_EQ(cfg.loss_weights().aqsl, 0.0);
  EXPECT_EQ(cfg.decode_window(), kUnboundedWindow);
  cfg.set("variant", "2");
  EXPECT_EQ(cfg.loss_weights().aqsl, 2.0);
  EXPECT_EQ(cfg.decode_window(), 15u);
}

TEST(Config, RelativePathsResolveAgainstDataDir) {
  RunConfig cfg;
  EXPECT_EQ(cfg.resolve("train.json"), "train.json");
  cfg.data_dir = "/srv/squad";
  EXPECT_EQ(cfg.resolve("train.json"), "/srv/squad/train.json");
  EXPECT_EQ(cfg.resolve("/abs/dev.json"), "/abs/dev.json");
  EXPECT_EQ(cfg.resolve(""), "");
}

TEST(Config, VariantLists) {
  EXPECT_EQ(parse_variant_list("all").size(), 13u);
  const auto some = parse_variant_list("full, 3,12");
  ASSERT_EQ(some.size(), 3u);
  EXPECT_EQ(some[0].id, 0);
  EXPECT_EQ(some[1].id, 3);
  EXPECT_EQ(some[2].id, 12);
  EXPECT_THROW(parse_variant_list(""), std::invalid_argument);
  EXPECT_THROW(parse_variant_list("0"), std::invalid_argument);
  EXPECT_THROW(parse_variant_list("3x"), std::invalid_argument);
}

TEST(LrSchedule, DecaysOnceAfterPatienceStaleEvaluations) {
  LrSchedule s(0.5, 0.2, 3, 0.1);
  EXPECT_FALSE(s.observe(50.0));
  EXPECT_FALSE(s.observe(50.2));   // improvement: new reference
  EXPECT_FALSE(s.observe(50.25));  // below min_improvement
  EXPECT_FALSE(s.observe(49.0));
  EXPECT_EQ(s.rate(), 0.5);
  EXPECT_TRUE(s.observe(50.29));
  EXPECT_EQ(s.rate(), 0.2);
  int fired = 0;
  for (int i = 0; i < 10; ++i) fired += s.observe(40.0 + (i % 2) * 30.0);
  EXPECT_EQ(fired, 0);
  EXPECT_EQ(s.rate(), 0.2);
}

TEST(LrSchedule, ImprovementResetsTheCount) {
  LrSchedule s(1.0, 0.1, 2, 0.0);
  s.observe(10);
  s.observe(9);
  s.observe(10);  // ties count as improvement with min_improvement 0
  EXPECT_EQ(s.stale(), 0u);
  EXPECT_FALSE(s.observe(9.5));
  EXPECT_TRUE(s.observe(9.5));
}

TEST(AdaDelta, MatchesClosedFormFirstTwoSteps) {
  ad::Parameter p{"x", ad::Tensor::matrix(1, 1, {1.0}), false, false};
  AdaDelta opt({&p}, 0.95, 1e-6);
  opt.step({ad::Tensor::matrix(1, 1, {2.0})}, 0.5);
  // x1 = 1 - 0.5 * sqrt(1e-6) / sqrt(0.05 * 4 + 1e-6) * 2
  EXPECT_NEAR(p.value[0], 0.9977639376126491, 1e-15);
  opt.step({ad::Tensor::matrix(1, 1, {-1.0})}, 0.5);
  EXPECT_NEAR(p.value[0], 0.999207308474392, 1e-15);
  EXPECT_EQ(opt.steps(), 2u);
}

TEST(AdaDelta, ZeroGradientLeavesParametersAndRejectsMismatch) {
  ad::Parameter p{"x", ad::Tensor::matrix(2, 1, {3.0, -4.0}), false, false};
  AdaDelta opt({&p});
  opt.step({ad::Tensor::matrix(2, 1)}, 1.0);
  EXPECT_EQ(p.value[0], 3.0);
  EXPECT_EQ(p.value[1], -4.0);
  EXPECT_THROW(opt.step({ad::Tensor::matrix(1, 2)}, 1.0), ad::ShapeError);
  EXPECT_THROW(opt.step({}, 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace rumi
