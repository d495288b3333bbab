#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "reference.hpp"
#include "rumi/attention.hpp"
#include "rumi/model.hpp"
#include "test_support.hpp"

namespace rumi::testing {
namespace {

using ad::Mask;
using ad::Tape;
using ad::Tensor;
using ad::Var;

struct Hop {
  ad::ParamStore store;
  AttentionParams params;
};

std::unique_ptr<Hop> make_hop(std::size_t d, std::uint64_t seed) {
  auto h = std::make_unique<Hop>();
  ad::Rng rng(seed);
  h->params = make_attention(h->store, "att", d, rng);
  return h;
}

void set_w(Hop& h, std::initializer_list<double> values) {
  std::copy(values.begin(), values.end(), h.store.at("att.w").value.data().begin());
}

// Plain-loop attention flow on columns; masks as in the layer.
struct HandFlow {
  ref::Mat interaction;  // rows = context positions
  ref::Mat a;
  ref::Vec b;
  ref::Mat g;  // columns
};

HandFlow hand_flow(const ref::Mat& C, const ref::Mat& Q, const Mask& cm, const Mask& qm, const Tensor& w) {
  const std::size_t D = C[0].size();
  HandFlow out;
  for (std::size_t c = 0; c < C.size(); ++c) {
    ref::Vec row;
    for (std::size_t q = 0; q < Q.size(); ++q) {
      double s = 0;
      for (std::size_t k = 0; k < D; ++k)
        s += w[k] * C[c][k] + w[D + k] * Q[q][k] + w[2 * D + k] * C[c][k] * Q[q][k];
      row.push_back(s);
    }
    out.interaction.push_back(row);
    out.a.push_back(ref::softmax(row, qm));
  }
  ref::Vec maxes;
  for (const auto& row : out.interaction) {
    double m = -1e300;
    for (std::size_t q = 0; q < Q.size(); ++q)
      if (qm[q]) m = std::max(m, row[q]);
    maxes.push_back(m);
  }
  out.b = ref::softmax(maxes, cm);
  ref::Vec ctilde(D, 0.0);
  for (std::size_t c = 0; c < C.size(); ++c)
    for (std::size_t k = 0; k < D; ++k) ctilde[k] += out.b[c] * C[c][k];
  for (std::size_t c = 0; c < C.size(); ++c) {
    ref::Vec qt(D, 0.0);
    for (std::size_t q = 0; q < Q.size(); ++q)
      for (std::size_t k = 0; k < D; ++k) qt[k] += out.a[c][q] * Q[q][k];
    ref::Vec col;
    for (std::size_t k = 0; k < D; ++k) col.push_back(C[c][k]);
    for (std::size_t k = 0; k < D; ++k) col.push_back(qt[k]);
    for (std::size_t k = 0; k < D; ++k) col.push_back(C[c][k] * qt[k]);
    for (std::size_t k = 0; k < D; ++k) col.push_back(C[c][k] * ctilde[k]);
    out.g.push_back(col);
  }
  return out;
}

TEST(Encode, LengthOneAndZeroParams) {
  ad::ParamStore store;
  ad::Rng rng(1);
  auto enc = ad::make_bilstm(store, "enc", 2, 2, rng);
  Tape t;
  Var one = encode(t.constant(random_tensor(2, 1, rng)), {1}, enc);
  EXPECT_EQ(one.rows(), 4u);
  EXPECT_EQ(one.cols(), 1u);
  for (auto* p : store.all()) std::fill(p->value.data().begin(), p->value.data().end(), 0.0);
  Tape fresh;  // a tape caches parameter values
  Var zero = encode(fresh.constant(random_tensor(2, 4, rng)), {1, 1, 1, 1}, enc);
  for (double v : zero.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(Encode, LengthOneRunsSameInputBothWays) {
  ad::ParamStore store;
  ad::Rng rng(2);
  auto enc = ad::make_bilstm(store, "enc", 2, 2, rng);
  // Copy forward weights into the backward direction: one step sees one input.
  for (const char* part : {".wx", ".wh", ".b"})
    store.at(std::string("enc.bw") + part).value = store.at(std::string("enc.fw") + part).value;
  Tape t;
  Var out = encode(t.constant(random_tensor(2, 1, rng)), {1}, enc);
  EXPECT_EQ(out.value()[0], out.value()[2]);
  EXPECT_EQ(out.value()[1], out.value()[3]);
}

TEST(Encode, LengthThreeMatchesReference) {
  ad::ParamStore store;
  ad::Rng rng(3);
  auto enc = ad::make_bilstm(store, "enc", 3, 2, rng);
  randomize(store, rng, 0.9);
  const Tensor x = random_tensor(3, 3, rng);
  Tape t;
  Var out = encode(t.constant(x), {1, 1, 1}, enc);
  auto expect = ref::bilstm(ref::columns(x), {1, 1, 1}, enc);
  EXPECT_LE(ref::max_abs_diff(out.value(), ref::to_tensor(expect.outputs)), 1e-12);
}

TEST(Interaction, HandCases) {
  auto h = make_hop(1, 4);
  Tape t;
  set_w(*h, {0, 0, 0, 0, 0, 0});
  Var zero = interaction(t.constant(Tensor::matrix(2, 3, 0.7)), t.constant(Tensor::matrix(2, 2, -0.3)), h->params);
  EXPECT_EQ(zero.rows(), 3u);
  EXPECT_EQ(zero.cols(), 2u);
  for (double v : zero.value().data()) EXPECT_EQ(v, 0.0);

  set_w(*h, {0, 0, 0, 0, 1, 1});
  Tape t2;
  Var I = interaction(t2.constant(Tensor::column({1, 1})), t2.constant(Tensor::column({2, 2})), h->params);
  EXPECT_DOUBLE_EQ(I.value().item(), 4.0);
}

TEST(ContextToQuery, SingleQueryAndUniformRow) {
  ad::Rng rng(5);
  Tape t;
  const Tensor q1 = random_tensor(2, 1, rng);
  Var out = context_to_query(t.constant(random_tensor(3, 1, rng)), t.constant(q1), {1});
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_DOUBLE_EQ(out.value().at(0, c), q1[0]);
    EXPECT_DOUBLE_EQ(out.value().at(1, c), q1[1]);
  }
  const Tensor q2 = random_tensor(2, 2, rng);
  Var mean = context_to_query(t.constant(Tensor::matrix(1, 2, 0.4)), t.constant(q2), {1, 1});
  EXPECT_NEAR(mean.value()[0], 0.5 * (q2.at(0, 0) + q2.at(0, 1)), 1e-15);
  EXPECT_NEAR(mean.value()[1], 0.5 * (q2.at(1, 0) + q2.at(1, 1)), 1e-15);
}

TEST(ContextToQuery, TwoByThreeMatchesHandSoftmax) {
  ad::Rng rng(6);
  const Tensor I = random_tensor(2, 3, rng, -2, 2);
  const Tensor Q = random_tensor(2, 3, rng);
  Tape t;
  Var out = context_to_query(t.constant(I), t.constant(Q), {1, 1, 1});
  for (std::size_t c = 0; c < 2; ++c) {
    ref::Vec row{I.at(c, 0), I.at(c, 1), I.at(c, 2)};
    double z = 0;
    for (double v : row) z += std::exp(v);
    for (std::size_t k = 0; k < 2; ++k) {
      double expect = 0;
      for (std::size_t q = 0; q < 3; ++q) expect += std::exp(row[q]) / z * Q.at(k, q);
      EXPECT_NEAR(out.value().at(k, c), expect, 1e-12);
    }
  }
}

TEST(QueryToContext, SingleContextAndDominantRow) {
  ad::Rng rng(7);
  Tape t;
  const Tensor c1 = random_tensor(2, 1, rng);
  Var lone = query_to_context(t.constant(random_tensor(1, 3, rng)), t.constant(c1), {1}, {1, 1, 1});
  EXPECT_DOUBLE_EQ(lone.value()[0], c1[0]);
  EXPECT_DOUBLE_EQ(lone.value()[1], c1[1]);

  Tensor I = random_tensor(3, 2, rng);
  I.at(1, 0) += 1e3;
  const Tensor C = random_tensor(2, 3, rng);
  Var out = query_to_context(t.constant(I), t.constant(C), {1, 1, 1}, {1, 1});
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(out.value().at(0, c), C.at(0, 1), 1e-12);
    EXPECT_NEAR(out.value().at(1, c), C.at(1, 1), 1e-12);
  }
}

TEST(QueryToContext, ThreeContextsMatchHandComputation) {
  ad::Rng rng(8);
  const Tensor I = random_tensor(3, 2, rng, -2, 2);
  const Tensor C = random_tensor(2, 3, rng);
  Tape t;
  Var b;
  Var out = query_to_context(t.constant(I), t.constant(C), {1, 1, 1}, {1, 1}, &b);
  double m[3], z = 0;
  for (std::size_t c = 0; c < 3; ++c) z += std::exp(m[c] = std::max(I.at(c, 0), I.at(c, 1)));
  for (std::size_t k = 0; k < 2; ++k) {
    double expect = 0;
    for (std::size_t c = 0; c < 3; ++c) expect += std::exp(m[c]) / z * C.at(k, c);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(out.value().at(k, c), expect, 1e-12);
  }
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(b.value()[c], std::exp(m[c]) / z, 1e-12);
}

TEST(FuseG, HandCases) {
  Tape t;
  Var g = fuse_g(t.constant(Tensor::column({1, 2})), t.constant(Tensor::column({3, 4})),
                 t.constant(Tensor::column({5, 6})));
  const std::vector<double> expect{1, 2, 3, 4, 3, 8, 5, 12};
  ASSERT_EQ(g.rows(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(g.value()[i], expect[i]);

  Var zc = fuse_g(t.constant(Tensor::column({0, 0})), t.constant(Tensor::column({3, 4})),
                  t.constant(Tensor::column({5, 6})));
  const std::vector<double> zexpect{0, 0, 3, 4, 0, 0, 0, 0};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(zc.value()[i], zexpect[i]);
}

TEST(FuseG, ShapeAndFirstBlockIsContext) {
  for (int trial = 0; trial < 10; ++trial) {
    ad::Rng rng = ad::Rng::derive(9, trial);
    const std::size_t d = 1 + rng.index(3), C = 1 + rng.index(6);
    const Tensor ctx = random_tensor(2 * d, C, rng);
    Tape t;
    Var g = fuse_g(t.constant(ctx), t.constant(random_tensor(2 * d, C, rng)), t.constant(random_tensor(2 * d, C, rng)));
    ASSERT_EQ(g.rows(), 8 * d);
    ASSERT_EQ(g.cols(), C);
    Tensor top = Tensor::matrix(2 * d, C);
    for (std::size_t r = 0; r < 2 * d; ++r)
      for (std::size_t c = 0; c < C; ++c) top.at(r, c) = g.value().at(r, c);
    EXPECT_TRUE(bitwise_equal(top, ctx));
  }
}

TEST(AttentionFlow, MatchesComposedHandOracle) {
  for (int trial = 0; trial < 10; ++trial) {
    ad::Rng rng = ad::Rng::derive(10, trial);
    auto h = make_hop(2, 100 + trial);
    const std::size_t C = 2 + rng.index(4), Q = 1 + rng.index(3);
    const Tensor ctx = random_tensor(4, C, rng), qry = random_tensor(4, Q, rng);
    Mask cm = random_mask(C, rng), qm = random_mask(Q, rng);
    Tape t;
    auto flow = attention_flow(t.constant(ctx), t.constant(qry), cm, qm, h->params, 1);
    auto hand = hand_flow(ref::columns(ctx), ref::columns(qry), cm, qm, h->params.w->value);
    EXPECT_LE(ref::max_abs_diff(flow.g.value(), ref::to_tensor(hand.g)), 1e-10);
    auto trace = flow.trace();
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t q = 0; q < Q; ++q) {
        EXPECT_NEAR(trace.interaction.at(c, q), hand.interaction[c][q], 1e-12);
        EXPECT_NEAR(trace.c2q.at(c, q), hand.a[c][q], 1e-12);
      }
      EXPECT_NEAR(trace.q2c[c], hand.b[c], 1e-12);
    }
  }
}

TEST(AttentionFlow, TwoTokenToy) {
  auto h = make_hop(1, 11);
  set_w(*h, {0.5, -0.25, 1.0, 0.0, 2.0, -1.0});
  const Tensor ctx = Tensor::matrix(2, 2, {0.1, -0.4, 0.3, 0.2});
  const Tensor qry = Tensor::matrix(2, 1, {0.6, -0.5});
  Tape t;
  auto flow = attention_flow(t.constant(ctx), t.constant(qry), {1, 1}, {1}, h->params, 1);
  auto hand = hand_flow(ref::columns(ctx), ref::columns(qry), {1, 1}, {1}, h->params.w->value);
  EXPECT_LE(ref::max_abs_diff(flow.g.value(), ref::to_tensor(hand.g)), 1e-10);
}

TEST(AttentionFlow, HopsWithIdenticalParamsAgree) {
  auto h = make_hop(2, 12);
  ad::Rng rng(13);
  const Tensor ctx = random_tensor(4, 5, rng), qry = random_tensor(4, 3, rng);
  Tape t;
  auto one = attention_flow(t.constant(ctx), t.constant(qry), {1, 1, 1, 1, 0}, {1, 1, 1}, h->params, 1);
  auto two = attention_flow(t.constant(ctx), t.constant(qry), {1, 1, 1, 1, 0}, {1, 1, 1}, h->params, 2);
  EXPECT_TRUE(bitwise_equal(one.g.value(), two.g.value()));
  EXPECT_EQ(one.trace().hop, 1);
  EXPECT_EQ(two.trace().hop, 2);
}

TEST(AttentionFlow, WeightsAreDistributionsOverUnmaskedPositions) {
  for (int trial = 0; trial < 100; ++trial) {
    ad::Rng rng = ad::Rng::derive(14, trial);
    auto h = make_hop(2, 1000 + trial);
    const std::size_t C = 1 + rng.index(7), Q = 1 + rng.index(5);
    Mask cm = random_mask(C, rng), qm = random_mask(Q, rng);
    Tape t;
    auto tr = attention_flow(t.constant(random_tensor(4, C, rng, -3, 3)), t.constant(random_tensor(4, Q, rng, -3, 3)),
                             cm, qm, h->params, 1)
                  .trace();
    double bsum = 0;
    for (std::size_t c = 0; c < C; ++c) {
      double asum = 0;
      for (std::size_t q = 0; q < Q; ++q) {
        EXPECT_GE(tr.c2q.at(c, q), 0.0);
        if (!qm[q]) {
          EXPECT_EQ(tr.c2q.at(c, q), 0.0);
        }
        asum += tr.c2q.at(c, q);
      }
      EXPECT_NEAR(asum, 1.0, 1e-12);
      if (!cm[c]) {
        EXPECT_EQ(tr.q2c[c], 0.0);
      }
      bsum += tr.q2c[c];
    }
    EXPECT_NEAR(bsum, 1.0, 1e-12);
  }
}

TEST(AttentionFlow, HopParametersAreDisjoint) {
  ad::Rng rng(15);
  for (int id : {0, 1, 3, 5}) {
    auto variant = VariantConfig::from_id(id);
    ReaderModel model(toy_dims(), variant, random_tensor(5, 3, rng), 6, 16);
    const auto& layout = model.layout();
    if (!layout.hop2) continue;
    EXPECT_NE(layout.hop1.w, layout.hop2->w);
    EXPECT_NE(layout.hop1.w->name, layout.hop2->w->name);
    EXPECT_NE(layout.hop1.w->value.data().data(), layout.hop2->w->value.data().data());
  }
}

}  // namespace
}  // namespace rumi::testing
