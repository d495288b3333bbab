#include <benchmark/benchmark.h>

#include "rumi/ad/params.hpp"
#include "rumi/ad/tape.hpp"
#include "rumi/decode.hpp"
#include "rumi/model.hpp"

namespace {

std::vector<double> random_distribution(std::size_t n, rumi::ad::Rng& rng) {
  std::vector<double> p(n);
  double total = 0;
  for (double& v : p) total += v = rng.uniform(0.0, 1.0);
  for (double& v : p) v /= total;
  return p;
}

void BM_DecodeSpan(benchmark::State& state) {
  rumi::ad::Rng rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ps = random_distribution(n, rng);
  const auto pe = random_distribution(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(rumi::decode_span(ps, pe, 15));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DecodeSpan)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

void BM_MatMul(benchmark::State& state) {
  rumi::ad::Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  rumi::ad::Tensor a = rumi::ad::xavier_uniform(n, n, rng);
  rumi::ad::Tensor b = rumi::ad::xavier_uniform(n, n, rng);
  for (auto _ : state) {
    rumi::ad::Tape tape;
    benchmark::DoNotOptimize(rumi::ad::matmul(tape.constant(a), tape.constant(b)).value().data().data());
  }
}
BENCHMARK(BM_MatMul)->Arg(32)->Arg(100)->Arg(200);

rumi::SequenceInput random_sequence(std::size_t len, std::size_t vocab, std::size_t chars, rumi::ad::Rng& rng) {
  rumi::SequenceInput s;
  for (std::size_t i = 0; i < len; ++i) {
    s.word_ids.push_back(rng.index(vocab));
    std::vector<std::size_t> word;
    for (std::size_t k = 0; k < 5; ++k) word.push_back(2 + rng.index(chars - 2));
    s.char_ids.push_back(word);
    s.mask.push_back(1);
  }
  return s;
}

void BM_ForwardBackward(benchmark::State& state) {
  rumi::ad::Rng rng(11);
  const rumi::ModelDims dims{20, 50, 8, 20, 5};
  rumi::ad::Tensor table = rumi::ad::xavier_uniform(200, dims.word_dim, rng);
  rumi::ReaderModel model(dims, rumi::VariantConfig::from_id(state.range(0)), table, 40, 1);
  const auto context = random_sequence(60, 200, 40, rng);
  const auto question = random_sequence(10, 200, 40, rng);
  for (auto _ : state) {
    rumi::ad::Tape tape;
    auto fwd = model.forward(tape, context, question);
    auto loss = rumi::nll_loss(fwd.start, fwd.end, {3, 5});
    benchmark::DoNotOptimize(tape.backward(loss));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
