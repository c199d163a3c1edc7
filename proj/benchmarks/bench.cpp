#include <benchmark/benchmark.h>

#include "bdsc/fixed_rate.hpp"
#include "bdsc/scenario.hpp"
#include "bdsc/variable_rate.hpp"

namespace {

using namespace bdsc;

void BM_MaxEntropyIrreducible(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> mass(64);
  for (auto& v : mass) v = 0.1 + rng.uniform01();
  const auto p = JointPMF::normalized(std::vector<int>(6, 2), mass);
  const std::vector<SubsetView> fam = {SubsetView::from_indices({0, 1, 2}), SubsetView::from_indices({2, 3, 4}),
                                       SubsetView::from_indices({0, 4, 5})};
  for (auto _ : state) benchmark::DoNotOptimize(max_entropy_with_marginals(p, fam).value);
}
BENCHMARK(BM_MaxEntropyIrreducible);

void BM_EncodeBlock(benchmark::State& state) {
  const auto cb = BinningCodebook::make(0, 2, 12, 0.35, 1.925, 16, 7);
  Sequence x(12);
  Rng rng(2);
  for (auto _ : state) {
    for (auto& s : x) s = static_cast<Symbol>(rng.below(2));
    benchmark::DoNotOptimize(encode_block(cb, x, 3, 1));
  }
}
BENCHMARK(BM_EncodeBlock);

void BM_SearchBin(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto cb = BinningCodebook::make(0, 2, n, 0.35, 0.3, 1, 3);
  const SequenceSpace space(2, n);
  std::vector<Sequence> all;
  for (std::uint64_t r = 0; r < space.size(); ++r) all.push_back(space.at(r));
  const auto chain = composite_encode(cb, all[all.size() / 3], 0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(search_bin(cb, chain, all).size());
}
BENCHMARK(BM_SearchBin)->Arg(8)->Arg(12);

void BM_RunRound(benchmark::State& state) {
  const auto s = preset("three-sensor");
  SessionSetup setup;
  setup.p = s.law();
  setup.h = s.collection();
  setup.info = s.info_model();
  setup.h_true = s.h_true();
  setup.r = s.true_channel_pmf();
  setup.strategy = resolve_strategy(s, "fake_distribution");
  setup.rate_bound = 0.0;
  const auto params = protocol_params(s, 4).resolved(setup.p, setup.h);
  const auto codebooks = make_codebooks(setup.p.alphabet_sizes(), params);
  VariableRateTraitor traitor(setup.strategy, codebooks);
  std::uint64_t k = 0;
  for (auto _ : state) {
    auto st = DecoderState::initial(setup.h);
    const auto block = sample_block(setup.p, params.n, ++k);
    const auto w = sample_side_info(setup.r, block, k);
    benchmark::DoNotOptimize(run_round(st, setup, params, codebooks, traitor, block, w).bits);
  }
}
BENCHMARK(BM_RunRound);

void BM_FixedRateDecode(benchmark::State& state) {
  const auto s = preset("three-sensor");
  const auto code = fixed_rate_code(s, 5);
  const FixedRateDecoder decoder(code, s.law(), s.collection());
  std::uint64_t k = 0;
  for (auto _ : state) {
    const auto block = sample_block(s.law(), code.n, ++k);
    const auto msgs = encode_all(code, block, SubsetView::full(3), k, 0);
    benchmark::DoNotOptimize(decoder.decode(msgs).disagreements);
  }
}
BENCHMARK(BM_FixedRateDecode);

}  // namespace

BENCHMARK_MAIN();
