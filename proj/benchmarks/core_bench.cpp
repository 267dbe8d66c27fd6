#include <benchmark/benchmark.h>

#include "pote/chain.hpp"
#include "pote/harness.hpp"
#include "pote/scenario.hpp"
#include "pote/validation.hpp"

namespace {

using namespace pote;

void BM_Hash(benchmark::State& state) {
  const auto alg = static_cast<HashAlgorithm>(state.range(0));
  Bytes data(4096, 0x5a);
  for (auto _ : state) benchmark::DoNotOptimize(hash(data, alg));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_Hash)->Arg(1)->Arg(2);

void BM_SignVerify(benchmark::State& state) {
  const auto kp = crypto::keygen(crypto::Seed{});
  Bytes msg(256, 1);
  for (auto _ : state) {
    auto sig = crypto::sign(kp.secret_key, msg);
    benchmark::DoNotOptimize(crypto::verify(kp.public_key, msg, sig));
  }
}
BENCHMARK(BM_SignVerify);

sim::Scenario bench_scenario(std::uint32_t accounts) {
  auto s = harness::tps_scenario(1000, 100);
  s.ledger.accounts = accounts;
  return s;
}

std::vector<chain::Transaction> transfers(std::uint32_t accounts, std::size_t n) {
  std::vector<chain::Transaction> txs;
  std::vector<std::uint64_t> nonce(accounts, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto from = static_cast<std::uint32_t>(i % accounts);
    txs.push_back({chain::AccountId::from_index(from),
                   chain::AccountId::from_index((from + 1) % accounts), 1, nonce[from]++});
  }
  return txs;
}

void BM_ApplyBatch(benchmark::State& state) {
  const auto world = sim::build_world(bench_scenario(256), 1);
  const auto txs = transfers(256, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(chain::apply_batch(world.genesis_state, txs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ApplyBatch)->Arg(100)->Arg(1000);

void BM_ValidateBlock(benchmark::State& state) {
  const auto world = sim::build_world(bench_scenario(256), 1);
  const auto parent = chain::block_hash(world.genesis);
  const auto ctx = validation::make_round_context(parent, 1, world.roster, world.registry);
  const auto& e = world.enclaves[world.node_of(ctx.expected_proposer.pk_block).value()];
  auto b = chain::build_block(world.genesis, world.genesis_state,
                              transfers(256, static_cast<std::size_t>(state.range(0))), 1, e,
                              world.registry);
  const auto block = chain::seal_block(std::move(b), e, world.authority(e.vendor_id), ctx.expected_nonce);
  const auto bytes = codec::encode(block);
  for (auto _ : state) {
    auto v = validation::validate_block(bytes, world.registry, ctx);
    if (!v.accepted) state.SkipWithError("block rejected");
  }
}
BENCHMARK(BM_ValidateBlock)->Arg(0)->Arg(1000);

void BM_SimulateBaseline(benchmark::State& state) {
  auto s = sim::calibrated_latency_scenario(static_cast<std::uint32_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_scenario(s, 1));
}
BENCHMARK(BM_SimulateBaseline)->Arg(6)->Arg(75)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
