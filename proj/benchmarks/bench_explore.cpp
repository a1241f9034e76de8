#include "awaitmc/explorer.hpp"
#include "awaitmc/generator.hpp"
#include "awaitmc/parser.hpp"
#include "awaitmc/plp.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace awaitmc;

Program corpus(const std::string& name) {
  return parse_program_file(std::string(AWAITMC_CORPUS_DIR) + "/" + name);
}

void BM_explore_fig3(benchmark::State& state) {
  Program p = corpus("fig3.smc");
  for (auto _ : state) {
    ExplorationReport rep = explore(p, {});
    benchmark::DoNotOptimize(rep.complete_count);
  }
}
BENCHMARK(BM_explore_fig3);

void BM_explore_fig5_ifaa(benchmark::State& state) {
  Program p = corpus("fig5.smc");
  ExplorerOptions opts;
  opts.pol.ifaa = true;
  for (auto _ : state) {
    ExplorationReport rep = explore(p, opts);
    benchmark::DoNotOptimize(rep.total());
  }
}
BENCHMARK(BM_explore_fig5_ifaa);

void BM_explore_sortnet2_await(benchmark::State& state) {
  Program p = parse_program(sortnet_text(2), "<sortnet>");
  PlpOptions popts; // assume insertion + await rewrite
  Program q = transform(p, popts).first;
  ExplorerOptions opts;
  opts.pol.ifaa = true;
  for (auto _ : state) {
    ExplorationReport rep = explore(q, opts);
    benchmark::DoNotOptimize(rep.total());
  }
}
BENCHMARK(BM_explore_sortnet2_await);

} // namespace

BENCHMARK_MAIN();
