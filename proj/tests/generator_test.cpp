#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "awaitmc/explorer.hpp"
#include "awaitmc/generator.hpp"
#include "awaitmc/parser.hpp"
#include "awaitmc/plp.hpp"

using namespace awaitmc;

TEST_CASE("generation is deterministic per seed") {
  GeneratorOptions a, b;
  a.seed = b.seed = 7;
  CHECK(generate_program_text(a) == generate_program_text(b));
  b.seed = 8;
  CHECK(generate_program_text(a) != generate_program_text(b));
}

TEST_CASE("seed 1 golden output") {
  GeneratorOptions opts;
  CHECK(generate_program_text(opts) == R"(# seed 1
global x0 = 0;
global x1 = 0;

thread t0 {
  body:
    r0 := faa(x0, -1);
    exit;
}

thread t1 {
  body:
    x1 +:= -1;
    exit;
}

)");
}

TEST_CASE("every seed yields a valid, bounded program") {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    GeneratorOptions opts;
    opts.seed = seed;
    Program p = generate_program(opts); // parses and validates internally
    CHECK((int)p.threads.size() >= 2);
    CHECK((int)p.threads.size() <= opts.max_threads);
    CHECK((int)p.shared_vars.size() <= opts.num_vars);
    // the text round-trips through the parser
    CHECK(format_program(p) ==
          format_program(parse_program(generate_program_text(opts))));
  }
}

TEST_CASE("sorting-network layers") {
  for (int k = 1; k <= 3; ++k) {
    CAPTURE(k);
    Program p = parse_program(sortnet_text(k));
    CHECK((int)p.threads.size() == k + 1);
    CHECK((int)p.shared_vars.size() == 2 * k + 1); // pairs plus the flag

    // with assumes inserted, each comparator independently blocks or not
    ExplorerOptions opts;
    opts.unroll = 2;
    PlpOptions assume_only;
    assume_only.await_rewrite = false;
    ExplorationReport spin = explore(transform(p, assume_only).first, opts);
    CHECK(spin.total() == (1L << k));

    // rewritten to awaits, a single execution covers everything
    PlpOptions popts;
    popts.await_rewrite = true;
    Program q = transform(p, popts).first;
    ExplorationReport awaited = explore(q, opts);
    CHECK(awaited.complete_count == 1);
    CHECK(awaited.blocked_count == 0);
  }
}
