#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "awaitmc/explorer.hpp"
#include "awaitmc/oracle.hpp"
#include "awaitmc/parser.hpp"
#include "test_util.hpp"

using namespace awaitmc;
using awaitmc_test::corpus;

TEST_CASE("enumeration visits every maximal interleaving") {
  Interpreter interp(corpus("fig3"));
  auto all = enumerate_maximal(interp);
  CHECK(all.size() == 10);
  // lowest-thread-first order makes the listing deterministic
  auto again = enumerate_maximal(interp);
  CHECK(all == again);
}

TEST_CASE("class partition on the corpus") {
  Interpreter f3(corpus("fig3"));
  ClassPartition p3 = partition_classes(f3, ConflictPolicy{false});
  CHECK(p3.total_executions == 10);
  CHECK(p3.classes.size() == 4);
  CHECK(p3.complete_classes() == 4);
  CHECK(p3.blocked_classes() == 0);

  // the fetch-and-add weakening merges fig5's eight classes into two
  Interpreter f5(corpus("fig5"));
  CHECK(partition_classes(f5, ConflictPolicy{false}).classes.size() == 8);
  ClassPartition weak = partition_classes(f5, ConflictPolicy{true});
  CHECK(weak.classes.size() == 2);
  CHECK(weak.total_executions == 12);
  long members = 0;
  for (const auto& c : weak.classes) members += c.members;
  CHECK(members == 12);
}

TEST_CASE("class representatives replay into their own class") {
  Interpreter interp(corpus("fig5"));
  ConflictPolicy pol{true};
  for (const ClassInfo& c : partition_classes(interp, pol).classes) {
    Execution e = interp.replay(c.representative);
    CHECK(canonical_key(e.events, (int)interp.program().threads.size(), pol) ==
          c.key);
    CHECK(interp.is_complete(e.end_state) == c.complete);
  }
}

TEST_CASE("audit verdicts") {
  Program p = corpus("fig3");
  Interpreter interp(p);
  ConflictPolicy pol;
  ExplorerOptions eopts;
  eopts.keep_traces = true;
  std::vector<std::vector<int>> good = explore(p, eopts).schedules;
  REQUIRE(good.size() == 4);

  OracleVerdict v = audit(interp, pol, good);
  CHECK(v.correct);
  CHECK(v.optimal);
  CHECK(v.mismatches.empty());

  // duplicating a schedule keeps coverage but breaks optimality
  std::vector<std::vector<int>> dup = good;
  dup.push_back(good.front());
  v = audit(interp, pol, dup);
  CHECK(v.correct);
  CHECK(!v.optimal);
  CHECK(!v.mismatches.empty());

  // dropping a schedule loses a class
  std::vector<std::vector<int>> missing(good.begin() + 1, good.end());
  v = audit(interp, pol, missing);
  CHECK(!v.correct);
  CHECK(!v.mismatches.empty());
}

TEST_CASE("enumeration bound throws") {
  Interpreter interp(corpus("fig3"));
  OracleOptions opts;
  opts.max_executions = 3;
  CHECK_THROWS_AS(enumerate_maximal(interp, opts), OracleError);
}

TEST_CASE("final local states project registers") {
  Program p = parse_program(R"(
global x = 0;
thread p { b: a := faa(x, 1); exit; }
thread q { b: b := faa(x, 1); exit; }
)");
  Interpreter interp(p);
  std::set<std::string> states =
      final_local_states(interp, {{"a"}, {"b"}});
  // each thread reads either 0 or 1 depending on the order
  CHECK(states == std::set<std::string>{"0|b|a=0,", "0|b|a=1,", "1|b|b=0,",
                                        "1|b|b=1,"});
  // projecting onto nothing collapses both orders
  std::set<std::string> none = final_local_states(interp, {{}, {}});
  CHECK(none == std::set<std::string>{"0|b|", "1|b|"});
}
