#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "awaitmc/oracle.hpp"
#include "awaitmc/parser.hpp"
#include "awaitmc/plp.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <tuple>

using namespace awaitmc;
using awaitmc_test::corpus;

namespace {

PcAtom atom(const std::string& reg, CmpOp cmp, Value v) {
  return PcAtom{reg, cmp, Operand::make_const(v)};
}

Fpc fpc_of(std::vector<PcConjunct> cs) {
  Fpc f;
  f.disjuncts = std::move(cs);
  return f;
}

} // namespace

TEST_CASE("statement purity guards") {
  Statement s;
  s.kind = Statement::Kind::Store;
  s.var = "x";
  s.expr = Expr::constant(1);
  CHECK(!statement_purity_guard(s).has_value()); // stores are never pure

  s = Statement{};
  s.kind = Statement::Kind::Load;
  s.reg = "r";
  s.var = "x";
  REQUIRE(statement_purity_guard(s).has_value());
  CHECK(statement_purity_guard(s)->atoms.empty()); // unconditionally pure

  s = Statement{};
  s.kind = Statement::Kind::Faa;
  s.var = "x";
  s.expr = Expr::constant(0);
  CHECK(statement_purity_guard(s)->atoms.empty()); // adding zero is pure
  s.expr = Expr::constant(2);
  CHECK(!statement_purity_guard(s).has_value());
  s.expr = Expr::regref("d");
  auto g = statement_purity_guard(s);
  REQUIRE(g.has_value());
  REQUIRE(g->atoms.size() == 1);
  CHECK(g->atoms[0] == atom("d", CmpOp::Eq, 0));

  s = Statement{};
  s.kind = Statement::Kind::CmpXchg;
  s.reg = "c";
  s.var = "x";
  s.expr = Expr::constant(1);
  s.expr2 = Expr::constant(2);
  g = statement_purity_guard(s);
  REQUIRE(g.has_value());
  CHECK(g->atoms[0] == atom("c", CmpOp::Eq, 1)); // pure iff the swap failed

  s = Statement{};
  s.kind = Statement::Kind::Xchg;
  s.reg = "b";
  s.var = "x";
  s.expr = Expr::constant(5);
  g = statement_purity_guard(s);
  REQUIRE(g.has_value());
  CHECK(g->atoms[0] == atom("b", CmpOp::Eq, 5)); // wrote back the old value
}

TEST_CASE("normalization applies the sanctioned simplifications") {
  // same-operand intersection: a >= 4 && a != 4  ->  a > 4
  PcConjunct c;
  c.atoms = {atom("a", CmpOp::Ge, 4), atom("a", CmpOp::Ne, 4)};
  CHECK(fpc_to_string(normalize_fpc(fpc_of({c}), 64)) == "[a > 4]");

  // contradiction drops the conjunct entirely
  c.atoms = {atom("a", CmpOp::Lt, 4), atom("a", CmpOp::Gt, 4)};
  CHECK(normalize_fpc(fpc_of({c}), 64).is_false());

  // cross-disjunct merge: [a < 4] || [a == 4]  ->  [a <= 4]
  PcConjunct l, r;
  l.atoms = {atom("a", CmpOp::Lt, 4)};
  r.atoms = {atom("a", CmpOp::Eq, 4)};
  CHECK(fpc_to_string(normalize_fpc(fpc_of({l, r}), 64)) == "[a <= 4]");

  // merging to the full truth set yields [true]
  r.atoms = {atom("a", CmpOp::Ge, 4)};
  CHECK(normalize_fpc(fpc_of({l, r}), 64).is_true());

  // the cap degrades to [false] rather than exploding
  std::vector<PcConjunct> many;
  for (int i = 0; i < 5; ++i) {
    PcConjunct ci;
    ci.atoms = {atom("a" + std::to_string(i), CmpOp::Eq, i)};
    many.push_back(ci);
  }
  CHECK(normalize_fpc(fpc_of(many), 3).is_false());
}

TEST_CASE("forward purity conditions for the branched loop") {
  Program p = corpus("fig6");
  PurityReport rep = analyze(p);
  REQUIRE(rep.threads.size() == 2);
  REQUIRE(rep.threads[0].size() == 1); // one loop in thread p
  const LoopReport& lr = rep.threads[0][0];
  const ThreadCfg& t = p.threads[0];
  int head = t.block_index("head");
  int imp = t.block_index("imp");
  int cond = t.block_index("cond");
  CHECK(lr.header == head);
  CHECK(lr.impure_backedges.empty());

  CHECK(fpc_to_string(lr.purity_condition) == "[a > 4]");
  CHECK(fpc_to_string(lr.table.at({head, 0})) == "[a > 4]");
  CHECK(fpc_to_string(lr.table.at({imp, 0})) == "[false]");
  CHECK(fpc_to_string(lr.table.at({cond, 0})) == "[a >= 4]");
}

TEST_CASE("assume insertion point for the branched loop") {
  Program p = corpus("fig6");
  PlpOptions opts;
  opts.await_rewrite = false;
  auto [q, rep] = transform(p, opts);
  const ThreadCfg& t = q.threads[0];
  int head = t.block_index("head");
  // inserted immediately after the load of x
  REQUIRE(t.blocks[head].stmts.size() == 3);
  CHECK(t.blocks[head].stmts[0].kind == Statement::Kind::Load);
  CHECK(t.blocks[head].stmts[1].kind == Statement::Kind::Assume);
  CHECK(expr_to_string(t.blocks[head].stmts[1].expr) == "a <= 4");
}

TEST_CASE("spinloop becomes an await") {
  Program p = corpus("fig2a");
  Program q = transform(p, {}).first;
  const ThreadCfg& t = q.threads[0];
  int spin = t.block_index("spin");
  REQUIRE(spin >= 0);
  REQUIRE(t.blocks[spin].stmts.size() == 1);
  const Statement& s = t.blocks[spin].stmts[0];
  CHECK(s.kind == Statement::Kind::Await);
  CHECK(s.var == "x");
  CHECK(s.cmp == CmpOp::Eq);
  CHECK(s.cmp_rhs == Operand::make_const(1));
  // the loop branch collapsed into a straight goto
  CHECK(t.blocks[spin].term.kind == Terminator::Kind::Goto);
  CHECK(t.blocks[spin].term.target == t.block_index("done"));
}

TEST_CASE("assume-only transform keeps the loop") {
  Program p = corpus("fig2a");
  PlpOptions opts;
  opts.await_rewrite = false;
  Program q = transform(p, opts).first;
  const ThreadCfg& t = q.threads[0];
  int spin = t.block_index("spin");
  REQUIRE(t.blocks[spin].stmts.size() == 2);
  CHECK(t.blocks[spin].stmts[0].kind == Statement::Kind::Load);
  CHECK(t.blocks[spin].stmts[1].kind == Statement::Kind::Assume);
  CHECK(t.blocks[spin].term.kind == Terminator::Kind::Branch);
}

TEST_CASE("straight-line programs are unchanged") {
  // fig2b is excluded: it already contains an assume, which the await
  // rewrite is supposed to pick up
  for (const char* name : {"fig2c", "fig3", "fig4", "fig5"}) {
    CAPTURE(name);
    Program p = corpus(name);
    Program q = transform(p, {}).first;
    CHECK(format_program(q) == format_program(p));
  }
}

TEST_CASE("assume-to-await rewrite patterns") {
  // load + assume with a live register becomes a load-await
  Program p = parse_program(R"(
global x = 0;
thread t {
  b:
    a := x;
    assume(a >= 2);
    x := a;
    exit;
}
)");
  rewrite_assume_to_await(p.threads[0]);
  REQUIRE(p.threads[0].blocks[0].stmts.size() == 2);
  CHECK(p.threads[0].blocks[0].stmts[0].kind == Statement::Kind::LoadAwait);
  CHECK(p.threads[0].blocks[0].stmts[0].cmp == CmpOp::Ge);

  // xchg + assume keeps the exchange value
  Program q = parse_program(R"(
global l = 0;
thread t {
  b:
    a := xchg(l, 1);
    assume(a == 0);
    l := 0;
    exit;
}
)");
  rewrite_assume_to_await(q.threads[0]);
  const Statement& s = q.threads[0].blocks[0].stmts[0];
  CHECK(s.kind == Statement::Kind::XchgAwait);
  CHECK(s.cmp == CmpOp::Eq);
  CHECK(s.cmp_rhs == Operand::make_const(0));
  CHECK(s.reg.empty()); // old value was only used by the assume

  // cmpxchg + assume(success) with a dead flag becomes an exchange-await
  Program r = parse_program(R"(
global l = 0;
thread t {
  b:
    c := cmpxchg(l, 0, 1);
    assume(c == 1);
    l := 0;
    exit;
}
)");
  rewrite_assume_to_await(r.threads[0]);
  const Statement& cs = r.threads[0].blocks[0].stmts[0];
  CHECK(cs.kind == Statement::Kind::XchgAwait);
  CHECK(cs.cmp == CmpOp::Eq);
  CHECK(cs.cmp_rhs == Operand::make_const(0));
  CHECK(cs.reg.empty());
}

TEST_CASE("every fpc register is defined in the thread") {
  for (const char* name : {"fig1", "fig2a", "fig6"}) {
    CAPTURE(name);
    Program p = corpus(name);
    PurityReport rep = analyze(p);
    for (size_t ti = 0; ti < rep.threads.size(); ++ti) {
      std::set<std::string> regs = p.threads[ti].registers();
      for (const LoopReport& lr : rep.threads[ti])
        for (const auto& [key, fpc] : lr.table)
          for (const PcConjunct& c : fpc.disjuncts)
            for (const PcAtom& a : c.atoms) {
              CHECK(regs.count(a.reg));
              if (a.rhs.is_reg) CHECK(regs.count(a.rhs.reg));
            }
    }
  }
}

TEST_CASE("no pure iteration survives the transformation") {
  for (const char* name : {"fig1", "fig2a", "fig6"}) {
    for (bool rewrite : {false, true}) {
      CAPTURE(name);
      CAPTURE(rewrite);
      Program p = corpus(name);
      PlpOptions opts;
      opts.await_rewrite = rewrite;
      Program q = transform(p, opts).first;
      InterpOptions iopts;
      iopts.unroll = 2;
      Interpreter interp(q, iopts);
      ClassPartition part = partition_classes(interp, ConflictPolicy{});
      CHECK(part.pure_iterations == 0);
    }
  }
}

TEST_CASE("local states of exited threads are preserved") {
  for (const char* name : {"fig1", "fig2a", "fig6"}) {
    for (bool rewrite : {false, true}) {
      CAPTURE(name);
      CAPTURE(rewrite);
      Program p = corpus(name);
      PlpOptions opts;
      opts.await_rewrite = rewrite;
      Program q = transform(p, opts).first;
      InterpOptions iopts;
      iopts.unroll = 2;
      Interpreter orig(p, iopts), xform(q, iopts);
      // project onto the registers both versions still define
      std::vector<std::set<std::string>> regs;
      for (size_t t = 0; t < p.threads.size(); ++t) {
        std::set<std::string> a = p.threads[t].registers();
        std::set<std::string> b = q.threads[t].registers();
        std::set<std::string> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::inserter(common, common.begin()));
        regs.push_back(common);
      }
      CHECK(final_local_states(orig, regs) == final_local_states(xform, regs));
    }
  }
}

TEST_CASE("blocking assumes always guard a would-be pure iteration") {
  // Wherever an inserted assume blocks, replaying the schedule (minus the
  // assume events) on the original program and then stepping only the blocked
  // thread completes a pure iteration.
  for (const char* name : {"fig1", "fig2a", "fig6"}) {
    CAPTURE(name);
    Program orig = corpus(name);
    PlpOptions opts;
    opts.await_rewrite = false;
    Program xf = transform(orig, opts).first;

    // positions of the inserted assumes, per thread/block
    std::set<std::tuple<int, int, int>> inserted;
    for (size_t t = 0; t < xf.threads.size(); ++t)
      for (size_t b = 0; b < xf.threads[t].blocks.size(); ++b) {
        const auto& os = orig.threads[t].blocks[b].stmts;
        const auto& xs = xf.threads[t].blocks[b].stmts;
        size_t oi = 0;
        for (size_t xi = 0; xi < xs.size(); ++xi) {
          if (oi < os.size() && xs[xi].kind == os[oi].kind) {
            oi++;
            continue;
          }
          REQUIRE(xs[xi].kind == Statement::Kind::Assume);
          inserted.insert({(int)t, (int)b, (int)xi});
        }
      }
    REQUIRE(!inserted.empty());

    InterpOptions iopts;
    iopts.unroll = 2;
    Interpreter xi(xf, iopts);
    Interpreter oi(orig); // unbounded for the ghost continuation
    int checked = 0;
    for_each_maximal(xi, [&](const Execution& e) {
      for (auto [t, reason] : xi.blocked_threads(e.end_state)) {
        if (reason != BlockReason::Assume) continue;
        const ThreadState& ts = e.end_state.threads[t];
        if (!inserted.count({t, ts.block, ts.stmt})) continue;
        // the assume reads only t's registers, so the iteration it guards is
        // the one t was in at its previous event: truncate there (dropping the
        // failed assume and anything later), then drop earlier inserted assumes
        size_t stop = e.events.size();
        while (stop > 0 && e.events[stop - 1].thread != t) stop--;
        REQUIRE(stop > 0);
        REQUIRE(e.events[stop - 1].assume_failed);
        stop--; // index of the failed assume
        while (stop > 0 && e.events[stop - 1].thread != t) stop--;
        REQUIRE(stop > 0); // now one past t's preceding event
        std::vector<int> sched;
        for (size_t i = 0; i < stop; ++i) {
          const Event& ev = e.events[i];
          if (!(ev.kind == Statement::Kind::Assume &&
                inserted.count({ev.thread, ev.block, ev.stmt})))
            sched.push_back(ev.thread);
        }
        Execution g = oi.replay(sched);
        long before = g.end_state.pure_iterations;
        int guard = 0;
        while (oi.is_enabled(g.end_state, t) &&
               g.end_state.pure_iterations == before && guard++ < 200)
          g = oi.extend(g, t);
        CHECK(g.end_state.pure_iterations == before + 1);
        checked++;
      }
    });
    CHECK(checked > 0);
  }
}
