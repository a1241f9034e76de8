#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "awaitmc/ir.hpp"
#include "test_util.hpp"

using namespace awaitmc;

TEST_CASE("expression evaluation") {
  std::map<std::string, Value> regs{{"a", 6}, {"b", -2}};
  auto a = Expr::regref("a");
  auto b = Expr::regref("b");
  CHECK(eval_expr(Expr::binary(BinOp::Add, a, b), regs) == 4);
  CHECK(eval_expr(Expr::binary(BinOp::Mul, a, b), regs) == -12);
  CHECK(eval_expr(Expr::binary(BinOp::Div, a, Expr::constant(0)), regs) == 0);
  CHECK(eval_expr(Expr::binary(BinOp::Mod, a, Expr::constant(0)), regs) == 0);
  CHECK(eval_expr(Expr::unary(UnOp::Neg, a), regs) == -6);
  CHECK(eval_expr(Expr::unary(UnOp::Not, Expr::constant(0)), regs) == 1);
  CHECK(eval_expr(Expr::binary(BinOp::And, a, Expr::constant(0)), regs) == 0);
  CHECK(eval_expr(Expr::binary(BinOp::Or, Expr::constant(0), b), regs) == 1);
  // registers default to zero
  CHECK(eval_expr(Expr::regref("missing"), regs) == 0);
}

TEST_CASE("comparison helper identities") {
  const CmpOp ops[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt,
                       CmpOp::Le, CmpOp::Gt, CmpOp::Ge};
  for (CmpOp op : ops)
    for (Value l = -2; l <= 2; ++l)
      for (Value r = -2; r <= 2; ++r) {
        CHECK(apply_cmp(negate_cmp(op), l, r) == !apply_cmp(op, l, r));
        CHECK(apply_cmp(swap_cmp(op), r, l) == apply_cmp(op, l, r));
      }
  CHECK(cmp_to_string(CmpOp::Le) == "<=");
  CHECK(cmp_to_string(CmpOp::Ne) == "!=");
}

TEST_CASE("expr equality and printing") {
  auto e1 = Expr::binary(BinOp::Add, Expr::regref("a"), Expr::constant(1));
  auto e2 = Expr::binary(BinOp::Add, Expr::regref("a"), Expr::constant(1));
  auto e3 = Expr::binary(BinOp::Add, Expr::regref("a"), Expr::constant(2));
  CHECK(expr_equal(e1, e2));
  CHECK(!expr_equal(e1, e3));
  std::set<std::string> regs;
  expr_registers(e1, regs);
  CHECK(regs == std::set<std::string>{"a"});
}

TEST_CASE("statement def/uses/accessed_var") {
  Statement load;
  load.kind = Statement::Kind::Load;
  load.reg = "r";
  load.var = "x";
  CHECK(load.def() == "r");
  CHECK(load.uses().empty());
  CHECK(load.accessed_var() == "x");
  CHECK(!load.may_write_var());

  Statement faa;
  faa.kind = Statement::Kind::Faa;
  faa.var = "x";
  faa.expr = Expr::regref("d");
  CHECK(!faa.def().has_value()); // discarded result
  CHECK(faa.uses() == std::set<std::string>{"d"});
  CHECK(faa.may_write_var());

  Statement aw;
  aw.kind = Statement::Kind::Await;
  aw.var = "x";
  aw.cmp = CmpOp::Eq;
  aw.cmp_rhs = Operand::make_reg("c");
  CHECK(aw.is_await_form());
  CHECK(aw.uses() == std::set<std::string>{"c"});
  CHECK(!aw.may_write_var());

  Statement xa;
  xa.kind = Statement::Kind::XchgAwait;
  xa.var = "x";
  xa.cmp_rhs = Operand::make_const(0);
  xa.expr = Expr::constant(1);
  CHECK(xa.is_await_form());
  CHECK(xa.may_write_var());
}

TEST_CASE("validate_program accepts the corpus") {
  for (const char* name :
       {"fig2a", "fig2b", "fig2c", "fig3", "fig4", "fig5", "fig6"}) {
    Program p = awaitmc_test::corpus(name);
    CHECK(validate_program(p).empty());
  }
}

TEST_CASE("validate_program flags broken programs") {
  Program p = awaitmc_test::corpus("fig2b");

  SUBCASE("duplicate static assignment") {
    // 'a' is already assigned by the load in the same thread
    Statement dup;
    dup.kind = Statement::Kind::Assign;
    dup.reg = "a";
    dup.expr = Expr::constant(1);
    p.threads[0].blocks[0].stmts.push_back(dup);
    CHECK(!validate_program(p).empty());
  }
  SUBCASE("unknown shared variable") {
    p.threads[0].blocks[0].stmts[0].var = "nosuch";
    CHECK(!validate_program(p).empty());
  }
  SUBCASE("branch target out of range") {
    p.threads[0].blocks[0].term.kind = Terminator::Kind::Goto;
    p.threads[0].blocks[0].term.target = 99;
    CHECK(!validate_program(p).empty());
  }
  SUBCASE("join of invalid thread index") {
    Statement j;
    j.kind = Statement::Kind::Join;
    j.thread = 17;
    p.threads[0].blocks[0].stmts.push_back(j);
    CHECK(!validate_program(p).empty());
  }
}
