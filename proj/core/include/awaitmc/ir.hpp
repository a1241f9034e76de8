#ifndef AWAITMC_IR_HPP
#define AWAITMC_IR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace awaitmc {

// Values are signed 64-bit; arithmetic wraps.
using Value = std::int64_t;

enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Neg, Not };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Side-effect-free expression over registers and constants.
struct Expr {
  enum class Kind { Const, Reg, Unary, Binary };
  Kind kind;
  Value value = 0;        // Const
  std::string reg;        // Reg
  UnOp un_op = UnOp::Neg; // Unary
  BinOp bin_op = BinOp::Add;
  ExprPtr lhs, rhs;       // Unary uses lhs only

  static ExprPtr constant(Value v);
  static ExprPtr regref(std::string name);
  static ExprPtr unary(UnOp op, ExprPtr e);
  static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r);
  static ExprPtr compare(CmpOp op, ExprPtr l, ExprPtr r);
};

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
std::string expr_to_string(const ExprPtr& e);
void expr_registers(const ExprPtr& e, std::set<std::string>& out);

/// Evaluates with wrapping 64-bit arithmetic; division/modulo by zero yield 0.
Value eval_expr(const ExprPtr& e, const std::map<std::string, Value>& regs);

Value apply_cmp(CmpOp op, Value lhs, Value rhs);
CmpOp negate_cmp(CmpOp op);
CmpOp swap_cmp(CmpOp op); // a OP b  <=>  b swap(OP) a
std::string cmp_to_string(CmpOp op);

/// Register name or integer literal; used by phi sources and await predicates.
struct Operand {
  bool is_reg = false;
  std::string reg;
  Value value = 0;

  static Operand make_reg(std::string r) { return Operand{true, std::move(r), 0}; }
  static Operand make_const(Value v) { return Operand{false, {}, v}; }
  bool operator==(const Operand& o) const {
    return is_reg == o.is_reg && reg == o.reg && value == o.value;
  }
};

std::string operand_to_string(const Operand& op);

struct Statement {
  enum class Kind {
    Load,      // reg := var
    Store,     // var := expr
    Faa,       // [reg :=] var +:= expr, reg gets old value (optional target)
    Xchg,      // reg := xchg(var, expr)
    CmpXchg,   // reg := cmpxchg(var, expected, desired); reg gets 1/0
    Assume,    // assume(expr over regs); false blocks the thread permanently
    Await,     // await(var CMP operand); blocks until satisfied
    LoadAwait, // reg := await(var CMP operand)
    XchgAwait, // [reg :=] xchg_await(var CMP operand, expr); reg gets old value
    Assign,    // reg := expr
    Spawn,     // spawn thread
    Join,      // join thread; enabled once the target has exited
    Assert,    // assert(expr); failure is recorded, not fatal
  };
  Kind kind;
  std::string reg;  // target register; may be empty for Faa/XchgAwait
  std::string var;  // shared variable
  ExprPtr expr;     // Store/Faa/Xchg value, Assign rhs, Assume/Assert predicate,
                    // XchgAwait new value
  ExprPtr expr2;    // CmpXchg desired value (expr holds the expected value)
  CmpOp cmp = CmpOp::Eq; // await-form predicate
  Operand cmp_rhs;       // await-form comparison operand
  int thread = -1;       // Spawn/Join target

  bool is_await_form() const {
    return kind == Kind::Await || kind == Kind::LoadAwait || kind == Kind::XchgAwait;
  }
  /// Register defined by this statement, if any.
  std::optional<std::string> def() const;
  /// Registers read by this statement.
  std::set<std::string> uses() const;
  /// Shared variable accessed, if any.
  std::optional<std::string> accessed_var() const;
  bool may_write_var() const;
};

struct PhiNode {
  std::string target;
  std::map<int, Operand> sources; // predecessor block index -> value
};

struct Terminator {
  enum class Kind { Goto, Branch, Exit };
  Kind kind = Kind::Exit;
  ExprPtr cond;        // Branch
  int target = -1;     // Goto / Branch true arm
  int target_false = -1;
};

struct BasicBlock {
  std::string label;
  std::vector<PhiNode> phis;
  std::vector<Statement> stmts;
  Terminator term;
};

struct ThreadCfg {
  std::string name;
  std::vector<BasicBlock> blocks;
  int entry_block = 0;

  /// All registers defined anywhere in the thread.
  std::set<std::string> registers() const;
  /// True iff `reg` is read by some statement, phi, or terminator other than
  /// the statement at (skip_block, skip_stmt).
  bool reg_used_elsewhere(const std::string& reg, int skip_block, int skip_stmt) const;
  int block_index(const std::string& label) const; // -1 if absent
};

struct Program {
  std::vector<ThreadCfg> threads;
  std::vector<std::pair<std::string, Value>> shared_vars; // declaration order
  int entry_thread = 0;

  bool has_shared(const std::string& v) const;
  int thread_index(const std::string& name) const; // -1 if absent
};

struct Diagnostic {
  int thread = -1; // -1: program-level
  int block = -1;
  int stmt = -1;
  std::string message;
};

std::string diagnostic_to_string(const Program& p, const Diagnostic& d);

/// Structural validation; empty result iff the program is well formed.
/// Pure and idempotent.
std::vector<Diagnostic> validate_program(const Program& p);

} // namespace awaitmc

#endif
