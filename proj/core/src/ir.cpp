#include "awaitmc/ir.hpp"

#include "awaitmc/cfg.hpp"

#include <sstream>

namespace awaitmc {

ExprPtr Expr::constant(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Const;
  e->value = v;
  return e;
}

ExprPtr Expr::regref(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Reg;
  e->reg = std::move(name);
  return e;
}

ExprPtr Expr::unary(UnOp op, ExprPtr sub) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->un_op = op;
  e->lhs = std::move(sub);
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->bin_op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

ExprPtr Expr::compare(CmpOp op, ExprPtr l, ExprPtr r) {
  BinOp b;
  switch (op) {
    case CmpOp::Eq: b = BinOp::Eq; break;
    case CmpOp::Ne: b = BinOp::Ne; break;
    case CmpOp::Lt: b = BinOp::Lt; break;
    case CmpOp::Le: b = BinOp::Le; break;
    case CmpOp::Gt: b = BinOp::Gt; break;
    default: b = BinOp::Ge; break;
  }
  return binary(b, std::move(l), std::move(r));
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Const: return a->value == b->value;
    case Expr::Kind::Reg: return a->reg == b->reg;
    case Expr::Kind::Unary:
      return a->un_op == b->un_op && expr_equal(a->lhs, b->lhs);
    case Expr::Kind::Binary:
      return a->bin_op == b->bin_op && expr_equal(a->lhs, b->lhs) &&
             expr_equal(a->rhs, b->rhs);
  }
  return false;
}

namespace {

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 3;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    default: return 5;
  }
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    default: return "||";
  }
}

void print_expr(std::ostringstream& os, const ExprPtr& e, int parent_prec) {
  switch (e->kind) {
    case Expr::Kind::Const:
      os << e->value;
      break;
    case Expr::Kind::Reg:
      os << e->reg;
      break;
    case Expr::Kind::Unary:
      os << (e->un_op == UnOp::Neg ? "-" : "!");
      os << "(";
      print_expr(os, e->lhs, 0);
      os << ")";
      break;
    case Expr::Kind::Binary: {
      int prec = precedence(e->bin_op);
      bool paren = prec < parent_prec;
      if (paren) os << "(";
      print_expr(os, e->lhs, prec);
      os << " " << op_text(e->bin_op) << " ";
      print_expr(os, e->rhs, prec + 1);
      if (paren) os << ")";
      break;
    }
  }
}

} // namespace

std::string expr_to_string(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

void expr_registers(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  switch (e->kind) {
    case Expr::Kind::Const: return;
    case Expr::Kind::Reg: out.insert(e->reg); return;
    case Expr::Kind::Unary: expr_registers(e->lhs, out); return;
    case Expr::Kind::Binary:
      expr_registers(e->lhs, out);
      expr_registers(e->rhs, out);
      return;
  }
}

Value eval_expr(const ExprPtr& e, const std::map<std::string, Value>& regs) {
  switch (e->kind) {
    case Expr::Kind::Const:
      return e->value;
    case Expr::Kind::Reg: {
      auto it = regs.find(e->reg);
      return it == regs.end() ? 0 : it->second; // unassigned registers read 0
    }
    case Expr::Kind::Unary: {
      Value v = eval_expr(e->lhs, regs);
      if (e->un_op == UnOp::Neg)
        return static_cast<Value>(0 - static_cast<std::uint64_t>(v));
      return v == 0 ? 1 : 0;
    }
    case Expr::Kind::Binary: {
      auto l = static_cast<std::uint64_t>(eval_expr(e->lhs, regs));
      auto r = static_cast<std::uint64_t>(eval_expr(e->rhs, regs));
      auto sl = static_cast<Value>(l);
      auto sr = static_cast<Value>(r);
      switch (e->bin_op) {
        case BinOp::Add: return static_cast<Value>(l + r);
        case BinOp::Sub: return static_cast<Value>(l - r);
        case BinOp::Mul: return static_cast<Value>(l * r);
        case BinOp::Div: return sr == 0 ? 0 : static_cast<Value>(sl / sr);
        case BinOp::Mod: return sr == 0 ? 0 : static_cast<Value>(sl % sr);
        case BinOp::Eq: return sl == sr;
        case BinOp::Ne: return sl != sr;
        case BinOp::Lt: return sl < sr;
        case BinOp::Le: return sl <= sr;
        case BinOp::Gt: return sl > sr;
        case BinOp::Ge: return sl >= sr;
        case BinOp::And: return (sl != 0 && sr != 0) ? 1 : 0;
        case BinOp::Or: return (sl != 0 || sr != 0) ? 1 : 0;
      }
      return 0;
    }
  }
  return 0;
}

Value apply_cmp(CmpOp op, Value lhs, Value rhs) {
  switch (op) {
    case CmpOp::Eq: return lhs == rhs;
    case CmpOp::Ne: return lhs != rhs;
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Le: return lhs <= rhs;
    case CmpOp::Gt: return lhs > rhs;
    default: return lhs >= rhs;
  }
}

CmpOp negate_cmp(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    default: return CmpOp::Lt;
  }
}

CmpOp swap_cmp(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Ge: return CmpOp::Le;
    default: return op;
  }
}

std::string cmp_to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    default: return ">=";
  }
}

std::string operand_to_string(const Operand& op) {
  return op.is_reg ? op.reg : std::to_string(op.value);
}

std::optional<std::string> Statement::def() const {
  switch (kind) {
    case Kind::Load:
    case Kind::Xchg:
    case Kind::CmpXchg:
    case Kind::Assign:
    case Kind::LoadAwait:
      return reg;
    case Kind::Faa:
    case Kind::XchgAwait:
      if (!reg.empty()) return reg;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::set<std::string> Statement::uses() const {
  std::set<std::string> out;
  if (expr) expr_registers(expr, out);
  if (expr2) expr_registers(expr2, out);
  if (is_await_form() && cmp_rhs.is_reg) out.insert(cmp_rhs.reg);
  return out;
}

std::optional<std::string> Statement::accessed_var() const {
  switch (kind) {
    case Kind::Load:
    case Kind::Store:
    case Kind::Faa:
    case Kind::Xchg:
    case Kind::CmpXchg:
    case Kind::Await:
    case Kind::LoadAwait:
    case Kind::XchgAwait:
      return var;
    default:
      return std::nullopt;
  }
}

bool Statement::may_write_var() const {
  switch (kind) {
    case Kind::Store:
    case Kind::Faa:
    case Kind::Xchg:
    case Kind::CmpXchg:
    case Kind::XchgAwait:
      return true;
    default:
      return false;
  }
}

std::set<std::string> ThreadCfg::registers() const {
  std::set<std::string> out;
  for (const auto& b : blocks) {
    for (const auto& phi : b.phis) out.insert(phi.target);
    for (const auto& s : b.stmts)
      if (auto d = s.def()) out.insert(*d);
  }
  return out;
}

bool ThreadCfg::reg_used_elsewhere(const std::string& r, int skip_block,
                                   int skip_stmt) const {
  for (int bi = 0; bi < static_cast<int>(blocks.size()); ++bi) {
    const auto& b = blocks[bi];
    for (const auto& phi : b.phis)
      for (const auto& [pred, src] : phi.sources)
        if (src.is_reg && src.reg == r) return true;
    for (int si = 0; si < static_cast<int>(b.stmts.size()); ++si) {
      if (bi == skip_block && si == skip_stmt) continue;
      if (b.stmts[si].uses().count(r)) return true;
    }
    if (b.term.kind == Terminator::Kind::Branch) {
      std::set<std::string> regs;
      expr_registers(b.term.cond, regs);
      if (regs.count(r)) return true;
    }
  }
  return false;
}

int ThreadCfg::block_index(const std::string& label) const {
  for (int i = 0; i < static_cast<int>(blocks.size()); ++i)
    if (blocks[i].label == label) return i;
  return -1;
}

bool Program::has_shared(const std::string& v) const {
  for (const auto& [name, init] : shared_vars)
    if (name == v) return true;
  return false;
}

int Program::thread_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(threads.size()); ++i)
    if (threads[i].name == name) return i;
  return -1;
}

std::string diagnostic_to_string(const Program& p, const Diagnostic& d) {
  std::ostringstream os;
  if (d.thread >= 0 && d.thread < static_cast<int>(p.threads.size())) {
    os << "thread " << p.threads[d.thread].name;
    if (d.block >= 0) os << ", block " << p.threads[d.thread].blocks[d.block].label;
    if (d.stmt >= 0) os << ", stmt " << d.stmt;
    os << ": ";
  }
  os << d.message;
  return os.str();
}

namespace {

void check_thread(const Program& p, int ti, std::vector<Diagnostic>& out) {
  const ThreadCfg& t = p.threads[ti];
  int nblocks = static_cast<int>(t.blocks.size());
  if (nblocks == 0) {
    out.push_back({ti, -1, -1, "thread has no blocks"});
    return;
  }
  if (t.entry_block < 0 || t.entry_block >= nblocks) {
    out.push_back({ti, -1, -1, "entry block out of range"});
    return;
  }

  // Terminator targets.
  bool targets_ok = true;
  for (int bi = 0; bi < nblocks; ++bi) {
    const auto& term = t.blocks[bi].term;
    if (term.kind == Terminator::Kind::Goto) {
      if (term.target < 0 || term.target >= nblocks) {
        out.push_back({ti, bi, -1, "goto target out of range"});
        targets_ok = false;
      }
    } else if (term.kind == Terminator::Kind::Branch) {
      if (term.target < 0 || term.target >= nblocks || term.target_false < 0 ||
          term.target_false >= nblocks) {
        out.push_back({ti, bi, -1, "branch target out of range"});
        targets_ok = false;
      }
    }
  }
  if (!targets_ok) return;

  // SSA: each register assigned by exactly one statement.
  std::map<std::string, int> def_count;
  for (const auto& b : t.blocks) {
    for (const auto& phi : b.phis) def_count[phi.target]++;
    for (const auto& s : b.stmts)
      if (auto d = s.def()) def_count[*d]++;
  }
  for (const auto& [r, n] : def_count)
    if (n > 1)
      out.push_back({ti, -1, -1, "register '" + r + "' assigned by " +
                                     std::to_string(n) + " statements (SSA violation)"});

  // Phi sources must cover exactly the CFG predecessors.
  std::vector<std::set<int>> preds(nblocks);
  for (int bi = 0; bi < nblocks; ++bi) {
    const auto& term = t.blocks[bi].term;
    if (term.kind == Terminator::Kind::Goto) {
      preds[term.target].insert(bi);
    } else if (term.kind == Terminator::Kind::Branch) {
      preds[term.target].insert(bi);
      preds[term.target_false].insert(bi);
    }
  }
  for (int bi = 0; bi < nblocks; ++bi) {
    for (const auto& phi : t.blocks[bi].phis) {
      std::set<int> keys;
      for (const auto& [pred, src] : phi.sources) keys.insert(pred);
      if (keys != preds[bi])
        out.push_back({ti, bi, -1,
                       "phi for '" + phi.target +
                           "' does not cover exactly the block's predecessors"});
    }
  }

  // Shared variables must be declared; spawn/join targets must exist.
  for (int bi = 0; bi < nblocks; ++bi) {
    const auto& b = t.blocks[bi];
    for (int si = 0; si < static_cast<int>(b.stmts.size()); ++si) {
      const auto& s = b.stmts[si];
      if (auto v = s.accessed_var(); v && !p.has_shared(*v))
        out.push_back({ti, bi, si, "undeclared shared variable '" + *v + "'"});
      if ((s.kind == Statement::Kind::Spawn || s.kind == Statement::Kind::Join) &&
          (s.thread < 0 || s.thread >= static_cast<int>(p.threads.size())))
        out.push_back({ti, bi, si, "spawn/join target thread does not exist"});
    }
  }

  // Reducibility.
  try {
    build_cfg_info(t);
  } catch (const IrreducibleCfgError& e) {
    out.push_back({ti, e.edge.first, -1, e.what()});
  }
}

} // namespace

std::vector<Diagnostic> validate_program(const Program& p) {
  std::vector<Diagnostic> out;
  if (p.threads.empty()) {
    out.push_back({-1, -1, -1, "no threads declared"});
    return out;
  }
  if (p.entry_thread < 0 || p.entry_thread >= static_cast<int>(p.threads.size()))
    out.push_back({-1, -1, -1, "entry thread out of range"});
  std::set<std::string> names;
  for (const auto& t : p.threads)
    if (!names.insert(t.name).second)
      out.push_back({-1, -1, -1, "duplicate thread name '" + t.name + "'"});
  std::set<std::string> vars;
  for (const auto& [v, init] : p.shared_vars)
    if (!vars.insert(v).second)
      out.push_back({-1, -1, -1, "duplicate shared variable '" + v + "'"});
  for (int ti = 0; ti < static_cast<int>(p.threads.size()); ++ti)
    check_thread(p, ti, out);
  return out;
}

} // namespace awaitmc
