#include "awaitmc/plp.hpp"

#include "awaitmc/parser.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace awaitmc {

namespace {

// Truth sets over the three-way comparison outcome {<, =, >}.
constexpr unsigned kLt = 1, kEq = 2, kGt = 4, kFull = 7;

unsigned cmp_truth_set(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return kLt;
    case CmpOp::Le: return kLt | kEq;
    case CmpOp::Eq: return kEq;
    case CmpOp::Ne: return kLt | kGt;
    case CmpOp::Gt: return kGt;
    default: return kGt | kEq;
  }
}

CmpOp truth_set_cmp(unsigned s) {
  switch (s) {
    case kLt: return CmpOp::Lt;
    case kEq: return CmpOp::Eq;
    case kLt | kEq: return CmpOp::Le;
    case kGt: return CmpOp::Gt;
    case kLt | kGt: return CmpOp::Ne;
    default: return CmpOp::Ge;
  }
}

using OperandKey = std::tuple<bool, std::string, Value>;
OperandKey operand_key(const Operand& o) { return {o.is_reg, o.reg, o.value}; }

using AtomKey = std::tuple<std::string, bool, std::string, Value>;
AtomKey atom_key(const PcAtom& a) {
  return {a.reg, a.rhs.is_reg, a.rhs.reg, a.rhs.value};
}

bool atom_less(const PcAtom& a, const PcAtom& b) {
  return std::tie(a.reg, a.rhs.is_reg, a.rhs.reg, a.rhs.value, a.cmp) <
         std::tie(b.reg, b.rhs.is_reg, b.rhs.reg, b.rhs.value, b.cmp);
}

bool conjunct_less(const PcConjunct& a, const PcConjunct& b) {
  return std::lexicographical_compare(a.atoms.begin(), a.atoms.end(),
                                      b.atoms.begin(), b.atoms.end(),
                                      atom_less);
}

bool conjunct_eq(const PcConjunct& a, const PcConjunct& b) {
  return a.atoms == b.atoms;
}

/// Combines same-operand atoms by truth-set intersection; returns false when
/// the conjunct is contradictory.
bool simplify_conjunct(PcConjunct& c) {
  std::map<AtomKey, unsigned> sets;
  for (const PcAtom& a : c.atoms) {
    auto [it, fresh] = sets.try_emplace(atom_key(a), kFull);
    it->second &= cmp_truth_set(a.cmp);
    if (it->second == 0) return false;
  }
  std::vector<PcAtom> out;
  for (const auto& [key, set] : sets) {
    if (set == kFull) continue;
    PcAtom a;
    a.reg = std::get<0>(key);
    a.rhs.is_reg = std::get<1>(key);
    a.rhs.reg = std::get<2>(key);
    a.rhs.value = std::get<3>(key);
    a.cmp = truth_set_cmp(set);
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), atom_less);
  c.atoms = std::move(out);
  return true;
}

/// Merge two conjuncts differing in a single same-operand atom by truth-set
/// union; true on success (result left in `a`).
bool try_merge(PcConjunct& a, const PcConjunct& b) {
  if (a.atoms.size() != b.atoms.size()) return false;
  int diff = -1;
  for (size_t k = 0; k < a.atoms.size(); ++k) {
    if (a.atoms[k] == b.atoms[k]) continue;
    if (atom_key(a.atoms[k]) != atom_key(b.atoms[k])) return false;
    if (diff != -1) return false;
    diff = static_cast<int>(k);
  }
  if (diff == -1) return true; // identical
  unsigned u = cmp_truth_set(a.atoms[diff].cmp) | cmp_truth_set(b.atoms[diff].cmp);
  if (u == kFull)
    a.atoms.erase(a.atoms.begin() + diff);
  else
    a.atoms[diff].cmp = truth_set_cmp(u);
  return true;
}

} // namespace

Fpc normalize_fpc(Fpc f, int cap) {
  std::vector<PcConjunct> out;
  for (PcConjunct& c : f.disjuncts) {
    if (!simplify_conjunct(c)) continue;
    if (c.atoms.empty()) return Fpc::make_true();
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), conjunct_less);
  out.erase(std::unique(out.begin(), out.end(), conjunct_eq), out.end());

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < out.size() && !changed; ++i)
      for (size_t j = i + 1; j < out.size() && !changed; ++j)
        if (try_merge(out[i], out[j])) {
          out.erase(out.begin() + j);
          if (out[i].atoms.empty()) return Fpc::make_true();
          std::sort(out.begin(), out.end(), conjunct_less);
          out.erase(std::unique(out.begin(), out.end(), conjunct_eq), out.end());
          changed = true;
        }
  }
  if (static_cast<int>(out.size()) > cap) return Fpc::make_false();
  Fpc r;
  r.disjuncts = std::move(out);
  return r;
}

Fpc fpc_or(Fpc a, const Fpc& b, int cap) {
  a.disjuncts.insert(a.disjuncts.end(), b.disjuncts.begin(), b.disjuncts.end());
  return normalize_fpc(std::move(a), cap);
}

Fpc fpc_and(const Fpc& a, const PcConjunct& c, int cap) {
  Fpc r;
  for (const PcConjunct& d : a.disjuncts) {
    PcConjunct merged = d;
    merged.atoms.insert(merged.atoms.end(), c.atoms.begin(), c.atoms.end());
    r.disjuncts.push_back(std::move(merged));
  }
  return normalize_fpc(std::move(r), cap);
}

std::string fpc_to_string(const Fpc& f) {
  if (f.is_false()) return "[false]";
  if (f.is_true()) return "[true]";
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < f.disjuncts.size(); ++i) {
    if (i) os << " || ";
    const auto& atoms = f.disjuncts[i].atoms;
    for (size_t k = 0; k < atoms.size(); ++k) {
      if (k) os << " && ";
      os << atoms[k].reg << ' ' << cmp_to_string(atoms[k].cmp) << ' '
         << operand_to_string(atoms[k].rhs);
    }
  }
  os << ']';
  return os.str();
}

namespace {

std::optional<PcConjunct> atom_conjunct(PcAtom a) {
  PcConjunct c;
  c.atoms.push_back(std::move(a));
  return c;
}

/// reg = <value of e>, when e is simple enough to express.
std::optional<PcConjunct> eq_guard(const std::string& reg, const ExprPtr& e) {
  if (!e) return std::nullopt;
  if (e->kind == Expr::Kind::Const)
    return atom_conjunct({reg, CmpOp::Eq, Operand::make_const(e->value)});
  if (e->kind == Expr::Kind::Reg)
    return atom_conjunct({reg, CmpOp::Eq, Operand::make_reg(e->reg)});
  return std::nullopt;
}

} // namespace

std::optional<PcConjunct> statement_purity_guard(const Statement& s) {
  using K = Statement::Kind;
  switch (s.kind) {
    case K::Store:
    case K::Spawn: // conservatively impure: affects another thread's progress
    case K::Join:
      return std::nullopt;
    case K::Load:
    case K::Assign:
    case K::Assume:
    case K::Assert:
    case K::Await:
    case K::LoadAwait:
      return PcConjunct{};
    case K::Faa:
      if (s.expr && s.expr->kind == Expr::Kind::Const)
        return s.expr->value == 0 ? std::optional<PcConjunct>(PcConjunct{})
                                  : std::nullopt;
      if (s.expr && s.expr->kind == Expr::Kind::Reg)
        return atom_conjunct({s.expr->reg, CmpOp::Eq, Operand::make_const(0)});
      return std::nullopt;
    case K::Xchg:
    case K::XchgAwait:
      if (s.reg.empty()) return std::nullopt;
      return eq_guard(s.reg, s.expr);
    case K::CmpXchg:
      return atom_conjunct({s.reg, CmpOp::Eq, Operand::make_const(1)});
  }
  return std::nullopt;
}

std::vector<Edge> impure_header_backedges(const ThreadCfg& t,
                                          const NaturalLoop& loop) {
  // Predecessors of the header that are outside the loop body carry the
  // "first entering" phi values.
  std::vector<int> entry_preds;
  for (int b = 0; b < static_cast<int>(t.blocks.size()); ++b) {
    const auto& term = t.blocks[b].term;
    bool to_header = (term.kind == Terminator::Kind::Goto &&
                      term.target == loop.header) ||
                     (term.kind == Terminator::Kind::Branch &&
                      (term.target == loop.header ||
                       term.target_false == loop.header));
    if (to_header && !loop.body.count(b)) entry_preds.push_back(b);
  }

  std::vector<Edge> out;
  const BasicBlock& header = t.blocks[loop.header];
  for (const Edge& be : loop.header_backedges) {
    bool impure = false;
    for (const PhiNode& phi : header.phis) {
      auto it = phi.sources.find(be.first);
      if (it == phi.sources.end()) continue;
      const Operand& back = it->second;
      if (back.is_reg && back.reg == phi.target) continue; // value unchanged
      if (entry_preds.empty()) {
        if (!(back == Operand::make_const(0))) impure = true;
        continue;
      }
      for (int p : entry_preds) {
        auto eit = phi.sources.find(p);
        if (eit == phi.sources.end() || !(back == eit->second)) impure = true;
      }
    }
    if (impure) out.push_back(be);
  }
  return out;
}

namespace {

/// Edge condition as a conjunct; nullopt when the branch condition cannot be
/// expressed as an atomic register predicate (treated as [false]).
std::optional<PcConjunct> branch_conjunct(const ExprPtr& cond, bool negate) {
  if (!cond) return PcConjunct{};
  if (cond->kind == Expr::Kind::Const)
    return (cond->value != 0) != negate ? std::optional<PcConjunct>(PcConjunct{})
                                        : std::nullopt;
  if (cond->kind == Expr::Kind::Reg)
    return atom_conjunct(
        {cond->reg, negate ? CmpOp::Eq : CmpOp::Ne, Operand::make_const(0)});
  if (cond->kind == Expr::Kind::Unary && cond->un_op == UnOp::Not &&
      cond->lhs && cond->lhs->kind == Expr::Kind::Reg)
    return atom_conjunct({cond->lhs->reg, negate ? CmpOp::Ne : CmpOp::Eq,
                          Operand::make_const(0)});
  if (cond->kind == Expr::Kind::Binary) {
    CmpOp op;
    switch (cond->bin_op) {
      case BinOp::Eq: op = CmpOp::Eq; break;
      case BinOp::Ne: op = CmpOp::Ne; break;
      case BinOp::Lt: op = CmpOp::Lt; break;
      case BinOp::Le: op = CmpOp::Le; break;
      case BinOp::Gt: op = CmpOp::Gt; break;
      case BinOp::Ge: op = CmpOp::Ge; break;
      default: return std::nullopt;
    }
    if (negate) op = negate_cmp(op);
    const ExprPtr& l = cond->lhs;
    const ExprPtr& r = cond->rhs;
    if (l->kind == Expr::Kind::Reg && r->kind == Expr::Kind::Const)
      return atom_conjunct({l->reg, op, Operand::make_const(r->value)});
    if (l->kind == Expr::Kind::Reg && r->kind == Expr::Kind::Reg)
      return atom_conjunct({l->reg, op, Operand::make_reg(r->reg)});
    if (l->kind == Expr::Kind::Const && r->kind == Expr::Kind::Reg)
      return atom_conjunct(
          {r->reg, swap_cmp(op), Operand::make_const(l->value)});
  }
  return std::nullopt;
}

std::optional<PcConjunct> edge_conjunct(const BasicBlock& a, int to) {
  if (a.term.kind == Terminator::Kind::Goto) return PcConjunct{};
  if (a.term.kind != Terminator::Kind::Branch) return std::nullopt;
  if (a.term.target == a.term.target_false) return PcConjunct{};
  return branch_conjunct(a.term.cond, to == a.term.target_false);
}

LoopReport analyze_loop(const ThreadCfg& t, const CfgInfo& cfg,
                        const NaturalLoop& loop, int cap) {
  LoopReport lr;
  lr.header = loop.header;
  lr.impure_backedges = impure_header_backedges(t, loop);
  std::set<Edge> impure(lr.impure_backedges.begin(), lr.impure_backedges.end());
  std::set<Edge> internal(loop.internal_backedges.begin(),
                          loop.internal_backedges.end());

  std::map<int, Fpc> before_block;
  // Reverse postorder visits successors of forward edges first when reversed.
  std::vector<int> order;
  for (int b : cfg.rpo)
    if (loop.body.count(b)) order.push_back(b);
  std::reverse(order.begin(), order.end());

  for (int a : order) {
    const BasicBlock& bb = t.blocks[a];
    Fpc after = Fpc::make_false();
    for (int b : cfg.succs[a]) {
      auto g = edge_conjunct(bb, b);
      Fpc edge = Fpc::make_false();
      if (!loop.body.count(b)) {
        // leaves the loop: [false]
      } else if (b == loop.header && cfg.is_backedge(a, b)) {
        if (!impure.count({a, b}) && g) {
          Fpc one;
          one.disjuncts.push_back(*g);
          edge = normalize_fpc(std::move(one), cap);
        }
      } else if (internal.count({a, b})) {
        // internal backedge: [false]
      } else if (g) {
        edge = fpc_and(before_block.count(b) ? before_block[b]
                                             : Fpc::make_false(),
                       *g, cap);
      }
      after = fpc_or(std::move(after), edge, cap);
    }
    const int n = static_cast<int>(bb.stmts.size());
    lr.table[{a, n}] = after;
    Fpc cur = std::move(after);
    for (int si = n - 1; si >= 0; --si) {
      auto g = statement_purity_guard(bb.stmts[si]);
      cur = g ? fpc_and(cur, *g, cap) : Fpc::make_false();
      lr.table[{a, si}] = cur;
    }
    before_block[a] = std::move(cur);
  }
  lr.purity_condition = before_block[loop.header];
  return lr;
}

} // namespace

PurityReport analyze(const Program& p, const PlpOptions& opts) {
  PurityReport rep;
  for (const ThreadCfg& t : p.threads) {
    CfgInfo cfg = build_cfg_info(t);
    std::vector<LoopReport> loops;
    for (const NaturalLoop& loop : cfg.loops)
      loops.push_back(analyze_loop(t, cfg, loop, opts.dnf_cap));
    rep.threads.push_back(std::move(loops));
  }
  return rep;
}

std::string PurityReport::to_string(const Program& p) const {
  std::ostringstream os;
  for (size_t ti = 0; ti < threads.size(); ++ti) {
    const ThreadCfg& t = p.threads[ti];
    for (const LoopReport& lr : threads[ti]) {
      os << "thread " << t.name << " loop " << t.blocks[lr.header].label
         << ": PC = " << fpc_to_string(lr.purity_condition) << "\n";
      for (const auto& [key, fpc] : lr.table) {
        auto [b, si] = key;
        os << "  " << t.blocks[b].label << ':' << si;
        if (si < static_cast<int>(t.blocks[b].stmts.size()))
          os << " (before " << format_statement(p, t.blocks[b].stmts[si])
             << ")";
        else
          os << " (end)";
        os << " " << fpc_to_string(fpc) << "\n";
      }
      for (const std::string& s : lr.insertions) os << "  insert: " << s << "\n";
    }
  }
  return os.str();
}

namespace {

ExprPtr operand_expr(const Operand& o) {
  return o.is_reg ? Expr::regref(o.reg) : Expr::constant(o.value);
}

ExprPtr atom_expr(const PcAtom& a) {
  return Expr::compare(a.cmp, Expr::regref(a.reg), operand_expr(a.rhs));
}

/// assume(¬(a1 && a2 && ...)), simplified to a single negated comparison when
/// there is only one atom.
ExprPtr negated_conjunct_expr(const std::vector<PcAtom>& atoms) {
  if (atoms.empty()) return Expr::constant(0);
  if (atoms.size() == 1) {
    PcAtom a = atoms[0];
    a.cmp = negate_cmp(a.cmp);
    return atom_expr(a);
  }
  ExprPtr conj = atom_expr(atoms[0]);
  for (size_t k = 1; k < atoms.size(); ++k)
    conj = Expr::binary(BinOp::And, conj, atom_expr(atoms[k]));
  return Expr::unary(UnOp::Not, conj);
}

/// Per-block "took internal backedge" value: 0 at the header, 1 along internal
/// backedges, merged by fresh phis at joins.
std::map<int, Operand> build_tib(ThreadCfg& t, const CfgInfo& cfg,
                                 const NaturalLoop& loop) {
  std::set<Edge> internal(loop.internal_backedges.begin(),
                          loop.internal_backedges.end());
  std::set<std::string> regs = t.registers();
  int ctr = 0;
  auto fresh = [&] {
    std::string r;
    do {
      r = "tib" + std::to_string(loop.header) + "_" + std::to_string(ctr++);
    } while (regs.count(r));
    regs.insert(r);
    return r;
  };
  std::map<int, Operand> val;
  for (int b : cfg.rpo) {
    if (!loop.body.count(b)) continue;
    if (b == loop.header) {
      val[b] = Operand::make_const(0);
      continue;
    }
    std::vector<std::pair<int, Operand>> incoming;
    for (int p : cfg.preds[b]) {
      Operand o = internal.count({p, b})
                      ? Operand::make_const(1)
                      : (val.count(p) ? val[p] : Operand::make_const(0));
      incoming.emplace_back(p, o);
    }
    bool all_same = true;
    for (const auto& [p, o] : incoming)
      if (!(o == incoming.front().second)) all_same = false;
    if (all_same && !incoming.empty()) {
      val[b] = incoming.front().second;
    } else {
      PhiNode phi;
      phi.target = fresh();
      for (const auto& [p, o] : incoming) phi.sources[p] = o;
      t.blocks[b].phis.push_back(phi);
      val[b] = Operand::make_reg(phi.target);
    }
  }
  return val;
}

/// Definition site of a register: (block, stmt) with stmt == -1 for a phi.
std::optional<std::pair<int, int>> def_site(const ThreadCfg& t,
                                            const std::string& reg) {
  for (int b = 0; b < static_cast<int>(t.blocks.size()); ++b) {
    for (const PhiNode& phi : t.blocks[b].phis)
      if (phi.target == reg) return std::make_pair(b, -1);
    for (int si = 0; si < static_cast<int>(t.blocks[b].stmts.size()); ++si)
      if (t.blocks[b].stmts[si].def() == reg) return std::make_pair(b, si);
  }
  return std::nullopt;
}

bool reg_used_besides(const ThreadCfg& t, const std::string& reg,
                      const std::set<std::pair<int, int>>& skip) {
  for (int b = 0; b < static_cast<int>(t.blocks.size()); ++b) {
    const BasicBlock& bb = t.blocks[b];
    for (const PhiNode& phi : bb.phis)
      for (const auto& [pred, op] : phi.sources)
        if (op.is_reg && op.reg == reg) return true;
    for (int si = 0; si < static_cast<int>(bb.stmts.size()); ++si) {
      if (skip.count({b, si})) continue;
      if (bb.stmts[si].uses().count(reg)) return true;
    }
    if (bb.term.cond) {
      std::set<std::string> cr;
      expr_registers(bb.term.cond, cr);
      if (cr.count(reg)) return true;
    }
  }
  return false;
}

/// Parses a predicate of the form `r CMP operand` over register `r`.
std::optional<std::pair<CmpOp, Operand>> match_pred(const ExprPtr& e,
                                                    const std::string& r) {
  if (!e) return std::nullopt;
  if (e->kind == Expr::Kind::Reg && e->reg == r)
    return std::make_pair(CmpOp::Ne, Operand::make_const(0));
  if (e->kind == Expr::Kind::Unary && e->un_op == UnOp::Not && e->lhs &&
      e->lhs->kind == Expr::Kind::Reg && e->lhs->reg == r)
    return std::make_pair(CmpOp::Eq, Operand::make_const(0));
  if (e->kind != Expr::Kind::Binary) return std::nullopt;
  CmpOp op;
  switch (e->bin_op) {
    case BinOp::Eq: op = CmpOp::Eq; break;
    case BinOp::Ne: op = CmpOp::Ne; break;
    case BinOp::Lt: op = CmpOp::Lt; break;
    case BinOp::Le: op = CmpOp::Le; break;
    case BinOp::Gt: op = CmpOp::Gt; break;
    case BinOp::Ge: op = CmpOp::Ge; break;
    default: return std::nullopt;
  }
  const ExprPtr& l = e->lhs;
  const ExprPtr& rr = e->rhs;
  if (l->kind == Expr::Kind::Reg && l->reg == r) {
    if (rr->kind == Expr::Kind::Const)
      return std::make_pair(op, Operand::make_const(rr->value));
    if (rr->kind == Expr::Kind::Reg && rr->reg != r)
      return std::make_pair(op, Operand::make_reg(rr->reg));
  }
  if (rr->kind == Expr::Kind::Reg && rr->reg == r) {
    if (l->kind == Expr::Kind::Const)
      return std::make_pair(swap_cmp(op), Operand::make_const(l->value));
    if (l->kind == Expr::Kind::Reg && l->reg != r)
      return std::make_pair(swap_cmp(op), Operand::make_reg(l->reg));
  }
  return std::nullopt;
}

void prune_phis(ThreadCfg& t) {
  std::vector<std::set<int>> preds(t.blocks.size());
  for (int b = 0; b < static_cast<int>(t.blocks.size()); ++b) {
    const auto& term = t.blocks[b].term;
    if (term.kind == Terminator::Kind::Goto) preds[term.target].insert(b);
    if (term.kind == Terminator::Kind::Branch) {
      preds[term.target].insert(b);
      preds[term.target_false].insert(b);
    }
  }
  for (int b = 0; b < static_cast<int>(t.blocks.size()); ++b) {
    auto& phis = t.blocks[b].phis;
    for (auto it = phis.begin(); it != phis.end();) {
      for (auto sit = it->sources.begin(); sit != it->sources.end();)
        sit = preds[b].count(sit->first) ? std::next(sit)
                                         : it->sources.erase(sit);
      it = it->sources.empty() ? phis.erase(it) : std::next(it);
    }
  }
}

} // namespace

void rewrite_assume_to_await(ThreadCfg& t) {
  using K = Statement::Kind;
  bool changed = true;
  while (changed) {
    changed = false;

    // Adjacent access+assume patterns.
    for (int b = 0; b < static_cast<int>(t.blocks.size()) && !changed; ++b) {
      auto& stmts = t.blocks[b].stmts;
      for (int i = 0; i + 1 < static_cast<int>(stmts.size()) && !changed; ++i) {
        if (stmts[i + 1].kind != K::Assume) continue;
        const Statement s = stmts[i];
        const Statement a = stmts[i + 1];
        if (s.reg.empty()) continue;
        auto pm = match_pred(a.expr, s.reg);
        if (!pm) continue;
        if (pm->second.is_reg && pm->second.reg == s.reg) continue;
        Statement ns;
        ns.var = s.var;
        ns.cmp = pm->first;
        ns.cmp_rhs = pm->second;
        if (s.kind == K::Load) {
          bool used = reg_used_besides(t, s.reg, {{b, i + 1}});
          ns.kind = used ? K::LoadAwait : K::Await;
          if (used) ns.reg = s.reg;
        } else if (s.kind == K::Xchg) {
          bool used = reg_used_besides(t, s.reg, {{b, i + 1}});
          ns.kind = K::XchgAwait;
          ns.expr = s.expr;
          if (used) ns.reg = s.reg;
        } else if (s.kind == K::CmpXchg) {
          // c := cmpxchg(x, e1, e2); assume(c == 1)  — only when the success
          // flag has no other use.
          if (pm->first != CmpOp::Eq || pm->second.is_reg ||
              pm->second.value != 1)
            continue;
          if (reg_used_besides(t, s.reg, {{b, i + 1}})) continue;
          Operand expected;
          if (s.expr->kind == Expr::Kind::Const)
            expected = Operand::make_const(s.expr->value);
          else if (s.expr->kind == Expr::Kind::Reg)
            expected = Operand::make_reg(s.expr->reg);
          else
            continue;
          ns.kind = K::XchgAwait;
          ns.cmp = CmpOp::Eq;
          ns.cmp_rhs = expected;
          ns.expr = s.expr2;
        } else {
          continue;
        }
        stmts[i] = ns;
        stmts.erase(stmts.begin() + i + 1);
        changed = true;
      }
    }
    if (changed) continue;

    // Branches decided by an await predicate in the same block.
    for (int b = 0; b < static_cast<int>(t.blocks.size()) && !changed; ++b) {
      BasicBlock& bb = t.blocks[b];
      if (bb.term.kind != Terminator::Kind::Branch) continue;
      if (bb.term.target == bb.term.target_false) continue;
      for (const Statement& s : bb.stmts) {
        if ((s.kind != K::LoadAwait && s.kind != K::XchgAwait) || s.reg.empty())
          continue;
        auto pm = match_pred(bb.term.cond, s.reg);
        if (!pm || !(pm->second == s.cmp_rhs)) continue;
        unsigned sa = cmp_truth_set(s.cmp);
        unsigned sc = cmp_truth_set(pm->first);
        int target = -1;
        if ((sa & ~sc) == 0)
          target = bb.term.target; // condition always true
        else if ((sa & sc) == 0)
          target = bb.term.target_false; // condition always false
        if (target == -1) continue;
        bb.term.kind = Terminator::Kind::Goto;
        bb.term.target = target;
        bb.term.cond = nullptr;
        bb.term.target_false = -1;
        prune_phis(t);
        changed = true;
        break;
      }
    }
    if (changed) continue;

    // Await results that became dead.
    for (auto& bb : t.blocks) {
      for (auto& s : bb.stmts) {
        if (s.kind == K::LoadAwait &&
            !reg_used_besides(t, s.reg, {})) {
          s.kind = K::Await;
          s.reg.clear();
          changed = true;
        } else if (s.kind == K::XchgAwait && !s.reg.empty() &&
                   !reg_used_besides(t, s.reg, {})) {
          s.reg.clear();
          changed = true;
        }
      }
    }
  }
  prune_phis(t);
}

std::pair<Program, PurityReport> transform(const Program& p,
                                           const PlpOptions& opts) {
  PurityReport rep = analyze(p, opts);
  Program q = p;
  for (size_t ti = 0; ti < q.threads.size(); ++ti) {
    ThreadCfg& t = q.threads[ti];
    CfgInfo cfg = build_cfg_info(t);

    struct Planned {
      int block, idx, order;
      Statement stmt;
    };
    std::vector<Planned> plans;
    int order = 0;

    if (opts.insert_assumes) {
      for (size_t li = 0; li < cfg.loops.size(); ++li) {
        const NaturalLoop& loop = cfg.loops[li];
        LoopReport& lr = rep.threads[ti][li];
        const Fpc& pc = lr.purity_condition;
        if (pc.is_false()) continue;
        std::map<int, Operand> tib;
        bool tib_built = false;

        for (const PcConjunct& conj : pc.disjuncts) {
          std::set<std::string> regs;
          for (const PcAtom& a : conj.atoms) {
            regs.insert(a.reg);
            if (a.rhs.is_reg) regs.insert(a.rhs.reg);
          }
          std::vector<std::pair<int, int>> defs;
          for (const std::string& r : regs)
            if (auto d = def_site(t, r)) defs.push_back(*d);

          // Earliest loop-body position dominated by all definitions.
          int pos_b = -1, pos_i = -1;
          for (int b : cfg.rpo) {
            if (!loop.body.count(b) || pos_b != -1) continue;
            const int n = static_cast<int>(t.blocks[b].stmts.size());
            for (int idx = 0; idx <= n && pos_b == -1; ++idx) {
              bool ok = true;
              for (auto [db, di] : defs) {
                if (db == b) {
                  if (di >= idx) ok = false;
                } else if (!cfg.dominates(db, b)) {
                  ok = false;
                }
              }
              if (ok) {
                pos_b = b;
                pos_i = idx;
              }
            }
          }
          std::string desc = fpc_to_string(Fpc{{conj}});
          if (pos_b == -1) {
            lr.insertions.push_back("skipped " + desc +
                                    " (no position after all definitions)");
            continue;
          }
          std::vector<PcAtom> atoms = conj.atoms;
          if (!loop.internal_backedges.empty()) {
            if (!tib_built) {
              tib = build_tib(t, cfg, loop);
              tib_built = true;
            }
            Operand o = tib[pos_b];
            if (!o.is_reg && o.value == 1) {
              lr.insertions.push_back("skipped " + desc +
                                      " (internal backedge always taken)");
              continue;
            }
            if (o.is_reg)
              atoms.push_back({o.reg, CmpOp::Eq, Operand::make_const(0)});
          }
          Statement asum;
          asum.kind = Statement::Kind::Assume;
          asum.expr = negated_conjunct_expr(atoms);
          plans.push_back({pos_b, pos_i, order++, asum});
          lr.insertions.push_back("assume(" + expr_to_string(asum.expr) +
                                  ") at " + t.blocks[pos_b].label + ":" +
                                  std::to_string(pos_i));
        }
      }
      // Apply from the back so earlier indices stay valid.
      std::sort(plans.begin(), plans.end(), [](const Planned& a, const Planned& b) {
        if (a.block != b.block) return a.block < b.block;
        if (a.idx != b.idx) return a.idx > b.idx;
        return a.order > b.order;
      });
      for (const Planned& pl : plans)
        t.blocks[pl.block].stmts.insert(t.blocks[pl.block].stmts.begin() + pl.idx,
                                        pl.stmt);
    }
    if (opts.await_rewrite) rewrite_assume_to_await(t);
  }
  auto diags = validate_program(q);
  if (!diags.empty())
    throw std::runtime_error("internal error: transformed program invalid: " +
                             diagnostic_to_string(q, diags.front()));
  return {std::move(q), std::move(rep)};
}

} // namespace awaitmc
