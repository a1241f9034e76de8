#ifndef AWAITMC_PLP_HPP
#define AWAITMC_PLP_HPP

#include "awaitmc/cfg.hpp"
#include "awaitmc/ir.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace awaitmc {

/// Atomic predicate `reg CMP rhs` used by purity conditions.
struct PcAtom {
  std::string reg;
  CmpOp cmp = CmpOp::Eq;
  Operand rhs;

  bool operator==(const PcAtom& o) const = default;
};

/// Conjunction of atoms; no atoms means `true`. `earliest` reserves the
/// optional insertion floor for operations that could fault; no operation in
/// this IR does, so it stays unset.
struct PcConjunct {
  std::vector<PcAtom> atoms;
  std::optional<int> earliest;
};

/// Purity condition in disjunctive normal form. No disjuncts means `false`;
/// a single empty conjunct means `true`.
struct Fpc {
  std::vector<PcConjunct> disjuncts;

  bool is_false() const { return disjuncts.empty(); }
  bool is_true() const {
    return disjuncts.size() == 1 && disjuncts[0].atoms.empty();
  }
  static Fpc make_false() { return {}; }
  static Fpc make_true() { return Fpc{{PcConjunct{}}}; }
};

std::string fpc_to_string(const Fpc& f);

/// Normalization applies only the sanctioned simplifications: same-operand
/// comparison combination (via truth sets over <, =, >) and merging of
/// disjuncts that differ in a single same-operand atom. Past `cap` disjuncts
/// the condition degrades to [false].
Fpc normalize_fpc(Fpc f, int cap);
Fpc fpc_or(Fpc a, const Fpc& b, int cap);
Fpc fpc_and(const Fpc& a, const PcConjunct& c, int cap);

/// Guard under which `s` does not write a global variable; nullopt means
/// [false] (a store, or a form whose guard is not expressible).
std::optional<PcConjunct> statement_purity_guard(const Statement& s);

/// Header backedges along which some header phi carries a changed value.
std::vector<Edge> impure_header_backedges(const ThreadCfg& t,
                                          const NaturalLoop& loop);

struct LoopReport {
  int header = -1;
  std::vector<Edge> impure_backedges;
  Fpc purity_condition;
  /// FPC before statement (block, index); index == statement count means the
  /// end of the block.
  std::map<std::pair<int, int>, Fpc> table;
  std::vector<std::string> insertions; // human-readable decisions
};

struct PurityReport {
  std::vector<std::vector<LoopReport>> threads; // per thread, innermost-first

  std::string to_string(const Program& p) const;
};

struct PlpOptions {
  bool insert_assumes = true;
  bool await_rewrite = true;
  int dnf_cap = 64;
};

/// Analysis only; does not modify the program.
PurityReport analyze(const Program& p, const PlpOptions& opts = {});

/// Loop detection, FPC analysis, assume insertion, and (when enabled) the
/// assume-to-await rewrite. The result passes validate_program.
std::pair<Program, PurityReport> transform(const Program& p,
                                           const PlpOptions& opts = {});

/// Rewrites load/xchg/cmpxchg followed by a matching assume into await forms
/// and collapses loops whose branch is decided by the await predicate.
void rewrite_assume_to_await(ThreadCfg& t);

} // namespace awaitmc

#endif
