#ifndef AWAITMC_CFG_HPP
#define AWAITMC_CFG_HPP

#include "awaitmc/ir.hpp"

#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace awaitmc {

using Edge = std::pair<int, int>; // (source block, target block)

struct NaturalLoop {
  int header = -1;
  std::set<int> body;               // includes the header
  std::vector<Edge> header_backedges; // backedges targeting this loop's header
  std::vector<Edge> internal_backedges; // backedges inside the body not targeting it
};

struct CfgInfo {
  std::vector<int> idom;                 // immediate dominator, -1 for entry/unreachable
  std::vector<std::vector<int>> preds;
  std::vector<std::vector<int>> succs;
  std::vector<Edge> backedges;           // target dominates source
  std::vector<NaturalLoop> loops;        // sorted innermost-first (body size ascending)
  std::vector<bool> reachable;
  std::vector<int> rpo;                  // reverse postorder of reachable blocks

  bool dominates(int a, int b) const;
  bool is_backedge(int from, int to) const;
  /// Innermost loop containing `block`, or -1.
  int loop_of(int block) const;
};

struct IrreducibleCfgError : std::runtime_error {
  Edge edge;
  IrreducibleCfgError(Edge e, const std::string& msg)
      : std::runtime_error(msg), edge(e) {}
};

/// Dominators, backedges, and natural loops. Throws IrreducibleCfgError when a
/// retreating edge does not target a dominator of its source.
CfgInfo build_cfg_info(const ThreadCfg& t);

} // namespace awaitmc

#endif
