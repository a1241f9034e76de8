#include "awaitmc/cfg.hpp"

#include <algorithm>
#include <functional>

namespace awaitmc {

bool CfgInfo::dominates(int a, int b) const {
  while (b != -1) {
    if (a == b) return true;
    b = idom[b];
  }
  return false;
}

bool CfgInfo::is_backedge(int from, int to) const {
  for (const auto& [u, v] : backedges)
    if (u == from && v == to) return true;
  return false;
}

int CfgInfo::loop_of(int block) const {
  // Loops are sorted innermost-first, so the first hit is the innermost.
  for (int i = 0; i < static_cast<int>(loops.size()); ++i)
    if (loops[i].body.count(block)) return i;
  return -1;
}

CfgInfo build_cfg_info(const ThreadCfg& t) {
  const int n = static_cast<int>(t.blocks.size());
  CfgInfo info;
  info.preds.assign(n, {});
  info.succs.assign(n, {});
  info.idom.assign(n, -1);
  info.reachable.assign(n, false);

  for (int b = 0; b < n; ++b) {
    const auto& term = t.blocks[b].term;
    if (term.kind == Terminator::Kind::Goto) {
      info.succs[b].push_back(term.target);
    } else if (term.kind == Terminator::Kind::Branch) {
      info.succs[b].push_back(term.target);
      if (term.target_false != term.target)
        info.succs[b].push_back(term.target_false);
    }
  }
  for (int b = 0; b < n; ++b)
    for (int s : info.succs[b]) info.preds[s].push_back(b);

  // Postorder DFS from the entry block.
  std::vector<int> postorder;
  std::vector<int> state(n, 0); // 0 unvisited, 1 on stack, 2 done
  std::function<void(int)> dfs = [&](int b) {
    state[b] = 1;
    info.reachable[b] = true;
    for (int s : info.succs[b])
      if (state[s] == 0) dfs(s);
    state[b] = 2;
    postorder.push_back(b);
  };
  dfs(t.entry_block);
  info.rpo.assign(postorder.rbegin(), postorder.rend());

  std::vector<int> rpo_index(n, -1);
  for (int i = 0; i < static_cast<int>(info.rpo.size()); ++i)
    rpo_index[info.rpo[i]] = i;

  // Cooper-Harvey-Kennedy iterative dominators.
  info.idom[t.entry_block] = t.entry_block;
  bool changed = true;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rpo_index[a] > rpo_index[b]) a = info.idom[a];
      while (rpo_index[b] > rpo_index[a]) b = info.idom[b];
    }
    return a;
  };
  while (changed) {
    changed = false;
    for (int b : info.rpo) {
      if (b == t.entry_block) continue;
      int new_idom = -1;
      for (int p : info.preds[b]) {
        if (!info.reachable[p] || info.idom[p] == -1) continue;
        new_idom = new_idom == -1 ? p : intersect(new_idom, p);
      }
      if (new_idom != -1 && info.idom[b] != new_idom) {
        info.idom[b] = new_idom;
        changed = true;
      }
    }
  }
  info.idom[t.entry_block] = -1;

  // Backedges: target dominates source. A retreating edge that is not a
  // backedge makes the CFG irreducible.
  std::vector<Edge> retreating;
  {
    std::vector<int> color(n, 0);
    std::function<void(int)> dfs2 = [&](int b) {
      color[b] = 1;
      for (int s : info.succs[b]) {
        if (color[s] == 1) retreating.push_back({b, s});
        else if (color[s] == 0) dfs2(s);
      }
      color[b] = 2;
    };
    dfs2(t.entry_block);
  }
  for (int b = 0; b < n; ++b) {
    if (!info.reachable[b]) continue;
    for (int s : info.succs[b]) {
      auto dominates = [&](int a, int x) {
        while (x != -1 && x != a) x = info.idom[x];
        return x == a;
      };
      if (dominates(s, b)) info.backedges.push_back({b, s});
    }
  }
  for (const auto& e : retreating) {
    if (!info.is_backedge(e.first, e.second))
      throw IrreducibleCfgError(
          e, "irreducible CFG: retreating edge " + t.blocks[e.first].label +
                 " -> " + t.blocks[e.second].label +
                 " does not target a dominator of its source");
  }

  // Natural loops, one per header (backedges sharing a header are merged).
  std::map<int, NaturalLoop> by_header;
  for (const auto& [src, header] : info.backedges) {
    NaturalLoop& loop = by_header[header];
    loop.header = header;
    loop.header_backedges.push_back({src, header});
    loop.body.insert(header);
    // Reverse reachability from the backedge source, not passing the header.
    std::vector<int> work{src};
    while (!work.empty()) {
      int b = work.back();
      work.pop_back();
      if (loop.body.count(b)) continue;
      loop.body.insert(b);
      for (int p : info.preds[b])
        if (info.reachable[p]) work.push_back(p);
    }
  }
  for (auto& [header, loop] : by_header) {
    for (const auto& be : info.backedges) {
      if (be.second != header && loop.body.count(be.first) &&
          loop.body.count(be.second))
        loop.internal_backedges.push_back(be);
    }
    info.loops.push_back(std::move(loop));
  }
  std::sort(info.loops.begin(), info.loops.end(),
            [](const NaturalLoop& a, const NaturalLoop& b) {
              if (a.body.size() != b.body.size())
                return a.body.size() < b.body.size();
              return a.header < b.header;
            });
  return info;
}

} // namespace awaitmc
