#include "awaitmc/explorer.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

namespace awaitmc {

bool wut_insert(const Interpreter& interp, const Execution& at, WutNode& wut,
                std::vector<Event> v, const ConflictPolicy& pol) {
  Execution u_exec = at;
  WutNode* node = &wut;
  while (true) {
    auto wi = weak_initials(interp, u_exec, v, pol);
    std::set<int> wiset(wi.begin(), wi.end());
    bool descended = false;
    for (auto& child : node->children) {
      int p = child->thread;
      if (!wiset.count(p)) continue;
      int first = -1;
      for (int k = 0; k < static_cast<int>(v.size()); ++k)
        if (v[k].thread == p) {
          first = k;
          break;
        }
      if (first == -1) return false; // v is redundant wrt. this branch
      v.erase(v.begin() + first);
      if (v.empty()) return false;
      u_exec = interp.extend(u_exec, p);
      node = child.get();
      if (node->is_leaf()) return false;
      descended = true;
      break;
    }
    if (descended) continue;
    // No child matched: graft the remainder as a new rightmost descendant.
    WutNode* cur = node;
    for (const Event& ev : v) {
      auto fresh = std::make_unique<WutNode>();
      fresh->thread = ev.thread;
      WutNode* next = fresh.get();
      cur->children.push_back(std::move(fresh));
      cur = next;
    }
    return true;
  }
}

namespace {

struct BudgetExceeded {};

/// A blocking statement instance e' = the `index`'th event of thread `q`,
/// expected at (block, stmt). Either still pending after E or executed in E.
struct BlockCandidate {
  int q = -1;
  int block = -1, stmt = -1;
  int index = 0;
  const Statement* st = nullptr;
  int eprime_depth = 0; // |E'| where E' precedes e'
};

class Explorer {
public:
  Explorer(const Program& p, const ExplorerOptions& opts)
      : interp_(p, InterpOptions{opts.unroll, opts.max_steps}),
        opts_(opts),
        nthreads_(static_cast<int>(p.threads.size())) {}

  ExplorationReport run() {
    auto root = std::make_unique<Entry>();
    root->exec = interp_.empty_execution();
    root_wut_ = std::make_unique<WutNode>();
    root->wut = root_wut_.get();
    stack_.push_back(std::move(root));
    try {
      explore();
    } catch (const BudgetExceeded&) {
      report_.incomplete = true;
    } catch (const InterpError&) {
      report_.incomplete = true;
    }
    if (opts_.collect_dot) build_dot();
    if (!opts_.keep_traces) report_.schedules.clear();
    return std::move(report_);
  }

private:
  struct Entry {
    Execution exec;
    WutNode* wut = nullptr;
    std::set<int> sleep;
  };

  void explore() {
    Entry& cur = *stack_.back();
    auto en = interp_.enabled(cur.exec.end_state);
    if (en.empty()) {
      on_maximal();
      return;
    }
    if (cur.wut->children.empty()) {
      auto fresh = std::make_unique<WutNode>();
      fresh->thread = en.front(); // lowest enabled thread id
      cur.wut->children.push_back(std::move(fresh));
    }
    while (!cur.wut->children.empty()) {
      WutNode* child = cur.wut->children.front().get();
      const int p = child->thread;
      if (opts_.use_sleep_sets && cur.sleep.count(p))
        throw InterpError("internal error: scheduled a sleeping thread");
      auto next = std::make_unique<Entry>();
      next->exec = interp_.extend(cur.exec, p);
      report_.events_stepped++;
      next->wut = child;
      for (int q : cur.sleep)
        if (independent_after(cur.exec.end_state, p, q)) next->sleep.insert(q);
      stack_.push_back(std::move(next));
      explore();
      stack_.pop_back();
      cur.sleep.insert(p);
      cur.wut->children.erase(cur.wut->children.begin());
    }
  }

  void on_maximal() {
    if (++executions_ > opts_.max_executions) throw BudgetExceeded{};
    const Execution& e = stack_.back()->exec;
    if (interp_.is_complete(e.end_state))
      report_.complete_count++;
    else
      report_.blocked_count++;
    report_.pure_iterations += e.end_state.pure_iterations;
    if (opts_.keep_traces || opts_.collect_dot)
      report_.schedules.push_back(e.schedule());
    if (!e.assertion_failures.empty())
      report_.assertion_failure_schedules.push_back(e.schedule());
    race_detection();
  }

  /// p's and q's next statements after `s` commute: no shared-variable
  /// conflict and neither controls the other via spawn/join.
  bool independent_after(const ExecState& s, int p, int q) const {
    NextInfo np = interp_.next_info(s, p);
    NextInfo nq = interp_.next_info(s, q);
    if (!np.stmt || !nq.stmt) return true;
    auto controls = [](const NextInfo& a, int other) {
      return (a.stmt->kind == Statement::Kind::Spawn ||
              a.stmt->kind == Statement::Kind::Join) &&
             a.stmt->thread == other;
    };
    if (controls(np, q) || controls(nq, p)) return false;
    auto va = np.stmt->accessed_var();
    auto vb = nq.stmt->accessed_var();
    if (!va || !vb || *va != *vb) return true;
    if (!np.stmt->may_write_var() && !nq.stmt->may_write_var()) return true;
    if (opts_.pol.ifaa && np.stmt->kind == Statement::Kind::Faa &&
        nq.stmt->kind == Statement::Kind::Faa && np.faa_result_dead &&
        nq.faa_result_dead)
      return true;
    return false;
  }

  /// Replays the prefix at `depth` extended by `tail`; returns the suffix
  /// events, or empty when the schedule is infeasible.
  std::vector<Event> make_v(int depth, const std::vector<int>& tail) {
    std::vector<int> sched = stack_[depth]->exec.schedule();
    sched.insert(sched.end(), tail.begin(), tail.end());
    try {
      Execution full = interp_.replay(sched);
      return std::vector<Event>(full.events.begin() + depth, full.events.end());
    } catch (const InterpError&) {
      return {};
    }
  }

  void try_insert(int depth, const std::vector<Event>& v) {
    if (v.empty()) return;
    Entry& at = *stack_[depth];
    if (opts_.use_sleep_sets) {
      auto wi = weak_initials(interp_, at.exec, v, opts_.pol);
      for (int p : wi)
        if (at.sleep.count(p)) return; // redundant wrt. an explored branch
    }
    if (wut_insert(interp_, at.exec, *at.wut, v, opts_.pol))
      report_.wut_insertions++;
  }

  bool candidate_enabled(const ExecState& s, const BlockCandidate& c) const {
    const ThreadState& ts = s.threads[c.q];
    return ts.status == ThreadStatus::Runnable && ts.block == c.block &&
           ts.stmt == c.stmt && ts.events == c.index - 1 &&
           interp_.is_enabled(s, c.q);
  }

  /// All maximal happens-before prefixes u of w (given as positions into E)
  /// after which the candidate is enabled, found by repeatedly removing one
  /// enabler event together with everything that happens-after it.
  std::vector<std::vector<Event>> enumerate_enabling(int e_depth,
                                                     const std::vector<int>& wpos,
                                                     const HbRelation& hbE,
                                                     const BlockCandidate& c) {
    const Execution& E = stack_.back()->exec;
    const std::vector<int> base = stack_[e_depth]->exec.schedule();
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> found;

    std::function<void(const std::vector<int>&)> rec =
        [&](const std::vector<int>& u) {
          if (!seen.insert(u).second) return;
          std::vector<int> sched = base;
          for (int pos : u) sched.push_back(E.events[pos].thread);
          Execution pref;
          try {
            pref = interp_.replay(sched);
          } catch (const InterpError&) {
            return;
          }
          if (candidate_enabled(pref.end_state, c)) {
            found.push_back(u);
            return; // stop: removing more cannot yield a larger prefix
          }
          for (int k = 0; k < static_cast<int>(u.size()); ++k) {
            if (!may_affect_blocked(E.events[u[k]], *c.st)) continue;
            std::vector<int> u2;
            for (int m = 0; m < static_cast<int>(u.size()); ++m)
              if (m != k && !hbE.happens_before(u[k], u[m]))
                u2.push_back(u[m]);
            rec(u2);
          }
        };
    rec(wpos);

    // Keep only genuine happens-before prefixes of w, maximal by containment.
    const Execution& epp = stack_[e_depth]->exec;
    std::vector<Event> wev;
    for (int pos : wpos) wev.push_back(E.events[pos]);
    std::vector<std::vector<int>> kept;
    for (auto& u : found) {
      std::vector<Event> uev;
      for (int pos : u) uev.push_back(E.events[pos]);
      if (hb_prefix(interp_, epp, uev, wev, opts_.pol)) kept.push_back(u);
    }
    std::vector<std::vector<Event>> out;
    for (size_t i = 0; i < kept.size(); ++i) {
      bool maximal = true;
      for (size_t j = 0; j < kept.size() && maximal; ++j) {
        if (i == j || kept[j].size() <= kept[i].size()) continue;
        std::set<int> dj(kept[j].begin(), kept[j].end());
        bool subset = true;
        for (int pos : kept[i])
          if (!dj.count(pos)) subset = false;
        if (subset) maximal = false;
      }
      if (!maximal) continue;
      std::vector<Event> uev;
      for (int pos : kept[i]) uev.push_back(E.events[pos]);
      out.push_back(std::move(uev));
    }
    return out;
  }

  void race_detection() {
    const Execution& E = stack_.back()->exec;
    const int n = static_cast<int>(E.events.size());

    // Non-blocking races, in (earlier, later) lexicographic order.
    auto races = non_blocking_races(E, nthreads_, opts_.pol);
    std::sort(races.begin(), races.end());
    for (auto [i, j] : races) {
      report_.races_processed++;
      auto w = notafter(i, E, nthreads_, opts_.pol);
      std::vector<int> tail;
      for (const Event& ev : w) tail.push_back(ev.thread);
      tail.push_back(E.events[j].thread);
      try_insert(i, make_v(i, tail));
    }

    // Blocking candidates: threads blocked right now first, then blockable
    // events of E in execution order.
    std::vector<BlockCandidate> cands;
    for (auto [t, reason] : interp_.blocked_threads(E.end_state)) {
      if (reason != BlockReason::Await && reason != BlockReason::Join) continue;
      const ThreadState& ts = E.end_state.threads[t];
      BlockCandidate c;
      c.q = t;
      c.block = ts.block;
      c.stmt = ts.stmt;
      c.index = ts.events + 1;
      c.st = &interp_.program().threads[t].blocks[ts.block].stmts[ts.stmt];
      c.eprime_depth = n;
      cands.push_back(c);
    }
    for (int pos = 0; pos < n; ++pos) {
      const Event& ev = E.events[pos];
      if (ev.kind != Statement::Kind::Await &&
          ev.kind != Statement::Kind::LoadAwait &&
          ev.kind != Statement::Kind::XchgAwait &&
          ev.kind != Statement::Kind::Join)
        continue;
      BlockCandidate c;
      c.q = ev.thread;
      c.block = ev.block;
      c.stmt = ev.stmt;
      c.index = ev.index;
      c.st = &interp_.program().threads[ev.thread].blocks[ev.block].stmts[ev.stmt];
      c.eprime_depth = pos;
      cands.push_back(c);
    }

    HbRelation hbE(E.events, nthreads_, opts_.pol);
    for (const BlockCandidate& c : cands) {
      std::vector<int> affecting;
      for (int k = 0; k < n; ++k)
        if (may_affect_blocked(E.events[k], *c.st)) affecting.push_back(k);
      bool can_stop = false;
      for (int e_pos = c.eprime_depth - 1; e_pos >= 0; --e_pos) {
        if (!may_affect_blocked(E.events[e_pos], *c.st)) continue;
        report_.races_processed++;
        bool cs = true;
        for (int k : affecting)
          if (k != e_pos && !conflicts(E.events[e_pos], E.events[k], opts_.pol))
            cs = false;
        if (cs) can_stop = true;
        std::vector<int> wpos;
        for (int j = e_pos + 1; j < n; ++j)
          if (!hbE.happens_before(e_pos, j)) wpos.push_back(j);
        bool did_insert = false;
        for (const auto& u : enumerate_enabling(e_pos, wpos, hbE, c)) {
          did_insert = true;
          std::vector<int> tail;
          for (const Event& ev : u) tail.push_back(ev.thread);
          tail.push_back(c.q);
          try_insert(e_pos, make_v(e_pos, tail));
        }
        if (can_stop && did_insert) break;
      }
    }
  }

  void build_dot() {
    std::ostringstream os;
    os << "digraph exploration {\n  rankdir=TB;\n  n0 [label=\"\"];\n";
    std::map<std::pair<int, int>, int> trie; // (node, thread) -> node
    int next_id = 1;
    for (const auto& sched : report_.schedules) {
      int node = 0;
      for (int t : sched) {
        auto key = std::make_pair(node, t);
        auto it = trie.find(key);
        if (it == trie.end()) {
          int fresh = next_id++;
          os << "  n" << fresh << " [label=\"\"];\n";
          os << "  n" << node << " -> n" << fresh << " [label=\""
             << interp_.program().threads[t].name << "\"];\n";
          it = trie.emplace(key, fresh).first;
        }
        node = it->second;
      }
    }
    os << "}\n";
    report_.dot = os.str();
  }

  Interpreter interp_;
  ExplorerOptions opts_;
  int nthreads_;
  long executions_ = 0;
  std::vector<std::unique_ptr<Entry>> stack_;
  std::unique_ptr<WutNode> root_wut_;
  ExplorationReport report_;
};

} // namespace

ExplorationReport explore(const Program& p, const ExplorerOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  Explorer ex(p, opts);
  ExplorationReport rep = ex.run();
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

} // namespace awaitmc
