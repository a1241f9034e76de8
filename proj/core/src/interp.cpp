#include "awaitmc/interp.hpp"

#include <algorithm>

namespace awaitmc {

namespace {

Value reg_value(const ThreadState& ts, const std::string& r) {
  auto it = ts.regs.find(r);
  return it == ts.regs.end() ? 0 : it->second;
}

Value operand_value(const ThreadState& ts, const Operand& op) {
  return op.is_reg ? reg_value(ts, op.reg) : op.value;
}

} // namespace

std::vector<int> Execution::schedule() const {
  std::vector<int> s;
  s.reserve(events.size());
  for (const auto& e : events) s.push_back(e.thread);
  return s;
}

Interpreter::Interpreter(const Program& p, InterpOptions opts)
    : prog_(p), opts_(opts) {
  const int n = static_cast<int>(prog_.threads.size());
  cfgs_.reserve(n);
  spawned_.assign(n, false);
  faa_dead_.resize(n);
  for (int t = 0; t < n; ++t) {
    const ThreadCfg& tc = prog_.threads[t];
    cfgs_.push_back(build_cfg_info(tc));
    faa_dead_[t].resize(tc.blocks.size());
    for (int b = 0; b < static_cast<int>(tc.blocks.size()); ++b) {
      const auto& stmts = tc.blocks[b].stmts;
      faa_dead_[t][b].assign(stmts.size(), false);
      for (int si = 0; si < static_cast<int>(stmts.size()); ++si) {
        const Statement& st = stmts[si];
        if (st.kind == Statement::Kind::Faa &&
            (st.reg.empty() || !tc.reg_used_elsewhere(st.reg, b, si)))
          faa_dead_[t][b][si] = true;
        if (st.kind == Statement::Kind::Spawn) spawned_[st.thread] = true;
      }
    }
  }
}

bool Interpreter::faa_dead(int thread, int block, int stmt) const {
  return faa_dead_[thread][block][stmt];
}

const Statement* Interpreter::cursor_stmt(const ExecState& s, int t) const {
  const ThreadState& ts = s.threads[t];
  if (ts.status != ThreadStatus::Runnable) return nullptr;
  return &prog_.threads[t].blocks[ts.block].stmts[ts.stmt];
}

void Interpreter::take_edge(ExecState& s, int t, int from, int to) const {
  ThreadState& ts = s.threads[t];
  const CfgInfo& cfg = cfgs_[t];
  const Edge edge{from, to};
  const bool is_back = cfg.is_backedge(from, to);
  if (is_back) {
    int c = ++ts.backedge_counts[edge];
    if (opts_.unroll > 0 && c > opts_.unroll) {
      ts.status = ThreadStatus::AssumeBlocked;
      ts.unroll_exceeded = true;
      return;
    }
  }

  // Resolve phis of the target block in parallel against the old registers.
  const BasicBlock& bb = prog_.threads[t].blocks[to];
  std::map<std::string, Value> phi_vals;
  for (const PhiNode& phi : bb.phis) {
    auto it = phi.sources.find(from);
    phi_vals[phi.target] = it == phi.sources.end() ? 0 : operand_value(ts, it->second);
  }
  for (const auto& [r, v] : phi_vals) ts.regs[r] = v;

  // Pure-iteration accounting.
  ts.loop_iters.resize(cfg.loops.size());
  for (int li = 0; li < static_cast<int>(cfg.loops.size()); ++li) {
    const NaturalLoop& loop = cfg.loops[li];
    ThreadState::LoopIter& rec = ts.loop_iters[li];
    const bool header_back =
        std::find(loop.header_backedges.begin(), loop.header_backedges.end(),
                  edge) != loop.header_backedges.end();
    const bool internal_back =
        std::find(loop.internal_backedges.begin(), loop.internal_backedges.end(),
                  edge) != loop.internal_backedges.end();
    if (internal_back && rec.active) rec.internal_backedge = true;
    if (to == loop.header && header_back) {
      // A header-to-header iteration just completed.
      if (rec.active && !rec.impure_write && !rec.internal_backedge &&
          rec.phi_values == phi_vals)
        s.pure_iterations++;
      rec.active = true;
      rec.impure_write = false;
      rec.internal_backedge = false;
      rec.phi_values = phi_vals;
    } else if (to == loop.header && !loop.body.count(from)) {
      rec.active = true;
      rec.impure_write = false;
      rec.internal_backedge = false;
      rec.phi_values = phi_vals;
    } else if (!loop.body.count(to)) {
      rec.active = false;
    }
  }
}

void Interpreter::settle(ExecState& s, int t) const {
  ThreadState& ts = s.threads[t];
  long folds = 0;
  while (ts.status == ThreadStatus::Runnable) {
    const BasicBlock& bb = prog_.threads[t].blocks[ts.block];
    if (ts.stmt < static_cast<int>(bb.stmts.size())) return;
    if (++folds > 1'000'000)
      throw InterpError("possible nontermination: control-flow folding limit");
    switch (bb.term.kind) {
      case Terminator::Kind::Exit:
        ts.status = ThreadStatus::Exited;
        return;
      case Terminator::Kind::Goto: {
        int to = bb.term.target;
        take_edge(s, t, ts.block, to);
        if (ts.status != ThreadStatus::Runnable) return;
        ts.block = to;
        ts.stmt = 0;
        break;
      }
      case Terminator::Kind::Branch: {
        Value c = eval_expr(bb.term.cond, ts.regs);
        int to = c != 0 ? bb.term.target : bb.term.target_false;
        take_edge(s, t, ts.block, to);
        if (ts.status != ThreadStatus::Runnable) return;
        ts.block = to;
        ts.stmt = 0;
        break;
      }
    }
  }
}

void Interpreter::activate_entry_loops(ExecState& s, int t) const {
  // A thread may begin execution directly at a loop header; the first
  // iteration must be tracked like any other for the purity detector.
  ThreadState& ts = s.threads[t];
  const CfgInfo& cfg = cfgs_[t];
  ts.loop_iters.resize(cfg.loops.size());
  for (int li = 0; li < static_cast<int>(cfg.loops.size()); ++li) {
    if (cfg.loops[li].header != ts.block) continue;
    ThreadState::LoopIter& rec = ts.loop_iters[li];
    rec.active = true;
    rec.impure_write = false;
    rec.internal_backedge = false;
    rec.phi_values.clear();
    for (const PhiNode& phi : prog_.threads[t].blocks[ts.block].phis)
      rec.phi_values[phi.target] = 0; // unassigned registers read as zero
  }
}

ExecState Interpreter::initial_state() const {
  ExecState s;
  for (const auto& [v, init] : prog_.shared_vars) s.memory[v] = init;
  s.threads.resize(prog_.threads.size());
  for (int t = 0; t < static_cast<int>(prog_.threads.size()); ++t) {
    ThreadState& ts = s.threads[t];
    ts.block = prog_.threads[t].entry_block;
    ts.stmt = 0;
    // Threads that are never spawned start immediately; spawn targets wait.
    if (t == prog_.entry_thread || !spawned_[t]) {
      ts.status = ThreadStatus::Runnable;
      activate_entry_loops(s, t);
      settle(s, t);
    }
  }
  return s;
}

bool Interpreter::is_enabled(const ExecState& s, int t) const {
  const Statement* st = cursor_stmt(s, t);
  if (!st) return false;
  const ThreadState& ts = s.threads[t];
  if (st->is_await_form())
    return apply_cmp(st->cmp, s.memory.at(st->var), operand_value(ts, st->cmp_rhs)) != 0;
  if (st->kind == Statement::Kind::Join)
    return s.threads[st->thread].status == ThreadStatus::Exited;
  return true;
}

std::vector<int> Interpreter::enabled(const ExecState& s) const {
  std::vector<int> out;
  for (int t = 0; t < static_cast<int>(s.threads.size()); ++t)
    if (is_enabled(s, t)) out.push_back(t);
  return out;
}

NextInfo Interpreter::next_info(const ExecState& s, int t) const {
  NextInfo n;
  n.stmt = cursor_stmt(s, t);
  if (n.stmt && n.stmt->kind == Statement::Kind::Faa)
    n.faa_result_dead = faa_dead_[t][s.threads[t].block][s.threads[t].stmt];
  return n;
}

bool Interpreter::is_complete(const ExecState& s) const {
  for (const auto& ts : s.threads)
    if (ts.status != ThreadStatus::Exited) return false;
  return true;
}

std::vector<std::pair<int, BlockReason>>
Interpreter::blocked_threads(const ExecState& s) const {
  std::vector<std::pair<int, BlockReason>> out;
  for (int t = 0; t < static_cast<int>(s.threads.size()); ++t) {
    const ThreadState& ts = s.threads[t];
    if (ts.status == ThreadStatus::Exited) continue;
    if (ts.status == ThreadStatus::NotStarted) {
      out.emplace_back(t, BlockReason::NotStarted);
    } else if (ts.status == ThreadStatus::AssumeBlocked) {
      out.emplace_back(t, ts.unroll_exceeded ? BlockReason::Unroll
                                             : BlockReason::Assume);
    } else if (!is_enabled(s, t)) {
      const Statement* st = cursor_stmt(s, t);
      out.emplace_back(t, st && st->kind == Statement::Kind::Join
                              ? BlockReason::Join
                              : BlockReason::Await);
    }
  }
  return out;
}

std::pair<ExecState, Event> Interpreter::step(const ExecState& s0, int t) const {
  if (!is_enabled(s0, t))
    throw InterpError("step of non-enabled thread " + std::to_string(t));
  ExecState s = s0;
  ThreadState& ts = s.threads[t];
  const Statement& st = prog_.threads[t].blocks[ts.block].stmts[ts.stmt];

  Event ev;
  ev.thread = t;
  ev.index = ++ts.events;
  ev.block = ts.block;
  ev.stmt = ts.stmt;
  ev.kind = st.kind;
  ev.other_thread = st.thread;

  auto touch_var = [&](bool write, Value new_val) {
    ev.var = st.var;
    ev.value_before = s.memory.at(st.var);
    ev.value_after = write ? new_val : ev.value_before;
    ev.performed_write = write;
    if (write) {
      s.memory[st.var] = new_val;
      for (auto& rec : ts.loop_iters)
        if (rec.active) rec.impure_write = true;
    }
  };

  bool advance = true;
  using K = Statement::Kind;
  switch (st.kind) {
    case K::Load:
      touch_var(false, 0);
      ev.result = ev.value_before;
      ts.regs[st.reg] = ev.result;
      break;
    case K::Store:
      touch_var(true, eval_expr(st.expr, ts.regs));
      break;
    case K::Faa: {
      Value old = s.memory.at(st.var);
      touch_var(true, old + eval_expr(st.expr, ts.regs));
      ev.result = old;
      ev.faa_result_dead = faa_dead_[t][ev.block][ev.stmt];
      if (!st.reg.empty()) ts.regs[st.reg] = old;
      break;
    }
    case K::Xchg: {
      Value old = s.memory.at(st.var);
      touch_var(true, eval_expr(st.expr, ts.regs));
      ev.result = old;
      ts.regs[st.reg] = old;
      break;
    }
    case K::CmpXchg: {
      Value old = s.memory.at(st.var);
      Value expected = eval_expr(st.expr, ts.regs);
      if (old == expected) {
        touch_var(true, eval_expr(st.expr2, ts.regs));
        ev.cmpxchg_success = true;
        ev.result = 1;
      } else {
        touch_var(false, 0);
        ev.result = 0;
      }
      ts.regs[st.reg] = ev.result;
      break;
    }
    case K::Assume:
      if (eval_expr(st.expr, ts.regs) == 0) {
        ev.assume_failed = true;
        ts.status = ThreadStatus::AssumeBlocked;
        advance = false;
      }
      break;
    case K::Assert:
      if (eval_expr(st.expr, ts.regs) == 0) ev.assert_failed = true;
      break;
    case K::Await:
      touch_var(false, 0);
      break;
    case K::LoadAwait:
      touch_var(false, 0);
      ev.result = ev.value_before;
      ts.regs[st.reg] = ev.result;
      break;
    case K::XchgAwait: {
      Value old = s.memory.at(st.var);
      touch_var(true, eval_expr(st.expr, ts.regs));
      ev.result = old;
      if (!st.reg.empty()) ts.regs[st.reg] = old;
      break;
    }
    case K::Assign:
      ev.result = eval_expr(st.expr, ts.regs);
      ts.regs[st.reg] = ev.result;
      break;
    case K::Spawn: {
      ThreadState& target = s.threads[st.thread];
      if (target.status == ThreadStatus::NotStarted) {
        target.status = ThreadStatus::Runnable;
        activate_entry_loops(s, st.thread);
        settle(s, st.thread);
      }
      break;
    }
    case K::Join:
      break;
  }

  s.total_events++;
  if (advance) {
    ts.stmt++;
    settle(s, t);
  }
  return {std::move(s), std::move(ev)};
}

Execution Interpreter::empty_execution() const {
  Execution e;
  e.end_state = initial_state();
  return e;
}

Execution Interpreter::extend(const Execution& e, int t) const {
  if (e.end_state.total_events >= opts_.max_steps)
    throw InterpError("possible nontermination: step budget exceeded");
  Execution out = e;
  auto [s, ev] = step(out.end_state, t);
  if (ev.assert_failed) out.assertion_failures.emplace_back(ev.thread, ev.index);
  out.events.push_back(std::move(ev));
  out.end_state = std::move(s);
  return out;
}

Execution Interpreter::replay(const std::vector<int>& schedule) const {
  Execution e = empty_execution();
  for (size_t i = 0; i < schedule.size(); ++i) {
    if (!is_enabled(e.end_state, schedule[i]))
      throw InterpError("schedule step " + std::to_string(i) + " not enabled (thread " +
                        std::to_string(schedule[i]) + ")");
    e = extend(e, schedule[i]);
  }
  return e;
}

Execution Interpreter::extend_maximal(Execution e) const {
  while (true) {
    auto en = enabled(e.end_state);
    if (en.empty()) return e;
    e = extend(e, en.front());
  }
}

} // namespace awaitmc
