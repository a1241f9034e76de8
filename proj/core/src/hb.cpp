#include "awaitmc/hb.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace awaitmc {

bool conflicts(const Event& a, const Event& b, const ConflictPolicy& pol) {
  if (a.var.empty() || a.var != b.var) return false;
  if (!a.performed_write && !b.performed_write) return false;
  if (pol.ifaa && a.kind == Statement::Kind::Faa &&
      b.kind == Statement::Kind::Faa && a.faa_result_dead && b.faa_result_dead)
    return false;
  return true;
}

bool conflicts_next(const NextInfo& next, const Event& e, const ConflictPolicy& pol) {
  if (!next.stmt) return false;
  auto var = next.stmt->accessed_var();
  if (!var || e.var != *var) return false;
  if (!next.stmt->may_write_var() && !e.performed_write) return false;
  if (pol.ifaa && next.stmt->kind == Statement::Kind::Faa &&
      e.kind == Statement::Kind::Faa && next.faa_result_dead && e.faa_result_dead)
    return false;
  return true;
}

bool may_affect_blocked(const Event& f, const Statement& blocked) {
  if (blocked.is_await_form())
    return f.performed_write && f.var == blocked.var;
  if (blocked.kind == Statement::Kind::Join) return f.thread == blocked.thread;
  return false;
}

HbRelation::HbRelation(const std::vector<Event>& events, int num_threads,
                       const ConflictPolicy& pol)
    : events_(&events) {
  clocks_.resize(events.size());
  std::vector<std::vector<int>> thread_clock(num_threads,
                                             std::vector<int>(num_threads, 0));
  std::vector<std::vector<int>> spawn_clock(num_threads);
  auto join_into = [](std::vector<int>& a, const std::vector<int>& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i], b[i]);
  };
  for (int i = 0; i < static_cast<int>(events.size()); ++i) {
    const Event& e = events[i];
    std::vector<int> clk = thread_clock[e.thread];
    if (e.index == 1 && !spawn_clock[e.thread].empty())
      join_into(clk, spawn_clock[e.thread]);
    if (e.kind == Statement::Kind::Join && e.other_thread >= 0)
      join_into(clk, thread_clock[e.other_thread]);
    for (int j = 0; j < i; ++j)
      if (conflicts(events[j], e, pol)) join_into(clk, clocks_[j]);
    clk[e.thread] = e.index;
    clocks_[i] = clk;
    thread_clock[e.thread] = std::move(clk);
    if (e.kind == Statement::Kind::Spawn && e.other_thread >= 0)
      spawn_clock[e.other_thread] = clocks_[i];
  }
}

bool HbRelation::happens_before(int i, int j) const {
  if (i == j) return false;
  const Event& a = (*events_)[i];
  return clocks_[j][a.thread] >= a.index && i < j;
}

bool HbRelation::adjacent(int i, int j) const {
  if (!happens_before(i, j)) return false;
  for (int k = i + 1; k < j; ++k)
    if (happens_before(i, k) && happens_before(k, j)) return false;
  return true;
}

std::string canonical_key(const std::vector<Event>& events, int num_threads,
                          const ConflictPolicy& pol) {
  HbRelation hb(events, num_threads, pol);
  std::set<std::pair<int, int>> dom;
  for (const Event& e : events) dom.insert({e.thread, e.index});
  std::set<std::array<int, 4>> edges;
  for (int i = 0; i < hb.size(); ++i)
    for (int j = i + 1; j < hb.size(); ++j)
      if (hb.adjacent(i, j))
        edges.insert({events[i].thread, events[i].index, events[j].thread,
                      events[j].index});
  std::ostringstream os;
  for (const auto& [t, idx] : dom) os << t << '.' << idx << ';';
  os << '|';
  for (const auto& e : edges)
    os << e[0] << '.' << e[1] << '>' << e[2] << '.' << e[3] << ';';
  return os.str();
}

bool equivalent(const Execution& a, const Execution& b, int num_threads,
                const ConflictPolicy& pol) {
  if (a.events.size() != b.events.size()) return false;
  return canonical_key(a.events, num_threads, pol) ==
         canonical_key(b.events, num_threads, pol);
}

std::vector<std::pair<int, int>> non_blocking_races(const Execution& e,
                                                    int num_threads,
                                                    const ConflictPolicy& pol) {
  HbRelation hb(e.events, num_threads, pol);
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < hb.size(); ++j) {
    const Event& later = e.events[j];
    // The later event must not itself be blockable by other threads.
    if (later.kind == Statement::Kind::Join) continue;
    if (later.kind == Statement::Kind::Await ||
        later.kind == Statement::Kind::LoadAwait ||
        later.kind == Statement::Kind::XchgAwait)
      continue;
    for (int i = 0; i < j; ++i)
      if (e.events[i].thread != later.thread && hb.adjacent(i, j))
        out.emplace_back(i, j);
  }
  return out;
}

Execution pre(const Interpreter& interp, const Execution& e, int pos) {
  std::vector<int> sched;
  sched.reserve(pos);
  for (int i = 0; i < pos; ++i) sched.push_back(e.events[i].thread);
  return interp.replay(sched);
}

std::vector<Event> notafter(int pos, const Execution& e, int num_threads,
                            const ConflictPolicy& pol) {
  HbRelation hb(e.events, num_threads, pol);
  std::vector<Event> out;
  for (int j = pos + 1; j < static_cast<int>(e.events.size()); ++j)
    if (!hb.happens_before(pos, j)) out.push_back(e.events[j]);
  return out;
}

std::vector<int> weak_initials(const Interpreter& interp, const Execution& e,
                               const std::vector<Event>& w,
                               const ConflictPolicy& pol) {
  const int num_threads = static_cast<int>(interp.program().threads.size());
  std::vector<Event> combined = e.events;
  combined.insert(combined.end(), w.begin(), w.end());
  HbRelation hb(combined, num_threads, pol);
  const int base = static_cast<int>(e.events.size());

  std::set<int> in_w;
  for (const Event& ev : w) in_w.insert(ev.thread);

  std::vector<int> out;
  for (int p = 0; p < num_threads; ++p) {
    if (in_w.count(p)) {
      int f = -1;
      for (int j = base; j < static_cast<int>(combined.size()); ++j)
        if (combined[j].thread == p) {
          f = j;
          break;
        }
      bool wi = true;
      for (int g = base; g < f && wi; ++g)
        if (hb.happens_before(g, f)) wi = false;
      if (wi) out.push_back(p);
    } else {
      if (!interp.is_enabled(e.end_state, p)) continue;
      NextInfo next = interp.next_info(e.end_state, p);
      bool wi = true;
      for (const Event& ev : w)
        if (conflicts_next(next, ev, pol)) {
          wi = false;
          break;
        }
      if (wi) out.push_back(p);
    }
  }
  return out;
}

bool hb_prefix(const Interpreter& interp, const Execution& e,
               const std::vector<Event>& u, const std::vector<Event>& w,
               const ConflictPolicy& pol) {
  std::set<std::pair<int, int>> wdom;
  for (const Event& ev : w) wdom.insert({ev.thread, ev.index});
  std::set<std::pair<int, int>> udom;
  for (const Event& ev : u) {
    if (!wdom.count({ev.thread, ev.index})) return false;
    udom.insert({ev.thread, ev.index});
  }
  std::vector<int> sched = e.schedule();
  for (const Event& ev : u) sched.push_back(ev.thread);
  for (const Event& ev : w)
    if (!udom.count({ev.thread, ev.index})) sched.push_back(ev.thread);
  Execution candidate;
  try {
    candidate = interp.replay(sched);
  } catch (const InterpError&) {
    return false;
  }
  const int num_threads = static_cast<int>(interp.program().threads.size());
  std::vector<Event> target = e.events;
  target.insert(target.end(), w.begin(), w.end());
  return canonical_key(candidate.events, num_threads, pol) ==
         canonical_key(target, num_threads, pol);
}

} // namespace awaitmc
