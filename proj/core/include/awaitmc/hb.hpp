#ifndef AWAITMC_HB_HPP
#define AWAITMC_HB_HPP

#include "awaitmc/interp.hpp"
#include "awaitmc/ir.hpp"

#include <string>
#include <utility>
#include <vector>

namespace awaitmc {

struct ConflictPolicy {
  /// Treat fetch-and-add pairs on the same variable as independent when both
  /// result registers are dead.
  bool ifaa = false;
};

/// Event-level conflict: common shared variable, at least one write, minus the
/// fetch-and-add weakening. Spawn/join ordering is not a conflict; it is
/// handled by the program-order rule of happens-before.
bool conflicts(const Event& a, const Event& b, const ConflictPolicy& pol);

/// Conflict between a thread's next (not yet executed) statement and an event.
/// cmpxchg counts as a write since its success is unknown before execution.
bool conflicts_next(const NextInfo& next, const Event& e, const ConflictPolicy& pol);

/// True when `f` could change whether the blocking statement `blocked` is
/// enabled: a write to the awaited variable, or (for join) any event of the
/// joined thread.
bool may_affect_blocked(const Event& f, const Statement& blocked);

/// Happens-before over an event sequence, realized as per-event vector clocks.
/// Rules: program order / spawn / join within rule (i); conflicting shared
/// accesses within rule (ii).
class HbRelation {
public:
  HbRelation(const std::vector<Event>& events, int num_threads,
             const ConflictPolicy& pol);

  int size() const { return static_cast<int>(clocks_.size()); }
  /// Strict happens-before between event positions.
  bool happens_before(int i, int j) const;
  /// i happens-before j with no event in between in happens-before.
  bool adjacent(int i, int j) const;
  const std::vector<int>& clock(int i) const { return clocks_[i]; }

private:
  const std::vector<Event>* events_;
  std::vector<std::vector<int>> clocks_;
};

/// Canonical form of an execution's equivalence class: the sorted event set
/// plus the sorted transitive reduction of happens-before. Two executions are
/// equivalent iff their keys are equal.
std::string canonical_key(const std::vector<Event>& events, int num_threads,
                          const ConflictPolicy& pol);

bool equivalent(const Execution& a, const Execution& b, int num_threads,
                const ConflictPolicy& pol);

/// Non-blocking races of a maximal execution: pairs of event positions (i, j),
/// different threads, adjacent in happens-before, where the later event is not
/// itself a blocking statement (await form or join).
std::vector<std::pair<int, int>> non_blocking_races(const Execution& e,
                                                    int num_threads,
                                                    const ConflictPolicy& pol);

/// Prefix of `e` before event position `pos`.
Execution pre(const Interpreter& interp, const Execution& e, int pos);

/// Events of `e` after position `pos` that do not happen-after it, in order.
std::vector<Event> notafter(int pos, const Execution& e, int num_threads,
                            const ConflictPolicy& pol);

/// Weak initials of `w` after prefix `e`: threads that could equivalently be
/// scheduled first.
std::vector<int> weak_initials(const Interpreter& interp, const Execution& e,
                               const std::vector<Event>& w,
                               const ConflictPolicy& pol);

/// u is a happens-before prefix of w after e: some completion v makes e.u.v
/// equivalent to e.w.
bool hb_prefix(const Interpreter& interp, const Execution& e,
               const std::vector<Event>& u, const std::vector<Event>& w,
               const ConflictPolicy& pol);

} // namespace awaitmc

#endif
