#ifndef AWAITMC_INTERP_HPP
#define AWAITMC_INTERP_HPP

#include "awaitmc/cfg.hpp"
#include "awaitmc/ir.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace awaitmc {

/// One executed statement with the values it observed. (thread, index) uniquely
/// identifies the event within an execution; everything needed to decide
/// conflicts is recorded so no re-execution is required.
struct Event {
  int thread = -1;
  int index = 0; // 1-based per-thread sequence number
  int block = -1;
  int stmt = -1;
  Statement::Kind kind = Statement::Kind::Assign;
  std::string var;              // accessed shared variable, empty if none
  bool performed_write = false; // an actual write happened (cmpxchg success etc.)
  Value value_before = 0;       // shared variable value before the event
  Value value_after = 0;        // shared variable value after the event
  Value result = 0;             // register result, if the statement has one
  bool cmpxchg_success = false;
  bool faa_result_dead = false; // fetch-and-add whose result register is never read
  bool assume_failed = false;
  bool assert_failed = false;
  int other_thread = -1; // spawn/join target
};

enum class ThreadStatus { NotStarted, Runnable, AssumeBlocked, Exited };

/// Why a non-exited thread cannot currently run.
enum class BlockReason { NotStarted, Assume, Await, Join, Unroll };

struct ThreadState {
  ThreadStatus status = ThreadStatus::NotStarted;
  int block = 0;
  int stmt = 0; // cursor: index of the next statement within `block`
  std::map<std::string, Value> regs;
  std::map<Edge, int> backedge_counts;
  int events = 0; // events emitted so far by this thread
  bool unroll_exceeded = false;

  /// Per-loop bookkeeping for the pure-iteration detector.
  struct LoopIter {
    bool active = false;
    bool impure_write = false;     // a shared write was performed this iteration
    bool internal_backedge = false;
    std::map<std::string, Value> phi_values; // header phi targets at entry
  };
  std::vector<LoopIter> loop_iters; // indexed like CfgInfo::loops
};

/// Full interpreter state; a plain value, freely copyable.
struct ExecState {
  std::map<std::string, Value> memory;
  std::vector<ThreadState> threads;
  long total_events = 0;
  long pure_iterations = 0; // completed pure loop iterations observed so far
};

struct Execution {
  std::vector<Event> events;
  ExecState end_state;
  std::vector<std::pair<int, int>> assertion_failures; // (thread, index)

  std::vector<int> schedule() const; // thread ids in order
};

struct InterpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InterpOptions {
  int unroll = 0;              // 0 = unbounded; else max traversals per backedge
  long max_steps = 1'000'000;  // events per execution before "possible nontermination"
};

/// Peek at the statement a thread would execute next.
struct NextInfo {
  const Statement* stmt = nullptr; // null when the thread cannot execute again
  bool faa_result_dead = false;
};

/// Sequentially consistent interpreter over a fixed program. Stepping is pure
/// (state in, state out), so executions can be replayed on parallel host
/// threads without shared mutable state.
class Interpreter {
public:
  explicit Interpreter(const Program& p, InterpOptions opts = {});

  const Program& program() const { return prog_; }
  const InterpOptions& options() const { return opts_; }
  const CfgInfo& cfg(int thread) const { return cfgs_[thread]; }

  ExecState initial_state() const;

  /// Threads whose next statement is executable now: await forms iff the
  /// predicate holds on memory, join iff the target exited; assume-blocked
  /// and exited threads never appear.
  std::vector<int> enabled(const ExecState& s) const;
  bool is_enabled(const ExecState& s, int t) const;

  NextInfo next_info(const ExecState& s, int t) const;

  /// Executes exactly one statement of `t` atomically. Throws InterpError if
  /// `t` is not enabled.
  std::pair<ExecState, Event> step(const ExecState& s, int t) const;

  Execution empty_execution() const;
  Execution extend(const Execution& e, int t) const;
  Execution replay(const std::vector<int>& schedule) const;

  /// Extends to a maximal execution, taking the lowest enabled thread id at
  /// each step; deterministic.
  Execution extend_maximal(Execution e) const;

  bool is_maximal(const ExecState& s) const { return enabled(s).empty(); }
  /// All threads exited (no blocked thread remains).
  bool is_complete(const ExecState& s) const;
  std::vector<std::pair<int, BlockReason>> blocked_threads(const ExecState& s) const;

  /// True for fetch-and-add statements whose result register is never read.
  bool faa_dead(int thread, int block, int stmt) const;

private:
  const Statement* cursor_stmt(const ExecState& s, int t) const;
  /// Advances past phis/terminators until the cursor rests on a statement or
  /// the thread exits/blocks. Performs backedge counting, unroll bounding, and
  /// pure-iteration accounting.
  void settle(ExecState& s, int t) const;
  void take_edge(ExecState& s, int t, int from, int to) const;
  /// Starts pure-iteration tracking when a thread begins at a loop header.
  void activate_entry_loops(ExecState& s, int t) const;

  Program prog_;
  InterpOptions opts_;
  std::vector<CfgInfo> cfgs_;
  std::vector<bool> spawned_; // thread is the target of some spawn statement
  std::vector<std::vector<std::vector<bool>>> faa_dead_; // [thread][block][stmt]
};

} // namespace awaitmc

#endif
